//! Forward kinematics for serial arms described by standard link parameters.
//!
//! Each joint contributes `Rz(q + theta_offset) * Tz(offset) * Tx(length) * Rx(twist)`.
//! Only the end-effector position is used; orientation is ignored.

use std::path::Path as FsPath;

use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::TimedTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    /// Link length along the common normal (m).
    pub length: f64,
    /// Link twist about the common normal (rad).
    pub twist: f64,
    /// Link offset along the joint axis (m).
    pub offset: f64,
    /// Constant added to the joint angle (rad).
    pub theta_offset: f64,
}

impl Joint {
    fn transform(&self, q: f64) -> Matrix4<f64> {
        let (st, ct) = (q + self.theta_offset).sin_cos();
        let (sa, ca) = self.twist.sin_cos();
        Matrix4::new(
            ct,
            -st * ca,
            st * sa,
            self.length * ct,
            st,
            ct * ca,
            -ct * sa,
            self.length * st,
            0.0,
            sa,
            ca,
            self.offset,
            0.0,
            0.0,
            0.0,
            1.0,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KinematicChain {
    Serial(Vec<Joint>),
    /// Zero-padded embedding of a 1-3 DOF configuration into 3-space.
    Identity {
        identity_dof: usize,
    },
}

impl KinematicChain {
    pub fn serial(joints: Vec<Joint>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::invalid("kinematic chain needs at least one joint"));
        }
        Ok(KinematicChain::Serial(joints))
    }

    pub fn identity(dof: usize) -> Result<Self> {
        if !(1..=3).contains(&dof) {
            return Err(Error::invalid(format!("identity chain supports 1 to 3 DOF, got {dof}")));
        }
        Ok(KinematicChain::Identity { identity_dof: dof })
    }

    /// Reads a JSON array of `{length, twist, offset, theta_offset}` joints.
    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let joints: Vec<Joint> = serde_json::from_str(&text)?;
        KinematicChain::serial(joints)
    }

    pub fn dof(&self) -> usize {
        match self {
            KinematicChain::Serial(j) => j.len(),
            KinematicChain::Identity { identity_dof } => *identity_dof,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KinematicChain::Serial(j) if j.is_empty() => {
                Err(Error::invalid("kinematic chain needs at least one joint"))
            }
            KinematicChain::Identity { identity_dof } => KinematicChain::identity(*identity_dof).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Vector3<f64>> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                got: q.len(),
            });
        }
        Ok(match self {
            KinematicChain::Serial(joints) => {
                let t = joints
                    .iter()
                    .zip(q)
                    .fold(Matrix4::identity(), |acc, (j, &qi)| acc * j.transform(qi));
                Vector3::new(t[(0, 3)], t[(1, 3)], t[(2, 3)])
            }
            KinematicChain::Identity { .. } => {
                let mut p = Vector3::zeros();
                for (i, &qi) in q.iter().enumerate() {
                    p[i] = qi;
                }
                p
            }
        })
    }

    /// Finite-difference end-effector velocity on every segment.
    pub fn ee_velocities(&self, traj: &TimedTrajectory) -> Result<Vec<Vector3<f64>>> {
        let positions = traj
            .path()
            .waypoints()
            .iter()
            .map(|q| self.forward_kinematics(q))
            .collect::<Result<Vec<_>>>()?;
        Ok(positions
            .windows(2)
            .zip(traj.stamps().windows(2))
            .map(|(p, t)| (p[1] - p[0]) / (t[1] - t[0]))
            .collect())
    }

    /// Upper bound on `|phi(q)|` over all configurations.
    pub fn reach_bound(&self) -> f64 {
        match self {
            KinematicChain::Serial(j) => j.iter().map(|j| j.length.abs() + j.offset.abs()).sum(),
            KinematicChain::Identity { .. } => f64::INFINITY,
        }
    }
}
