//! Timed trajectories: a fixed waypoint path plus the time stamps at which
//! each waypoint is reached.
//!
//! Velocities live on segments (`N - 1` of them for `N` waypoints). A pause is
//! a repeated waypoint with a strictly later stamp, so every segment has a
//! positive duration and a well-defined velocity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Configuration vector, one entry per joint (radians).
pub type Config = Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathJson", into = "PathJson")]
pub struct Path {
    waypoints: Vec<Config>,
}

#[derive(Serialize, Deserialize)]
struct PathJson {
    waypoints: Vec<Config>,
}

impl TryFrom<PathJson> for Path {
    type Error = Error;
    fn try_from(raw: PathJson) -> Result<Self> {
        Path::new(raw.waypoints)
    }
}

impl From<Path> for PathJson {
    fn from(p: Path) -> Self {
        PathJson { waypoints: p.waypoints }
    }
}

impl Path {
    pub fn new(waypoints: Vec<Config>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::TooShort {
                min: 2,
                got: waypoints.len(),
            });
        }
        let dim = waypoints[0].len();
        if dim == 0 {
            return Err(Error::invalid("waypoints must have at least one joint"));
        }
        for (i, w) in waypoints.iter().enumerate() {
            if w.len() != dim {
                return Err(Error::invalid(format!(
                    "waypoint {i} has dimension {}, expected {dim}",
                    w.len()
                )));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("waypoint {i} is not finite")));
            }
        }
        Ok(Path { waypoints })
    }

    /// Evenly spaced straight line from `start` to `end` with `count` waypoints.
    pub fn straight_line(start: &[f64], end: &[f64], count: usize) -> Result<Self> {
        if start.len() != end.len() {
            return Err(Error::DimensionMismatch {
                expected: start.len(),
                got: end.len(),
            });
        }
        if count < 2 {
            return Err(Error::TooShort { min: 2, got: count });
        }
        let last = (count - 1) as f64;
        let waypoints = (0..count)
            .map(|i| {
                let s = i as f64 / last;
                start.iter().zip(end).map(|(a, b)| a + s * (b - a)).collect()
            })
            .collect();
        Path::new(waypoints)
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.waypoints[0].len()
    }

    pub fn waypoints(&self) -> &[Config] {
        &self.waypoints
    }

    pub fn waypoint(&self, i: usize) -> &[f64] {
        &self.waypoints[i]
    }

    /// Euclidean length of each segment in configuration space.
    pub fn segment_lengths(&self) -> Vec<f64> {
        self.waypoints.windows(2).map(|w| norm(&sub(&w[1], &w[0]))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    stamps: Vec<f64>,
}

impl Timing {
    pub fn new(stamps: Vec<f64>) -> Result<Self> {
        if stamps.len() < 2 {
            return Err(Error::TooShort {
                min: 2,
                got: stamps.len(),
            });
        }
        if stamps[0] != 0.0 {
            return Err(Error::invalid(format!("first stamp must be 0, got {}", stamps[0])));
        }
        for (i, w) in stamps.windows(2).enumerate() {
            if !w[1].is_finite() || w[1] <= w[0] {
                return Err(Error::invalid(format!(
                    "stamps must be strictly increasing: stamp {} ({}) <= stamp {} ({})",
                    i + 1,
                    w[1],
                    i,
                    w[0]
                )));
            }
        }
        Ok(Timing { stamps })
    }

    /// Stamps from cumulative sums of positive segment durations, starting at 0.
    pub fn from_durations(durations: &[f64]) -> Result<Self> {
        let mut stamps = Vec::with_capacity(durations.len() + 1);
        let mut t = 0.0;
        stamps.push(t);
        for &d in durations {
            t += d;
            stamps.push(t);
        }
        Timing::new(stamps)
    }

    pub fn stamps(&self) -> &[f64] {
        &self.stamps
    }

    pub fn len(&self) -> usize {
        self.stamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamps.is_empty()
    }

    pub fn total(&self) -> f64 {
        *self.stamps.last().expect("timing has at least two stamps")
    }

    pub fn durations(&self) -> Vec<f64> {
        self.stamps.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryJson", into = "TrajectoryJson")]
pub struct TimedTrajectory {
    path: Path,
    timing: Timing,
}

/// On-disk trajectory format.
#[derive(Serialize, Deserialize)]
pub struct TrajectoryJson {
    pub waypoints: Vec<Config>,
    pub stamps: Vec<f64>,
}

impl TryFrom<TrajectoryJson> for TimedTrajectory {
    type Error = Error;
    fn try_from(raw: TrajectoryJson) -> Result<Self> {
        TimedTrajectory::new(Path::new(raw.waypoints)?, Timing::new(raw.stamps)?)
    }
}

impl From<TimedTrajectory> for TrajectoryJson {
    fn from(t: TimedTrajectory) -> Self {
        TrajectoryJson {
            waypoints: t.path.waypoints,
            stamps: t.timing.stamps,
        }
    }
}

impl TimedTrajectory {
    pub fn new(path: Path, timing: Timing) -> Result<Self> {
        if path.len() != timing.len() {
            return Err(Error::invalid(format!(
                "path has {} waypoints but timing has {} stamps",
                path.len(),
                timing.len()
            )));
        }
        Ok(TimedTrajectory { path, timing })
    }

    pub fn from_parts(waypoints: Vec<Config>, stamps: Vec<f64>) -> Result<Self> {
        TimedTrajectory::new(Path::new(waypoints)?, Timing::new(stamps)?)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn timing(&self) -> &Timing {
        &self.timing
    }

    pub fn stamps(&self) -> &[f64] {
        self.timing.stamps()
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    /// `T_N`, the time the final waypoint is reached.
    pub fn total_duration(&self) -> f64 {
        self.timing.total()
    }

    pub fn segment_durations(&self) -> Vec<f64> {
        self.timing.durations()
    }

    /// `v_i = (q_{i+1} - q_i) / (T_{i+1} - T_i)` for every segment.
    pub fn segment_velocities(&self) -> Vec<Config> {
        let stamps = self.timing.stamps();
        self.path
            .waypoints()
            .windows(2)
            .zip(stamps.windows(2))
            .map(|(q, t)| {
                let dt = t[1] - t[0];
                q[1].iter().zip(&q[0]).map(|(b, a)| (b - a) / dt).collect()
            })
            .collect()
    }

    pub fn segment_speeds(&self) -> Vec<f64> {
        self.segment_velocities().iter().map(|v| norm(v)).collect()
    }

    /// Unitless second difference of consecutive segment velocities,
    /// `J_i = v_{i+1} + v_{i-1} - 2 v_i`, for each interior segment.
    pub fn jerk_sequence(&self) -> Result<Vec<Config>> {
        if self.len() < 4 {
            return Err(Error::TooShort {
                min: 4,
                got: self.len(),
            });
        }
        let v = self.segment_velocities();
        Ok(v.windows(3)
            .map(|w| (0..w[1].len()).map(|j| w[2][j] + w[0][j] - 2.0 * w[1][j]).collect())
            .collect())
    }

    /// Duplicates the waypoint at `at_waypoint` and delays everything after it
    /// by `duration`, adding one zero-velocity segment.
    pub fn insert_pause(&self, at_waypoint: usize, duration: f64) -> Result<Self> {
        let n = self.len();
        if at_waypoint >= n {
            return Err(Error::IndexOutOfRange {
                index: at_waypoint,
                len: n,
            });
        }
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::invalid(format!(
                "pause duration must be positive, got {duration}"
            )));
        }
        let mut waypoints = self.path.waypoints().to_vec();
        waypoints.insert(at_waypoint + 1, waypoints[at_waypoint].clone());

        let old = self.timing.stamps();
        let mut stamps = Vec::with_capacity(n + 1);
        stamps.extend_from_slice(&old[..=at_waypoint]);
        stamps.push(old[at_waypoint] + duration);
        stamps.extend(old[at_waypoint + 1..].iter().map(|t| t + duration));
        TimedTrajectory::from_parts(waypoints, stamps)
    }

    /// Inverse of [`insert_pause`](Self::insert_pause): drops the repeated
    /// waypoint after `at_waypoint` and pulls later stamps back by the pause.
    pub fn remove_pause(&self, at_waypoint: usize) -> Result<Self> {
        let n = self.len();
        if at_waypoint + 1 >= n {
            return Err(Error::IndexOutOfRange {
                index: at_waypoint,
                len: n,
            });
        }
        let wp = self.path.waypoints();
        if wp[at_waypoint] != wp[at_waypoint + 1] {
            return Err(Error::invalid(format!(
                "no pause segment starts at waypoint {at_waypoint}"
            )));
        }
        let old = self.timing.stamps();
        let pause = old[at_waypoint + 1] - old[at_waypoint];
        let mut waypoints = wp.to_vec();
        waypoints.remove(at_waypoint + 1);
        let mut stamps = Vec::with_capacity(n - 1);
        stamps.extend_from_slice(&old[..=at_waypoint]);
        stamps.extend(old[at_waypoint + 2..].iter().map(|t| t - pause));
        TimedTrajectory::from_parts(waypoints, stamps)
    }

    /// Multiplies every stamp by `factor`.
    pub fn time_scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::invalid(format!("time scale must be positive, got {factor}")));
        }
        let stamps = self.timing.stamps().iter().map(|t| t * factor).collect();
        TimedTrajectory::new(self.path.clone(), Timing::new(stamps)?)
    }
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
