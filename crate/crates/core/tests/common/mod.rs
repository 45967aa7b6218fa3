//! Independent loop-based reference implementations and random generators
//! shared by the integration tests. Nothing here calls the library's own
//! cost or kinematics code.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timing_inference::trajectory::TimedTrajectory;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random trajectory with `n` waypoints in `d` dimensions; roughly one in
/// five segments repeats its waypoint (a pause).
pub fn random_traj(rng: &mut impl Rng, n: usize, d: usize) -> TimedTrajectory {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 && rng.gen_bool(0.2) {
            q.push(q[i - 1].clone());
        } else {
            q.push((0..d).map(|_| rng.gen_range(-1.5..1.5)).collect());
        }
    }
    let mut t = vec![0.0];
    for _ in 1..n {
        let last = *t.last().unwrap();
        t.push(last + rng.gen_range(0.05..2.0));
    }
    TimedTrajectory::from_parts(q, t).unwrap()
}

pub fn random_shape(rng: &mut impl Rng) -> (usize, usize) {
    (rng.gen_range(4..=14), rng.gen_range(1..=3))
}

/// Same path, fresh random stamps.
pub fn retimed(rng: &mut impl Rng, traj: &TimedTrajectory) -> TimedTrajectory {
    let mut t = vec![0.0];
    for _ in 1..traj.len() {
        let last = *t.last().unwrap();
        t.push(last + rng.gen_range(0.05..2.0));
    }
    TimedTrajectory::from_parts(traj.path().waypoints().to_vec(), t).unwrap()
}

pub fn fd_velocities(q: &[Vec<f64>], t: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..q.len() - 1 {
        let dt = t[i + 1] - t[i];
        let mut v = Vec::new();
        for j in 0..q[i].len() {
            v.push((q[i + 1][j] - q[i][j]) / dt);
        }
        out.push(v);
    }
    out
}

pub fn euclid(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x * x;
    }
    s.sqrt()
}

pub fn second_differences(v: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 1..v.len() - 1 {
        let mut j = Vec::new();
        for c in 0..v[i].len() {
            j.push(v[i + 1][c] + v[i - 1][c] - 2.0 * v[i][c]);
        }
        out.push(j);
    }
    out
}

fn parts(traj: &TimedTrajectory) -> (Vec<Vec<f64>>, Vec<f64>) {
    (traj.path().waypoints().to_vec(), traj.stamps().to_vec())
}

/// Final precision with velocity-weighted observations.
pub fn oracle_tau_f(traj: &TimedTrajectory, tau0: f64, tau_obs: f64, r: f64) -> f64 {
    let (q, t) = parts(traj);
    let v = fd_velocities(&q, &t);
    let mut tau = tau0;
    for i in 0..v.len() {
        tau += (t[i + 1] - t[i]) * tau_obs / (1.0 + r * euclid(&v[i]));
    }
    tau
}

pub fn oracle_confidence_cost(traj: &TimedTrajectory, tau0: f64, tau_obs: f64, r: f64, k: f64) -> f64 {
    k * traj.stamps()[traj.len() - 1] + 1.0 / oracle_tau_f(traj, tau0, tau_obs, r)
}

/// Planar arm end point: x = sum l_i cos(q_1 + .. + q_i), y likewise.
pub fn planar_fk(lengths: &[f64], q: &[f64]) -> [f64; 3] {
    let (mut x, mut y, mut a) = (0.0, 0.0, 0.0);
    for (l, qi) in lengths.iter().zip(q) {
        a += qi;
        x += l * a.cos();
        y += l * a.sin();
    }
    [x, y, 0.0]
}

/// Identity embedding of up to three joints.
pub fn identity_fk(q: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[..q.len()].copy_from_slice(q);
    p
}

pub fn oracle_momentum(traj: &TimedTrajectory, fk: &dyn Fn(&[f64]) -> [f64; 3]) -> f64 {
    let (q, t) = parts(traj);
    let mut s = 0.0;
    for i in 0..q.len() - 1 {
        let a = fk(&q[i]);
        let b = fk(&q[i + 1]);
        let dt = t[i + 1] - t[i];
        let v = [(b[0] - a[0]) / dt, (b[1] - a[1]) / dt, (b[2] - a[2]) / dt];
        s += euclid(&v);
    }
    s
}

pub fn oracle_weight_cost(traj: &TimedTrajectory, fk: &dyn Fn(&[f64]) -> [f64; 3], mass: f64, k: f64) -> f64 {
    k * traj.stamps()[traj.len() - 1] + mass * oracle_momentum(traj, fk)
}

pub fn oracle_jerk_sq(traj: &TimedTrajectory) -> f64 {
    let (q, t) = parts(traj);
    let mut s = 0.0;
    for j in second_differences(&fd_velocities(&q, &t)) {
        let n = euclid(&j);
        s += n * n;
    }
    s
}

pub fn oracle_naturalness_cost(traj: &TimedTrajectory, k: f64) -> f64 {
    k * traj.stamps()[traj.len() - 1] + oracle_jerk_sq(traj)
}

/// Plain log-sum-exp, shifted by the maximum.
pub fn oracle_lse(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    let mut s = 0.0;
    for &x in xs {
        s += (x - m).exp();
    }
    m + s.ln()
}

/// Bayes over states: `weights[j] = exp(log_w[j])` normalized.
pub fn oracle_normalize(log_w: &[f64]) -> Vec<f64> {
    let z = oracle_lse(log_w);
    log_w.iter().map(|w| (w - z).exp()).collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
