//! Timing synthesis: pick the timing of a fixed path that maximizes the
//! posterior probability of a target hidden state.
//!
//! The search space is a lattice. Every segment (including optional pause
//! segments at interior waypoints) lasts `min_segment_duration + u * step`
//! for an integer `u >= 0`, and the total must fall in
//! `[min_total_duration, max_total_duration]`. In normalized mode the
//! likelihood's partition function is taken over this same lattice, so
//! different constraints give different optima.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{posterior_from_costs, LikelihoodMode, ModelConfig};
use crate::trajectory::{Path, TimedTrajectory, Timing};

/// Tolerance for comparing lattice totals against the duration bounds.
const BOUND_EPS: f64 = 1e-9;

/// Minimum posterior gain for a coordinate move.
pub const DESCENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConstraints {
    pub min_total_duration: f64,
    pub max_total_duration: f64,
    pub min_segment_duration: f64,
    /// Upper bound on any single segment, pauses included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_segment_duration: Option<f64>,
    pub step: f64,
    #[serde(default)]
    pub max_pause_count: usize,
    /// Largest candidate set that exhaustive search will materialize.
    #[serde(default = "default_cap")]
    pub cap: usize,
}

fn default_cap() -> usize {
    10_000
}

impl OptimizeConstraints {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Infeasible(format!("{name} must be positive, got {v}")))
            }
        };
        pos("min_segment_duration", self.min_segment_duration)?;
        pos("step", self.step)?;
        pos("max_total_duration", self.max_total_duration)?;
        if !(self.min_total_duration >= 0.0) {
            return Err(Error::Infeasible(format!(
                "min_total_duration must be non-negative, got {}",
                self.min_total_duration
            )));
        }
        if let Some(m) = self.max_segment_duration {
            if !(m >= self.min_segment_duration) || !m.is_finite() {
                return Err(Error::Infeasible(format!(
                    "max_segment_duration {m} is below min_segment_duration {}",
                    self.min_segment_duration
                )));
            }
        }
        if self.min_total_duration > self.max_total_duration {
            return Err(Error::Infeasible(format!(
                "min_total_duration {} exceeds max_total_duration {}",
                self.min_total_duration, self.max_total_duration
            )));
        }
        Ok(())
    }

    /// Bounds on the summed lattice indices of `segments` segments, if any
    /// assignment fits.
    fn unit_bounds(&self, segments: usize) -> Option<(u64, u64)> {
        let base = segments as f64 * self.min_segment_duration;
        let hi = ((self.max_total_duration - base) / self.step + BOUND_EPS).floor();
        if hi < 0.0 {
            return None;
        }
        let lo = ((self.min_total_duration - base) / self.step - BOUND_EPS)
            .ceil()
            .max(0.0);
        if lo > hi {
            return None;
        }
        Some((lo as u64, hi as u64))
    }

    /// Largest lattice index of a single segment given `hi` for the sum.
    fn unit_cap(&self, hi: u64) -> u64 {
        match self.max_segment_duration {
            Some(m) => (((m - self.min_segment_duration) / self.step + BOUND_EPS).floor() as u64).min(hi),
            None => hi,
        }
    }

    fn duration(&self, unit: u64) -> f64 {
        self.min_segment_duration + unit as f64 * self.step
    }
}

/// A point of the timing lattice: which interior waypoints get a pause and
/// the lattice index of every segment, path segments first, then pauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub pauses: Vec<usize>,
    pub units: Vec<u64>,
}

/// Segment durations of the path plus inserted pauses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingParam {
    pub segment_durations: Vec<f64>,
    /// `(waypoint index, duration)` of each pause.
    pub pauses: Vec<(usize, f64)>,
}

impl TimingParam {
    /// Builds the timed trajectory, duplicating each paused waypoint.
    pub fn to_trajectory(&self, path: &Path) -> Result<TimedTrajectory> {
        if self.segment_durations.len() + 1 != path.len() {
            return Err(Error::invalid(format!(
                "{} segment durations for a path of {} waypoints",
                self.segment_durations.len(),
                path.len()
            )));
        }
        let mut waypoints = Vec::with_capacity(path.len() + self.pauses.len());
        let mut durations = Vec::with_capacity(path.len() + self.pauses.len());
        for i in 0..path.len() {
            waypoints.push(path.waypoint(i).to_vec());
            for &(_, d) in self.pauses.iter().filter(|(w, _)| *w == i) {
                waypoints.push(path.waypoint(i).to_vec());
                durations.push(d);
            }
            if i + 1 < path.len() {
                durations.push(self.segment_durations[i]);
            }
        }
        TimedTrajectory::new(Path::new(waypoints)?, Timing::from_durations(&durations)?)
    }
}

impl Candidate {
    pub fn to_param(&self, c: &OptimizeConstraints) -> TimingParam {
        let n = self.units.len() - self.pauses.len();
        TimingParam {
            segment_durations: self.units[..n].iter().map(|&u| c.duration(u)).collect(),
            pauses: self
                .pauses
                .iter()
                .zip(&self.units[n..])
                .map(|(&w, &u)| (w, c.duration(u)))
                .collect(),
        }
    }

    pub fn to_trajectory(&self, path: &Path, c: &OptimizeConstraints) -> Result<TimedTrajectory> {
        self.to_param(c).to_trajectory(path)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Number of `m`-vectors with entries in `[0, cap]` and sum in `[lo, hi]`.
fn count_compositions(m: usize, cap: u64, lo: u64, hi: u64) -> u128 {
    let hi = hi as usize;
    let cap = cap as usize;
    // ways[s]: vectors of the current length summing to s
    let mut ways = vec![0u128; hi + 1];
    ways[0] = 1;
    for _ in 0..m {
        let mut prefix = vec![0u128; hi + 2];
        for s in 0..=hi {
            prefix[s + 1] = prefix[s].saturating_add(ways[s]);
        }
        for s in 0..=hi {
            let from = s.saturating_sub(cap);
            ways[s] = prefix[s + 1] - prefix[from];
        }
    }
    ways[lo as usize..=hi].iter().fold(0u128, |a, w| a.saturating_add(*w))
}

/// Calls `f` on every `m`-vector with entries in `[0, cap]` and sum in
/// `[lo, hi]`, lexicographically.
fn visit_compositions(m: usize, cap: u64, lo: u64, hi: u64, f: &mut dyn FnMut(&[u64]) -> Result<()>) -> Result<()> {
    struct Bounds {
        cap: u64,
        lo: u64,
        hi: u64,
    }
    fn rec(buf: &mut [u64], pos: usize, sum: u64, b: &Bounds, f: &mut dyn FnMut(&[u64]) -> Result<()>) -> Result<()> {
        let remaining = (buf.len() - pos - 1) as u64;
        // the rest can add at most remaining * cap
        let from = b.lo.saturating_sub(sum + remaining * b.cap);
        let to = b.cap.min(b.hi - sum);
        if from > to {
            return Ok(());
        }
        for u in from..=to {
            buf[pos] = u;
            if remaining == 0 {
                f(buf)?;
            } else {
                rec(buf, pos + 1, sum + u, b, f)?;
            }
        }
        Ok(())
    }
    let mut buf = vec![0u64; m];
    rec(&mut buf, 0, 0, &Bounds { cap, lo, hi }, f)
}

/// Calls `f` on every `k`-subset of `items`, lexicographically.
fn visit_subsets(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    fn rec(
        items: &[usize],
        start: usize,
        buf: &mut Vec<usize>,
        k: usize,
        f: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if buf.len() == k {
            return f(buf);
        }
        for i in start..items.len() {
            buf.push(items[i]);
            rec(items, i + 1, buf, k, f)?;
            buf.pop();
        }
        Ok(())
    }
    rec(items, 0, &mut Vec::with_capacity(k), k, f)
}

fn interior_waypoints(path: &Path) -> Vec<usize> {
    (1..path.len().saturating_sub(1)).collect()
}

/// Size of the feasible lattice, computed without enumerating it.
pub fn count_timings(path: &Path, c: &OptimizeConstraints) -> Result<u128> {
    c.validate()?;
    let n = path.len() - 1;
    let interior = interior_waypoints(path).len();
    let mut total: u128 = 0;
    for k in 0..=c.max_pause_count.min(interior) {
        if let Some((lo, hi)) = c.unit_bounds(n + k) {
            let per = count_compositions(n + k, c.unit_cap(hi), lo, hi);
            total = total.saturating_add(binomial(interior, k).saturating_mul(per));
        }
    }
    Ok(total)
}

/// Streams every feasible candidate in enumeration order: pause count, then
/// pause placement, then segment indices.
pub fn visit_timings(path: &Path, c: &OptimizeConstraints, f: &mut dyn FnMut(Candidate) -> Result<()>) -> Result<()> {
    c.validate()?;
    let n = path.len() - 1;
    let interior = interior_waypoints(path);
    for k in 0..=c.max_pause_count.min(interior.len()) {
        let Some((lo, hi)) = c.unit_bounds(n + k) else {
            continue;
        };
        visit_subsets(&interior, k, &mut |pauses| {
            visit_compositions(n + k, c.unit_cap(hi), lo, hi, &mut |units| {
                f(Candidate {
                    pauses: pauses.to_vec(),
                    units: units.to_vec(),
                })
            })
        })?;
    }
    Ok(())
}

/// Every feasible lattice timing, in deterministic order. Fails when the set
/// is empty or larger than `c.cap`.
pub fn enumerate_timings(path: &Path, c: &OptimizeConstraints) -> Result<Vec<Candidate>> {
    let count = count_timings(path, c)?;
    if count == 0 {
        return Err(Error::Infeasible("no timing satisfies the constraints".into()));
    }
    if count > c.cap as u128 {
        return Err(Error::CapExceeded { count, cap: c.cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    visit_timings(path, c, &mut |cand| {
        out.push(cand);
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    CoordinateDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub target: String,
    pub mode: SearchMode,
    pub likelihood_mode: LikelihoodMode,
    pub constraints: OptimizeConstraints,
    pub best_timing: TimedTrajectory,
    pub best_timing_param: TimingParam,
    pub posterior: f64,
    pub candidates_evaluated: u64,
    /// True when the result is only known to be a coordinate-wise optimum.
    pub local_optimum: bool,
    pub wall_time_s: Option<f64>,
}

/// Running `ln(sum(exp(x)))`.
#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

struct Scorer<'a> {
    cfg: &'a ModelConfig,
    path: &'a Path,
    constraints: &'a OptimizeConstraints,
    target: usize,
    log_z: Vec<f64>,
}

impl Scorer<'_> {
    fn costs(&self, traj: &TimedTrajectory) -> Result<Vec<f64>> {
        self.cfg
            .support
            .values()
            .iter()
            .map(|th| self.cfg.model.cost(traj, th.value))
            .collect()
    }

    fn score_costs(&self, costs: &[f64]) -> Result<f64> {
        let p = posterior_from_costs(costs, &self.log_z, self.cfg.model.lambda(), &self.cfg.support)?;
        Ok(p.probabilities()[self.target])
    }

    fn score(&self, cand: &Candidate) -> Result<f64> {
        let traj = cand.to_trajectory(self.path, self.constraints)?;
        self.score_costs(&self.costs(&traj)?)
    }
}

fn log_partitions(cfg: &ModelConfig, costs: &[Vec<f64>]) -> Vec<f64> {
    let lambda = cfg.model.lambda();
    let mut acc = vec![LogSumExp::new(); cfg.support.len()];
    for row in costs {
        for (a, c) in acc.iter_mut().zip(row) {
            a.push(-lambda * c);
        }
    }
    acc.iter().map(LogSumExp::value).collect()
}

/// Timing of `path` maximizing the posterior of the state labelled `target`.
pub fn optimize(
    path: &Path,
    cfg: &ModelConfig,
    target: &str,
    constraints: &OptimizeConstraints,
    mode: SearchMode,
) -> Result<OptimizeReport> {
    cfg.validate()?;
    constraints.validate()?;
    let target_idx = cfg.support.index_of(target)?;
    let mut scorer = Scorer {
        cfg,
        path,
        constraints,
        target: target_idx,
        log_z: vec![0.0; cfg.support.len()],
    };

    let (best, posterior, evaluated, local) = match mode {
        SearchMode::Exhaustive => {
            let cands = enumerate_timings(path, constraints)?;
            let costs = cands
                .par_iter()
                .map(|c| scorer.costs(&c.to_trajectory(path, constraints)?))
                .collect::<Result<Vec<_>>>()?;
            if cfg.mode == LikelihoodMode::Normalized {
                scorer.log_z = log_partitions(cfg, &costs);
            }
            let scores = costs
                .par_iter()
                .map(|c| scorer.score_costs(c))
                .collect::<Result<Vec<_>>>()?;
            let mut bi = 0;
            for (i, s) in scores.iter().enumerate() {
                if *s > scores[bi] {
                    bi = i;
                }
            }
            let evaluated = cands.len() as u64;
            (
                cands.into_iter().nth(bi).expect("non-empty"),
                scores[bi],
                evaluated,
                false,
            )
        }
        SearchMode::CoordinateDescent => {
            if cfg.mode == LikelihoodMode::Normalized {
                let mut acc = vec![LogSumExp::new(); cfg.support.len()];
                let lambda = cfg.model.lambda();
                visit_timings(path, constraints, &mut |cand| {
                    let costs = scorer.costs(&cand.to_trajectory(path, constraints)?)?;
                    for (a, c) in acc.iter_mut().zip(&costs) {
                        a.push(-lambda * c);
                    }
                    Ok(())
                })?;
                scorer.log_z = acc.iter().map(LogSumExp::value).collect();
                if scorer.log_z.iter().any(|z| !z.is_finite()) {
                    return Err(Error::Infeasible("no timing satisfies the constraints".into()));
                }
            }
            coordinate_descent(path, constraints, &scorer)?
        }
    };

    let best_timing = best.to_trajectory(path, constraints)?;
    Ok(OptimizeReport {
        target: target.to_string(),
        mode,
        likelihood_mode: cfg.mode,
        constraints: constraints.clone(),
        best_timing_param: best.to_param(constraints),
        best_timing,
        posterior,
        candidates_evaluated: evaluated,
        local_optimum: local,
        wall_time_s: None,
    })
}

/// Cyclic single-coordinate search over pause-free timings, starting from
/// the most uniform feasible timing.
fn coordinate_descent(
    path: &Path,
    c: &OptimizeConstraints,
    scorer: &Scorer<'_>,
) -> Result<(Candidate, f64, u64, bool)> {
    let n = path.len() - 1;
    let (lo, hi) = c
        .unit_bounds(n)
        .ok_or_else(|| Error::Infeasible("no pause-free timing satisfies the constraints".into()))?;
    let cap = c.unit_cap(hi);
    let u0 = lo.div_ceil(n as u64);
    let mut units = if u0 * n as u64 <= hi && u0 <= cap {
        vec![u0; n]
    } else {
        let mut first = None;
        visit_compositions(n, cap, lo, hi, &mut |u| {
            if first.is_none() {
                first = Some(u.to_vec());
            }
            Ok(())
        })?;
        first.ok_or_else(|| Error::Infeasible("no pause-free timing satisfies the constraints".into()))?
    };
    let mut cand = Candidate {
        pauses: vec![],
        units: units.clone(),
    };
    let mut current = scorer.score(&cand)?;
    let mut evaluated = 1u64;

    loop {
        let mut moved = false;
        for i in 0..n {
            let others: u64 = units.iter().sum::<u64>() - units[i];
            let (from, to) = (lo.saturating_sub(others), cap.min(hi - others));
            let mut best = (units[i], current);
            for u in from..=to {
                if u == units[i] {
                    continue;
                }
                let mut trial = units.clone();
                trial[i] = u;
                let s = scorer.score(&Candidate {
                    pauses: vec![],
                    units: trial,
                })?;
                evaluated += 1;
                if s > best.1 {
                    best = (u, s);
                }
            }
            if best.1 > current + DESCENT_TOL {
                units[i] = best.0;
                current = best.1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    cand.units = units;
    Ok((cand, current, evaluated, true))
}
