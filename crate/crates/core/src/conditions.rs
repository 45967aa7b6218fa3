//! Factorial timing conditions over a fixed path: overall speed (2 levels),
//! speed-change pattern (5 levels) and pause (2 levels), 20 in total.
//!
//! Speed changes are piecewise-constant phases with the step happening at a
//! single waypoint. A pause duplicates one interior waypoint.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Config, Path, TimedTrajectory, Timing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpeedLevel {
    Slow,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChangePattern {
    None,
    StoF,
    FtoS,
    StoFtoS,
    FtoStoF,
}

impl ChangePattern {
    pub const ALL: [ChangePattern; 5] = [
        ChangePattern::None,
        ChangePattern::StoF,
        ChangePattern::FtoS,
        ChangePattern::StoFtoS,
        ChangePattern::FtoStoF,
    ];

    fn as_str(self) -> &'static str {
        match self {
            ChangePattern::None => "none",
            ChangePattern::StoF => "StoF",
            ChangePattern::FtoS => "FtoS",
            ChangePattern::StoFtoS => "StoFtoS",
            ChangePattern::FtoStoF => "FtoStoF",
        }
    }

    /// Phase sequence, `true` meaning the fast phase.
    fn phases(self) -> &'static [bool] {
        match self {
            ChangePattern::None => &[false],
            ChangePattern::StoF => &[false, true],
            ChangePattern::FtoS => &[true, false],
            ChangePattern::StoFtoS => &[false, true, false],
            ChangePattern::FtoStoF => &[true, false, true],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConditionSpec {
    pub speed: SpeedLevel,
    pub pattern: ChangePattern,
    pub pause: bool,
}

impl ConditionSpec {
    pub fn new(speed: SpeedLevel, pattern: ChangePattern, pause: bool) -> Self {
        ConditionSpec { speed, pattern, pause }
    }

    /// All 20 specs in canonical order (speed, then pattern, then pause).
    pub fn all() -> Vec<ConditionSpec> {
        let mut out = Vec::with_capacity(20);
        for speed in [SpeedLevel::Slow, SpeedLevel::Fast] {
            for pattern in ChangePattern::ALL {
                for pause in [false, true] {
                    out.push(ConditionSpec::new(speed, pattern, pause));
                }
            }
        }
        out
    }

    /// A balanced eight-condition subset: speed x pause, each with constant
    /// speed and with a slow-to-fast change. Every speed or pause group has the
    /// same composition of the other factors, so group means compare like
    /// with like.
    pub fn experiment_set() -> Vec<ConditionSpec> {
        let mut out = Vec::with_capacity(8);
        for speed in [SpeedLevel::Slow, SpeedLevel::Fast] {
            for pattern in [ChangePattern::None, ChangePattern::StoF] {
                for pause in [false, true] {
                    out.push(ConditionSpec::new(speed, pattern, pause));
                }
            }
        }
        out
    }

    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConditionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let speed = match self.speed {
            SpeedLevel::Slow => "slow",
            SpeedLevel::Fast => "fast",
        };
        let pause = if self.pause { "pause" } else { "nopause" };
        write!(f, "{speed}_{}_{pause}", self.pattern.as_str())
    }
}

impl FromStr for ConditionSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ConditionSpec::all()
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::invalid(format!("unknown condition id '{s}'")))
    }
}

impl Serialize for ConditionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for ConditionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub path: Path,
    pub slow_duration: f64,
    pub fast_duration: f64,
    /// Fast-phase speed divided by slow-phase speed within a change pattern.
    pub speed_ratio: f64,
    pub pause_duration: f64,
    /// Fraction of the path at which the pause happens, in (0, 1).
    pub pause_location: f64,
    /// Shrink the moving time of paused conditions so their total duration
    /// matches the unpaused counterpart.
    pub hold_total_duration: bool,
}

pub const DEFAULT_WAYPOINTS: usize = 30;

impl GeneratorParams {
    /// 30-waypoint straight line in a 3-DOF configuration space.
    pub fn default_path() -> Path {
        Path::straight_line(&[0.0, 0.0, 0.0], &[1.2, -0.6, 0.9], DEFAULT_WAYPOINTS).expect("default path is valid")
    }

    pub fn with_path(path: Path) -> Self {
        GeneratorParams {
            path,
            slow_duration: 8.0,
            fast_duration: 4.0,
            speed_ratio: 2.0,
            pause_duration: 2.0,
            pause_location: 0.5,
            hold_total_duration: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        pos("slow_duration", self.slow_duration)?;
        pos("fast_duration", self.fast_duration)?;
        pos("pause_duration", self.pause_duration)?;
        if self.fast_duration >= self.slow_duration {
            return Err(Error::invalid(format!(
                "fast_duration ({}) must be less than slow_duration ({})",
                self.fast_duration, self.slow_duration
            )));
        }
        if !(self.speed_ratio > 1.0) || !self.speed_ratio.is_finite() {
            return Err(Error::invalid(format!(
                "speed_ratio must exceed 1, got {}",
                self.speed_ratio
            )));
        }
        if !(self.pause_location > 0.0 && self.pause_location < 1.0) {
            return Err(Error::invalid(format!(
                "pause_location must lie in (0, 1), got {}",
                self.pause_location
            )));
        }
        if self.hold_total_duration && self.pause_duration >= self.fast_duration {
            return Err(Error::invalid(format!(
                "pause_duration ({}) must be shorter than fast_duration ({}) when holding total duration",
                self.pause_duration, self.fast_duration
            )));
        }
        if self.path.len() < 8 {
            return Err(Error::TooShort {
                min: 8,
                got: self.path.len(),
            });
        }
        if self.path.segment_lengths().contains(&0.0) {
            return Err(Error::invalid("generator path must not contain repeated waypoints"));
        }
        Ok(())
    }

    /// Interior waypoint the pause is inserted after.
    pub fn pause_waypoint(&self) -> Result<usize> {
        let last = self.path.len() - 1;
        let idx = (self.pause_location * last as f64).round() as usize;
        if idx == 0 || idx >= last {
            return Err(Error::invalid(format!(
                "pause_location {} does not resolve to an interior waypoint",
                self.pause_location
            )));
        }
        Ok(idx)
    }
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams::with_path(GeneratorParams::default_path())
    }
}

/// JSON form of [`GeneratorParams`]; every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoints: Option<Vec<Config>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slow_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pause_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pause_location: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_total_duration: Option<bool>,
}

impl GeneratorConfig {
    pub fn resolve(&self) -> Result<GeneratorParams> {
        let path = match &self.waypoints {
            Some(w) => Path::new(w.clone())?,
            None => GeneratorParams::default_path(),
        };
        let mut p = GeneratorParams::with_path(path);
        if let Some(v) = self.slow_duration {
            p.slow_duration = v;
        }
        if let Some(v) = self.fast_duration {
            p.fast_duration = v;
        }
        if let Some(v) = self.speed_ratio {
            p.speed_ratio = v;
        }
        if let Some(v) = self.pause_duration {
            p.pause_duration = v;
        }
        if let Some(v) = self.pause_location {
            p.pause_location = v;
        }
        if let Some(v) = self.hold_total_duration {
            p.hold_total_duration = v;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn from_params(p: &GeneratorParams) -> Self {
        GeneratorConfig {
            waypoints: Some(p.path.waypoints().to_vec()),
            slow_duration: Some(p.slow_duration),
            fast_duration: Some(p.fast_duration),
            speed_ratio: Some(p.speed_ratio),
            pause_duration: Some(p.pause_duration),
            pause_location: Some(p.pause_location),
            hold_total_duration: Some(p.hold_total_duration),
        }
    }
}

/// Splits `n` segments into `phases` contiguous runs of near-equal size and
/// returns the phase index of every segment.
fn phase_of_segments(n: usize, phases: usize) -> Vec<usize> {
    (0..n).map(|i| i * phases / n).collect()
}

pub fn generate_condition(spec: ConditionSpec, params: &GeneratorParams) -> Result<TimedTrajectory> {
    params.validate()?;
    let duration = match spec.speed {
        SpeedLevel::Slow => params.slow_duration,
        SpeedLevel::Fast => params.fast_duration,
    };
    let moving = if spec.pause && params.hold_total_duration {
        duration - params.pause_duration
    } else {
        duration
    };

    let lengths = params.path.segment_lengths();
    let phases = spec.pattern.phases();
    let phase_idx = phase_of_segments(lengths.len(), phases.len());
    let raw: Vec<f64> = lengths
        .iter()
        .zip(&phase_idx)
        .map(|(d, &p)| {
            let rel_speed = if phases[p] { params.speed_ratio } else { 1.0 };
            d / rel_speed
        })
        .collect();
    let scale = moving / raw.iter().sum::<f64>();
    let durations: Vec<f64> = raw.iter().map(|t| t * scale).collect();

    let traj = TimedTrajectory::new(params.path.clone(), Timing::from_durations(&durations)?)?;
    if spec.pause {
        traj.insert_pause(params.pause_waypoint()?, params.pause_duration)
    } else {
        Ok(traj)
    }
}

pub fn generate_all(params: &GeneratorParams) -> Result<BTreeMap<ConditionSpec, TimedTrajectory>> {
    generate_set(&ConditionSpec::all(), params)
}

pub fn generate_set(
    specs: &[ConditionSpec],
    params: &GeneratorParams,
) -> Result<BTreeMap<ConditionSpec, TimedTrajectory>> {
    specs.iter().map(|&s| Ok((s, generate_condition(s, params)?))).collect()
}

/// Writes `condition,index,t,speed` rows: one per waypoint, where the speed is
/// that of the segment leaving the waypoint and the final waypoint carries 0.
pub fn export_velocity_profiles<'a, I, W>(conditions: I, out: W) -> Result<()>
where
    I: IntoIterator<Item = (String, &'a TimedTrajectory)>,
    W: Write,
{
    let mut wtr = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::invalid(format!("writing profiles: {e}"));
    wtr.write_record(["condition", "index", "t", "speed"])
        .map_err(csv_err)?;
    let mut rows = 0usize;
    for (id, traj) in conditions {
        let speeds = traj.segment_speeds();
        for (i, t) in traj.stamps().iter().enumerate() {
            let speed = speeds.get(i).copied().unwrap_or(0.0);
            wtr.write_record([id.clone(), i.to_string(), t.to_string(), speed.to_string()])
                .map_err(csv_err)?;
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::invalid("no conditions to export"));
    }
    wtr.flush()
        .map_err(|e| Error::invalid(format!("writing profiles: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    /// Counts (strict rises, strict drops) between consecutive moving segments.
    fn steps(speeds: &[f64]) -> (usize, usize) {
        let moving: Vec<f64> = speeds.iter().copied().filter(|s| *s > 0.0).collect();
        let mut up = 0;
        let mut down = 0;
        for w in moving.windows(2) {
            if w[1] > w[0] + EPS {
                up += 1;
            } else if w[1] < w[0] - EPS {
                down += 1;
            }
        }
        (up, down)
    }

    #[test]
    fn ids_round_trip() {
        let all = ConditionSpec::all();
        assert_eq!(all.len(), 20);
        for c in &all {
            assert_eq!(c.id().parse::<ConditionSpec>().unwrap(), *c);
        }
        assert_eq!(all[0].id(), "slow_none_nopause");
        assert!("medium_none_pause".parse::<ConditionSpec>().is_err());
    }

    #[test]
    fn slow_none_is_constant_speed() {
        let p = GeneratorParams::default();
        let tr = generate_condition("slow_none_nopause".parse().unwrap(), &p).unwrap();
        let s = tr.segment_speeds();
        assert!(s.iter().all(|v| (v - s[0]).abs() < EPS));
        assert!((tr.total_duration() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn fast_ftos_has_one_drop() {
        let p = GeneratorParams::default();
        let tr = generate_condition("fast_FtoS_nopause".parse().unwrap(), &p).unwrap();
        assert_eq!(steps(&tr.segment_speeds()), (0, 1));
        assert!((tr.total_duration() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pattern_shapes() {
        let p = GeneratorParams::default();
        let shape = |id: &str| steps(&generate_condition(id.parse().unwrap(), &p).unwrap().segment_speeds());
        assert_eq!(shape("slow_StoF_nopause"), (1, 0));
        assert_eq!(shape("slow_StoFtoS_nopause"), (1, 1));
        assert_eq!(shape("fast_FtoStoF_nopause"), (1, 1));
        let s = generate_condition("fast_FtoStoF_nopause".parse().unwrap(), &p)
            .unwrap()
            .segment_speeds();
        assert!(s[0] > s[s.len() / 2]);
    }

    #[test]
    fn pause_is_one_zero_block_and_removable() {
        let p = GeneratorParams::default();
        let paused = generate_condition("slow_none_pause".parse().unwrap(), &p).unwrap();
        let plain = generate_condition("slow_none_nopause".parse().unwrap(), &p).unwrap();
        let zero_runs = paused
            .segment_speeds()
            .windows(2)
            .filter(|w| w[0] != 0.0 && w[1] == 0.0)
            .count();
        assert_eq!(zero_runs, 1);
        let restored = paused.remove_pause(p.pause_waypoint().unwrap()).unwrap();
        assert_eq!(restored.path(), plain.path());
        for (a, b) in restored.stamps().iter().zip(plain.stamps()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((paused.total_duration() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn hold_total_duration_matches_unpaused() {
        let p = GeneratorParams {
            hold_total_duration: true,
            ..GeneratorParams::default()
        };
        let all = generate_all(&p).unwrap();
        for (spec, tr) in &all {
            let twin = &all[&ConditionSpec::new(spec.speed, spec.pattern, !spec.pause)];
            assert!((tr.total_duration() - twin.total_duration()).abs() < 1e-12);
        }
    }

    #[test]
    fn generate_all_properties() {
        let p = GeneratorParams::default();
        let all = generate_all(&p).unwrap();
        assert_eq!(all.len(), 20);
        let timings: Vec<_> = all.values().map(|t| t.stamps().to_vec()).collect();
        for i in 0..timings.len() {
            for j in i + 1..timings.len() {
                assert_ne!(timings[i], timings[j]);
            }
        }
        for (spec, tr) in &all {
            let has_zero = tr.segment_speeds().contains(&0.0);
            assert_eq!(has_zero, spec.pause, "{spec}");
            if spec.speed == SpeedLevel::Fast {
                let slow = &all[&ConditionSpec::new(SpeedLevel::Slow, spec.pattern, spec.pause)];
                assert!(tr.total_duration() < slow.total_duration());
                // pointwise dominance at equal path fraction
                for (f, s) in tr.segment_speeds().iter().zip(slow.segment_speeds()) {
                    assert!(*f >= s);
                }
            }
        }
        assert_eq!(generate_all(&p).unwrap(), all);
    }

    #[test]
    fn generator_errors() {
        let short = Path::straight_line(&[0.0], &[1.0], 7).unwrap();
        assert!(matches!(
            generate_condition(ConditionSpec::all()[0], &GeneratorParams::with_path(short)),
            Err(Error::TooShort { min: 8, .. })
        ));
        let p = GeneratorParams {
            pause_location: 0.01,
            ..GeneratorParams::default()
        };
        assert!(generate_condition("slow_none_pause".parse().unwrap(), &p).is_err());
        let p = GeneratorParams {
            fast_duration: 9.0,
            ..GeneratorParams::default()
        };
        assert!(p.validate().is_err());
        let p = GeneratorParams {
            speed_ratio: 1.0,
            ..GeneratorParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn profiles_csv() {
        let p = GeneratorParams::default();
        let specs: Vec<ConditionSpec> = vec![
            "slow_none_nopause".parse().unwrap(),
            "fast_StoFtoS_nopause".parse().unwrap(),
            "slow_none_pause".parse().unwrap(),
        ];
        let set = generate_set(&specs, &p).unwrap();
        let mut buf = Vec::new();
        export_velocity_profiles(set.iter().map(|(s, t)| (s.id(), t)), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("condition,index,t,speed"));
        let rows: Vec<(String, f64)> = lines
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].to_string(), f[3].parse().unwrap())
            })
            .collect();
        let speeds = |id: &str| -> Vec<f64> {
            let v: Vec<f64> = rows.iter().filter(|r| r.0 == id).map(|r| r.1).collect();
            v[..v.len() - 1].to_vec()
        };
        let flat = speeds("slow_none_nopause");
        assert!(flat.iter().all(|s| (s - flat[0]).abs() < EPS));
        assert_eq!(steps(&speeds("fast_StoFtoS_nopause")), (1, 1));
        let paused = speeds("slow_none_pause");
        let zeros: Vec<usize> = (0..paused.len()).filter(|&i| paused[i] == 0.0).collect();
        assert_eq!(zeros.len(), 1);

        let empty: Vec<(String, &TimedTrajectory)> = vec![];
        assert!(export_velocity_profiles(empty, Vec::new()).is_err());
    }
}
