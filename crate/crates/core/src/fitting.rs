//! Grid-search fitting of perception models to per-condition mean ratings.
//!
//! Every grid point is scored by the Pearson correlation between the model's
//! prediction (posterior of the designated state) and the mean ratings. The
//! best point wins; exact ties go to the first point in lexicographic grid
//! order, first axis outermost. Grid points are evaluated in parallel and
//! reduced in order, so results do not depend on the thread count.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path as FsPath;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conditions::ConditionSpec;
use crate::error::{Error, Result};
use crate::inference::{ModelConfig, ModelKind};
use crate::trajectory::TimedTrajectory;

/// `count` values from `low` to `high`, evenly spaced in log space.
pub fn log_grid(low: f64, high: f64, count: usize) -> Result<Vec<f64>> {
    if !(low > 0.0) || !low.is_finite() || !high.is_finite() {
        return Err(Error::invalid(format!(
            "log grid bounds must be positive and finite, got [{low}, {high}]"
        )));
    }
    if !(high > low) {
        return Err(Error::invalid(format!(
            "log grid upper bound {high} must exceed lower bound {low}"
        )));
    }
    if count < 2 {
        return Err(Error::invalid(format!("log grid needs at least 2 values, got {count}")));
    }
    let (a, b) = (low.ln(), high.ln());
    let last = (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| (a + (b - a) * i as f64 / last).exp()).collect();
    out[0] = low;
    out[count - 1] = high;
    Ok(out)
}

/// Product-moment correlation. Constant inputs are an error, not NaN.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "correlation inputs differ in length: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::invalid(format!(
            "correlation needs at least 3 pairs, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("one of the sequences is constant".into()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    if !r.is_finite() {
        return Err(Error::UndefinedCorrelation(format!("correlation evaluated to {r}")));
    }
    Ok(r.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConditionRatings {
    entries: BTreeMap<String, f64>,
}

impl ConditionRatings {
    pub fn new(entries: BTreeMap<String, f64>) -> Result<Self> {
        if entries.len() < 3 {
            return Err(Error::invalid(format!(
                "ratings need at least 3 conditions, got {}",
                entries.len()
            )));
        }
        for (id, r) in &entries {
            if !r.is_finite() {
                return Err(Error::invalid(format!("rating for '{id}' is not finite")));
            }
            id.parse::<ConditionSpec>()?;
        }
        Ok(ConditionRatings { entries })
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `condition,mean_rating` CSV.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse(format!("ratings header: {e}")))?
            .clone();
        if headers.len() != 2 || &headers[0] != "condition" || &headers[1] != "mean_rating" {
            return Err(Error::Parse(format!(
                "ratings header must be 'condition,mean_rating', got '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut entries = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Parse(format!("ratings row {row}: {e}")))?;
            let id = rec[0].to_string();
            id.parse::<ConditionSpec>()
                .map_err(|_| Error::Parse(format!("ratings row {row}: unknown condition id '{id}'")))?;
            let rating: f64 = rec[1].parse().map_err(|_| {
                Error::Parse(format!(
                    "ratings row {row}: rating '{}' for '{id}' is not a number",
                    &rec[1]
                ))
            })?;
            if entries.insert(id.clone(), rating).is_some() {
                return Err(Error::Parse(format!("ratings row {row}: duplicate condition '{id}'")));
            }
        }
        ConditionRatings::new(entries)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,mean_rating\n");
        for (id, r) in &self.entries {
            out.push_str(&format!("{id},{r}\n"));
        }
        out
    }
}

pub fn load_ratings(path: impl AsRef<FsPath>) -> Result<ConditionRatings> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ConditionRatings::from_csv(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub name: String,
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(name: impl Into<String>, low: f64, high: f64, count: usize) -> Self {
        GridAxis {
            name: name.into(),
            low,
            high,
            count,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        log_grid(self.low, self.high, self.count).map_err(|e| Error::invalid(format!("grid axis '{}': {e}", self.name)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub params: Vec<GridAxis>,
    /// Pairs `[a, b]` requiring `a > b`.
    #[serde(default)]
    pub constraints: Vec<[String; 2]>,
}

impl GridSpec {
    /// Ten log-spaced values in [0.01, 100] for each free parameter.
    pub fn default_for(kind: ModelKind) -> Self {
        let axis = |n: &str| GridAxis::new(n, 1e-2, 1e2, 10);
        match kind {
            ModelKind::Confidence => GridSpec {
                params: vec![axis("r"), axis("k"), axis("lambda")],
                constraints: vec![],
            },
            ModelKind::Weight => GridSpec {
                params: vec![axis("k"), axis("lambda")],
                constraints: vec![],
            },
            ModelKind::Naturalness => GridSpec {
                params: vec![axis("k_high"), axis("k_low"), axis("lambda")],
                constraints: vec![["k_high".into(), "k_low".into()]],
            },
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|a| a.name.clone()).collect()
    }

    /// Grid points satisfying every constraint, in lexicographic order.
    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        if self.params.is_empty() {
            return Err(Error::invalid("grid has no parameters"));
        }
        let axes = self.params.iter().map(GridAxis::values).collect::<Result<Vec<_>>>()?;
        let names = self.names();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::invalid(format!("grid parameter '{n}' listed twice")));
            }
        }
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for [a, b] in &self.constraints {
            let pos = |n: &String| {
                names
                    .iter()
                    .position(|x| x == n)
                    .ok_or_else(|| Error::invalid(format!("constraint refers to unknown grid parameter '{n}'")))
            };
            constraints.push((pos(a)?, pos(b)?));
        }

        let mut out = Vec::new();
        let mut idx = vec![0usize; axes.len()];
        loop {
            let point: Vec<f64> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect();
            if constraints.iter().all(|&(a, b)| point[a] > point[b]) {
                out.push(point);
            }
            let mut d = axes.len();
            loop {
                if d == 0 {
                    return Ok(out);
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
}

/// Named trajectories; together they form the normalization family.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSet {
    ids: Vec<String>,
    trajectories: Vec<TimedTrajectory>,
}

impl ConditionSet {
    pub fn new(items: Vec<(String, TimedTrajectory)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid("condition set is empty"));
        }
        let (ids, trajectories): (Vec<_>, Vec<_>) = items.into_iter().unzip();
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(Error::invalid(format!("condition '{id}' listed twice")));
            }
        }
        Ok(ConditionSet { ids, trajectories })
    }

    pub fn from_specs<'a>(items: impl IntoIterator<Item = (&'a ConditionSpec, &'a TimedTrajectory)>) -> Result<Self> {
        ConditionSet::new(items.into_iter().map(|(s, t)| (s.id(), t.clone())).collect())
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn trajectories(&self) -> &[TimedTrajectory] {
        &self.trajectories
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::invalid(format!("no trajectory for condition '{id}'")))
    }

    /// Keeps only the listed conditions, in the listed order.
    pub fn restrict<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let items = ids
            .into_iter()
            .map(|id| Ok((id.to_string(), self.trajectories[self.index_of(id)?].clone())))
            .collect::<Result<Vec<_>>>()?;
        ConditionSet::new(items)
    }

    fn digest_into(&self, h: &mut Sha256) {
        for (id, t) in self.ids.iter().zip(&self.trajectories) {
            h.update(id.as_bytes());
            h.update(serde_json::to_vec(t).expect("trajectory serializes"));
        }
    }
}

/// Posterior probability of `cfg.predict` for `traj`, normalized over `family`
/// when the config's mode asks for it.
pub fn model_prediction(cfg: &ModelConfig, traj: &TimedTrajectory, family: &[TimedTrajectory]) -> Result<f64> {
    let idx = cfg.support.index_of(&cfg.predict)?;
    Ok(cfg.posterior(traj, family)?.probabilities()[idx])
}

/// Prediction for every member of the set.
pub fn predict_all(cfg: &ModelConfig, set: &ConditionSet) -> Result<Vec<f64>> {
    let idx = cfg.support.index_of(&cfg.predict)?;
    let table = cfg.cost_table(set.trajectories())?;
    let lambda = cfg.model.lambda();
    (0..set.len())
        .map(|i| Ok(table.posterior(i, lambda, &cfg.support, cfg.mode)?.probabilities()[idx]))
        .collect()
}

/// Returns `cfg` with the named grid values applied.
pub fn apply_params(cfg: &ModelConfig, names: &[String], values: &[f64]) -> Result<ModelConfig> {
    let mut c = cfg.clone();
    for (n, v) in names.iter().zip(values) {
        c.set_param(n, *v)?;
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub best_params: BTreeMap<String, f64>,
    pub correlation: f64,
    pub predictions: BTreeMap<String, f64>,
    pub grid_spec: GridSpec,
    pub points_evaluated: usize,
    pub points_undefined: usize,
    pub input_digest: String,
}

fn score(cfg: &ModelConfig, set: &ConditionSet, rated: &[usize], ys: &[f64]) -> Result<Option<f64>> {
    let preds = match predict_all(cfg, set) {
        Ok(p) => p,
        Err(Error::Numeric(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let xs: Vec<f64> = rated.iter().map(|&i| preds[i]).collect();
    match pearson(&xs, ys) {
        Ok(r) => Ok(Some(r)),
        Err(Error::UndefinedCorrelation(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Exhaustive grid search for the parameters whose predictions correlate
/// best with `ratings`. `conditions` is the normalization family and must
/// contain every rated condition.
pub fn fit(
    cfg: &ModelConfig,
    conditions: &ConditionSet,
    ratings: &ConditionRatings,
    grid: &GridSpec,
) -> Result<FitResult> {
    let rated = ratings
        .ids()
        .map(|id| conditions.index_of(id))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<f64> = ratings.entries().values().copied().collect();
    let names = grid.names();
    let points = grid.points()?;
    if points.is_empty() {
        return Err(Error::NoValidGridPoint("every grid point violates a constraint".into()));
    }
    // configs are built up front so bad parameter names fail before the search
    let configs = points
        .iter()
        .map(|p| apply_params(cfg, &names, p))
        .collect::<Result<Vec<_>>>()?;

    let scores = configs
        .par_iter()
        .map(|c| score(c, conditions, &rated, &ys))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(r) = *s {
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((i, r));
            }
        }
    }
    let (bi, correlation) =
        best.ok_or_else(|| Error::UndefinedCorrelation("correlation is undefined at every grid point".into()))?;

    let preds = predict_all(&configs[bi], conditions)?;
    let predictions = rated.iter().map(|&i| (conditions.ids()[i].clone(), preds[i])).collect();

    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&cfg.to_file()).expect("config serializes"));
    h.update(serde_json::to_vec(ratings).expect("ratings serialize"));
    conditions.digest_into(&mut h);

    Ok(FitResult {
        model: cfg.kind(),
        best_params: names.iter().cloned().zip(points[bi].iter().copied()).collect(),
        correlation,
        predictions,
        grid_spec: grid.clone(),
        points_evaluated: points.len(),
        points_undefined: scores.iter().filter(|s| s.is_none()).count(),
        input_digest: hex::encode(h.finalize()),
    })
}

/// Ratings equal to `offset + scale * prediction` for each listed condition.
pub fn synthesize_ratings(
    cfg: &ModelConfig,
    conditions: &ConditionSet,
    rated: &[&str],
    offset: f64,
    scale: f64,
) -> Result<ConditionRatings> {
    let preds = predict_all(cfg, conditions)?;
    let entries = rated
        .iter()
        .map(|id| Ok((id.to_string(), offset + scale * preds[conditions.index_of(id)?])))
        .collect::<Result<BTreeMap<_, _>>>()?;
    ConditionRatings::new(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlResult {
    pub n_seeds: usize,
    pub rng_seed: u64,
    pub mean_correlation: f64,
    pub per_seed: Vec<f64>,
}

fn seed_stream(rng_seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    rng
}

fn summarize(rng_seed: u64, per_seed: Vec<f64>) -> ControlResult {
    ControlResult {
        n_seeds: per_seed.len(),
        rng_seed,
        mean_correlation: per_seed.iter().sum::<f64>() / per_seed.len() as f64,
        per_seed,
    }
}

/// Refits on i.i.d. uniform ratings in [1, 7]; one independent stream per seed.
/// A high mean best-fit correlation here signals a model flexible enough to
/// fit noise.
pub fn random_control(
    cfg: &ModelConfig,
    conditions: &ConditionSet,
    rated: &[&str],
    grid: &GridSpec,
    n_seeds: usize,
    rng_seed: u64,
) -> Result<ControlResult> {
    if n_seeds == 0 {
        return Err(Error::invalid("random control needs at least one seed"));
    }
    let mut per_seed = Vec::with_capacity(n_seeds);
    for s in 0..n_seeds {
        let mut rng = seed_stream(rng_seed, s as u64);
        let entries = rated
            .iter()
            .map(|id| (id.to_string(), rng.gen_range(1.0..=7.0)))
            .collect();
        per_seed.push(fit(cfg, conditions, &ConditionRatings::new(entries)?, grid)?.correlation);
    }
    Ok(summarize(rng_seed, per_seed))
}

/// Refits on ratings generated by the model itself: each seed draws a grid
/// point, maps its predictions to `1 + 6 * p` and adds Gaussian noise.
pub fn model_generated_control(
    cfg: &ModelConfig,
    conditions: &ConditionSet,
    rated: &[&str],
    grid: &GridSpec,
    n_seeds: usize,
    rng_seed: u64,
    noise_sd: f64,
) -> Result<ControlResult> {
    if n_seeds == 0 {
        return Err(Error::invalid("control needs at least one seed"));
    }
    let noise =
        Normal::new(0.0, noise_sd).map_err(|e| Error::invalid(format!("noise standard deviation {noise_sd}: {e}")))?;
    let names = grid.names();
    let points = grid.points()?;
    if points.is_empty() {
        return Err(Error::NoValidGridPoint("every grid point violates a constraint".into()));
    }
    let mut per_seed = Vec::with_capacity(n_seeds);
    for s in 0..n_seeds {
        let mut rng = seed_stream(rng_seed, s as u64);
        let point = &points[rng.gen_range(0..points.len())];
        let truth = apply_params(cfg, &names, point)?;
        let clean = synthesize_ratings(&truth, conditions, rated, 1.0, 6.0)?;
        let entries = clean
            .entries()
            .iter()
            .map(|(id, r)| (id.clone(), r + noise.sample(&mut rng)))
            .collect();
        per_seed.push(fit(cfg, conditions, &ConditionRatings::new(entries)?, grid)?.correlation);
    }
    Ok(summarize(rng_seed, per_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{generate_set, GeneratorParams};

    #[test]
    fn default_grid_endpoints() {
        let g = log_grid(1e-2, 1e2, 10).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[9], 100.0);
        let third = 10f64.powf(-2.0 + 2.0 * 4.0 / 9.0);
        assert!((g[2] - third).abs() < 1e-15);
        assert!((g[2] - 0.0774).abs() < 1e-4);
    }

    #[test]
    fn grid_bounds_rejected() {
        assert!(log_grid(1.0, 1.0, 5).is_err());
        assert!(log_grid(0.0, 1.0, 5).is_err());
        assert!(log_grid(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let lin: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson(&xs, &lin).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&xs, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(pearson(&xs, &[2.0; 4]), Err(Error::UndefinedCorrelation(_))));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ratings_csv() {
        let ids: Vec<String> = ConditionSpec::experiment_set().iter().map(|c| c.id()).collect();
        let mut csv = String::from("condition,mean_rating\n");
        for (i, id) in ids.iter().enumerate() {
            csv.push_str(&format!("{id},{}\n", 1.0 + i as f64 * 0.5));
        }
        let r = ConditionRatings::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(r.len(), 8);

        let dup = format!("{csv}{},3.0\n", ids[0]);
        let e = ConditionRatings::from_csv(dup.as_bytes()).unwrap_err().to_string();
        assert!(e.contains("duplicate") && e.contains(&ids[0]), "{e}");

        let bad = "condition,mean_rating\nslow_none_nopause,2\nfast_none_nopause,heavy\nslow_none_pause,1\n";
        let e = ConditionRatings::from_csv(bad.as_bytes()).unwrap_err().to_string();
        assert!(e.contains("row 3") && e.contains("heavy"), "{e}");

        let unknown = "condition,mean_rating\nwobbly,2\n";
        let e = ConditionRatings::from_csv(unknown.as_bytes()).unwrap_err().to_string();
        assert!(e.contains("wobbly"), "{e}");
    }

    #[test]
    fn constrained_grid_points() {
        let g = GridSpec::default_for(ModelKind::Naturalness);
        let pts = g.points().unwrap();
        assert_eq!(pts.len(), 45 * 10);
        assert!(pts.iter().all(|p| p[0] > p[1]));
        let bad = GridSpec {
            params: vec![GridAxis::new("a", 1.0, 2.0, 2)],
            constraints: vec![["a".into(), "b".into()]],
        };
        assert!(bad.points().is_err());
    }

    fn experiment() -> ConditionSet {
        let set = generate_set(&ConditionSpec::experiment_set(), &GeneratorParams::default()).unwrap();
        ConditionSet::from_specs(set.iter()).unwrap()
    }

    #[test]
    fn single_point_grid_returns_it() {
        let set = experiment();
        let cfg = ModelConfig::default_for(ModelKind::Weight);
        let ids: Vec<&str> = set.ids().iter().map(String::as_str).collect();
        let mut ratings = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            ratings.insert(id.to_string(), ((i * 7) % 5) as f64);
        }
        let grid = GridSpec {
            params: vec![GridAxis::new("k", 0.5, 1.0, 2), GridAxis::new("lambda", 1.0, 2.0, 2)],
            constraints: vec![["k".into(), "lambda".into()]],
        };
        // k > lambda holds nowhere on this grid
        assert!(matches!(
            fit(&cfg, &set, &ConditionRatings::new(ratings.clone()).unwrap(), &grid),
            Err(Error::NoValidGridPoint(_))
        ));
        let grid = GridSpec {
            params: vec![GridAxis::new("lambda", 0.5, 1.0, 2), GridAxis::new("k", 0.6, 1.5, 2)],
            constraints: vec![["lambda".into(), "k".into()]],
        };
        let res = fit(&cfg, &set, &ConditionRatings::new(ratings).unwrap(), &grid).unwrap();
        assert_eq!(res.best_params["lambda"], 1.0);
        assert_eq!(res.best_params["k"], 0.6);
        assert_eq!(res.points_evaluated, 1);
    }

    #[test]
    fn missing_trajectory_is_named() {
        let set = experiment()
            .restrict(["slow_none_nopause", "fast_none_nopause", "slow_none_pause"])
            .unwrap();
        let mut ratings = BTreeMap::new();
        for (id, r) in [
            ("slow_none_nopause", 1.0),
            ("fast_none_nopause", 2.0),
            ("fast_none_pause", 4.0),
        ] {
            ratings.insert(id.to_string(), r);
        }
        let e = fit(
            &ModelConfig::default_for(ModelKind::Weight),
            &set,
            &ConditionRatings::new(ratings).unwrap(),
            &GridSpec::default_for(ModelKind::Weight),
        )
        .unwrap_err();
        assert!(e.to_string().contains("fast_none_pause"));
    }

    #[test]
    fn control_is_deterministic() {
        let set = experiment();
        let ids: Vec<&str> = set.ids().iter().map(String::as_str).collect();
        let cfg = ModelConfig::default_for(ModelKind::Weight);
        let grid = GridSpec {
            params: vec![GridAxis::new("k", 0.1, 10.0, 3), GridAxis::new("lambda", 0.1, 10.0, 3)],
            constraints: vec![],
        };
        let a = random_control(&cfg, &set, &ids, &grid, 4, 7).unwrap();
        let b = random_control(&cfg, &set, &ids, &grid, 4, 7).unwrap();
        assert_eq!(a, b);
        let c = random_control(&cfg, &set, &ids, &grid, 4, 8).unwrap();
        assert_ne!(a.per_seed, c.per_seed);
    }
}
