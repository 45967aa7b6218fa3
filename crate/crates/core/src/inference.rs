//! Perception models and Bayesian inference over hidden states from timing.
//!
//! An observer is assumed to expect timings that trade duration against a
//! state-dependent criterion `C(T; q, theta)`, with Boltzmann likelihood
//!
//! ```text
//! P(T | q, theta) = exp(-lambda * C(T; q, theta)) / Z(theta)
//! ```
//!
//! where `Z(theta)` sums over an explicit, finite family of candidate timings.
//! The posterior over `theta` follows from Bayes' rule with a discrete prior.
//! All exponentials are evaluated in log space with max-shifting.
//!
//! Models:
//!
//! - confidence: `theta` is the initial belief precision `tau0`;
//!   `C = k * T_N + 1 / tau_f` with
//!   `tau_f = tau0 + sum_i dt_i * tau_obs / (1 + r * |v_i|)`.
//! - weight: `theta` is the carried mass `m`; `C = k * T_N + m * sum_i |v_i^EE|`.
//! - naturalness: `theta` is the tradeoff `k`; `C = k * T_N + sum_i |J_i|^2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::KinematicChain;
use crate::trajectory::{norm, TimedTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionVariant {
    /// Observation quality falls off with speed.
    #[default]
    VelocityWeighted,
    /// `round(obs_rate * T_N)` observations of fixed precision.
    ConstantRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceParams {
    #[serde(default = "one")]
    pub tau_obs: f64,
    pub r: f64,
    pub k: f64,
    pub lambda: f64,
    #[serde(default = "default_obs_rate")]
    pub obs_rate: f64,
    #[serde(default)]
    pub precision: PrecisionVariant,
}

fn one() -> f64 {
    1.0
}

fn default_obs_rate() -> f64 {
    10.0
}

impl Default for ConfidenceParams {
    fn default() -> Self {
        ConfidenceParams {
            tau_obs: 1.0,
            r: 100.0,
            k: 0.6,
            lambda: 12.9,
            obs_rate: default_obs_rate(),
            precision: PrecisionVariant::VelocityWeighted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightParams {
    pub k: f64,
    pub lambda: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams { k: 4.6, lambda: 35.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaturalnessParams {
    pub lambda: f64,
}

impl Default for NaturalnessParams {
    fn default() -> Self {
        NaturalnessParams { lambda: 4.64 }
    }
}

pub fn confidence_final_precision(traj: &TimedTrajectory, tau0: f64, p: &ConfidenceParams) -> f64 {
    match p.precision {
        PrecisionVariant::VelocityWeighted => {
            let speeds = traj.segment_speeds();
            tau0 + traj
                .segment_durations()
                .iter()
                .zip(&speeds)
                .map(|(dt, v)| dt * p.tau_obs / (1.0 + p.r * v))
                .sum::<f64>()
        }
        PrecisionVariant::ConstantRate => constant_rate_final_precision(traj, tau0, p),
    }
}

/// Precision after `round(obs_rate * T_N)` equally good observations.
pub fn constant_rate_final_precision(traj: &TimedTrajectory, tau0: f64, p: &ConfidenceParams) -> f64 {
    let n_obs = (p.obs_rate * traj.total_duration()).round();
    n_obs * p.tau_obs + tau0
}

pub fn confidence_cost(traj: &TimedTrajectory, tau0: f64, p: &ConfidenceParams) -> f64 {
    p.k * traj.total_duration() + 1.0 / confidence_final_precision(traj, tau0, p)
}

/// Sum of end-effector speeds over segments.
pub fn momentum_sum(traj: &TimedTrajectory, chain: &KinematicChain) -> Result<f64> {
    Ok(chain.ee_velocities(traj)?.iter().map(|v| v.norm()).sum())
}

pub fn weight_cost(traj: &TimedTrajectory, chain: &KinematicChain, mass: f64, p: &WeightParams) -> Result<f64> {
    Ok(p.k * traj.total_duration() + mass * momentum_sum(traj, chain)?)
}

pub fn squared_jerk_sum(traj: &TimedTrajectory) -> Result<f64> {
    Ok(traj
        .jerk_sequence()?
        .iter()
        .map(|j| {
            let n = norm(j);
            n * n
        })
        .sum())
}

pub fn naturalness_cost(traj: &TimedTrajectory, k: f64) -> Result<f64> {
    Ok(k * traj.total_duration() + squared_jerk_sum(traj)?)
}

/// Max-shifted `ln(sum(exp(x)))`. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Boltzmann probability of timing `target` within a family with the given costs.
pub fn timing_likelihood(costs: &[f64], target: usize, lambda: f64) -> Result<f64> {
    if costs.is_empty() {
        return Err(Error::invalid("timing family is empty"));
    }
    if target >= costs.len() {
        return Err(Error::invalid(format!(
            "target timing {target} is not in a family of {}",
            costs.len()
        )));
    }
    let logits: Vec<f64> = costs.iter().map(|c| -lambda * c).collect();
    let lz = log_sum_exp(&logits);
    if !lz.is_finite() {
        return Err(Error::Numeric(format!(
            "partition function is not finite (log Z = {lz})"
        )));
    }
    Ok((logits[target] - lz).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Confidence,
    Weight,
    Naturalness,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Confidence => "confidence",
            ModelKind::Weight => "weight",
            ModelKind::Naturalness => "naturalness",
        }
    }

    /// Two-point support used when a config does not list one.
    pub fn default_support(self) -> ThetaSupport {
        let pts: &[(&str, f64)] = match self {
            ModelKind::Confidence => &[("high", 1.0), ("low", 0.5)],
            ModelKind::Weight => &[("heavy", 0.8), ("light", 0.5)],
            ModelKind::Naturalness => &[("k_high", 100.0), ("k_low", 1.66)],
        };
        ThetaSupport::uniform(pts.iter().map(|(l, v)| ThetaValue::new(*l, *v)).collect())
            .expect("default supports are valid")
    }

    /// Label of the state whose posterior is reported as the model's prediction.
    pub fn default_predict_label(self) -> &'static str {
        match self {
            ModelKind::Confidence => "high",
            ModelKind::Weight => "heavy",
            ModelKind::Naturalness => "k_high",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "confidence" => Ok(ModelKind::Confidence),
            "weight" => Ok(ModelKind::Weight),
            "naturalness" => Ok(ModelKind::Naturalness),
            other => Err(Error::invalid(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PerceptionModel {
    Confidence(ConfidenceParams),
    /// `chain: None` uses the identity embedding of the trajectory's joints.
    Weight {
        params: WeightParams,
        chain: Option<KinematicChain>,
    },
    Naturalness(NaturalnessParams),
}

impl PerceptionModel {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Confidence => PerceptionModel::Confidence(ConfidenceParams::default()),
            ModelKind::Weight => PerceptionModel::Weight {
                params: WeightParams::default(),
                chain: None,
            },
            ModelKind::Naturalness => PerceptionModel::Naturalness(NaturalnessParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            PerceptionModel::Confidence(_) => ModelKind::Confidence,
            PerceptionModel::Weight { .. } => ModelKind::Weight,
            PerceptionModel::Naturalness(_) => ModelKind::Naturalness,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            PerceptionModel::Confidence(p) => p.lambda,
            PerceptionModel::Weight { params, .. } => params.lambda,
            PerceptionModel::Naturalness(p) => p.lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be non-negative, got {v}")))
            }
        };
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        nonneg("lambda", self.lambda())?;
        match self {
            PerceptionModel::Confidence(p) => {
                pos("tau_obs", p.tau_obs)?;
                nonneg("r", p.r)?;
                nonneg("k", p.k)?;
                pos("obs_rate", p.obs_rate)
            }
            PerceptionModel::Weight { params, chain } => {
                nonneg("k", params.k)?;
                chain.as_ref().map_or(Ok(()), |c| c.validate())
            }
            PerceptionModel::Naturalness(_) => Ok(()),
        }
    }

    /// Cost of `traj` under hidden state `theta`.
    pub fn cost(&self, traj: &TimedTrajectory, theta: f64) -> Result<f64> {
        match self {
            PerceptionModel::Confidence(p) => {
                if !(theta > 0.0) {
                    return Err(Error::invalid(format!(
                        "initial precision must be positive, got {theta}"
                    )));
                }
                Ok(confidence_cost(traj, theta, p))
            }
            PerceptionModel::Weight { params, chain } => {
                if !(theta > 0.0) {
                    return Err(Error::invalid(format!("mass must be positive, got {theta}")));
                }
                match chain {
                    Some(c) => weight_cost(traj, c, theta, params),
                    None => weight_cost(traj, &KinematicChain::identity(traj.dim())?, theta, params),
                }
            }
            PerceptionModel::Naturalness(_) => naturalness_cost(traj, theta),
        }
    }

    /// Sets a named scalar parameter. Returns false when the name is not a
    /// parameter of this model.
    pub fn set_param(&mut self, name: &str, value: f64) -> bool {
        let slot = match (self, name) {
            (PerceptionModel::Confidence(p), "r") => &mut p.r,
            (PerceptionModel::Confidence(p), "k") => &mut p.k,
            (PerceptionModel::Confidence(p), "lambda") => &mut p.lambda,
            (PerceptionModel::Confidence(p), "tau_obs") => &mut p.tau_obs,
            (PerceptionModel::Confidence(p), "obs_rate") => &mut p.obs_rate,
            (PerceptionModel::Weight { params, .. }, "k") => &mut params.k,
            (PerceptionModel::Weight { params, .. }, "lambda") => &mut params.lambda,
            (PerceptionModel::Naturalness(p), "lambda") => &mut p.lambda,
            _ => return false,
        };
        *slot = value;
        true
    }

    fn params_json(&self) -> serde_json::Value {
        match self {
            PerceptionModel::Confidence(p) => serde_json::to_value(p),
            PerceptionModel::Weight { params, .. } => serde_json::to_value(params),
            PerceptionModel::Naturalness(p) => serde_json::to_value(p),
        }
        .expect("params serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub label: String,
    pub value: f64,
}

impl ThetaValue {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        ThetaValue {
            label: label.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSupport {
    values: Vec<ThetaValue>,
    prior: Vec<f64>,
}

impl ThetaSupport {
    pub fn new(values: Vec<ThetaValue>, prior: Vec<f64>) -> Result<Self> {
        let s = ThetaSupport { values, prior };
        s.validate()?;
        Ok(s)
    }

    pub fn uniform(values: Vec<ThetaValue>) -> Result<Self> {
        let n = values.len().max(1);
        ThetaSupport::new(values, vec![1.0 / n as f64; n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("theta support is empty"));
        }
        if self.prior.len() != self.values.len() {
            return Err(Error::invalid(format!(
                "prior has {} entries for {} theta values",
                self.prior.len(),
                self.values.len()
            )));
        }
        for (i, a) in self.values.iter().enumerate() {
            if !a.value.is_finite() {
                return Err(Error::invalid(format!("theta '{}' is not finite", a.label)));
            }
            for b in &self.values[i + 1..] {
                if a.value == b.value {
                    return Err(Error::invalid(format!(
                        "theta values must be distinct: '{}' and '{}' are both {}",
                        a.label, b.label, a.value
                    )));
                }
                if a.label == b.label {
                    return Err(Error::invalid(format!("duplicate theta label '{}'", a.label)));
                }
            }
        }
        if self.prior.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::invalid("prior entries must be non-negative"));
        }
        let total: f64 = self.prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("prior sums to {total}, expected 1")));
        }
        Ok(())
    }

    pub fn values(&self) -> &[ThetaValue] {
        &self.values
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.values
            .iter()
            .position(|v| v.label == label)
            .ok_or_else(|| Error::invalid(format!("no theta labelled '{label}' in the support")))
    }

    /// Sets the value of the state named `label`. Returns false if absent.
    pub fn set_value(&mut self, label: &str, value: f64) -> bool {
        match self.values.iter_mut().find(|v| v.label == label) {
            Some(v) => {
                v.value = value;
                true
            }
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodMode {
    /// Normalize each state's timing likelihood over the candidate family.
    #[default]
    Normalized,
    /// Use `exp(-lambda * C)` directly.
    Unnormalized,
}

impl FromStr for LikelihoodMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(LikelihoodMode::Normalized),
            "unnormalized" => Ok(LikelihoodMode::Unnormalized),
            other => Err(Error::invalid(format!("unknown likelihood mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEntry {
    pub label: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Posterior {
    entries: Vec<PosteriorEntry>,
}

impl Posterior {
    /// Normalizes per-state log weights (log likelihood + log prior).
    pub fn from_log_weights(support: &ThetaSupport, log_weights: &[f64]) -> Result<Self> {
        if log_weights.iter().any(|x| x.is_nan()) {
            return Err(Error::Numeric("log posterior weight is NaN".into()));
        }
        let lz = log_sum_exp(log_weights);
        if !lz.is_finite() {
            return Err(Error::Numeric("every state has zero posterior weight".into()));
        }
        Ok(Posterior {
            entries: support
                .values()
                .iter()
                .zip(log_weights)
                .map(|(v, lw)| PosteriorEntry {
                    label: v.label.clone(),
                    probability: (lw - lz).exp(),
                })
                .collect(),
        })
    }

    pub fn entries(&self) -> &[PosteriorEntry] {
        &self.entries
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.label == label).map(|e| e.probability)
    }
}

/// Costs of every family member under every state, `costs[theta][timing]`.
#[derive(Debug, Clone)]
pub struct CostTable {
    costs: Vec<Vec<f64>>,
}

impl CostTable {
    pub fn build(model: &PerceptionModel, support: &ThetaSupport, family: &[TimedTrajectory]) -> Result<Self> {
        let costs = support
            .values()
            .iter()
            .map(|th| family.iter().map(|t| model.cost(t, th.value)).collect())
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(CostTable { costs })
    }

    pub fn costs(&self) -> &[Vec<f64>] {
        &self.costs
    }

    pub fn family_len(&self) -> usize {
        self.costs.first().map_or(0, |c| c.len())
    }

    /// `ln Z(theta)` for each state.
    pub fn log_partitions(&self, lambda: f64) -> Vec<f64> {
        self.costs
            .iter()
            .map(|row| {
                let logits: Vec<f64> = row.iter().map(|c| -lambda * c).collect();
                log_sum_exp(&logits)
            })
            .collect()
    }

    /// Posterior for family member `index`.
    pub fn posterior(
        &self,
        index: usize,
        lambda: f64,
        support: &ThetaSupport,
        mode: LikelihoodMode,
    ) -> Result<Posterior> {
        if index >= self.family_len() {
            return Err(Error::invalid(format!(
                "timing {index} is not in a family of {}",
                self.family_len()
            )));
        }
        let log_z = match mode {
            LikelihoodMode::Normalized => self.log_partitions(lambda),
            LikelihoodMode::Unnormalized => vec![0.0; self.costs.len()],
        };
        posterior_from_costs(
            &self.costs.iter().map(|row| row[index]).collect::<Vec<_>>(),
            &log_z,
            lambda,
            support,
        )
    }
}

/// Posterior from each state's cost of the observed timing and its log partition.
pub fn posterior_from_costs(
    costs: &[f64],
    log_partitions: &[f64],
    lambda: f64,
    support: &ThetaSupport,
) -> Result<Posterior> {
    if log_partitions.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numeric("partition function is not finite".into()));
    }
    let log_w: Vec<f64> = costs
        .iter()
        .zip(log_partitions)
        .zip(support.prior())
        .map(|((c, lz), p)| -lambda * c - lz + p.ln())
        .collect();
    Posterior::from_log_weights(support, &log_w)
}

pub fn posterior(
    traj: &TimedTrajectory,
    model: &PerceptionModel,
    support: &ThetaSupport,
    family: &[TimedTrajectory],
    mode: LikelihoodMode,
) -> Result<Posterior> {
    support.validate()?;
    let lambda = model.lambda();
    match mode {
        LikelihoodMode::Normalized => {
            if family.is_empty() {
                return Err(Error::invalid("normalization family is empty"));
            }
            let index = family
                .iter()
                .position(|t| t == traj)
                .ok_or_else(|| Error::invalid("trajectory is not a member of the normalization family"))?;
            CostTable::build(model, support, family)?.posterior(index, lambda, support, mode)
        }
        LikelihoodMode::Unnormalized => {
            let costs = support
                .values()
                .iter()
                .map(|th| model.cost(traj, th.value))
                .collect::<Result<Vec<_>>>()?;
            posterior_from_costs(&costs, &vec![0.0; costs.len()], lambda, support)
        }
    }
}

/// A perception model together with its state support, likelihood mode and
/// the state reported as its scalar prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub model: PerceptionModel,
    pub support: ThetaSupport,
    pub mode: LikelihoodMode,
    pub predict: String,
}

/// JSON form of [`ModelConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfigFile {
    pub model: ModelKind,
    #[serde(default)]
    pub params: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<ThetaValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<LikelihoodMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<KinematicChain>,
}

impl ModelConfig {
    pub fn default_for(kind: ModelKind) -> Self {
        ModelConfig {
            model: PerceptionModel::default_for(kind),
            support: kind.default_support(),
            mode: LikelihoodMode::Normalized,
            predict: kind.default_predict_label().to_string(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModelConfigFile = serde_json::from_str(text)?;
        ModelConfig::try_from(raw)
    }

    pub fn to_file(&self) -> ModelConfigFile {
        ModelConfigFile {
            model: self.kind(),
            params: Some(self.model.params_json()),
            theta: Some(self.support.values().to_vec()),
            prior: Some(self.support.prior().to_vec()),
            mode: Some(self.mode),
            predict: Some(self.predict.clone()),
            chain: match &self.model {
                PerceptionModel::Weight { chain, .. } => chain.clone(),
                _ => None,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.support.validate()?;
        self.support.index_of(&self.predict)?;
        Ok(())
    }

    /// Sets a model parameter or, failing that, the value of the state with
    /// that label.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        if self.model.set_param(name, value) || self.support.set_value(name, value) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "'{name}' is neither a {} parameter nor a theta label",
                self.kind()
            )))
        }
    }

    pub fn cost_table(&self, family: &[TimedTrajectory]) -> Result<CostTable> {
        CostTable::build(&self.model, &self.support, family)
    }

    pub fn posterior(&self, traj: &TimedTrajectory, family: &[TimedTrajectory]) -> Result<Posterior> {
        posterior(traj, &self.model, &self.support, family, self.mode)
    }
}

impl TryFrom<ModelConfigFile> for ModelConfig {
    type Error = Error;
    fn try_from(raw: ModelConfigFile) -> Result<Self> {
        let kind = raw.model;
        let params = raw.params.unwrap_or(serde_json::Value::Null);
        let has_params = !params.is_null();
        if kind != ModelKind::Weight && raw.chain.is_some() {
            return Err(Error::invalid("'chain' only applies to the weight model"));
        }
        let model = match kind {
            ModelKind::Confidence => PerceptionModel::Confidence(if has_params {
                serde_json::from_value(params)?
            } else {
                ConfidenceParams::default()
            }),
            ModelKind::Weight => PerceptionModel::Weight {
                params: if has_params {
                    serde_json::from_value(params)?
                } else {
                    WeightParams::default()
                },
                chain: raw.chain,
            },
            ModelKind::Naturalness => PerceptionModel::Naturalness(if has_params {
                serde_json::from_value(params)?
            } else {
                NaturalnessParams::default()
            }),
        };
        let support = match (raw.theta, raw.prior) {
            (Some(values), Some(prior)) => ThetaSupport::new(values, prior)?,
            (Some(values), None) => ThetaSupport::uniform(values)?,
            (None, None) => kind.default_support(),
            (None, Some(_)) => return Err(Error::invalid("'prior' given without 'theta'")),
        };
        let predict = match raw.predict {
            Some(p) => p,
            None if support.index_of(kind.default_predict_label()).is_ok() => kind.default_predict_label().to_string(),
            None => support.values()[0].label.clone(),
        };
        let cfg = ModelConfig {
            model,
            support,
            mode: raw.mode.unwrap_or_default(),
            predict,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
