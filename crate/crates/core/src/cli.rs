//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when the computation itself fails (for
//! example an undefined correlation), 2 for bad input or I/O.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::conditions::{export_velocity_profiles, generate_all, ConditionSpec, GeneratorConfig, GeneratorParams};
use crate::error::{Error, Result};
use crate::fitting::{fit, load_ratings, random_control, ConditionSet, ControlResult, FitResult, GridSpec};
use crate::inference::{LikelihoodMode, ModelConfig, Posterior};
use crate::optimizer::{optimize, OptimizeConstraints, SearchMode};
use crate::trajectory::{Path, TimedTrajectory};

#[derive(Debug, Parser)]
#[command(
    name = "timing-inference",
    version,
    about = "Infer and convey hidden state through robot motion timing"
)]
pub struct Cli {
    /// Worker threads for grid and candidate evaluation; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Store measured wall time in reports and manifests (makes reruns differ).
    #[arg(long, global = true)]
    pub record_timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the 20 factorial timing conditions and their speed profiles.
    Gen(GenArgs),
    /// Posterior over hidden states for each trajectory.
    Infer(InferArgs),
    /// Grid-search a model's parameters against mean ratings.
    Fit(FitArgs),
    /// Search for the timing that best conveys a target state.
    Optimize(OptimizeArgs),
    /// Write the speed profile CSV for a set of trajectories.
    ExportProfiles(ExportArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator parameters JSON; defaults are used for missing fields.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Shorten moving time of paused conditions so totals match unpaused ones.
    #[arg(long)]
    pub hold_total_duration: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Normalized,
    Unnormalized,
}

impl From<ModeArg> for LikelihoodMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Normalized => LikelihoodMode::Normalized,
            ModeArg::Unnormalized => LikelihoodMode::Unnormalized,
        }
    }
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Model config JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Overrides the model config's likelihood mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Normalization family member: a trajectory file or directory; repeatable.
    /// Defaults to the inputs.
    #[arg(long)]
    pub family: Vec<PathBuf>,
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trajectory JSON files or directories.
    #[arg(required = true)]
    pub trajectories: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    /// Only the rated conditions.
    Rated,
    /// Every loaded condition.
    All,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Model config JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// `condition,mean_rating` CSV.
    #[arg(long)]
    pub ratings: PathBuf,
    /// Grid JSON; defaults to 10 log-spaced values in [0.01, 100] per parameter.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Directory of `<condition id>.json` trajectories; generated with default
    /// parameters when absent.
    #[arg(long)]
    pub conditions: Option<PathBuf>,
    /// Applies to generated conditions only.
    #[arg(long)]
    pub hold_total_duration: bool,
    /// Which conditions form the normalization family.
    #[arg(long, value_enum, default_value = "rated")]
    pub family: FamilyArg,
    /// Overrides the model config's likelihood mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Also refit this many sets of uniform random ratings.
    #[arg(long)]
    pub random_control: Option<usize>,
    /// Seed for the random control.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SearchArg {
    Exhaustive,
    CoordinateDescent,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Path JSON with a "waypoints" array.
    #[arg(long)]
    pub path: PathBuf,
    /// Model config JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Label of the state to convey.
    #[arg(long)]
    pub target: String,
    /// Constraints JSON.
    #[arg(long)]
    pub constraints: PathBuf,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub search: SearchArg,
    /// Overrides the model config's likelihood mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Trajectory JSON files or directories; file stems become condition ids.
    #[arg(required = true)]
    pub trajectories: Vec<PathBuf>,
    /// Output CSV file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Written beside every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub input_digests: BTreeMap<String, String>,
    pub tool_version: String,
    pub wall_time_s: Option<f64>,
}

struct Run {
    subcommand: &'static str,
    digests: BTreeMap<String, String>,
    started: Instant,
    record_timing: bool,
}

impl Run {
    fn new(subcommand: &'static str, record_timing: bool) -> Self {
        Run {
            subcommand,
            digests: BTreeMap::new(),
            started: Instant::now(),
            record_timing,
        }
    }

    fn read(&mut self, path: &FsPath) -> Result<String> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.digests
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{}: not UTF-8", path.display())))
    }

    fn elapsed(&self) -> Option<f64> {
        self.record_timing.then(|| self.started.elapsed().as_secs_f64())
    }

    fn manifest(&self, config: serde_json::Value) -> RunManifest {
        RunManifest {
            subcommand: self.subcommand.to_string(),
            config,
            input_digests: self.digests.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.elapsed(),
        }
    }

    /// Writes `body` to `out` (or stdout) and the manifest beside it.
    fn emit(&self, out: Option<&FsPath>, body: &str, config: serde_json::Value) -> Result<()> {
        match out {
            None => {
                print!("{body}");
                Ok(())
            }
            Some(p) => {
                write_file(p, body)?;
                let mut name = p.file_name().unwrap_or_default().to_os_string();
                name.push(".manifest.json");
                write_file(&p.with_file_name(name), &to_json(&self.manifest(config))?)
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &FsPath, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn is_manifest(p: &FsPath) -> bool {
    p.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n == "manifest.json" || n.ends_with(".manifest.json"))
}

/// Expands directories into their `.json` files (sorted), skipping manifests.
fn expand_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json") && !is_manifest(f))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn stem(p: &FsPath) -> String {
    p.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn load_trajectory(run: &mut Run, p: &FsPath) -> Result<TimedTrajectory> {
    let text = run.read(p)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
}

fn load_model(run: &mut Run, p: &FsPath, mode: Option<ModeArg>) -> Result<ModelConfig> {
    let text = run.read(p)?;
    let mut cfg = ModelConfig::from_json(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", p.display())),
        other => other,
    })?;
    if let Some(m) = mode {
        cfg.mode = m.into();
    }
    Ok(cfg)
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_domain() {
                1
            } else {
                2
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let record = cli.record_timing;
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Gen(a) => cmd_gen(a, record),
        Command::Infer(a) => cmd_infer(a, record),
        Command::Fit(a) => cmd_fit(a, record),
        Command::Optimize(a) => cmd_optimize(a, record),
        Command::ExportProfiles(a) => cmd_export(a, record),
    })
}

fn cmd_gen(a: GenArgs, record: bool) -> Result<()> {
    let mut run = Run::new("gen", record);
    let mut cfg: GeneratorConfig = match &a.params {
        Some(p) => {
            let text = run.read(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
        }
        None => GeneratorConfig::default(),
    };
    if a.hold_total_duration {
        cfg.hold_total_duration = Some(true);
    }
    let params = cfg.resolve()?;
    let all = generate_all(&params)?;

    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for (spec, traj) in &all {
        write_file(&a.out.join(format!("{spec}.json")), &to_json(traj)?)?;
    }
    let profiles = a.out.join("profiles.csv");
    let mut buf = Vec::new();
    export_velocity_profiles(all.iter().map(|(s, t)| (s.id(), t)), &mut buf)?;
    fs::write(&profiles, buf).map_err(|e| Error::io(&profiles, e))?;

    let resolved = serde_json::to_value(GeneratorConfig::from_params(&params))?;
    write_file(&a.out.join("manifest.json"), &to_json(&run.manifest(resolved))?)
}

#[derive(Serialize)]
struct InferOutput {
    model: String,
    mode: LikelihoodMode,
    family_size: usize,
    results: Vec<InferResult>,
}

#[derive(Serialize)]
struct InferResult {
    trajectory: String,
    posterior: Posterior,
}

fn cmd_infer(a: InferArgs, record: bool) -> Result<()> {
    let mut run = Run::new("infer", record);
    let cfg = load_model(&mut run, &a.model, a.mode)?;
    let inputs = expand_inputs(&a.trajectories)?;
    let trajs = inputs
        .iter()
        .map(|p| load_trajectory(&mut run, p))
        .collect::<Result<Vec<_>>>()?;
    let family = if a.family.is_empty() {
        trajs.clone()
    } else {
        expand_inputs(&a.family)?
            .iter()
            .map(|p| load_trajectory(&mut run, p))
            .collect::<Result<Vec<_>>>()?
    };
    let results = inputs
        .iter()
        .zip(&trajs)
        .map(|(p, t)| {
            let posterior = cfg
                .posterior(t, &family)
                .map_err(|e| Error::invalid(format!("{}: {e}", p.display())))?;
            Ok(InferResult {
                trajectory: p.display().to_string(),
                posterior,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let out = InferOutput {
        model: cfg.kind().to_string(),
        mode: cfg.mode,
        family_size: family.len(),
        results,
    };
    let config = serde_json::json!({ "model": cfg.to_file(), "family_size": family.len() });
    run.emit(a.out.as_deref(), &to_json(&out)?, config)
}

#[derive(Serialize)]
struct FitOutput {
    #[serde(flatten)]
    fit: FitResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    random_control: Option<ControlResult>,
}

fn load_conditions(run: &mut Run, a: &FitArgs) -> Result<ConditionSet> {
    match &a.conditions {
        Some(dir) => {
            let files = expand_inputs(std::slice::from_ref(dir))?;
            let items = files
                .iter()
                .filter(|f| stem(f).parse::<ConditionSpec>().is_ok())
                .map(|f| Ok((stem(f), load_trajectory(run, f)?)))
                .collect::<Result<Vec<_>>>()?;
            if items.is_empty() {
                return Err(Error::invalid(format!(
                    "{}: no <condition id>.json trajectories found",
                    dir.display()
                )));
            }
            ConditionSet::new(items)
        }
        None => {
            let params = GeneratorParams {
                hold_total_duration: a.hold_total_duration,
                ..GeneratorParams::default()
            };
            ConditionSet::from_specs(generate_all(&params)?.iter())
        }
    }
}

fn cmd_fit(a: FitArgs, record: bool) -> Result<()> {
    let mut run = Run::new("fit", record);
    let cfg = load_model(&mut run, &a.model, a.mode)?;
    run.read(&a.ratings)?;
    let ratings = load_ratings(&a.ratings)?;
    let grid = match &a.grid {
        Some(p) => {
            let text = run.read(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
        }
        None => GridSpec::default_for(cfg.kind()),
    };
    let all = load_conditions(&mut run, &a)?;
    let rated: Vec<&str> = ratings.ids().collect();
    let family = match a.family {
        FamilyArg::Rated => all.restrict(rated.iter().copied())?,
        FamilyArg::All => all,
    };
    let result = fit(&cfg, &family, &ratings, &grid)?;
    let control = match a.random_control {
        Some(n) => Some(random_control(&cfg, &family, &rated, &grid, n, a.seed)?),
        None => None,
    };
    let config = serde_json::json!({
        "model": cfg.to_file(),
        "grid": grid,
        "family": family.ids(),
        "random_control": a.random_control,
        "seed": a.seed,
    });
    let out = FitOutput {
        fit: result,
        random_control: control,
    };
    run.emit(a.out.as_deref(), &to_json(&out)?, config)
}

fn cmd_optimize(a: OptimizeArgs, record: bool) -> Result<()> {
    let mut run = Run::new("optimize", record);
    let text = run.read(&a.path)?;
    let path: Path = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", a.path.display())))?;
    let cfg = load_model(&mut run, &a.model, a.mode)?;
    let text = run.read(&a.constraints)?;
    let constraints: OptimizeConstraints =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", a.constraints.display())))?;
    let mode = match a.search {
        SearchArg::Exhaustive => SearchMode::Exhaustive,
        SearchArg::CoordinateDescent => SearchMode::CoordinateDescent,
    };
    let mut report = optimize(&path, &cfg, &a.target, &constraints, mode)?;
    report.wall_time_s = run.elapsed();
    let config = serde_json::json!({
        "model": cfg.to_file(),
        "target": a.target,
        "constraints": constraints,
        "mode": mode,
    });
    run.emit(a.out.as_deref(), &to_json(&report)?, config)
}

fn cmd_export(a: ExportArgs, record: bool) -> Result<()> {
    let mut run = Run::new("export-profiles", record);
    let files = expand_inputs(&a.trajectories)?;
    let trajs = files
        .iter()
        .map(|f| Ok((stem(f), load_trajectory(&mut run, f)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    export_velocity_profiles(trajs.iter().map(|(id, t)| (id.clone(), t)), &mut buf)?;
    let body = String::from_utf8(buf).expect("csv is UTF-8");
    let config = serde_json::json!({ "trajectories": trajs.iter().map(|(id, _)| id).collect::<Vec<_>>() });
    run.emit(a.out.as_deref(), &body, config)
}
