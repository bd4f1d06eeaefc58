//! Command-line front end: `gen`, `train`, `solve`, `eval`, `compare`.
//!
//! Exit codes are 0 on success, 2 on usage errors and 1 on runtime errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{generate, load_dataset, load_instance, save_dataset, Dataset, GeneratorConfig};
use crate::error::{Error, Result};
use crate::model::{DurationWindow, Instance, Selection};
use crate::policy::{
    gradcheck::surrogate_loss_check, load_checkpoint, rollout, PolicyConfig, PolicyParams, RolloutOptions,
};
use crate::autodiff::gradcheck::primitive_suite;
use crate::scoring::{composite_reward, impcoh_at_t, RewardConfig};
use crate::seeding::rng_for;
use crate::solvers::{solve, Method, ObjectiveMode, SolverConfig};
use crate::training::{train, TrainConfig, TrainLog};

pub const DATA_DIR_ENV: &str = "MSAN_DATA_DIR";
pub const RUN_MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Parser)]
#[command(name = "msan", version, about = "Duration-constrained ad video assemblage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Train the pointer policy, optionally sweeping several β values.
    Train(TrainArgs),
    /// Solve one instance file with one method.
    Solve(SolveArgs),
    /// Per-instance and mean metrics for the chosen methods.
    Eval(EvalArgs),
    /// Mean metric table, by default over every baseline.
    Compare(EvalArgs),
    /// Run the finite-difference gradient suite.
    #[command(hide = true)]
    Gradcheck(GradcheckArgs),
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.2, value_parser = unit_interval)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 13.90, value_parser = positive)]
    pub mean_segments: f64,
    #[arg(long, default_value_t = 2.77, value_parser = positive)]
    pub mean_duration: f64,
    #[arg(long, default_value_t = 30.18, value_parser = positive)]
    pub mean_labels: f64,
    #[arg(long, default_value_t = 32)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 4)]
    pub topics: usize,
    #[arg(long, default_value_t = 1.0)]
    pub ppl_low: f64,
    #[arg(long, default_value_t = 2.5)]
    pub ppl_high: f64,
    #[arg(long, default_value_t = 22)]
    pub max_segments: usize,
}

impl GenArgs {
    pub fn config(&self) -> GeneratorConfig {
        GeneratorConfig {
            count: self.count as usize,
            seed: self.seed,
            mean_segments: self.mean_segments,
            mean_segment_duration_s: self.mean_duration,
            mean_labels_per_video: self.mean_labels,
            feature_dim: self.feature_dim,
            topic_count: self.topics,
            ppl_low: self.ppl_low,
            ppl_high: self.ppl_high,
            test_fraction: self.test_fraction,
            max_segments: self.max_segments,
            ..GeneratorConfig::default()
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Dataset directory or manifest.
    #[arg(long, env = DATA_DIR_ENV)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Target duration T in seconds (10 or 15 in the reference protocol).
    #[arg(long, default_value_t = 10.0, value_parser = positive)]
    pub target: f64,
    /// One or more comma-separated β values; several values run a sweep.
    #[arg(long, value_delimiter = ',', default_value = "0.5", value_parser = unit_interval)]
    pub beta: Vec<f64>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = TrainConfig::DESK_LR, value_parser = positive)]
    pub lr: f64,
    /// Episodes per video.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub episodes: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    #[arg(long, value_parser = positive)]
    pub clip_grad: Option<f64>,
    /// Zero the reward of rollouts shorter than the lower duration bound.
    #[arg(long)]
    pub gate_min: bool,
    /// Single attention pass instead of glimpse + pointer.
    #[arg(long)]
    pub no_glimpse: bool,
    #[arg(long)]
    pub feasibility_mask: bool,
    #[arg(long, default_value_t = 32)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 16)]
    pub enc_hidden: usize,
    #[arg(long, default_value_t = 1)]
    pub enc_layers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ObjectiveArg {
    /// Importance sum plus adjacent-pair coherence.
    Eq1,
    /// The composite training reward.
    Reward,
}

impl From<ObjectiveArg> for ObjectiveMode {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Eq1 => ObjectiveMode::Eq1Sum,
            ObjectiveArg::Reward => ObjectiveMode::RewardMean,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 10.0, value_parser = positive)]
    pub target: f64,
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Eq1)]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub beta: f64,
    /// Override whether the last segment is always selected.
    #[arg(long)]
    pub force_end: Option<bool>,
}

impl SolverArgs {
    fn solver(&self) -> Result<SolverConfig> {
        Ok(SolverConfig {
            seed: self.seed,
            force_end_segment: self.force_end,
            objective_mode: self.objective.into(),
            reward: RewardConfig::with_beta(self.beta)?,
            ..SolverConfig::default()
        })
    }

    fn policy(&self, needed: bool) -> std::result::Result<Option<PolicyParams>, CliError> {
        match (&self.ckpt, needed) {
            (Some(path), true) => Ok(Some(load_checkpoint(path)?)),
            (None, true) => Err(CliError::Usage("method `policy` requires --ckpt".into())),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub method: Method,
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also write `selection.json` and a run manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SplitArg {
    Train,
    Test,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long, env = DATA_DIR_ENV)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    /// Comma-separated methods (compare defaults to every baseline).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write `per_instance.csv`, `summary.csv` and a run manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GradcheckArgs {
    /// Parameter coordinates sampled for the desk-scale policy loss.
    #[arg(long, default_value_t = 200)]
    pub coords: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) if m.starts_with("error:") => write!(f, "{}", m.trim_end()),
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

/// Written next to every output artifact.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a [String],
    pub config: &'a C,
    pub seed: u64,
    pub toolkit_version: &'static str,
    pub wall_time_s: f64,
}

fn write_manifest<C: Serialize>(dir: &Path, argv: &[String], config: &C, seed: u64, started: Instant) -> Result<()> {
    let manifest = RunManifest {
        command: argv,
        config,
        seed,
        toolkit_version: env!("CARGO_PKG_VERSION"),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let path = dir.join(RUN_MANIFEST);
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs one method; the policy decodes greedily and needs `params`.
pub fn run_method(
    method: Method,
    inst: &Instance,
    window: &DurationWindow,
    solver: &SolverConfig,
    params: Option<&PolicyParams>,
) -> Result<Selection> {
    match (method, params) {
        (Method::Policy, Some(p)) => {
            let mut opts = RolloutOptions::from_config(p.config(), inst).greedy();
            opts.force_end_segment = solver.forces_end(Method::Policy, inst);
            Ok(rollout(inst, window, p, opts, &mut rng_for(solver.seed, &[]))?.selection)
        }
        (Method::Policy, None) => Err(Error::Config("method `policy` needs a checkpoint".into())),
        _ => solve(method, inst, window, solver),
    }
}

/// One evaluated (method, instance) pair. Metrics are scaled by 100.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub method: String,
    pub instance: String,
    pub imp: f64,
    pub coh: f64,
    pub overall: f64,
    pub feasible: bool,
    /// Solver objective; empty when the selection misses the window.
    pub objective: Option<f64>,
    pub reward: f64,
    pub len: usize,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub imp: f64,
    pub coh: f64,
    pub overall: f64,
    pub feasible_rate: f64,
    /// Mean objective with off-window selections counted as 0.
    pub objective: f64,
    pub reward: f64,
    pub count: usize,
}

pub fn evaluate(
    methods: &[Method],
    instances: &[Instance],
    window: &DurationWindow,
    solver: &SolverConfig,
    params: Option<&PolicyParams>,
) -> Result<Vec<EvalRow>> {
    let mut rows = Vec::with_capacity(methods.len() * instances.len());
    for &method in methods {
        let part: Vec<EvalRow> = instances
            .par_iter()
            .map(|inst| {
                let sel = run_method(method, inst, window, solver, params)?;
                let m = impcoh_at_t(inst, &sel, window, &solver.reward)?;
                Ok(EvalRow {
                    method: method.as_str().to_owned(),
                    instance: inst.id().to_owned(),
                    imp: m.imp,
                    coh: m.coh,
                    overall: m.overall,
                    feasible: m.feasible,
                    objective: solver.objective(inst, &sel, window)?,
                    reward: composite_reward(inst, &sel, &solver.reward)?,
                    len: sel.len(),
                    tau: sel.total_duration_s,
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(part);
    }
    Ok(rows)
}

pub fn summarize_rows(rows: &[EvalRow]) -> Vec<SummaryRow> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.method.as_str()) {
            order.push(&r.method);
        }
    }
    order
        .into_iter()
        .map(|m| {
            let group: Vec<&EvalRow> = rows.iter().filter(|r| r.method == m).collect();
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&EvalRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            SummaryRow {
                method: m.to_owned(),
                imp: mean(&|r| r.imp),
                coh: mean(&|r| r.coh),
                overall: mean(&|r| r.overall),
                feasible_rate: mean(&|r| f64::from(u8::from(r.feasible))),
                objective: mean(&|r| r.objective.unwrap_or(0.0)),
                reward: mean(&|r| r.reward),
                count: group.len(),
            }
        })
        .collect()
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn split_instances(ds: Dataset, split: SplitArg) -> Vec<Instance> {
    match split {
        SplitArg::Train => ds.train,
        SplitArg::Test => ds.test,
        SplitArg::All => ds.train.into_iter().chain(ds.test).collect(),
    }
}

fn cmd_gen(args: &GenArgs, argv: &[String], out: &mut dyn Write) -> std::result::Result<(), CliError> {
    let started = Instant::now();
    let cfg = args.config();
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let ds = generate(&cfg)?;
    create_dir(&args.out)?;
    let manifest = save_dataset(&ds, &args.out, Some(&cfg))?;
    write_manifest(&args.out, argv, &cfg, cfg.seed, started)?;
    writeln!(
        out,
        "wrote {} instances ({} train, {} test) to {}",
        ds.len(),
        ds.train.len(),
        ds.test.len(),
        manifest.display()
    )
    .map_err(|e| Error::io("stdout", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub epochs: usize,
    pub first_reward: f64,
    pub final_reward: f64,
    pub final_imp: f64,
    pub final_coh: f64,
    pub test_imp: Option<f64>,
    pub test_coh: Option<f64>,
    pub test_overall: Option<f64>,
    pub test_reward: Option<f64>,
}

#[derive(Serialize)]
struct TrainEcho<'a> {
    args: &'a TrainArgs,
    train: TrainConfig,
    policy: PolicyConfig,
}

fn cmd_train(args: &TrainArgs, argv: &[String], out: &mut dyn Write) -> std::result::Result<(), CliError> {
    if args.beta.is_empty() {
        return Err(CliError::Usage("at least one --beta value is required".into()));
    }
    let started = Instant::now();
    let ds = load_dataset(&args.data)?;
    let feature_dim = ds
        .train
        .first()
        .map(Instance::feature_dim)
        .ok_or_else(|| Error::Config("dataset has no training instances".into()))?;
    let policy_cfg = PolicyConfig {
        glimpse: !args.no_glimpse,
        feasibility_mask: args.feasibility_mask,
        ..PolicyConfig::with_dims(feature_dim, args.embed_dim, args.enc_hidden, args.enc_layers)
    };
    policy_cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    create_dir(&args.out)?;
    let sweep = args.beta.len() > 1;
    let mut rows = Vec::new();
    for &beta in &args.beta {
        let cfg = TrainConfig {
            episodes: args.episodes as usize,
            batch_size: args.batch_size as usize,
            lr: args.lr,
            epochs: args.epochs as usize,
            reward: RewardConfig::with_beta(beta)?,
            seed: args.seed,
            target_s: args.target,
            clip_grad_norm: args.clip_grad,
            gate_reward_on_min: args.gate_min,
            ..TrainConfig::desk(args.target)
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let dir = if sweep {
            args.out.join(format!("beta_{beta:.2}"))
        } else {
            args.out.clone()
        };
        create_dir(&dir)?;
        let init = PolicyParams::init(policy_cfg, args.seed)?;
        let outcome = train(&ds.train, init, &cfg, Some(&dir))?;
        let row = sweep_row(beta, &outcome.log, &ds.test, &cfg, &outcome.params)?;
        writeln!(
            out,
            "beta {beta:.2}: reward {:.4} -> {:.4} over {} epochs",
            row.first_reward, row.final_reward, row.epochs
        )
        .map_err(|e| Error::io("stdout", e))?;
        let echo = TrainEcho {
            args,
            train: cfg,
            policy: policy_cfg,
        };
        write_manifest(&dir, argv, &echo, args.seed, started)?;
        rows.push(row);
    }
    write_text(&args.out.join("sweep.csv"), &to_csv(&rows)?)?;
    if sweep {
        write_manifest(&args.out, argv, args, args.seed, started)?;
    }
    Ok(())
}

fn sweep_row(
    beta: f64,
    log: &TrainLog,
    test: &[Instance],
    cfg: &TrainConfig,
    params: &PolicyParams,
) -> Result<SweepRow> {
    let first = log.epochs.first().expect("at least one epoch");
    let last = log.epochs.last().expect("at least one epoch");
    let annotated = !test.is_empty() && test.iter().all(|i| i.annotations().is_some());
    let summary = if annotated {
        let solver = SolverConfig {
            reward: cfg.reward,
            ..SolverConfig::default()
        };
        let rows = evaluate(&[Method::Policy], test, &cfg.window()?, &solver, Some(params))?;
        summarize_rows(&rows).pop()
    } else {
        None
    };
    Ok(SweepRow {
        beta,
        epochs: log.epochs.len(),
        first_reward: first.mean_reward,
        final_reward: last.mean_reward,
        final_imp: last.mean_imp,
        final_coh: last.mean_coh,
        test_imp: summary.as_ref().map(|s| s.imp),
        test_coh: summary.as_ref().map(|s| s.coh),
        test_overall: summary.as_ref().map(|s| s.overall),
        test_reward: summary.as_ref().map(|s| s.reward),
    })
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub instance: String,
    pub method: String,
    /// Order of selection.
    pub indices: Vec<usize>,
    pub temporal: Vec<usize>,
    pub total_duration_s: f64,
    pub feasible: bool,
    pub objective: Option<f64>,
    pub reward: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<crate::scoring::MetricReport>,
}

fn cmd_solve(args: &SolveArgs, argv: &[String], out: &mut dyn Write) -> std::result::Result<(), CliError> {
    let started = Instant::now();
    let params = args.solver.policy(args.method == Method::Policy)?;
    let solver = args.solver.solver()?;
    let window = DurationWindow::new(args.solver.target)?;
    let inst = load_instance(&args.instance)?;
    let sel = run_method(args.method, &inst, &window, &solver, params.as_ref())?;
    let metrics = match inst.annotations() {
        Some(_) => Some(impcoh_at_t(&inst, &sel, &window, &solver.reward)?),
        None => None,
    };
    let report = SolveReport {
        instance: inst.id().to_owned(),
        method: args.method.as_str().to_owned(),
        indices: sel.indices.clone(),
        temporal: sel.temporal.clone(),
        total_duration_s: sel.total_duration_s,
        feasible: window.contains(sel.total_duration_s),
        objective: solver.objective(&inst, &sel, &window)?,
        reward: composite_reward(&inst, &sel, &solver.reward)?,
        metrics,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    writeln!(out, "{json}").map_err(|e| Error::io("stdout", e))?;
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_text(&dir.join("selection.json"), &format!("{json}\n"))?;
        write_manifest(dir, argv, args, args.solver.seed, started)?;
    }
    Ok(())
}

fn cmd_eval(
    args: &EvalArgs,
    argv: &[String],
    out: &mut dyn Write,
    compare: bool,
) -> std::result::Result<(), CliError> {
    let started = Instant::now();
    let methods: Vec<Method> = if args.methods.is_empty() && compare {
        vec![Method::Random, Method::RandomCut, Method::Sam, Method::Oracle]
    } else {
        args.methods.clone()
    };
    if methods.is_empty() {
        return Err(CliError::Usage("--methods must name at least one method".into()));
    }
    let params = args.solver.policy(methods.contains(&Method::Policy))?;
    let solver = args.solver.solver()?;
    let window = DurationWindow::new(args.solver.target)?;
    let instances = split_instances(load_dataset(&args.data)?, args.split);
    if instances.is_empty() {
        return Err(Error::Config("selected split is empty".into()).into());
    }
    let rows = evaluate(&methods, &instances, &window, &solver, params.as_ref())?;
    let summary = summarize_rows(&rows);
    let per_instance = to_csv(&rows)?;
    let table = to_csv(&summary)?;
    let printed = if compare { &table } else { &per_instance };
    write!(out, "{printed}").map_err(|e| Error::io("stdout", e))?;
    if !compare {
        write!(out, "\n{table}").map_err(|e| Error::io("stdout", e))?;
    }
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_text(&dir.join("per_instance.csv"), &per_instance)?;
        write_text(&dir.join("summary.csv"), &table)?;
        write_manifest(dir, argv, args, args.solver.seed, started)?;
    }
    Ok(())
}

fn cmd_gradcheck(args: &GradcheckArgs, out: &mut dyn Write) -> std::result::Result<(), CliError> {
    let mut reports = primitive_suite();
    let desk = PolicyConfig::desk(32);
    reports.push(surrogate_loss_check(desk, args.seed, Some(args.coords))?);
    reports.push(surrogate_loss_check(
        PolicyConfig { glimpse: false, ..desk },
        args.seed,
        Some(args.coords),
    )?);
    let mut failed = 0;
    for r in &reports {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        failed += usize::from(!r.passed());
        writeln!(out, "{verdict} {:<28} coords {:>4}  max rel err {:.3e}", r.name, r.coords, r.max_rel_err)
            .map_err(|e| Error::io("stdout", e))?;
    }
    if failed > 0 {
        return Err(Error::Config(format!("{failed} gradient checks failed")).into());
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run(argv: &[String], out: &mut dyn Write) -> std::result::Result<(), CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(|err| Error::io("stdout", err))?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, argv, out),
        Command::Train(a) => cmd_train(a, argv, out),
        Command::Solve(a) => cmd_solve(a, argv, out),
        Command::Eval(a) => cmd_eval(a, argv, out, false),
        Command::Compare(a) => cmd_eval(a, argv, out, true),
        Command::Gradcheck(a) => cmd_gradcheck(a, out),
    }
}

/// Process entry point; returns the exit code.
pub fn main_entry() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    let stdout = std::io::stdout();
    match run(&argv, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
