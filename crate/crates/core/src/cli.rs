//! Command-line front end for the `transbox` binary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::evaluation::{
    check_signature, evaluate_task, format_table, parse_task_list, load_test_split,
    EvalError, RankingReport, RankingTask, ScoreConfig, TaskKind,
};
use crate::geometry::{
    analytic_intersection_probability, monte_carlo_intersection_probability_with, Norm, OffsetSampling,
};
use crate::manifest::RunManifest;
use crate::model::{load_checkpoint, save_checkpoint, soundness_report, Checkpoint, CheckpointError, TrainingMetadata};
use crate::ontology::{parse_ontology, Ontology};
use crate::plot::{plot2d, PlotError};
use crate::training::{mean_axiom_loss, train_with, write_trace_csv, TrainConfig, TrainError};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status when `check` finds a violated axiom.
pub const EXIT_UNSOUND: i32 = 1;
/// Exit status for usage, input and I/O errors.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Plot(#[from] PlotError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Parser)]
#[command(name = "transbox", version, about = "Box embeddings for EL++ ontologies")]
pub struct Cli {
    /// Worker threads for parallel sections; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an embedding and write checkpoint, loss trace and manifest.
    Train(TrainArgs),
    /// Rank test axioms and write one report per task.
    Eval(EvalArgs),
    /// Check every axiom of an ontology against a checkpoint.
    Check(CheckArgs),
    /// Estimate the chance that two random boxes intersect.
    Simulate(SimulateArgs),
    /// Render a two-dimensional checkpoint as SVG.
    Plot2d(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L1,
    L2,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Norm {
        match n {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub ontology: PathBuf,
    /// TOML file with training settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Start from this checkpoint instead of a fresh initialisation.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Margin γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Regularisation weight λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Negative samples per eligible axiom.
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long, conflicts_with = "negatives")]
    pub no_negatives: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
    /// Train on the ontology as written, without strengthening ∃ on
    /// right-hand sides.
    #[arg(long)]
    pub no_enhancement: bool,
    /// Also save `checkpoints/epoch-N.ckpt` every N epochs.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SelectMetric {
    Mrr,
    H1,
    H10,
    H100,
    Med,
    Mr,
    Auc,
}

impl SelectMetric {
    /// Value to maximise.
    fn key(self, r: &RankingReport) -> f64 {
        match self {
            SelectMetric::Mrr => r.mrr,
            SelectMetric::H1 => r.hits_at_1,
            SelectMetric::H10 => r.hits_at_10,
            SelectMetric::H100 => r.hits_at_100,
            SelectMetric::Med => -r.median_rank,
            SelectMetric::Mr => -r.mean_rank,
            SelectMetric::Auc => r.auc,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// One or more checkpoints; with several, `--valid` picks one.
    #[arg(long, required = true, num_args = 1..)]
    pub checkpoint: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    pub test: Vec<PathBuf>,
    /// Validation files used to choose among several checkpoints.
    #[arg(long, num_args = 1..)]
    pub valid: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "mrr")]
    pub select_metric: SelectMetric,
    /// Comma-separated task names, or `all` for the four complex tasks.
    #[arg(long, default_value = "all")]
    pub tasks: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Weight of the mask-mismatch term in the score.
    #[arg(long, default_value_t = 1e4)]
    pub big_m: f64,
    /// Treat a left-hand side with any empty coordinate as empty.
    #[arg(long)]
    pub strict_empty: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Also write the report and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 5, 10, 50])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw the two offsets independently instead of sharing one.
    #[arg(long)]
    pub independent_offsets: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Directory for `plot.svg` and a manifest; prints to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line, writing human-readable output to `stdout`.
/// Returns the process exit status.
pub fn run(cli: Cli, argv: Vec<String>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if cli.threads > 0 {
        // Fails only if a global pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match cli.command {
        Command::Train(a) => cmd_train(a, cli.threads, argv, stdout),
        Command::Eval(a) => cmd_eval(a, argv, stdout),
        Command::Check(a) => cmd_check(a, argv, stdout),
        Command::Simulate(a) => cmd_simulate(a, argv, stdout),
        Command::Plot2d(a) => cmd_plot2d(a, argv, stdout),
    }
}

fn out_err(e: io::Error) -> CliError {
    CliError::Io { path: PathBuf::from("<stdout>"), source: e }
}

pub fn read_ontology(path: &Path) -> Result<Ontology, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_ontology(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), line: e.line(), message: e.to_string() })
}

fn read_checkpoint_file(path: &Path) -> Result<Checkpoint, CliError> {
    load_checkpoint(path).map_err(|source| CliError::Checkpoint { path: path.to_path_buf(), source })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Settings from `--config` (if any) with flags applied on top.
pub fn resolve_train_config(a: &TrainArgs, threads: usize) -> Result<TrainConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            toml::from_str::<TrainConfig>(&text).map_err(|e| CliError::Config { path: p.clone(), message: e.to_string() })?
        }
        None => TrainConfig::default(),
    };
    if let Some(v) = a.dim {
        cfg.dim = v;
    }
    if let Some(v) = a.gamma {
        cfg.margin = v;
    }
    if let Some(v) = a.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.negatives {
        cfg.negatives = v;
    }
    if a.no_negatives {
        cfg.negatives = 0;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.norm {
        cfg.norm = v.into();
    }
    if a.no_enhancement {
        cfg.semantic_enhancement = false;
    }
    if threads > 0 {
        cfg.threads = threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(a: TrainArgs, threads: usize, argv: Vec<String>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_train_config(&a, threads)?;
    let ontology = read_ontology(&a.ontology)?;
    let initial = match &a.resume {
        Some(p) => Some(read_checkpoint_file(p)?.model),
        None => None,
    };
    create_dir(&a.out)?;
    let mut manifest = RunManifest::start("train", argv, &a.out);
    manifest.config_digest = cfg.digest();
    manifest.seed = Some(cfg.seed);
    manifest.inputs.push(a.ontology.clone());
    manifest.inputs.extend(a.config.iter().cloned());
    manifest.inputs.extend(a.resume.iter().cloned());

    let digest = cfg.digest();
    let every = a.checkpoint_every.filter(|&n| n > 0);
    let snapshots = a.out.join("checkpoints");
    let mut saved = Vec::new();
    let mut save_error = None;
    let log_every = (cfg.epochs / 20).max(1);
    let outcome = train_with(&ontology, &cfg, initial, &mut |stats, model| {
        if stats.epoch % log_every == 0 {
            log::info!(
                "epoch {} total {:.4e} positive {:.4e} negative {:.4e}",
                stats.epoch,
                stats.total,
                stats.mean_positive,
                stats.mean_negative
            );
        }
        let Some(n) = every else { return };
        if stats.epoch % n != 0 || save_error.is_some() {
            return;
        }
        let name = PathBuf::from("checkpoints").join(format!("epoch-{:06}.ckpt", stats.epoch));
        let ckpt = Checkpoint {
            model: model.clone(),
            metadata: TrainingMetadata { epoch: stats.epoch as u64, loss: stats.total, seed: cfg.seed, config_digest: digest.clone() },
        };
        let result = fs::create_dir_all(&snapshots).and_then(|_| save_checkpoint(a.out.join(&name), &ckpt));
        match result {
            Ok(()) => saved.push(name),
            Err(e) => save_error = Some(CliError::Io { path: a.out.join(&name), source: e }),
        }
    })?;
    if let Some(e) = save_error {
        return Err(e);
    }
    manifest.outputs.extend(saved);

    let final_loss = outcome.trace.last().map_or(f64::NAN, |s| s.total);
    let ckpt = Checkpoint {
        model: outcome.model,
        metadata: TrainingMetadata { epoch: outcome.trace.len() as u64, loss: final_loss, seed: cfg.seed, config_digest: digest },
    };
    let ckpt_path = a.out.join("model.ckpt");
    save_checkpoint(&ckpt_path, &ckpt).map_err(io_err(&ckpt_path))?;
    manifest.record_output("model.ckpt");

    let trace_path = a.out.join("trace.csv");
    let mut trace = Vec::new();
    write_trace_csv(&mut trace, &outcome.trace).map_err(io_err(&trace_path))?;
    fs::write(&trace_path, trace).map_err(io_err(&trace_path))?;
    manifest.record_output("trace.csv");

    let cfg_path = a.out.join("config.toml");
    let cfg_text = toml::to_string(&cfg).map_err(|e| CliError::Config { path: cfg_path.clone(), message: e.to_string() })?;
    fs::write(&cfg_path, cfg_text).map_err(io_err(&cfg_path))?;
    manifest.record_output("config.toml");

    let (mean, skipped) = mean_axiom_loss(ontology.axioms(), &ckpt.model, cfg.margin, cfg.norm)
        .map_err(|e| CliError::Train(e.into()))?;
    manifest.finish().map_err(io_err(&a.out))?;
    writeln!(
        stdout,
        "trained {} epochs: mean axiom loss {mean:.6e} ({skipped} skipped); wrote {}",
        ckpt.metadata.epoch,
        ckpt_path.display()
    )
    .map_err(out_err)?;
    Ok(EXIT_OK)
}

fn run_tasks(
    kinds: &[TaskKind],
    axioms: &[crate::ontology::Axiom],
    ckpt: &Checkpoint,
    cfg: &ScoreConfig,
) -> Result<Vec<RankingReport>, EvalError> {
    let mut reports = Vec::new();
    for &kind in kinds {
        let task = RankingTask::build(kind, axioms, &ckpt.model);
        if task.queries.is_empty() {
            log::warn!("task {} has no queries in the test files; skipped", kind.name());
            continue;
        }
        reports.push(evaluate_task(&task, &ckpt.model, cfg)?);
    }
    Ok(reports)
}

/// Mean selection key over the reports of one checkpoint.
fn selection_score(reports: &[RankingReport], metric: SelectMetric) -> f64 {
    if reports.is_empty() {
        return f64::NEG_INFINITY;
    }
    reports.iter().map(|r| metric.key(r)).sum::<f64>() / reports.len() as f64
}

fn cmd_eval(a: EvalArgs, argv: Vec<String>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let kinds = parse_task_list(&a.tasks).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.checkpoint.len() > 1 && a.valid.is_empty() {
        return Err(CliError::Usage("several checkpoints need --valid files to choose from".into()));
    }
    let cfg = ScoreConfig { big_m: a.big_m, strict_empty: a.strict_empty, ..ScoreConfig::default() };
    let test = load_test_split(&a.test)?;
    let checkpoints = a.checkpoint.iter().map(|p| read_checkpoint_file(p)).collect::<Result<Vec<_>, _>>()?;
    for c in &checkpoints {
        check_signature(&test.axioms, &c.model)?;
    }

    let chosen = if checkpoints.len() == 1 {
        0
    } else {
        let valid = load_test_split(&a.valid)?;
        let mut best = (0, f64::NEG_INFINITY);
        for (i, c) in checkpoints.iter().enumerate() {
            check_signature(&valid.axioms, &c.model)?;
            let s = selection_score(&run_tasks(&kinds, &valid.axioms, c, &cfg)?, a.select_metric);
            log::info!("{}: validation {:?} {s}", a.checkpoint[i].display(), a.select_metric);
            if s > best.1 {
                best = (i, s);
            }
        }
        best.0
    };
    let ckpt = &checkpoints[chosen];
    let reports = run_tasks(&kinds, &test.axioms, ckpt, &cfg)?;
    if reports.is_empty() {
        return Err(EvalError::NoRanks.into());
    }

    create_dir(&a.out)?;
    let mut manifest = RunManifest::start("eval", argv, &a.out);
    manifest.config_digest = ckpt.metadata.config_digest.clone();
    manifest.seed = Some(ckpt.metadata.seed);
    manifest.inputs.push(a.checkpoint[chosen].clone());
    manifest.inputs.extend(a.test.iter().cloned());
    manifest.inputs.extend(a.valid.iter().cloned());
    for r in &reports {
        let name = format!("{}.txt", r.task);
        let path = a.out.join(&name);
        fs::write(&path, r.to_key_value()).map_err(io_err(&path))?;
        manifest.record_output(name);
    }
    let table = format_table(&reports);
    let summary = a.out.join("summary.txt");
    fs::write(&summary, &table).map_err(io_err(&summary))?;
    manifest.record_output("summary.txt");
    manifest.finish().map_err(io_err(&a.out))?;
    if checkpoints.len() > 1 {
        writeln!(stdout, "selected {}", a.checkpoint[chosen].display()).map_err(out_err)?;
    }
    stdout.write_all(table.as_bytes()).map_err(out_err)?;
    Ok(EXIT_OK)
}

fn cmd_check(a: CheckArgs, argv: Vec<String>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if !(a.tol >= 0.0) {
        return Err(CliError::Usage("--tol must be >= 0".into()));
    }
    let ckpt = read_checkpoint_file(&a.checkpoint)?;
    let ontology = read_ontology(&a.ontology)?;
    check_signature(ontology.axioms(), &ckpt.model)?;
    let report = soundness_report(ontology.axioms(), &ckpt.model, a.tol);
    let text = report.to_string();
    stdout.write_all(text.as_bytes()).map_err(out_err)?;
    if let Some(out) = &a.out {
        create_dir(out)?;
        let mut manifest = RunManifest::start("check", argv, out);
        manifest.config_digest = ckpt.metadata.config_digest.clone();
        manifest.seed = Some(ckpt.metadata.seed);
        manifest.inputs = vec![a.checkpoint.clone(), a.ontology.clone()];
        let path = out.join("soundness.txt");
        fs::write(&path, &text).map_err(io_err(&path))?;
        manifest.record_output("soundness.txt");
        manifest.finish().map_err(io_err(out))?;
    }
    Ok(if report.sound { EXIT_OK } else { EXIT_UNSOUND })
}

/// Flag printed next to dimensions whose analytic probability is below
/// this bound.
pub const NEGLIGIBLE: f64 = 1.6e-9;

pub fn simulation_table(dims: &[usize], samples: u64, seed: u64, sampling: OffsetSampling) -> String {
    let mut s = String::from("dim  analytic      empirical     stderr        z\n");
    for &n in dims {
        let p = sampling.per_coordinate_probability().powi(n as i32);
        debug_assert!(sampling != OffsetSampling::Shared || p == analytic_intersection_probability(n));
        let hat = monte_carlo_intersection_probability_with(n, samples, seed, sampling);
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        let z = if se > 0.0 { (hat - p) / se } else { 0.0 };
        let flag = if p < NEGLIGIBLE { "  below 1.6e-9" } else { "" };
        s.push_str(&format!("{n:<4} {p:<13.6e} {hat:<13.6e} {se:<13.6e} {z:+.3}{flag}\n"));
    }
    s
}

fn cmd_simulate(a: SimulateArgs, argv: Vec<String>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if a.dims.is_empty() {
        return Err(CliError::Usage("--dims needs at least one dimension".into()));
    }
    let sampling = if a.independent_offsets { OffsetSampling::Independent } else { OffsetSampling::Shared };
    let table = simulation_table(&a.dims, a.samples, a.seed, sampling);
    stdout.write_all(table.as_bytes()).map_err(out_err)?;
    if let Some(out) = &a.out {
        create_dir(out)?;
        let mut manifest = RunManifest::start("simulate", argv, out);
        manifest.seed = Some(a.seed);
        let path = out.join("simulation.txt");
        fs::write(&path, &table).map_err(io_err(&path))?;
        manifest.record_output("simulation.txt");
        manifest.finish().map_err(io_err(out))?;
    }
    Ok(EXIT_OK)
}

fn cmd_plot2d(a: PlotArgs, argv: Vec<String>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let ckpt = read_checkpoint_file(&a.checkpoint)?;
    let svg = plot2d(&ckpt.model)?;
    match &a.out {
        Some(out) => {
            create_dir(out)?;
            let mut manifest = RunManifest::start("plot2d", argv, out);
            manifest.config_digest = ckpt.metadata.config_digest.clone();
            manifest.seed = Some(ckpt.metadata.seed);
            manifest.inputs.push(a.checkpoint.clone());
            let path = out.join("plot.svg");
            fs::write(&path, &svg).map_err(io_err(&path))?;
            manifest.record_output("plot.svg");
            manifest.finish().map_err(io_err(out))?;
            writeln!(stdout, "wrote {}", path.display()).map_err(out_err)?;
        }
        None => stdout.write_all(svg.as_bytes()).map_err(out_err)?,
    }
    Ok(EXIT_OK)
}
