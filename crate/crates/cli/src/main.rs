//! `gaitkit` — repair noisy skeleton streams and identify walkers by gait.
//!
//! Subcommands mirror the pipeline stages (`synth`, `repair`, `features`,
//! `cycle`, `train-eval`) plus an end-to-end `pipeline` run. Configuration
//! comes from a TOML file (`--config`) with individual flags overriding it.
//! Exit codes: 0 success, 2 missing input file/directory, 1 anything else.

mod plot;

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gaitkit_core::classify::{Metric, SplitMode};
use gaitkit_core::cycle::CycleEstimate;
use gaitkit_core::features::{FeatureScheme, MissingPolicy};
use gaitkit_core::io::{
    load_feature_table_dir, load_sequence, load_world_sequence, save_feature_table,
    save_sequence_csv, save_sequence_jsonl, save_world_sequence,
};
use gaitkit_core::pipeline::{
    cycle_stage, feature_stage, load_cycle_estimates, repair_stage, run_pipeline,
    train_eval_stage, with_jobs, PipelineConfig, WindowLength,
};
use gaitkit_core::Error as CoreError;
use gaitkit_core::projection::project_sequence;
use gaitkit_core::repair::RepairReport;
use gaitkit_core::skeleton::{Axis, CameraParams, JointId, WorldSkeletonSequence};
use gaitkit_core::synth::{
    corrupt_sequence, demo_profiles, roster_dataset, to_raw_sequence, CorruptionConfig,
    SubjectProfile,
};

#[derive(Parser)]
#[command(
    name = "gaitkit",
    version,
    about = "Gait-based subject identification from noisy low-resolution skeleton streams"
)]
struct Cli {
    /// TOML pipeline configuration; individual flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for sequence-level stages (0 = one per core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic walking dataset as raw sequence files.
    Synth(SynthArgs),
    /// Repair missing samples and jump outliers, then smooth.
    Repair(RepairArgs),
    /// Extract per-frame inter-joint features to CSV.
    Features(FeaturesArgs),
    /// Estimate gait-cycle length from the ankle-distance series.
    Cycle(CycleArgs),
    /// Split, window, classify, and score a feature dataset.
    TrainEval(TrainEvalArgs),
    /// Run every stage end to end on a directory of raw sequences.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Directory receiving one sequence file per generated sequence.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Number of generated subjects (demo roster).
    #[arg(long, default_value_t = 4, conflicts_with = "profiles")]
    subjects: usize,
    /// Sequences per subject (walk types cycle: toward, diamond, stick).
    #[arg(long, default_value_t = 3)]
    seqs_per_subject: usize,
    /// Frames per sequence.
    #[arg(long, default_value_t = 120)]
    frames: usize,
    /// Seed for roster geometry, per-sequence phases, and corruption.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Roster TOML (`[[subjects]]` tables) replacing the demo roster.
    #[arg(long, value_name = "FILE")]
    profiles: Option<PathBuf>,
    /// Corrupt the streams (dropout bursts + jump outliers) before writing.
    #[arg(long)]
    corrupt: bool,
    /// Fraction of samples hit by dropout (with --corrupt).
    #[arg(long, default_value_t = 0.2)]
    dropout_rate: f64,
    /// Mean dropout burst length, frames (with --corrupt).
    #[arg(long, default_value_t = 2.0)]
    burst_length: f64,
    /// Fraction of surviving samples displaced as jumps (with --corrupt).
    #[arg(long, default_value_t = 0.05)]
    jump_rate: f64,
    /// Jump displacement scale, meters (with --corrupt).
    #[arg(long, default_value_t = 0.35)]
    jump_scale: f64,
    /// Also write the uncorrupted copies here (ground truth for experiments).
    #[arg(long, value_name = "DIR")]
    clean_out: Option<PathBuf>,
    /// On-disk sequence format.
    #[arg(long, value_enum, default_value_t = FileFormat::Jsonl)]
    format: FileFormat,
}

#[derive(Args)]
struct RepairArgs {
    /// Raw sequence (.jsonl/.csv), world artifact (.json), or a directory.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output file (file input) or stage directory (directory input).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Repair report JSON (one report, or an array for directory input).
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Render a before/after SVG of one joint track (first sequence).
    #[arg(long, value_name = "FILE")]
    emit_plot: Option<PathBuf>,
    /// Joint plotted by --emit-plot.
    #[arg(long, default_value = "RAnkle", value_parser = parse_joint)]
    plot_joint: JointId,
    /// Axis plotted by --emit-plot.
    #[arg(long, value_enum, default_value_t = AxisArg::Y)]
    plot_axis: AxisArg,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Raw sequence, world artifact, or a directory (repaired input expected).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output CSV file (file input) or directory (directory input).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Feature scheme (default: the config's, normally pair-vectors).
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Treat missing samples as zeros instead of rejecting them.
    #[arg(long)]
    keep_zeros: bool,
}

#[derive(Args)]
struct CycleArgs {
    /// Raw sequence, world artifact, or a directory (repaired input expected).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Write the cycle-estimates artifact here (readable by train-eval).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Minimum peak prominence, meters.
    #[arg(long, value_name = "M")]
    min_prominence: Option<f64>,
    /// Cycle length assumed when too few peaks survive, frames.
    #[arg(long, value_name = "FRAMES")]
    fallback_cycle: Option<usize>,
    /// IQR multiplier for trimming outlier cycle candidates.
    #[arg(long, value_name = "X")]
    iqr_factor: Option<f64>,
    /// Treat missing samples as zeros instead of rejecting them.
    #[arg(long)]
    keep_zeros: bool,
}

#[derive(Args)]
struct TrainEvalArgs {
    /// Directory of per-sequence feature CSVs.
    #[arg(long, value_name = "DIR")]
    features: PathBuf,
    /// Cycle-estimates artifact (required with the voted window).
    #[arg(long, value_name = "FILE")]
    cycles: Option<PathBuf>,
    /// Neighbor count.
    #[arg(long)]
    k: Option<usize>,
    /// Distance metric.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Split protocol.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    /// Split seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Training probability per sequence (random split).
    #[arg(long, value_name = "F")]
    train_fraction: Option<f64>,
    /// Window length: `voted` or a frame count.
    #[arg(long, value_parser = parse_window, value_name = "voted|N")]
    window: Option<WindowLength>,
    /// Frames between window starts.
    #[arg(long)]
    stride: Option<usize>,
    /// Evaluation report JSON.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Directory for the stage artifacts (report.json, split.json).
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Sequence-confusion heatmap SVG.
    #[arg(long, value_name = "FILE")]
    emit_plot: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Directory of raw sequence files (.jsonl/.csv).
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    /// Directory receiving every stage artifact.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Bypass the repair stage (the uncorrected baseline).
    #[arg(long)]
    skip_repair: bool,
    /// Feature scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Window length: `voted` or a frame count.
    #[arg(long, value_parser = parse_window, value_name = "voted|N")]
    window: Option<WindowLength>,
    /// Frames between window starts.
    #[arg(long)]
    stride: Option<usize>,
    /// Neighbor count.
    #[arg(long)]
    k: Option<usize>,
    /// Distance metric.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Split protocol.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    /// Split seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Training probability per sequence (random split).
    #[arg(long, value_name = "F")]
    train_fraction: Option<f64>,
    /// Sequence-confusion heatmap SVG.
    #[arg(long, value_name = "FILE")]
    emit_plot: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FileFormat {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    PairVectors,
    PairDistances,
    NeckRelative,
}

impl From<SchemeArg> for FeatureScheme {
    fn from(s: SchemeArg) -> FeatureScheme {
        match s {
            SchemeArg::PairVectors => FeatureScheme::PairVectors,
            SchemeArg::PairDistances => FeatureScheme::PairDistances,
            SchemeArg::NeckRelative => FeatureScheme::NeckRelative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Manhattan,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Manhattan => Metric::Manhattan,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    CrossWalk,
    Random,
}

impl From<SplitArg> for SplitMode {
    fn from(s: SplitArg) -> SplitMode {
        match s {
            SplitArg::CrossWalk => SplitMode::CrossWalk,
            SplitArg::Random => SplitMode::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Axis {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

fn parse_window(s: &str) -> Result<WindowLength, String> {
    if s.eq_ignore_ascii_case("voted") {
        return Ok(WindowLength::Voted);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(WindowLength::Fixed(n)),
        _ => Err(format!("expected `voted` or a frame count >= 1, got {s:?}")),
    }
}

fn parse_joint(s: &str) -> Result<JointId, String> {
    JointId::ALL
        .into_iter()
        .find(|j| j.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| {
            let names: Vec<&str> = JointId::ALL.iter().map(|j| j.name()).collect();
            format!("unknown joint {s:?}; expected one of {}", names.join(", "))
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", render_chain(&err));
            if is_not_found(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

/// Print one line to stdout, treating a closed pipe (e.g. `| head`) as
/// success instead of a panic.
fn emit(text: impl AsRef<str>) -> anyhow::Result<()> {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let outcome = stdout
        .write_all(text.as_ref().as_bytes())
        .and_then(|()| stdout.write_all(b"\n"));
    match outcome {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(Into::into),
    }
}

/// One-line error message: the anyhow chain joined with `: `, skipping
/// causes already embedded in an earlier message.
fn render_chain(err: &anyhow::Error) -> String {
    let mut out = err.to_string();
    for cause in err.chain().skip(1) {
        let text = cause.to_string();
        if !out.contains(&text) {
            out.push_str(": ");
            out.push_str(&text);
        }
    }
    out
}

/// True when the root cause is a missing file or directory (exit code 2).
fn is_not_found(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            core.is_not_found()
        } else if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            io.kind() == std::io::ErrorKind::NotFound
        } else {
            false
        }
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = load_config(cli.config.as_deref())?;
    let jobs = cli.jobs;
    match cli.command {
        Command::Synth(args) => cmd_synth(&config, args),
        Command::Repair(args) => cmd_repair(&config, jobs, args),
        Command::Features(args) => cmd_features(&config, jobs, args),
        Command::Cycle(args) => cmd_cycle(&config, args),
        Command::TrainEval(args) => cmd_train_eval(&config, args),
        Command::Pipeline(args) => cmd_pipeline(config, jobs, args),
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<PipelineConfig> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("config {}", path.display()))?;
    let cfg: PipelineConfig =
        toml::from_str(&text).with_context(|| format!("config {}", path.display()))?;
    Ok(cfg)
}

#[derive(serde::Deserialize)]
struct RosterFile {
    subjects: Vec<SubjectProfile>,
}

fn cmd_synth(config: &PipelineConfig, args: SynthArgs) -> anyhow::Result<()> {
    let profiles = match &args.profiles {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("roster {}", path.display()))?;
            let roster: RosterFile =
                toml::from_str(&text).with_context(|| format!("roster {}", path.display()))?;
            roster.subjects
        }
        None => demo_profiles(args.subjects, args.seed),
    };
    ensure!(!profiles.is_empty(), "the roster has no subjects");

    let clean = roster_dataset(&profiles, args.seqs_per_subject, args.frames, args.seed)?;
    let corruption = args.corrupt.then(|| CorruptionConfig {
        dropout_rate: args.dropout_rate,
        burst_length: args.burst_length,
        jump_rate: args.jump_rate,
        jump_scale: args.jump_scale,
        rng_seed: args.seed,
    });

    fs::create_dir_all(&args.out)?;
    if let Some(dir) = &args.clean_out {
        fs::create_dir_all(dir)?;
    }
    for seq in &clean {
        if let Some(dir) = &args.clean_out {
            write_raw(seq, &config.camera, dir, args.format)?;
        }
        let delivered = match &corruption {
            Some(cfg) => corrupt_sequence(seq, cfg)?.0,
            None => seq.clone(),
        };
        write_raw(&delivered, &config.camera, &args.out, args.format)?;
    }
    emit(format!(
        "wrote {} sequences ({} subjects x {}, {} frames{}) to {}",
        clean.len(),
        profiles.len(),
        args.seqs_per_subject,
        args.frames,
        if args.corrupt { ", corrupted" } else { "" },
        args.out.display()
    ))?;
    Ok(())
}

fn write_raw(
    seq: &WorldSkeletonSequence,
    camera: &CameraParams,
    dir: &Path,
    format: FileFormat,
) -> anyhow::Result<()> {
    let raw = to_raw_sequence(seq, camera)?;
    match format {
        FileFormat::Jsonl => {
            save_sequence_jsonl(&raw, &dir.join(format!("{}.jsonl", raw.sequence_id)))?
        }
        FileFormat::Csv => save_sequence_csv(&raw, &dir.join(format!("{}.csv", raw.sequence_id)))?,
    }
    Ok(())
}

/// True when `path` holds a world-sequence artifact (vs. a raw sequence).
fn is_world_artifact(path: &Path) -> bool {
    let Ok(mut file) = fs::File::open(path) else {
        return false;
    };
    let mut head = [0u8; 96];
    let Ok(n) = file.read(&mut head) else {
        return false;
    };
    String::from_utf8_lossy(&head[..n]).contains("world-skeleton-sequence")
}

fn load_one_sequence(
    path: &Path,
    camera: &CameraParams,
) -> Result<WorldSkeletonSequence, CoreError> {
    let is_json = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e == "json");
    if is_json && is_world_artifact(path) {
        load_world_sequence(path)
    } else {
        project_sequence(&load_sequence(path)?, camera)
    }
}

/// Load `path` — one sequence file or a directory of them — as world
/// sequences, projecting raw files through `camera`.
fn load_world_input(
    path: &Path,
    camera: &CameraParams,
) -> anyhow::Result<Vec<WorldSkeletonSequence>> {
    let meta = fs::metadata(path).with_context(|| format!("input {}", path.display()))?;
    if !meta.is_dir() {
        return Ok(vec![load_one_sequence(path, camera)?]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e, "jsonl" | "json" | "csv"))
        })
        .collect();
    files.sort();
    ensure!(
        !files.is_empty(),
        "no sequence files (.jsonl/.json/.csv) in {}",
        path.display()
    );
    files
        .iter()
        .map(|p| Ok(load_one_sequence(p, camera)?))
        .collect()
}

fn write_pretty_json<T: serde::Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_repair(config: &PipelineConfig, jobs: Option<usize>, args: RepairArgs) -> anyhow::Result<()> {
    let seqs = load_world_input(&args.input, &config.camera)?;
    let dir_input = fs::metadata(&args.input)?.is_dir();

    let out_dir = dir_input.then(|| args.out.clone());
    let (repaired, reports) = with_jobs(jobs.unwrap_or(config.jobs), || {
        repair_stage(&seqs, &config.repair, out_dir.as_deref())
    })?;
    if !dir_input {
        save_world_sequence(&repaired[0], &args.out)?;
    }

    if let Some(path) = &args.report {
        if dir_input {
            write_pretty_json(&reports, path)?;
        } else {
            write_pretty_json(&reports[0], path)?;
        }
    }
    if let Some(path) = &args.emit_plot {
        let joint = args.plot_joint;
        let axis: Axis = args.plot_axis.into();
        let before = &seqs[0].track(joint, axis).values;
        let after = &repaired[0].track(joint, axis).values;
        let title = format!("{}.{} — {}", joint.name(), axis.name(), seqs[0].sequence_id);
        fs::write(path, plot::track_panels(&title, "meters", before, after))?;
    }

    let totals = |f: fn(&RepairReport) -> usize| reports.iter().map(f).sum::<usize>();
    emit(format!(
        "repaired {} sequence(s): {} missing samples filled, {} jumps corrected, \
         {} level resets, {} uncorrectable samples",
        repaired.len(),
        totals(|r| r.totals.missing_corrected),
        totals(|r| r.totals.jump_corrected),
        totals(|r| r.totals.level_resets),
        totals(|r| r.totals.uncorrectable),
    ))?;
    for report in &reports {
        for warning in &report.warnings {
            emit(format!("warning: {}: {warning}", report.sequence_id))?;
        }
    }
    Ok(())
}

fn cmd_features(
    config: &PipelineConfig,
    jobs: Option<usize>,
    args: FeaturesArgs,
) -> anyhow::Result<()> {
    let scheme = args.scheme.map_or(config.scheme, FeatureScheme::from);
    let missing = if args.keep_zeros {
        MissingPolicy::KeepZeros
    } else {
        MissingPolicy::Reject
    };
    let seqs = load_world_input(&args.input, &config.camera)?;
    let dir_input = fs::metadata(&args.input)?.is_dir();

    let out_dir = dir_input.then(|| args.out.clone());
    let tables = with_jobs(jobs.unwrap_or(config.jobs), || {
        feature_stage(&seqs, scheme, missing, out_dir.as_deref())
    })?;
    if !dir_input {
        save_feature_table(&tables[0], &args.out)?;
    }
    emit(format!(
        "wrote {} feature table(s), {} columns each, to {}",
        tables.len(),
        tables[0].columns.len(),
        args.out.display()
    ))?;
    Ok(())
}

fn cmd_cycle(config: &PipelineConfig, args: CycleArgs) -> anyhow::Result<()> {
    let mut cycle_cfg = config.cycle;
    if let Some(v) = args.min_prominence {
        cycle_cfg.min_prominence = v;
    }
    if let Some(v) = args.fallback_cycle {
        cycle_cfg.fallback_cycle = v;
    }
    if let Some(v) = args.iqr_factor {
        cycle_cfg.iqr_factor = v;
    }
    let missing = if args.keep_zeros {
        MissingPolicy::KeepZeros
    } else {
        MissingPolicy::Reject
    };
    let seqs = load_world_input(&args.input, &config.camera)?;
    let dir_input = fs::metadata(&args.input)?.is_dir();

    let estimates = cycle_stage(&seqs, &cycle_cfg, missing, args.out.as_deref())?;
    if dir_input {
        emit(serde_json::to_string_pretty(&estimates)?)?;
    } else {
        let only: &CycleEstimate = estimates.values().next().expect("one sequence loaded");
        emit(serde_json::to_string_pretty(only)?)?;
    }
    Ok(())
}

fn cmd_train_eval(config: &PipelineConfig, args: TrainEvalArgs) -> anyhow::Result<()> {
    let tables = load_feature_table_dir(&args.features)?;
    let window = args.window.unwrap_or(config.window);
    let cycles: BTreeMap<String, CycleEstimate> = match (&args.cycles, window) {
        (Some(path), _) => load_cycle_estimates(path)?,
        (None, WindowLength::Voted) => bail!(
            "the voted window needs --cycles <cycles.json> (from `gaitkit cycle`); \
             or pass a fixed --window <frames>"
        ),
        (None, WindowLength::Fixed(_)) => BTreeMap::new(),
    };

    let mut split = config.split.clone();
    if let Some(mode) = args.split {
        split.mode = mode.into();
    }
    if let Some(seed) = args.seed {
        split.seed = seed;
    }
    if let Some(fraction) = args.train_fraction {
        split.train_fraction = fraction;
    }
    let mut classifier = config.classifier.clone();
    if let Some(k) = args.k {
        classifier.k = k;
    }
    if let Some(metric) = args.metric {
        classifier.metric = metric.into();
    }
    let stride = args.stride.unwrap_or(config.stride);

    let (report, window_frames) = train_eval_stage(
        &tables,
        &cycles,
        window,
        stride,
        &split,
        &classifier,
        args.out_dir.as_deref(),
    )?;
    emit(render_report(&report, window_frames, stride))?;
    if let Some(path) = &args.report {
        write_pretty_json(&report, path)?;
    }
    if let Some(path) = &args.emit_plot {
        let title = format!("sequence confusion — {}", report.split);
        fs::write(path, plot::confusion_heatmap(&report.sequence_confusion, &title))?;
    }
    Ok(())
}

fn cmd_pipeline(
    mut config: PipelineConfig,
    jobs: Option<usize>,
    args: PipelineArgs,
) -> anyhow::Result<()> {
    config.skip_repair |= args.skip_repair;
    if let Some(scheme) = args.scheme {
        config.scheme = scheme.into();
    }
    if let Some(window) = args.window {
        config.window = window;
    }
    if let Some(stride) = args.stride {
        config.stride = stride;
    }
    if let Some(k) = args.k {
        config.classifier.k = k;
    }
    if let Some(metric) = args.metric {
        config.classifier.metric = metric.into();
    }
    if let Some(mode) = args.split {
        config.split.mode = mode.into();
    }
    if let Some(seed) = args.seed {
        config.split.seed = seed;
    }
    if let Some(fraction) = args.train_fraction {
        config.split.train_fraction = fraction;
    }
    if let Some(jobs) = jobs {
        config.jobs = jobs;
    }

    let outcome = run_pipeline(&args.input, &args.out, &config)?;
    emit(render_report(&outcome.report, outcome.window_frames, config.stride))?;
    for warning in &outcome.warnings {
        emit(format!("warning: {warning}"))?;
    }
    emit(format!("report: {}", outcome.report_path.display()))?;
    if let Some(path) = &args.emit_plot {
        let title = format!("sequence confusion — {}", outcome.report.split);
        fs::write(
            path,
            plot::confusion_heatmap(&outcome.report.sequence_confusion, &title),
        )?;
    }
    Ok(())
}

fn render_report(
    report: &gaitkit_core::classify::EvalReport,
    window_frames: usize,
    stride: usize,
) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "split:             {}", report.split);
    let _ = writeln!(out, "window:            {window_frames} frame(s), stride {stride}");
    let _ = writeln!(
        out,
        "train:             {} windows from {} sequences",
        report.train_windows, report.train_sequences
    );
    let _ = writeln!(
        out,
        "test:              {} windows from {} sequences",
        report.test_windows, report.test_sequences
    );
    let _ = writeln!(out, "window accuracy:   {:.4}", report.window_accuracy);
    let _ = writeln!(out, "sequence accuracy: {:.4}", report.sequence_accuracy);
    let _ = writeln!(out, "macro F-score:     {:.4}", report.macro_f_score);
    if let Some(micro) = report.micro_f_score {
        let _ = writeln!(out, "micro F-score:     {micro:.4}");
    }
    let per_subject: Vec<String> = report
        .per_subject_f_score
        .iter()
        .map(|(label, f)| format!("{label} {f:.2}"))
        .collect();
    let _ = writeln!(out, "per-subject F:     {}", per_subject.join("  "));
    if !report.subjects_missing_from_train.is_empty() {
        let _ = writeln!(
            out,
            "missing from train: {}",
            report.subjects_missing_from_train.join(", ")
        );
    }
    for warning in &report.warnings {
        let _ = writeln!(out, "warning: {warning}");
    }
    out.truncate(out.trim_end().len());
    out
}
