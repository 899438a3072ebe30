//! End-to-end orchestration: ingest → project → repair → features → cycles →
//! train/eval, with a self-describing artifact written per stage.
//!
//! Artifacts land under the run's output directory:
//!
//! ```text
//! 00_config.json             effective configuration echo
//! 01_world/<id>.json         projected world-coordinate sequences
//! 02_repaired/<id>.json      repaired sequences (absent when repair is skipped)
//! 02_repaired/reports/<id>.json   per-sequence repair reports
//! 03_features/<id>.csv       per-frame feature tables
//! 04_cycles/cycles.json      per-sequence gait-cycle estimates
//! 05_eval/report.json        the evaluation report (deterministic bytes)
//! 05_eval/split.json         train/test assignment + window length
//! ```
//!
//! Every stage can be re-run from the previous stage's artifact and produces
//! identical output; a fixed configuration and seed make the final report
//! byte-identical across runs. Stage failures carry the stage name
//! ([`Error::Stage`]).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    assign_split, evaluate_split, ClassifierConfig, EvalReport, LabeledDataset, LabeledWindow,
    SequenceKey, SplitAssignment, SplitSpec,
};
use crate::cycle::{
    ankle_distance, concatenate_features, estimate_cycle, vote_cycle, CycleConfig, CycleEstimate,
};
use crate::error::{Error, Result};
use crate::features::{sequence_features_with, FeatureScheme, MissingPolicy};
use crate::io::{
    load_sequence_dir, save_feature_table, save_world_sequence, FeatureTable,
};
use crate::projection::{project_sequence, validate_camera};
use crate::repair::{repair_sequence, RepairConfig, RepairReport};
use crate::skeleton::{CameraParams, JointId, RawSequence, WorldSkeletonSequence};

/// How long a classifier window is, in frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowLength {
    /// Vote the per-sequence cycle estimates of the *training* split (mode,
    /// ties to the smaller length). The default: windows cover one gait
    /// cycle, and the test split never influences the choice.
    #[default]
    Voted,
    /// A fixed window length; `fixed = 1` scores single frames.
    Fixed(usize),
}

/// Everything a pipeline run needs besides the input and output paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub camera: CameraParams,
    pub repair: RepairConfig,
    pub cycle: CycleConfig,
    pub classifier: ClassifierConfig,
    pub split: SplitSpec,
    pub scheme: FeatureScheme,
    /// Frames a window start advances between windows.
    pub stride: usize,
    pub window: WindowLength,
    /// Bypass the repair stage (the uncorrected baseline).
    pub skip_repair: bool,
    /// Worker-thread bound for sequence-level parallelism; 0 = all cores.
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            camera: CameraParams::default(),
            repair: RepairConfig::default(),
            cycle: CycleConfig::default(),
            classifier: ClassifierConfig::default(),
            split: SplitSpec::default(),
            scheme: FeatureScheme::default(),
            stride: 1,
            window: WindowLength::default(),
            skip_repair: false,
            jobs: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        validate_camera(&self.camera)?;
        self.repair.validate()?;
        self.cycle.validate()?;
        self.classifier.validate()?;
        self.split.validate()?;
        if self.stride == 0 {
            return Err(Error::Validation("stride must be positive".into()));
        }
        if self.window == WindowLength::Fixed(0) {
            return Err(Error::Validation(
                "a fixed window must be at least 1 frame".into(),
            ));
        }
        Ok(())
    }
}

/// What a pipeline run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub report: EvalReport,
    /// Window length actually used (the voted cycle, unless fixed).
    pub window_frames: usize,
    pub report_path: PathBuf,
    /// Ingestion and repair notes, in stage order.
    pub warnings: Vec<String>,
}

fn at_stage<T>(stage: &'static str, result: Result<T>) -> Result<T> {
    result.map_err(|e| Error::Stage {
        stage,
        source: Box::new(e),
    })
}

/// Run `f` under a bounded rayon pool (`jobs = 0` keeps the global default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if jobs == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Validation(format!("cannot build a {jobs}-thread pool: {e}")))?;
    pool.install(f)
}

/// Sequentialize a parallel map so the first error (in input order) wins.
fn par_try_map<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<U> + Sync + Send,
) -> Result<Vec<U>> {
    items
        .par_iter()
        .map(f)
        .collect::<Vec<Result<U>>>()
        .into_iter()
        .collect()
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, value)
        .map_err(|e| Error::Validation(format!("serializing {}: {e}", path.display())))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Sequence ids become artifact file stems, so they must be path-safe.
fn check_sequence_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "sequence id {id:?} is not usable as a file name \
             (allowed: ASCII letters, digits, '-', '_', '.')"
        )))
    }
}

/// The pipeline's input contract: at least two subjects with at least two
/// sequences each, unique path-safe sequence ids.
fn check_dataset_shape(raws: &[RawSequence]) -> Result<()> {
    let mut per_subject: BTreeMap<&str, usize> = BTreeMap::new();
    let mut ids = std::collections::BTreeSet::new();
    for seq in raws {
        check_sequence_id(&seq.sequence_id)?;
        if !ids.insert(&seq.sequence_id) {
            return Err(Error::Validation(format!(
                "duplicate sequence id {}",
                seq.sequence_id
            )));
        }
        *per_subject.entry(&seq.subject_label).or_insert(0) += 1;
    }
    if per_subject.len() < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 subjects, found {}",
            per_subject.len()
        )));
    }
    if let Some((subject, count)) = per_subject.iter().find(|(_, &c)| c < 2) {
        return Err(Error::Validation(format!(
            "subject {subject} has {count} sequence(s); need at least 2 per subject"
        )));
    }
    Ok(())
}

/// Project raw sequences to world coordinates, writing one artifact per
/// sequence when `out_dir` is given.
pub fn project_stage(
    raws: &[RawSequence],
    camera: &CameraParams,
    out_dir: Option<&Path>,
) -> Result<Vec<WorldSkeletonSequence>> {
    let stage = "project";
    let world = at_stage(stage, par_try_map(raws, |raw| project_sequence(raw, camera)))?;
    if let Some(dir) = out_dir {
        at_stage(stage, std::fs::create_dir_all(dir).map_err(Error::Io))?;
        for seq in &world {
            at_stage(
                stage,
                save_world_sequence(seq, &dir.join(format!("{}.json", seq.sequence_id))),
            )?;
        }
    }
    Ok(world)
}

/// Repair every sequence, writing repaired sequences and per-sequence repair
/// reports when `out_dir` is given.
pub fn repair_stage(
    seqs: &[WorldSkeletonSequence],
    cfg: &RepairConfig,
    out_dir: Option<&Path>,
) -> Result<(Vec<WorldSkeletonSequence>, Vec<RepairReport>)> {
    let stage = "repair";
    let outcome = at_stage(stage, par_try_map(seqs, |seq| repair_sequence(seq, cfg)))?;
    let (repaired, reports): (Vec<_>, Vec<_>) = outcome.into_iter().unzip();
    if let Some(dir) = out_dir {
        let report_dir = dir.join("reports");
        at_stage(stage, std::fs::create_dir_all(&report_dir).map_err(Error::Io))?;
        for (seq, report) in repaired.iter().zip(&reports) {
            at_stage(
                stage,
                save_world_sequence(seq, &dir.join(format!("{}.json", seq.sequence_id))),
            )?;
            at_stage(
                stage,
                write_json(report, &report_dir.join(format!("{}.json", seq.sequence_id))),
            )?;
        }
    }
    Ok((repaired, reports))
}

/// Extract per-frame feature tables, writing one CSV per sequence when
/// `out_dir` is given.
pub fn feature_stage(
    seqs: &[WorldSkeletonSequence],
    scheme: FeatureScheme,
    missing: MissingPolicy,
    out_dir: Option<&Path>,
) -> Result<Vec<FeatureTable>> {
    let stage = "features";
    let tables = at_stage(
        stage,
        par_try_map(seqs, |seq| {
            Ok(FeatureTable {
                sequence_id: seq.sequence_id.clone(),
                subject_label: seq.subject_label.clone(),
                walk_type: seq.walk_type.clone(),
                rows: sequence_features_with(seq, scheme, missing)?,
                columns: scheme.column_names(),
            })
        }),
    )?;
    if let Some(dir) = out_dir {
        at_stage(stage, std::fs::create_dir_all(dir).map_err(Error::Io))?;
        for table in &tables {
            at_stage(
                stage,
                save_feature_table(table, &dir.join(format!("{}.csv", table.sequence_id))),
            )?;
        }
    }
    Ok(tables)
}

/// The ankle-to-ankle distance series a cycle estimate runs on. With
/// [`MissingPolicy::KeepZeros`], missing ankles contribute their raw zeros —
/// the garbage a repair-free pipeline genuinely operates on.
fn ankle_series(seq: &WorldSkeletonSequence, missing: MissingPolicy) -> Result<Vec<f64>> {
    match missing {
        MissingPolicy::Reject => ankle_distance(seq),
        MissingPolicy::KeepZeros => Ok((0..seq.len())
            .map(|t| {
                let r = seq.point_raw(JointId::RAnkle, t);
                let l = seq.point_raw(JointId::LAnkle, t);
                ((r[0] - l[0]).powi(2) + (r[1] - l[1]).powi(2) + (r[2] - l[2]).powi(2)).sqrt()
            })
            .collect()),
    }
}

/// Format tag for the cycle-estimates artifact.
pub const CYCLES_FORMAT: &str = "cycle-estimates";
/// Current cycle-estimates artifact version.
pub const CYCLES_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CyclesFile {
    format: String,
    version: u32,
    per_sequence: BTreeMap<String, CycleEstimate>,
}

/// Write per-sequence cycle estimates as one JSON artifact.
pub fn save_cycle_estimates(
    estimates: &BTreeMap<String, CycleEstimate>,
    path: &Path,
) -> Result<()> {
    write_json(
        &CyclesFile {
            format: CYCLES_FORMAT.to_owned(),
            version: CYCLES_VERSION,
            per_sequence: estimates.clone(),
        },
        path,
    )
}

/// Read a cycle-estimates artifact written by [`save_cycle_estimates`].
pub fn load_cycle_estimates(path: &Path) -> Result<BTreeMap<String, CycleEstimate>> {
    let reader = BufReader::new(File::open(path)?);
    let file: CyclesFile = serde_json::from_reader(reader)
        .map_err(|e| Error::parse(path.display().to_string(), e.line().max(1), e.to_string()))?;
    if file.format != CYCLES_FORMAT {
        return Err(Error::Validation(format!(
            "{}: format {:?} is not a cycle-estimates artifact",
            path.display(),
            file.format
        )));
    }
    if file.version != CYCLES_VERSION {
        return Err(Error::Validation(format!(
            "{}: unsupported cycle-estimates version {}",
            path.display(),
            file.version
        )));
    }
    Ok(file.per_sequence)
}

/// Estimate every sequence's gait cycle, writing the estimates artifact when
/// `out_file` is given.
pub fn cycle_stage(
    seqs: &[WorldSkeletonSequence],
    cfg: &CycleConfig,
    missing: MissingPolicy,
    out_file: Option<&Path>,
) -> Result<BTreeMap<String, CycleEstimate>> {
    let stage = "cycle";
    let mut estimates = BTreeMap::new();
    for seq in seqs {
        let series = at_stage(stage, ankle_series(seq, missing))?;
        let estimate = at_stage(stage, estimate_cycle(&series, cfg))?;
        estimates.insert(seq.sequence_id.clone(), estimate);
    }
    if let Some(path) = out_file {
        at_stage(stage, save_cycle_estimates(&estimates, path))?;
    }
    Ok(estimates)
}

/// Train/test assignment artifact: the split plus the window geometry the
/// evaluation used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitArtifact {
    pub assignment: SplitAssignment,
    pub window_frames: usize,
    pub stride: usize,
}

/// Split sequences, choose the window length, window the feature rows, and
/// score the held-out split. Writes `report.json` and `split.json` into
/// `out_dir` when given. Returns the report and the window length used.
#[allow(clippy::too_many_arguments)]
pub fn train_eval_stage(
    tables: &[FeatureTable],
    cycles: &BTreeMap<String, CycleEstimate>,
    window: WindowLength,
    stride: usize,
    split: &SplitSpec,
    classifier: &ClassifierConfig,
    out_dir: Option<&Path>,
) -> Result<(EvalReport, usize)> {
    let stage = "train-eval";
    let keys: Vec<SequenceKey> = tables
        .iter()
        .map(|t| SequenceKey {
            sequence_id: t.sequence_id.clone(),
            subject_label: t.subject_label.clone(),
            walk_type: t.walk_type.clone(),
        })
        .collect();
    let assignment = at_stage(stage, assign_split(&keys, split))?;

    let window_frames = match window {
        WindowLength::Fixed(n) => n,
        WindowLength::Voted => {
            let train_cycles: Vec<usize> = tables
                .iter()
                .filter(|t| assignment.train.contains(&t.sequence_id))
                .map(|t| {
                    cycles
                        .get(&t.sequence_id)
                        .map(|e| e.cycle_frames)
                        .ok_or_else(|| {
                            Error::Validation(format!(
                                "no cycle estimate for sequence {}",
                                t.sequence_id
                            ))
                        })
                })
                .collect::<Result<_>>()
                .map_err(|e| Error::Stage {
                    stage,
                    source: Box::new(e),
                })?;
            vote_cycle(&train_cycles).expect("split guarantees a nonempty training side")
        }
    };

    let mut train_windows = Vec::new();
    let mut test_windows = Vec::new();
    for table in tables {
        let windows = at_stage(
            stage,
            concatenate_features(&table.rows, window_frames, stride, &table.subject_label),
        )?;
        let labeled = windows
            .into_iter()
            .map(|w| LabeledWindow::from_window(w, &table.sequence_id, &table.walk_type));
        if assignment.train.contains(&table.sequence_id) {
            train_windows.extend(labeled);
        } else {
            test_windows.extend(labeled);
        }
    }
    let train = at_stage(stage, LabeledDataset::new(train_windows))?;
    let test = at_stage(stage, LabeledDataset::new(test_windows))?;
    let report = at_stage(
        stage,
        evaluate_split(&train, &test, classifier, &assignment.description),
    )?;

    if let Some(dir) = out_dir {
        at_stage(stage, write_json(&report, &dir.join("report.json")))?;
        at_stage(
            stage,
            write_json(
                &SplitArtifact {
                    assignment,
                    window_frames,
                    stride,
                },
                &dir.join("split.json"),
            ),
        )?;
    }
    Ok((report, window_frames))
}

/// Run the whole pipeline from a directory of raw sequences.
///
/// Fails with [`Error::Stage`] naming the failing stage; a missing input
/// directory keeps its not-found root cause so callers can distinguish it.
pub fn run_pipeline(
    input_dir: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome> {
    cfg.validate()?;
    with_jobs(cfg.jobs, || run_stages(input_dir, out_dir, cfg))
}

fn run_stages(input_dir: &Path, out_dir: &Path, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let raws = at_stage("ingest", load_sequence_dir(input_dir))?;
    at_stage("ingest", check_dataset_shape(&raws))?;
    let mut warnings: Vec<String> = raws
        .iter()
        .flat_map(|s| s.warnings.iter().map(move |w| format!("{}: {w}", s.sequence_id)))
        .collect();
    at_stage("ingest", write_json(cfg, &out_dir.join("00_config.json")))?;

    let world = project_stage(&raws, &cfg.camera, Some(&out_dir.join("01_world")))?;

    let (sequences, missing) = if cfg.skip_repair {
        (world, MissingPolicy::KeepZeros)
    } else {
        let (repaired, reports) =
            repair_stage(&world, &cfg.repair, Some(&out_dir.join("02_repaired")))?;
        for report in &reports {
            warnings.extend(
                report
                    .warnings
                    .iter()
                    .map(|w| format!("{}: {w}", report.sequence_id)),
            );
        }
        (repaired, MissingPolicy::Reject)
    };

    let tables = feature_stage(
        &sequences,
        cfg.scheme,
        missing,
        Some(&out_dir.join("03_features")),
    )?;
    let cycles = cycle_stage(
        &sequences,
        &cfg.cycle,
        missing,
        Some(&out_dir.join("04_cycles").join("cycles.json")),
    )?;

    let eval_dir = out_dir.join("05_eval");
    let (report, window_frames) = train_eval_stage(
        &tables,
        &cycles,
        cfg.window,
        cfg.stride,
        &cfg.split,
        &cfg.classifier,
        Some(&eval_dir),
    )?;

    Ok(PipelineOutcome {
        report,
        window_frames,
        report_path: eval_dir.join("report.json"),
        warnings,
    })
}

/// One cell of the comparative baseline grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineCell {
    pub scheme: FeatureScheme,
    pub repair_enabled: bool,
    pub window_frames: usize,
    pub report: EvalReport,
}

/// Score the same split under {pair-distance, pair-vector} features × repair
/// {off, on} — the four-cell grid that isolates what the feature scheme and
/// the repair stage each contribute. Cells appear scheme-major
/// (distances-off, distances-on, vectors-off, vectors-on).
pub fn baseline_suite(
    sequences: &[WorldSkeletonSequence],
    cfg: &PipelineConfig,
) -> Result<Vec<BaselineCell>> {
    cfg.validate()?;
    with_jobs(cfg.jobs, || {
        let (repaired, _) = repair_stage(sequences, &cfg.repair, None)?;
        let mut cells = Vec::with_capacity(4);
        for scheme in [FeatureScheme::PairDistances, FeatureScheme::PairVectors] {
            for repair_enabled in [false, true] {
                let (working, missing): (&[WorldSkeletonSequence], _) = if repair_enabled {
                    (&repaired, MissingPolicy::Reject)
                } else {
                    (sequences, MissingPolicy::KeepZeros)
                };
                let tables = feature_stage(working, scheme, missing, None)?;
                let cycles = cycle_stage(working, &cfg.cycle, missing, None)?;
                let (report, window_frames) = train_eval_stage(
                    &tables,
                    &cycles,
                    cfg.window,
                    cfg.stride,
                    &cfg.split,
                    &cfg.classifier,
                    None,
                )?;
                cells.push(BaselineCell {
                    scheme,
                    repair_enabled,
                    window_frames,
                    report,
                });
            }
        }
        Ok(cells)
    })
}
