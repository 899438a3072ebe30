//! Rule-based short-memory median repair for joint tracks.
//!
//! A track sample needs correction when it is missing (the `0.0` sentinel) or
//! when it jumps: the relative change from the previous (already corrected)
//! sample exceeds a threshold derived from the track itself. The replacement
//! is the median of the most recent `window_card` nonzero samples within a
//! `lookback`-frame horizon — corrected values included, so a long dropout is
//! bridged by its own repairs.
//!
//! The pass is causal (left to right) with three documented exceptions: the
//! jump threshold is computed from the whole raw track up front; a leading
//! gap (missing samples before the first observed value) is backfilled with
//! the first available value after the pass; and a persistent disagreement
//! resets the filter's memory. The last rule exists because the median
//! window follows the *output*: a correction feeds a stale value back into
//! the window, so when the window cannot keep up with the stream — a
//! corrupted opening sample anchoring the window off-track, or a steady ramp
//! whose per-frame change sits near the threshold — every subsequent clean
//! sample "jumps" relative to the frozen memory and the corrections cascade.
//! `window_card` consecutive jump corrections therefore outvote the memory:
//! the current sample is accepted as the new level. If no sample had yet
//! passed the jump test (the anchor itself was condemned), the frozen prefix
//! is also rewritten to the accepted value; after that, past corrections
//! stand and the filter simply re-anchors going forward.
//!
//! The threshold is the median of the track's own nonzero frame-to-frame
//! differences. [`ThresholdMode`] picks the units: `Relative` (default)
//! divides each difference by the magnitude of the preceding sample so both
//! sides of the jump test are dimensionless; `LiteralEq4` uses the raw
//! differences in meters. Relative detection degenerates near zero crossings
//! (the denominator vanishes, so ordinary motion looks like a jump); tracks
//! that legitimately cross zero should use `LiteralEq4`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{Axis, JointId, WorldSkeletonSequence, MISSING};
use crate::smoothing::{smooth_track, SmoothingConfig};

/// How the jump threshold is derived from the raw track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Median of |Δ| / |previous|: dimensionless, comparable to the jump
    /// test's left-hand side. The default.
    #[default]
    Relative,
    /// Median of raw |Δ| in meters (the literal threshold definition).
    LiteralEq4,
}

/// Tuning for the repair pass. `lookback ≥ window_card ≥ 1` is required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairConfig {
    /// Median window cardinality (number of recent nonzero samples used).
    pub window_card: usize,
    /// How many frames back the window may reach.
    pub lookback: usize,
    pub threshold_mode: ThresholdMode,
    /// Post-repair robust smoother window (odd, frames).
    pub smoothing_span: usize,
    /// Bisquare reweighting rounds for the smoother.
    pub robust_iterations: usize,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            window_card: 3,
            lookback: 30,
            threshold_mode: ThresholdMode::Relative,
            smoothing_span: 15,
            robust_iterations: 3,
        }
    }
}

impl RepairConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_card == 0 {
            return Err(Error::Validation("window_card must be at least 1".into()));
        }
        if self.lookback < self.window_card {
            return Err(Error::Validation(format!(
                "lookback ({}) must be at least window_card ({})",
                self.lookback, self.window_card
            )));
        }
        self.smoothing().validate()
    }

    pub fn smoothing(&self) -> SmoothingConfig {
        SmoothingConfig {
            span: self.smoothing_span,
            robust_iterations: self.robust_iterations,
        }
    }
}

/// Median of a nonempty slice (sorts a copy; even counts average the two
/// middle values).
fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("track values are not NaN"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// Jump threshold for a raw track: the median of its nonzero frame-to-frame
/// differences, taken over consecutive pairs where both samples are present.
/// Returns `+∞` (jump detection disabled) when no such pair exists — a track
/// shorter than two samples, fully missing, or piecewise constant.
pub fn jump_threshold(values: &[f64], mode: ThresholdMode) -> f64 {
    let mut diffs = Vec::new();
    for pair in values.windows(2) {
        let (prev, curr) = (pair[0], pair[1]);
        if prev == MISSING || curr == MISSING {
            continue;
        }
        let diff = (curr - prev).abs();
        if diff == 0.0 {
            continue;
        }
        diffs.push(match mode {
            ThresholdMode::Relative => diff / prev.abs(),
            ThresholdMode::LiteralEq4 => diff,
        });
    }
    if diffs.is_empty() {
        f64::INFINITY
    } else {
        median(&diffs)
    }
}

/// Jump test: relative change from the previous corrected sample exceeds the
/// threshold. `prev` must be nonzero (the caller repairs in order, so the
/// previous sample is already corrected).
pub fn is_jump(prev: f64, curr: f64, threshold: f64) -> bool {
    debug_assert!(prev != MISSING);
    (curr - prev).abs() / prev.abs() > threshold
}

/// Outcome of repairing one track (before smoothing).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackRepair {
    pub values: Vec<f64>,
    /// Threshold used for jump detection (`+∞` disables it).
    pub threshold: f64,
    /// Missing samples replaced (leading-gap backfills included).
    pub missing_corrected: usize,
    /// Jumping samples replaced.
    pub jump_corrected: usize,
    /// Samples left at the sentinel — nonzero only when the whole track is
    /// missing.
    pub uncorrectable: usize,
    /// Times the stream outvoted the filter's memory (`window_card`
    /// consecutive jump corrections) and was accepted as the new level.
    /// Corrections applied during the losing streak stay counted above.
    pub level_resets: usize,
}

/// Repair one track with the threshold derived from its raw values.
pub fn repair_track(values: &[f64], cfg: &RepairConfig) -> TrackRepair {
    let threshold = jump_threshold(values, cfg.threshold_mode);
    repair_track_with_threshold(values, threshold, cfg)
}

/// Repair one track against an explicit jump threshold.
///
/// Single causal pass. At each frame the sample is kept unless it is missing
/// or jumps relative to the previous corrected sample; the replacement is the
/// median of the `window_card` most recent nonzero samples within `lookback`
/// frames (already-corrected samples included, so values never go stale more
/// than the horizon allows). When only an even number of samples is available
/// and their averaged median lands exactly on the `0.0` sentinel (a
/// sign-straddling window), the most recent window member is used instead so
/// the output never fabricates a missing marker.
///
/// A frame with no nonzero sample in its horizon can only precede the first
/// observed value (once any sample is nonzero, every later frame sees a
/// nonzero neighbor at distance 1); such leading frames are backfilled from
/// the first corrected value after the pass. Output therefore contains no
/// zeros unless the entire input track was missing, in which case it is
/// returned unchanged and `uncorrectable` equals the track length.
///
/// `window_card` consecutive jump corrections mean the window's memory, not
/// the stream, is off-track: the current sample is accepted as the new
/// level. Until some sample has passed the jump test the accepted value also
/// rewrites the (condemned anchor's) prefix — see the module docs.
pub fn repair_track_with_threshold(
    values: &[f64],
    threshold: f64,
    cfg: &RepairConfig,
) -> TrackRepair {
    debug_assert!(cfg.validate().is_ok());
    let mut out = values.to_vec();
    let mut missing_corrected = 0;
    let mut jump_corrected = 0;
    let mut level_resets = 0;
    let mut anchor_confirmed = false;
    let mut jump_streak = 0;

    for t in 0..out.len() {
        let current = out[t];
        let missing = current == MISSING;
        let prev_ok = t > 0 && out[t - 1] != MISSING;
        let jumping = !missing && prev_ok && is_jump(out[t - 1], current, threshold);
        if !missing && !jumping {
            if prev_ok {
                anchor_confirmed = true;
                jump_streak = 0;
            }
            continue;
        }
        if jumping {
            jump_streak += 1;
            if jump_streak >= cfg.window_card {
                // The stream has outvoted the filter's memory: accept the
                // current sample as the new level. An unconfirmed anchor is
                // condemned along with its frozen prefix (leading-gap
                // sentinels stay for the backfill pass below).
                if !anchor_confirmed {
                    for slot in out[..=t].iter_mut() {
                        if *slot != MISSING {
                            *slot = current;
                        }
                    }
                }
                level_resets += 1;
                jump_streak = 0;
                continue;
            }
        }
        let horizon_start = t.saturating_sub(cfg.lookback);
        let mut window = Vec::with_capacity(cfg.window_card);
        for i in (horizon_start..t).rev() {
            if out[i] != MISSING {
                window.push(out[i]);
                if window.len() == cfg.window_card {
                    break;
                }
            }
        }
        if window.is_empty() {
            continue; // leading gap: backfilled after the pass
        }
        let mut corrected = median(&window);
        if corrected == MISSING {
            corrected = window[0]; // most recent member; see doc comment
        }
        out[t] = corrected;
        if missing {
            missing_corrected += 1;
        } else {
            jump_corrected += 1;
        }
    }

    let mut uncorrectable = 0;
    match out.iter().copied().find(|&v| v != MISSING) {
        Some(first) => {
            for slot in out.iter_mut() {
                if *slot != MISSING {
                    break;
                }
                *slot = first;
                missing_corrected += 1;
            }
        }
        None => uncorrectable = out.len(),
    }

    TrackRepair {
        values: out,
        threshold,
        missing_corrected,
        jump_corrected,
        uncorrectable,
        level_resets,
    }
}

/// Per-track repair counters for the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRepairStats {
    pub joint: JointId,
    pub axis: Axis,
    /// `None` when jump detection was disabled (no usable differences).
    pub threshold: Option<f64>,
    pub missing_corrected: usize,
    pub jump_corrected: usize,
    pub uncorrectable: usize,
    pub level_resets: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairTotals {
    pub missing_corrected: usize,
    pub jump_corrected: usize,
    pub uncorrectable: usize,
    pub level_resets: usize,
}

/// What the repair stage did to one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub sequence_id: String,
    pub frames: usize,
    pub totals: RepairTotals,
    pub tracks: Vec<TrackRepairStats>,
    pub warnings: Vec<String>,
}

/// Repair all 42 tracks of a sequence, then smooth each with the robust
/// local linear smoother. Fully missing tracks are left untouched (and
/// skipped by the smoother) but flagged in the report.
pub fn repair_sequence(
    seq: &WorldSkeletonSequence,
    cfg: &RepairConfig,
) -> Result<(WorldSkeletonSequence, RepairReport)> {
    cfg.validate()?;
    let smoothing = cfg.smoothing();
    let mut stats = Vec::with_capacity(seq.tracks().len());
    let mut totals = RepairTotals::default();
    let mut warnings = Vec::new();

    let repaired = seq.map_tracks(|track| {
        let repair = repair_track(&track.values, cfg);
        totals.missing_corrected += repair.missing_corrected;
        totals.jump_corrected += repair.jump_corrected;
        totals.uncorrectable += repair.uncorrectable;
        totals.level_resets += repair.level_resets;
        if repair.uncorrectable > 0 {
            warnings.push(format!(
                "track {}.{} is entirely missing; left as sentinels",
                track.joint.name(),
                track.axis.name()
            ));
        }
        stats.push(TrackRepairStats {
            joint: track.joint,
            axis: track.axis,
            threshold: repair.threshold.is_finite().then_some(repair.threshold),
            missing_corrected: repair.missing_corrected,
            jump_corrected: repair.jump_corrected,
            uncorrectable: repair.uncorrectable,
            level_resets: repair.level_resets,
        });
        if repair.uncorrectable > 0 {
            repair.values
        } else {
            smooth_track(&repair.values, &smoothing)
        }
    })?;

    let report = RepairReport {
        sequence_id: seq.sequence_id.clone(),
        frames: seq.len(),
        totals,
        tracks: stats,
        warnings,
    };
    Ok((repaired, report))
}
