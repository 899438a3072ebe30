//! Gait-cycle estimation and cycle-length feature windows.
//!
//! The ankle-to-ankle distance oscillates with the stride: it peaks twice per
//! full gait cycle (left and right steps). The cycle length in frames is
//! therefore the gap between every second prominent peak of that series. The
//! candidate gaps are cleaned with a 1.5·IQR fence and resolved by majority
//! vote; too few peaks fall back to a configured default.
//!
//! Feature windows concatenate the per-frame vectors of one cycle so the
//! classifier sees a whole stride of dynamics rather than a single pose.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{JointId, WorldSkeletonSequence};

/// Cycle-estimation tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleConfig {
    /// Minimum peak prominence, in the series' units (meters for ankle
    /// distance).
    pub min_prominence: f64,
    /// Cycle length assumed when fewer than three prominent peaks exist.
    pub fallback_cycle: usize,
    /// Fence width in IQR multiples for candidate trimming.
    pub iqr_factor: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            min_prominence: 0.1,
            fallback_cycle: 20,
            iqr_factor: 1.5,
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_prominence >= 0.0) {
            return Err(Error::Validation(format!(
                "min_prominence must be nonnegative, got {}",
                self.min_prominence
            )));
        }
        if self.fallback_cycle == 0 {
            return Err(Error::Validation("fallback_cycle must be positive".into()));
        }
        if !(self.iqr_factor >= 0.0) {
            return Err(Error::Validation(format!(
                "iqr_factor must be nonnegative, got {}",
                self.iqr_factor
            )));
        }
        Ok(())
    }
}

/// Per-frame Euclidean distance between the two ankles. Requires a repaired
/// sequence: a missing ankle sample has no usable position.
pub fn ankle_distance(seq: &WorldSkeletonSequence) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(seq.len());
    for frame in 0..seq.len() {
        let r = seq.point(JointId::RAnkle, frame);
        let l = seq.point(JointId::LAnkle, frame);
        let (Some(r), Some(l)) = (r, l) else {
            return Err(Error::Validation(format!(
                "sequence {}: ankle missing at frame {frame}; repair before cycle estimation",
                seq.sequence_id
            )));
        };
        out.push(
            ((r[0] - l[0]).powi(2) + (r[1] - l[1]).powi(2) + (r[2] - l[2]).powi(2)).sqrt(),
        );
    }
    Ok(out)
}

/// Prominence of the peak at `peak`: its height above the higher of the two
/// valley floors separating it from taller terrain (or the series edge).
fn prominence(series: &[f64], peak: usize) -> f64 {
    let height = series[peak];
    let mut left_min = height;
    let mut i = peak;
    while i > 0 {
        i -= 1;
        if series[i] > height {
            break;
        }
        left_min = left_min.min(series[i]);
    }
    let mut right_min = height;
    let mut i = peak;
    while i + 1 < series.len() {
        i += 1;
        if series[i] > height {
            break;
        }
        right_min = right_min.min(series[i]);
    }
    height - left_min.max(right_min)
}

/// Indices of local maxima with prominence ≥ `min_prominence`. A flat-topped
/// peak reports its middle sample; series endpoints are never peaks.
pub fn find_peaks(series: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = series.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if series[i] > series[i - 1] {
            let mut j = i;
            while j + 1 < n && series[j + 1] == series[j] {
                j += 1;
            }
            if j + 1 < n && series[j + 1] < series[j] {
                let peak = (i + j) / 2;
                if prominence(series, peak) >= min_prominence {
                    peaks.push(peak);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Linear-interpolation quartiles of a sorted slice (the convention where the
/// p-quantile sits at fractional rank `p · (n − 1)`).
fn quartiles(sorted: &[f64]) -> (f64, f64) {
    debug_assert!(!sorted.is_empty());
    let at = |p: f64| {
        let rank = p * (sorted.len() - 1) as f64;
        let lo = rank.floor() as usize;
        let hi = rank.ceil() as usize;
        let frac = rank - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    };
    (at(0.25), at(0.75))
}

/// Drop candidates outside `[Q1 − f·IQR, Q3 + f·IQR]`. At least one candidate
/// always survives (the quartiles lie inside their own fence).
pub fn trim_candidates(candidates: &[usize], iqr_factor: f64) -> Vec<usize> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = candidates.iter().map(|&c| c as f64).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("candidates are finite"));
    let (q1, q3) = quartiles(&sorted);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - iqr_factor * iqr, q3 + iqr_factor * iqr);
    candidates
        .iter()
        .copied()
        .filter(|&c| {
            let c = c as f64;
            c >= lo && c <= hi
        })
        .collect()
}

/// Most frequent value; ties resolve to the smaller value.
pub fn vote_cycle(values: &[usize]) -> Option<usize> {
    let mut counts = std::collections::BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    let mut best: Option<(usize, usize)> = None;
    for (value, count) in counts {
        if best.map_or(true, |(_, c)| count > c) {
            best = Some((value, count));
        }
    }
    best.map(|(v, _)| v)
}

/// Outcome of cycle estimation for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEstimate {
    /// Voted cycle length in frames.
    pub cycle_frames: usize,
    /// Prominent peak indices found in the series.
    pub peaks: Vec<usize>,
    /// Gaps between every second peak.
    pub candidate_cycles: Vec<usize>,
    /// Candidates surviving the IQR fence (empty when the fallback fired).
    pub trimmed_cycles: Vec<usize>,
    /// True when fewer than three peaks forced the fallback cycle.
    pub used_fallback: bool,
}

/// Estimate the gait cycle from an ankle-distance series.
///
/// Candidates are `peak[i+2] − peak[i]` for consecutive prominent peaks — one
/// full left-plus-right cycle each. After IQR trimming, the mode wins (ties
/// to the smaller length). Fewer than three peaks yield the configured
/// fallback with `used_fallback` set.
pub fn estimate_cycle(series: &[f64], cfg: &CycleConfig) -> Result<CycleEstimate> {
    cfg.validate()?;
    let peaks = find_peaks(series, cfg.min_prominence);
    if peaks.len() < 3 {
        return Ok(CycleEstimate {
            cycle_frames: cfg.fallback_cycle,
            peaks,
            candidate_cycles: Vec::new(),
            trimmed_cycles: Vec::new(),
            used_fallback: true,
        });
    }
    let candidate_cycles: Vec<usize> = peaks.windows(3).map(|w| w[2] - w[0]).collect();
    let trimmed_cycles = trim_candidates(&candidate_cycles, cfg.iqr_factor);
    let cycle_frames =
        vote_cycle(&trimmed_cycles).expect("IQR fence keeps at least the central candidates");
    Ok(CycleEstimate {
        cycle_frames,
        peaks,
        candidate_cycles,
        trimmed_cycles,
        used_fallback: false,
    })
}

/// One classifier sample: a cycle's worth of frame features, flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFeature {
    /// Frame index of the window's first row.
    pub start_frame: usize,
    /// Identity the window belongs to.
    pub subject_label: String,
    pub values: Vec<f64>,
}

/// Slide a `cycle_frames`-long window over per-frame feature rows, advancing
/// `stride` frames, flattening each window row-major. A sequence shorter than
/// one cycle yields no windows; `cycle_frames = 1, stride = 1` reproduces the
/// rows.
pub fn concatenate_features(
    rows: &[Vec<f64>],
    cycle_frames: usize,
    stride: usize,
    subject_label: &str,
) -> Result<Vec<WindowFeature>> {
    if cycle_frames == 0 || stride == 0 {
        return Err(Error::Validation(
            "cycle_frames and stride must be positive".into(),
        ));
    }
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.len() != first.len()) {
            return Err(Error::Validation(
                "feature rows must share one dimension".into(),
            ));
        }
    }
    let mut windows = Vec::new();
    if rows.len() < cycle_frames {
        return Ok(windows);
    }
    let mut start = 0;
    while start + cycle_frames <= rows.len() {
        let mut values = Vec::with_capacity(cycle_frames * rows[start].len());
        for row in &rows[start..start + cycle_frames] {
            values.extend_from_slice(row);
        }
        windows.push(WindowFeature {
            start_frame: start,
            subject_label: subject_label.to_owned(),
            values,
        });
        start += stride;
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{tracks_from_frames, JOINT_COUNT};

    fn seq_with_ankles(frames: usize, r: [f64; 3], l: [f64; 3]) -> WorldSkeletonSequence {
        let mut points = vec![[Some([1.0, 1.0, 1.0]); JOINT_COUNT]; frames];
        for frame in &mut points {
            frame[JointId::RAnkle as usize] = Some(r);
            frame[JointId::LAnkle as usize] = Some(l);
        }
        WorldSkeletonSequence::new(
            "s".into(),
            "toward".into(),
            "seq".into(),
            tracks_from_frames(&points),
        )
        .unwrap()
    }

    #[test]
    fn ankle_distance_of_3_4_tracks_is_5() {
        let seq = seq_with_ankles(4, [1.0, 1.0, 2.0], [4.0, 5.0, 2.0]);
        let dist = ankle_distance(&seq).unwrap();
        assert_eq!(dist, vec![5.0; 4]);
    }

    #[test]
    fn coincident_ankles_give_zero_distance() {
        let seq = seq_with_ankles(3, [1.0, 1.0, 2.0], [1.0, 1.0, 2.0]);
        assert_eq!(ankle_distance(&seq).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn missing_ankle_is_rejected() {
        let mut points = vec![[Some([1.0, 1.0, 1.0]); JOINT_COUNT]; 3];
        points[1][JointId::LAnkle as usize] = None;
        let seq = WorldSkeletonSequence::new(
            "s".into(),
            "toward".into(),
            "seq".into(),
            tracks_from_frames(&points),
        )
        .unwrap();
        assert!(ankle_distance(&seq).is_err());
    }

    #[test]
    fn finds_sinusoid_peaks_and_votes_their_double_gap() {
        // Peaks at t = 5, 15, 25, 35: candidates {20, 20}, estimate 20.
        let series: Vec<f64> = (0..40)
            .map(|t| 1.0 - (2.0 * std::f64::consts::PI * t as f64 / 10.0).cos())
            .collect();
        let est = estimate_cycle(&series, &CycleConfig::default()).unwrap();
        assert_eq!(est.peaks, vec![5, 15, 25, 35]);
        assert_eq!(est.candidate_cycles, vec![20, 20]);
        assert_eq!(est.cycle_frames, 20);
        assert!(!est.used_fallback);
    }

    #[test]
    fn plateau_peak_reports_its_middle() {
        let series = vec![0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0];
        assert_eq!(find_peaks(&series, 0.5), vec![3]);
    }

    #[test]
    fn low_prominence_ripples_are_ignored() {
        let mut series = vec![0.0; 30];
        for (t, v) in series.iter_mut().enumerate() {
            *v = 1.0 + 0.01 * ((t % 2) as f64); // 0.01-high sawtooth
        }
        assert!(find_peaks(&series, 0.1).is_empty());
    }

    #[test]
    fn flat_series_uses_fallback() {
        let est = estimate_cycle(&[1.0; 50], &CycleConfig::default()).unwrap();
        assert!(est.used_fallback);
        assert_eq!(est.cycle_frames, 20);
        assert!(est.peaks.is_empty());
    }

    #[test]
    fn iqr_fence_drops_outliers_before_the_vote() {
        let kept = trim_candidates(&[20, 20, 20, 20, 3, 60], 1.5);
        assert_eq!(kept, vec![20, 20, 20, 20]);
        assert_eq!(vote_cycle(&kept), Some(20));
    }

    #[test]
    fn equal_candidates_survive_trimming() {
        let kept = trim_candidates(&[18, 18, 18], 1.5);
        assert_eq!(kept, vec![18, 18, 18]);
    }

    #[test]
    fn vote_ties_resolve_to_the_smaller_value() {
        assert_eq!(vote_cycle(&[3, 2, 3, 2]), Some(2));
        assert_eq!(vote_cycle(&[]), None);
    }

    #[test]
    fn estimate_is_invariant_to_scaling_series_and_prominence() {
        let series: Vec<f64> = (0..60)
            .map(|t| 1.0 - (2.0 * std::f64::consts::PI * t as f64 / 8.0).cos())
            .collect();
        let base = estimate_cycle(&series, &CycleConfig::default()).unwrap();
        let scaled_series: Vec<f64> = series.iter().map(|v| v * 7.25).collect();
        let scaled_cfg = CycleConfig {
            min_prominence: 0.1 * 7.25,
            ..CycleConfig::default()
        };
        let scaled = estimate_cycle(&scaled_series, &scaled_cfg).unwrap();
        assert_eq!(base.peaks, scaled.peaks);
        assert_eq!(base.cycle_frames, scaled.cycle_frames);
    }

    #[test]
    fn window_concatenation_shapes() {
        let rows: Vec<Vec<f64>> = (0..7).map(|t| vec![t as f64; 36]).collect();
        let exact = concatenate_features(&rows[..5], 5, 1, "s01").unwrap();
        assert_eq!(exact.len(), 1);
        assert_eq!(exact[0].values.len(), 180);
        assert_eq!(exact[0].start_frame, 0);
        assert_eq!(exact[0].subject_label, "s01");

        let sliding = concatenate_features(&rows, 5, 1, "s01").unwrap();
        assert_eq!(sliding.len(), 3);
        assert_eq!(
            sliding.iter().map(|w| w.start_frame).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );

        let unit = concatenate_features(&rows, 1, 1, "s01").unwrap();
        assert_eq!(unit.len(), 7);
        assert_eq!(unit[3].values, rows[3]);

        let short = concatenate_features(&rows[..3], 5, 1, "s01").unwrap();
        assert!(short.is_empty());
    }

    #[test]
    fn window_values_keep_frame_order() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let windows = concatenate_features(&rows, 2, 1, "s").unwrap();
        assert_eq!(windows[0].values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(windows[1].values, vec![3.0, 4.0, 5.0, 6.0]);
    }
}
