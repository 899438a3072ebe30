//! Acceptance gate: nine release criteria, each proved against an independent
//! reference implementation, a closed-form worked example, or a directional
//! end-to-end experiment. Every criterion prints one `PASS`/`FAIL` line
//! (visible with `cargo test --test acceptance -- --nocapture`); a `FAIL`
//! line always comes with a panic carrying the details.

use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use gaitkit_core::classify::{
    knn_predict, LabeledDataset, LabeledWindow, Metric, SplitMode, SplitSpec,
};
use gaitkit_core::cycle::{ankle_distance, estimate_cycle, CycleConfig};
use gaitkit_core::features::{frame_feature, FRAME_FEATURE_DIM};
use gaitkit_core::io::save_sequence_jsonl;
use gaitkit_core::pipeline::{run_pipeline, PipelineConfig, WindowLength};
use gaitkit_core::projection::project_joint;
use gaitkit_core::repair::{
    repair_sequence, repair_track, RepairConfig, ThresholdMode, TrackRepair,
};
use gaitkit_core::skeleton::{CameraParams, PixelOrigin, JOINT_COUNT};
use gaitkit_core::smoothing::{smooth_track, SmoothingConfig};
use gaitkit_core::synth::{
    corrupt_sequence, demo_dataset, demo_profiles, generate_sequence, to_raw_sequence,
    CorruptionConfig, WalkType,
};

/// Prints the criterion's verdict line exactly once — `PASS` only if the test
/// body reached `pass()`, `FAIL` when a panic unwinds past the guard.
struct Verdict {
    line: &'static str,
    passed: bool,
}

fn verdict(line: &'static str) -> Verdict {
    Verdict { line, passed: false }
}

impl Verdict {
    fn pass(mut self) {
        self.passed = true;
    }
}

impl Drop for Verdict {
    fn drop(&mut self) {
        println!(
            "acceptance {}: {}",
            self.line,
            if self.passed { "PASS" } else { "FAIL" }
        );
    }
}

/// The repair configuration the synthetic experiments run under: literal
/// (raw-difference) thresholds because sinusoidal tracks cross zero, and a
/// smoothing span matched to the demo roster's 16–36-frame gait cycles.
fn experiment_repair() -> RepairConfig {
    RepairConfig {
        threshold_mode: ThresholdMode::LiteralEq4,
        smoothing_span: 7,
        ..RepairConfig::default()
    }
}

// ---------------------------------------------------------------------------
// criterion 1 — repair filter vs. an exhaustive reference
// ---------------------------------------------------------------------------

/// Naive re-implementation of the documented repair contract, written for
/// clarity over speed: every frame re-derives its state from scratch and
/// rescans its whole lookback horizon.
mod filter_reference {
    use gaitkit_core::repair::{RepairConfig, ThresholdMode};

    const GONE: f64 = 0.0;

    fn sorted_middle(mut pool: Vec<f64>) -> f64 {
        pool.sort_by(f64::total_cmp);
        let n = pool.len();
        if n % 2 == 1 {
            pool[n / 2]
        } else {
            (pool[n / 2 - 1] + pool[n / 2]) / 2.0
        }
    }

    pub fn threshold(raw: &[f64], mode: ThresholdMode) -> f64 {
        let mut steps = Vec::new();
        for t in 1..raw.len() {
            let (a, b) = (raw[t - 1], raw[t]);
            if a == GONE || b == GONE || a == b {
                continue;
            }
            steps.push(match mode {
                ThresholdMode::Relative => (b - a).abs() / a.abs(),
                ThresholdMode::LiteralEq4 => (b - a).abs(),
            });
        }
        if steps.is_empty() {
            f64::INFINITY
        } else {
            sorted_middle(steps)
        }
    }

    pub struct Outcome {
        pub values: Vec<f64>,
        pub threshold: f64,
        pub missing: usize,
        pub jumps: usize,
        pub stuck: usize,
        pub resets: usize,
    }

    pub fn repair(raw: &[f64], cfg: &RepairConfig) -> Outcome {
        let threshold = threshold(raw, cfg.threshold_mode);
        let mut fixed = raw.to_vec();
        let (mut missing, mut jumps, mut resets) = (0usize, 0usize, 0usize);
        let mut trusted = false; // some sample has passed the jump test
        let mut streak = 0usize; // consecutive jump corrections so far

        for t in 0..fixed.len() {
            let sample = fixed[t];
            let gone = sample == GONE;
            let prev = (t > 0).then(|| fixed[t - 1]).filter(|&p| p != GONE);
            let jump = match (gone, prev) {
                (false, Some(p)) => (sample - p).abs() / p.abs() > threshold,
                _ => false,
            };
            if !gone && !jump {
                if prev.is_some() {
                    trusted = true;
                    streak = 0;
                }
                continue;
            }
            if jump {
                streak += 1;
                if streak >= cfg.window_card {
                    // The stream outvotes the filter's memory; an untrusted
                    // (condemned-anchor) prefix is rewritten except for
                    // leading sentinels.
                    if !trusted {
                        for slot in fixed[..=t].iter_mut() {
                            if *slot != GONE {
                                *slot = sample;
                            }
                        }
                    }
                    resets += 1;
                    streak = 0;
                    continue;
                }
            }
            // Exhaustive horizon rescan: the latest `window_card` nonzero
            // values within `lookback` frames before t.
            let mut pool = Vec::new();
            for i in (t.saturating_sub(cfg.lookback)..t).rev() {
                if fixed[i] != GONE && pool.len() < cfg.window_card {
                    pool.push(fixed[i]);
                }
            }
            if pool.is_empty() {
                continue; // leading gap; backfilled below
            }
            let mut value = sorted_middle(pool.clone());
            if value == GONE {
                value = pool[0];
            }
            fixed[t] = value;
            if gone {
                missing += 1;
            } else {
                jumps += 1;
            }
        }

        let mut stuck = 0;
        match fixed.iter().copied().find(|&v| v != GONE) {
            Some(first) => {
                for slot in fixed.iter_mut() {
                    if *slot != GONE {
                        break;
                    }
                    *slot = first;
                    missing += 1;
                }
            }
            None => stuck = fixed.len(),
        }

        Outcome {
            values: fixed,
            threshold,
            missing,
            jumps,
            stuck,
            resets,
        }
    }
}

/// One deterministic random track: length ≤ 200, up to 40% zeros, alternating
/// between iid noise, a random walk, a steady ramp, and a noisy sinusoid —
/// the regimes the filter is sensitive to.
fn random_track(case: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_0000 + case);
    let len = rng.random_range(1..=200);
    let zero_frac = rng.random_range(0.0..=0.4);
    let mut values = Vec::with_capacity(len);
    let mut level = rng.random_range(-8.0..8.0f64);
    for t in 0..len {
        let v = match case % 4 {
            0 => rng.random_range(-10.0..10.0),
            1 => {
                level += rng.random_range(-0.5..0.5);
                level
            }
            2 => level + 0.05 * t as f64,
            _ => level + 2.0 * (0.4 * t as f64).sin() + rng.random_range(-0.05..0.05),
        };
        values.push(if rng.random_bool(zero_frac) { 0.0 } else { v });
    }
    values
}

#[test]
fn filter_matches_the_exhaustive_reference_on_random_tracks() {
    let v = verdict("1/9 repair filter equals the exhaustive per-frame reference on 1000 random tracks");
    let started = Instant::now();
    for case in 0..1000u64 {
        let track = random_track(case);
        let cfg = RepairConfig {
            window_card: [1, 2, 3, 5][(case % 4) as usize],
            lookback: [5, 8, 30, 200][((case / 4) % 4) as usize],
            threshold_mode: if case % 2 == 0 {
                ThresholdMode::Relative
            } else {
                ThresholdMode::LiteralEq4
            },
            ..RepairConfig::default()
        };
        let ours = repair_track(&track, &cfg);
        let reference = filter_reference::repair(&track, &cfg);
        let expected = TrackRepair {
            values: reference.values,
            threshold: reference.threshold,
            missing_corrected: reference.missing,
            jump_corrected: reference.jumps,
            uncorrectable: reference.stuck,
            level_resets: reference.resets,
        };
        assert_eq!(ours, expected, "case {case}: cfg {cfg:?} track {track:?}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    v.pass();
}

// ---------------------------------------------------------------------------
// criterion 2 — constant-track gap: rule-based repair vs. a moving median
// ---------------------------------------------------------------------------

/// Plain centered moving median of the same cardinality as the repair window,
/// blind to the missing sentinel — the baseline the rule is measured against.
fn moving_median(track: &[f64], width: usize) -> Vec<f64> {
    (0..track.len())
        .map(|i| {
            let lo = i.saturating_sub(width / 2);
            let hi = (i + width / 2 + 1).min(track.len());
            let mut window: Vec<f64> = track[lo..hi].to_vec();
            window.sort_by(f64::total_cmp);
            let n = window.len();
            if n % 2 == 1 {
                window[n / 2]
            } else {
                (window[n / 2 - 1] + window[n / 2]) / 2.0
            }
        })
        .collect()
}

#[test]
fn constant_track_gap_is_restored_exactly_where_a_moving_median_fails() {
    let v = verdict("2/9 5-frame gap in a constant track: rule-based exact, moving median wrong somewhere");
    let constant = 1.37;
    let mut track = vec![constant; 40];
    for slot in &mut track[17..22] {
        *slot = 0.0;
    }

    let cfg = RepairConfig::default();
    let repaired = repair_track(&track, &cfg);
    assert_eq!(repaired.values, vec![constant; 40], "rule-based repair must be exact");
    assert_eq!(repaired.missing_corrected, 5);

    let median_filtered = moving_median(&track, cfg.window_card);
    let wrong = median_filtered.iter().filter(|&&x| x != constant).count();
    assert!(wrong >= 1, "the sentinel-blind moving median should err inside the gap");
    v.pass();
}

// ---------------------------------------------------------------------------
// criterion 3 — smoother vs. a brute-force weighted-regression reference
// ---------------------------------------------------------------------------

/// Brute-force robust local linear smoother: per point, solve the weighted
/// normal equations in local coordinates by Cramer's rule, recomputing
/// everything from scratch. Mirrors the documented contract step for step.
mod smoother_reference {
    use gaitkit_core::smoothing::SmoothingConfig;

    fn median_of_abs(residuals: &[f64]) -> f64 {
        let mut mags: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
        mags.sort_by(f64::total_cmp);
        let n = mags.len();
        if n % 2 == 1 {
            mags[n / 2]
        } else {
            (mags[n / 2 - 1] + mags[n / 2]) / 2.0
        }
    }

    fn single_pass(values: &[f64], span: usize, robust: &[f64]) -> Vec<f64> {
        let n = values.len();
        let half = span / 2;
        (0..n)
            .map(|i| {
                let start = i.saturating_sub(half).min(n - span);
                let stop = start + span;
                let dmax = (i - start).max(stop - 1 - i) as f64;
                // (local x, y, combined weight) triples for the window.
                let pts: Vec<(f64, f64, f64)> = (start..stop)
                    .map(|j| {
                        let u = if dmax > 0.0 {
                            ((j as f64) - (i as f64)).abs() / dmax
                        } else {
                            0.0
                        };
                        let kernel = (1.0 - u.powi(3)).powi(3);
                        (j as f64 - i as f64, values[j], kernel * robust[j])
                    })
                    .collect();
                let sw: f64 = pts.iter().map(|p| p.2).sum();
                if !(sw > 0.0) {
                    return values[i];
                }
                let sx: f64 = pts.iter().map(|p| p.2 * p.0).sum();
                let sy: f64 = pts.iter().map(|p| p.2 * p.1).sum();
                let mean_x = sx / sw;
                let var_x: f64 = pts
                    .iter()
                    .map(|p| p.2 * (p.0 - mean_x) * (p.0 - mean_x))
                    .sum::<f64>()
                    / sw;
                let width = (span - 1).max(1) as f64;
                if var_x.sqrt() > 1e-3 * width {
                    let sxx: f64 = pts.iter().map(|p| p.2 * p.0 * p.0).sum();
                    let sxy: f64 = pts.iter().map(|p| p.2 * p.0 * p.1).sum();
                    // Intercept of the weighted line at local x = 0.
                    (sy * sxx - sx * sxy) / (sw * sxx - sx * sx)
                } else {
                    sy / sw
                }
            })
            .collect()
    }

    pub fn smooth(values: &[f64], cfg: &SmoothingConfig) -> Vec<f64> {
        let n = values.len();
        if n == 0 {
            return Vec::new();
        }
        let mut span = cfg.span.min(n);
        if span % 2 == 0 {
            span -= 1;
        }
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut robust = vec![1.0; n];
        let mut fit = single_pass(values, span, &robust);
        for _ in 0..cfg.robust_iterations {
            let residuals: Vec<f64> = values.iter().zip(&fit).map(|(y, f)| y - f).collect();
            let cutoff = 6.0 * median_of_abs(&residuals);
            if cutoff <= 1e-9 * peak {
                break;
            }
            for (r, w) in residuals.iter().zip(robust.iter_mut()) {
                let u = r.abs() / cutoff;
                *w = if u < 1.0 { (1.0 - u * u) * (1.0 - u * u) } else { 0.0 };
            }
            fit = single_pass(values, span, &robust);
        }
        fit
    }
}

#[test]
fn smoother_matches_the_brute_force_reference_and_reproduces_lines() {
    let v = verdict("3/9 smoother within 1e-9 of the brute-force reference; linear tracks reproduced");
    for case in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_3000 + case);
        let len = rng.random_range(1..=120);
        let mut level = rng.random_range(-5.0..5.0f64);
        let track: Vec<f64> = (0..len)
            .map(|t| match case % 3 {
                0 => rng.random_range(-10.0..10.0),
                1 => {
                    level += rng.random_range(-0.3..0.3);
                    level
                }
                _ => {
                    let spike = if rng.random_bool(0.05) { 4.0 } else { 0.0 };
                    level + 0.04 * t as f64 + spike
                }
            })
            .collect();
        let cfg = SmoothingConfig {
            span: [5, 7, 15, 25][(case % 4) as usize],
            robust_iterations: (case % 4) as usize,
        };
        let ours = smooth_track(&track, &cfg);
        let reference = smoother_reference::smooth(&track, &cfg);
        for (t, (a, b)) in ours.iter().zip(&reference).enumerate() {
            assert!(
                (a - b).abs() <= 1e-9,
                "case {case} frame {t}: {a} vs {b} (cfg {cfg:?})"
            );
        }
    }

    for &(intercept, slope) in &[(0.3, 0.05), (-4.0, -2.0), (100.0, 3.0)] {
        let line: Vec<f64> = (0..60).map(|t| intercept + slope * t as f64).collect();
        let out = smooth_track(&line, &SmoothingConfig::default());
        for (t, (a, b)) in out.iter().zip(&line).enumerate() {
            assert!((a - b).abs() <= 1e-9, "line frame {t}: {a} vs {b}");
        }
    }
    v.pass();
}

// ---------------------------------------------------------------------------
// criterion 4 — projection linearity, monotonicity, and the worked example
// ---------------------------------------------------------------------------

#[test]
fn projection_is_linear_monotone_and_matches_the_worked_example() {
    let v = verdict("4/9 projection linear in pixel offset, monotone in range, worked example to 1e-12");
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_4000);
    for draw in 0..10_000u32 {
        let n = rng.random_range(16..=512u32);
        let aov = rng.random_range(10.0..170.0);
        let range = rng.random_range(0.5..20.0);
        let lp = rng.random_range(1.0..200.0);
        let a = rng.random_range(-8.0..8.0);
        let bump = rng.random_range(0.01..5.0);

        let one = project_joint(lp, n, aov, range, PixelOrigin::Corner);
        let scaled = project_joint(a * lp, n, aov, range, PixelOrigin::Corner);
        assert!(
            (scaled - a * one).abs() <= 1e-12 * (a * one).abs().max(1.0),
            "draw {draw}: linearity {scaled} vs {}",
            a * one
        );

        let far = project_joint(lp, n, aov, range + bump, PixelOrigin::Corner);
        assert!(
            far.abs() > one.abs(),
            "draw {draw}: |world| must grow with range ({far} vs {one})"
        );

        // Center origin: the same properties hold in the centered offset.
        let center = n as f64 / 2.0;
        let one_c = project_joint(center + lp, n, aov, range, PixelOrigin::Center);
        let scaled_c = project_joint(center + a * lp, n, aov, range, PixelOrigin::Center);
        assert!(
            (scaled_c - a * one_c).abs() <= 1e-12 * (a * one_c).abs().max(1.0),
            "draw {draw}: centered linearity"
        );
    }

    // 128-pixel axis, 90° angle of view, a point 64 pixels off the optical
    // axis at 10 m range: (2/128)·tan(45°)·64·10 = 10 m exactly.
    let corner = project_joint(64.0, 128, 90.0, 10.0, PixelOrigin::Corner);
    assert!((corner - 10.0).abs() < 1e-12, "corner: {corner}");
    let center = project_joint(128.0, 128, 90.0, 10.0, PixelOrigin::Center);
    assert!((center - 10.0).abs() < 1e-12, "center: {center}");
    v.pass();
}

// ---------------------------------------------------------------------------
// criterion 5 — translation invariance of frame features
// ---------------------------------------------------------------------------

#[test]
fn frame_features_are_translation_invariant() {
    let v = verdict("5/9 frame features shift-invariant over 1000 random skeletons, max error < 1e-12");
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_5000);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut points = [[0.0f64; 3]; JOINT_COUNT];
        for p in &mut points {
            *p = [
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            ];
        }
        let offset = [
            rng.random_range(-50.0..50.0),
            rng.random_range(-50.0..50.0),
            rng.random_range(-50.0..50.0),
        ];
        let mut shifted = points;
        for p in &mut shifted {
            for (c, o) in p.iter_mut().zip(offset) {
                *c += o;
            }
        }
        let base: [f64; FRAME_FEATURE_DIM] = frame_feature(&points);
        let moved = frame_feature(&shifted);
        for (a, b) in base.iter().zip(&moved) {
            worst = worst.max((a - b).abs());
        }
        // Derived pair distances inherit the invariance.
        for (da, db) in base.chunks_exact(3).zip(moved.chunks_exact(3)) {
            let norm = |d: &[f64]| (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            worst = worst.max((norm(da) - norm(db)).abs());
        }
    }
    assert!(worst < 1e-12, "max deviation {worst}");
    v.pass();
}

// ---------------------------------------------------------------------------
// criterion 6 — cycle recovery under dropout, after repair
// ---------------------------------------------------------------------------

#[test]
fn cycle_estimation_recovers_known_cadences_under_dropout() {
    let v = verdict("6/9 gait cycle recovered exactly in ≥ 95/100 dropout runs at cadences 16/20/30");
    let cadences = [16usize, 20, 30];
    let mut hits = 0;
    let mut misses = Vec::new();
    for run in 0..100u64 {
        let cadence = cadences[(run % 3) as usize];
        let mut profile = demo_profiles(1, 77).swap_remove(0);
        profile.label = format!("c{cadence}");
        profile.cadence_frames = cadence;
        profile.stride_m = 0.03 * cadence as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_6000 + run);
        profile.leg_phase_rad = rng.random_range(0.0..TAU);

        let clean = generate_sequence(&profile, 150, WalkType::Toward, &format!("run{run:03}"))
            .expect("valid generator profile");
        let corruption = CorruptionConfig {
            dropout_rate: 0.10,
            jump_rate: 0.0,
            rng_seed: run,
            ..CorruptionConfig::default()
        };
        let (corrupted, _) = corrupt_sequence(&clean, &corruption).expect("valid corruption");
        let (repaired, _) =
            repair_sequence(&corrupted, &experiment_repair()).expect("repair succeeds");
        let series = ankle_distance(&repaired).expect("no sentinels after repair");
        let estimate = estimate_cycle(&series, &CycleConfig::default()).expect("valid config");
        if estimate.cycle_frames == cadence {
            hits += 1;
        } else {
            misses.push((run, cadence, estimate.cycle_frames));
        }
    }
    assert!(hits >= 95, "only {hits}/100 exact recoveries; misses: {misses:?}");
    v.pass();
}

// ---------------------------------------------------------------------------
// criterion 7 — end-to-end: repair and cycle windows lift accuracy
// ---------------------------------------------------------------------------

fn write_corrupted_dataset(dir: &Path, subjects: usize, per_subject: usize, frames: usize) {
    std::fs::create_dir_all(dir).expect("writable tempdir");
    let camera = CameraParams::default();
    for clean in demo_dataset(subjects, per_subject, frames, 11).expect("valid roster") {
        let (corrupted, _) =
            corrupt_sequence(&clean, &CorruptionConfig::default()).expect("valid corruption");
        let raw = to_raw_sequence(&corrupted, &camera).expect("in front of the camera");
        save_sequence_jsonl(&raw, &dir.join(format!("{}.jsonl", raw.sequence_id)))
            .expect("writable dir");
    }
}

#[test]
fn repair_and_cycle_windows_lift_end_to_end_accuracy() {
    let v = verdict("7/9 repair ≥ +10 pts over skip-repair; voted windows ≥ +3 pts over single frames");
    let started = Instant::now();
    let tmp = tempfile::tempdir().expect("tempdir");
    let input = tmp.path().join("input");
    // 6 subjects × 5 sequences, 20% dropout and 5% jump rate injected.
    write_corrupted_dataset(&input, 6, 5, 150);

    // Random 70/30 sequence split: every subject keeps some sequences of each
    // walking style in the gallery, the protocol the window/repair ablation is
    // defined over. (The stricter held-out-walk split is exercised elsewhere.)
    // Seed 2 lands every subject in the test set (9 test sequences).
    let base = PipelineConfig {
        repair: experiment_repair(),
        split: SplitSpec {
            mode: SplitMode::Random,
            seed: 2,
            ..SplitSpec::default()
        },
        ..PipelineConfig::default()
    };
    let run = |name: &str, cfg: &PipelineConfig| {
        run_pipeline(&input, &tmp.path().join(name), cfg)
            .unwrap_or_else(|e| panic!("{name} run failed: {e}"))
    };

    let repaired = run("repaired", &base);
    let single = run(
        "single",
        &PipelineConfig {
            window: WindowLength::Fixed(1),
            ..base.clone()
        },
    );
    let unrepaired = run(
        "unrepaired",
        &PipelineConfig {
            skip_repair: true,
            ..base.clone()
        },
    );

    let full = repaired.report.sequence_accuracy;
    let no_repair = unrepaired.report.sequence_accuracy;
    let frame_level = single.report.sequence_accuracy;
    eprintln!(
        "  repaired+voted(C={}) {full:.3} | repaired+single-frame {frame_level:.3} | \
         skip-repair {no_repair:.3} over {} test sequences",
        repaired.window_frames, repaired.report.test_sequences
    );
    assert!(
        full - no_repair >= 0.10,
        "repair lift too small: {full:.3} vs {no_repair:.3}"
    );
    assert!(
        full - frame_level >= 0.03,
        "window lift too small: {full:.3} (window {}) vs {frame_level:.3} (single frames)",
        repaired.window_frames
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60 s");
    v.pass();
}

// ---------------------------------------------------------------------------
// criterion 8 — byte-identical reports across identical runs
// ---------------------------------------------------------------------------

#[test]
fn identical_runs_produce_byte_identical_reports() {
    let v = verdict("8/9 two identically configured runs write byte-identical evaluation reports");
    let tmp = tempfile::tempdir().expect("tempdir");
    let input = tmp.path().join("input");
    write_corrupted_dataset(&input, 3, 3, 60);

    let cfg = PipelineConfig {
        repair: experiment_repair(),
        ..PipelineConfig::default()
    };
    let first = run_pipeline(&input, &tmp.path().join("one"), &cfg).expect("first run");
    let second = run_pipeline(&input, &tmp.path().join("two"), &cfg).expect("second run");

    let bytes_one = std::fs::read(&first.report_path).expect("first report");
    let bytes_two = std::fs::read(&second.report_path).expect("second report");
    assert!(!bytes_one.is_empty());
    assert_eq!(bytes_one, bytes_two, "evaluation reports differ between runs");
    assert_eq!(first.report, second.report);
    v.pass();
}

// ---------------------------------------------------------------------------
// criterion 9 — KNN scale invariance
// ---------------------------------------------------------------------------

#[test]
fn knn_predictions_are_scale_invariant() {
    let v = verdict("9/9 scaling every feature by 3.7 changes zero of 500 KNN predictions");
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_9000);
    let labels = ["s01", "s02", "s03", "s04", "s05", "s06"];
    let dim = 72;
    let centers: Vec<Vec<f64>> = labels
        .iter()
        .map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let mut sample = |who: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        centers[who]
            .iter()
            .map(|c| c + rng.random_range(-1.0..1.0))
            .collect()
    };

    let mut windows = Vec::new();
    for who in 0..labels.len() {
        for i in 0..100 {
            windows.push(LabeledWindow {
                values: sample(who, &mut rng),
                subject_label: labels[who].to_owned(),
                sequence_id: format!("{}_train", labels[who]),
                walk_type: "toward".to_owned(),
                start_frame: i,
            });
        }
    }
    let queries: Vec<Vec<f64>> = (0..500).map(|q| sample(q % labels.len(), &mut rng)).collect();

    let scale = |w: &LabeledWindow| LabeledWindow {
        values: w.values.iter().map(|x| x * 3.7).collect(),
        ..w.clone()
    };
    let train = LabeledDataset::new(windows.clone()).expect("consistent windows");
    let train_scaled =
        LabeledDataset::new(windows.iter().map(scale).collect()).expect("consistent windows");

    let mut changed = 0;
    for query in &queries {
        let plain = knn_predict(query, &train, 7, Metric::Manhattan).expect("predicts");
        let big: Vec<f64> = query.iter().map(|x| x * 3.7).collect();
        let scaled = knn_predict(&big, &train_scaled, 7, Metric::Manhattan).expect("predicts");
        if plain != scaled {
            changed += 1;
        }
    }
    assert_eq!(changed, 0, "{changed}/500 predictions changed under scaling");
    v.pass();
}
