//! Robust local linear smoothing over frame-indexed tracks.
//!
//! Each output sample is a weighted linear fit over the `span` nearest frames,
//! with tricube distance weights and iterated bisquare robustness
//! reweighting. The exact procedure (which unit tests and the reference
//! oracle both implement):
//!
//! 1. Clamp `span` to the largest odd value ≤ track length.
//! 2. The window for frame `i` is the `span` consecutive frames nearest `i`
//!    (`[i−h, i+h]` for interior frames, shifted inward at the edges).
//! 3. Distance weights are tricube in |j − i| scaled by the largest distance
//!    inside the window, so the farthest window member weighs zero; a
//!    one-frame window weighs 1.
//! 4. The local model is a weighted least-squares line evaluated at `i`,
//!    unless the weighted standard deviation of the window's x-values falls
//!    below 0.001 of the window width, in which case the weighted mean is
//!    used; with no positive weights at all, the input sample is kept.
//! 5. After each pass, residuals against the *input* track set bisquare
//!    robustness weights `(1 − (r/6m)²)²` (zero at and beyond the cutoff),
//!    where `m` is the median absolute residual, and the fit is repeated with
//!    the combined weights, `robust_iterations` times. Reweighting stops
//!    early when `6m ≤ 1e-9 · max|y|`: residuals at that scale are float
//!    noise, not structure.
//!
//! A linear track is reproduced to float precision, and an isolated impulse
//! is rejected almost entirely once the robustness weights see it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smoother tuning. `span` must be odd and positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    /// Window size in frames (odd).
    pub span: usize,
    /// Bisquare reweighting rounds after the initial fit.
    pub robust_iterations: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            span: 15,
            robust_iterations: 3,
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.span == 0 || self.span % 2 == 0 {
            return Err(Error::Validation(format!(
                "smoothing span must be odd and positive, got {}",
                self.span
            )));
        }
        Ok(())
    }
}

fn cube(x: f64) -> f64 {
    x * x * x
}

/// Tricube kernel on u ∈ [0, 1].
fn tricube(u: f64) -> f64 {
    cube(1.0 - cube(u))
}

/// Median of |values|; assumes a nonempty input.
fn median_abs(values: &[f64]) -> f64 {
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).expect("residuals are not NaN"));
    let mid = mags.len() / 2;
    if mags.len() % 2 == 1 {
        mags[mid]
    } else {
        (mags[mid - 1] + mags[mid]) / 2.0
    }
}

/// One weighted fit pass over the whole track. `delta` holds robustness
/// weights (all 1.0 on the first pass).
fn fit_pass(values: &[f64], span: usize, delta: &[f64], fit: &mut [f64]) {
    let n = values.len();
    let h = span / 2;
    for i in 0..n {
        let start = i.saturating_sub(h).min(n - span);
        let end = start + span; // exclusive
        let dmax = (i - start).max(end - 1 - i) as f64;

        // Combined tricube × robustness weights.
        let mut sw = 0.0;
        let mut swx = 0.0;
        let mut swy = 0.0;
        let mut positive = 0usize;
        let mut weights = Vec::with_capacity(span);
        for j in start..end {
            let u = if dmax > 0.0 {
                (j as f64 - i as f64).abs() / dmax
            } else {
                0.0
            };
            let w = tricube(u) * delta[j];
            weights.push(w);
            if w > 0.0 {
                positive += 1;
            }
            sw += w;
            swx += w * j as f64;
            swy += w * values[j];
        }
        if positive == 0 || sw <= 0.0 {
            fit[i] = values[i];
            continue;
        }
        let xbar = swx / sw;
        let ybar = swy / sw;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (w, j) in weights.iter().zip(start..end) {
            let dx = j as f64 - xbar;
            sxx += w * dx * dx;
            sxy += w * dx * (values[j] - ybar);
        }
        // Degenerate spread: weighted std below 0.001 of the window width
        // means the positive weight sits on effectively one abscissa.
        let width = (span - 1).max(1) as f64;
        if (sxx / sw).sqrt() > 1e-3 * width {
            let slope = sxy / sxx;
            fit[i] = ybar + slope * (i as f64 - xbar);
        } else {
            fit[i] = ybar;
        }
    }
}

/// Smooth one track. Tracks of length ≤ 2 come back unchanged (the clamped
/// window holds a single frame).
pub fn smooth_track(values: &[f64], cfg: &SmoothingConfig) -> Vec<f64> {
    debug_assert!(cfg.validate().is_ok());
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut span = cfg.span.min(n);
    if span % 2 == 0 {
        span -= 1;
    }

    let yscale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut delta = vec![1.0; n];
    let mut fit = vec![0.0; n];
    fit_pass(values, span, &delta, &mut fit);

    for _ in 0..cfg.robust_iterations {
        let residuals: Vec<f64> = values.iter().zip(&fit).map(|(y, f)| y - f).collect();
        let cutoff = 6.0 * median_abs(&residuals);
        if cutoff <= 1e-9 * yscale {
            break; // converged: residuals are float noise
        }
        for (d, r) in delta.iter_mut().zip(&residuals) {
            let u = r.abs() / cutoff;
            *d = if u < 1.0 {
                let v = 1.0 - u * u;
                v * v
            } else {
                0.0
            };
        }
        fit_pass(values, span, &delta, &mut fit);
    }
    fit
}
