//! Hand-rolled SVG plots: before/after joint-track panels and a confusion
//! heatmap. Pure string assembly — deterministic output, no dependencies.

use gaitkit_core::classify::ConfusionMatrix;

/// Missing-sample sentinel in raw tracks (pre-repair panels break on it).
const MISSING: f64 = 0.0;

const PLOT_W: f64 = 900.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const PANEL_H: f64 = 200.0;
const PANEL_GAP: f64 = 56.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 40.0;

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    // Fixed notation keeps tick labels compact and stable.
    format!("{v:.3}")
}

/// A track rendered in one panel: pre-repair series break at missing
/// sentinels, repaired series are drawn through.
struct Panel<'a> {
    caption: &'a str,
    values: &'a [f64],
    break_on_missing: bool,
    stroke: &'a str,
}

/// Finite plotted values of a panel (sentinels excluded when breaking).
fn plotted<'a>(panel: &'a Panel<'a>) -> impl Iterator<Item = f64> + 'a {
    let skip_missing = panel.break_on_missing;
    panel
        .values
        .iter()
        .copied()
        .filter(move |&v| v.is_finite() && !(skip_missing && v == MISSING))
}

fn render_panel(svg: &mut String, panel: &Panel, top: f64, lo: f64, hi: f64, n: usize) {
    let width = PLOT_W - MARGIN_L - MARGIN_R;
    let x_of = |t: usize| MARGIN_L + width * (t as f64) / ((n - 1).max(1) as f64);
    let y_of = |v: f64| top + PANEL_H * (1.0 - (v - lo) / (hi - lo));

    svg.push_str(&format!(
        "<text x='{MARGIN_L}' y='{:.1}' class='caption'>{}</text>\n",
        top - 8.0,
        esc(panel.caption)
    ));
    // Frame and horizontal gridlines with value labels.
    svg.push_str(&format!(
        "<rect x='{MARGIN_L}' y='{top:.1}' width='{width:.1}' height='{PANEL_H}' class='frame'/>\n"
    ));
    for i in 0..=4 {
        let v = lo + (hi - lo) * (i as f64) / 4.0;
        let y = y_of(v);
        if i > 0 && i < 4 {
            svg.push_str(&format!(
                "<line x1='{MARGIN_L}' y1='{y:.1}' x2='{:.1}' y2='{y:.1}' class='grid'/>\n",
                MARGIN_L + width
            ));
        }
        svg.push_str(&format!(
            "<text x='{:.1}' y='{:.1}' class='tick' text-anchor='end'>{}</text>\n",
            MARGIN_L - 6.0,
            y + 3.5,
            fmt(v)
        ));
    }
    // Polyline segments; sentinel gaps split the series, lone samples
    // become dots.
    let mut run: Vec<(f64, f64)> = Vec::new();
    let flush = |run: &mut Vec<(f64, f64)>, svg: &mut String| {
        match run.len() {
            0 => {}
            1 => svg.push_str(&format!(
                "<circle cx='{:.1}' cy='{:.1}' r='2' fill='{}'/>\n",
                run[0].0, run[0].1, panel.stroke
            )),
            _ => {
                let points: Vec<String> =
                    run.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                svg.push_str(&format!(
                    "<polyline points='{}' fill='none' stroke='{}' stroke-width='1.5'/>\n",
                    points.join(" "),
                    panel.stroke
                ));
            }
        }
        run.clear();
    };
    for (t, &v) in panel.values.iter().enumerate() {
        if !v.is_finite() || (panel.break_on_missing && v == MISSING) {
            flush(&mut run, svg);
        } else {
            run.push((x_of(t), y_of(v)));
        }
    }
    flush(&mut run, svg);
}

/// Two stacked panels of the same joint track: the delivered series (gaps at
/// missing samples) above the repaired one, shared y-scale, frames on x.
pub fn track_panels(title: &str, unit: &str, before: &[f64], after: &[f64]) -> String {
    let n = before.len().max(after.len()).max(1);
    let panels = [
        Panel {
            caption: "before repair (gaps: missing samples)",
            values: before,
            break_on_missing: true,
            stroke: "#b91c1c",
        },
        Panel {
            caption: "after repair",
            values: after,
            break_on_missing: false,
            stroke: "#1d4ed8",
        },
    ];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for panel in &panels {
        for v in plotted(panel) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        (lo, hi) = (0.0, 1.0); // nothing plottable; render empty frames
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let height = TOP + 2.0 * PANEL_H + PANEL_GAP + BOTTOM;
    let mut svg = svg_open(PLOT_W, height, title);
    render_panel(&mut svg, &panels[0], TOP, lo, hi, n);
    render_panel(&mut svg, &panels[1], TOP + PANEL_H + PANEL_GAP, lo, hi, n);

    // Shared x-axis labels under the lower panel.
    let width = PLOT_W - MARGIN_L - MARGIN_R;
    let axis_y = TOP + 2.0 * PANEL_H + PANEL_GAP + 16.0;
    for i in 0..=4 {
        let t = (n - 1) * i / 4;
        let x = MARGIN_L + width * (t as f64) / ((n - 1).max(1) as f64);
        svg.push_str(&format!(
            "<text x='{x:.1}' y='{axis_y:.1}' class='tick' text-anchor='middle'>{t}</text>\n"
        ));
    }
    svg.push_str(&format!(
        "<text x='{:.1}' y='{:.1}' class='tick' text-anchor='middle'>frame</text>\n",
        MARGIN_L + width / 2.0,
        axis_y + 16.0
    ));
    svg.push_str(&format!(
        "<text x='16' y='{:.1}' class='tick' transform='rotate(-90 16 {:.1})' \
         text-anchor='middle'>{}</text>\n",
        TOP + PANEL_H + PANEL_GAP / 2.0,
        TOP + PANEL_H + PANEL_GAP / 2.0,
        esc(unit)
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Square heatmap of a confusion matrix: rows are true labels, columns
/// predictions, cell shade scaled to the largest count.
pub fn confusion_heatmap(matrix: &ConfusionMatrix, title: &str) -> String {
    let n = matrix.labels.len().max(1);
    let cell = 56.0;
    let left = 96.0;
    let top = 72.0;
    let width = left + cell * n as f64 + 24.0;
    let height = top + cell * n as f64 + 40.0;
    let peak = matrix
        .counts
        .iter()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;

    let mut svg = svg_open(width, height, title);
    svg.push_str(&format!(
        "<text x='{left}' y='{:.1}' class='caption'>rows: true subject, columns: predicted</text>\n",
        top - 28.0
    ));
    for (i, label) in matrix.labels.iter().enumerate() {
        let y = top + cell * (i as f64 + 0.5);
        let x = left + cell * (i as f64 + 0.5);
        svg.push_str(&format!(
            "<text x='{:.1}' y='{:.1}' class='tick' text-anchor='end'>{}</text>\n",
            left - 8.0,
            y + 4.0,
            esc(label)
        ));
        svg.push_str(&format!(
            "<text x='{x:.1}' y='{:.1}' class='tick' text-anchor='middle'>{}</text>\n",
            top - 8.0,
            esc(label)
        ));
    }
    for (i, row) in matrix.counts.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            let x = left + cell * j as f64;
            let y = top + cell * i as f64;
            let strength = count as f64 / peak;
            svg.push_str(&format!(
                "<rect x='{x:.1}' y='{y:.1}' width='{cell}' height='{cell}' \
                 fill='#1d4ed8' fill-opacity='{:.3}' stroke='#94a3b8' stroke-width='0.5'/>\n",
                0.04 + 0.9 * strength
            ));
            if count > 0 {
                let color = if strength > 0.55 { "#ffffff" } else { "#111827" };
                svg.push_str(&format!(
                    "<text x='{:.1}' y='{:.1}' class='cell' fill='{color}' \
                     text-anchor='middle'>{count}</text>\n",
                    x + cell / 2.0,
                    y + cell / 2.0 + 4.0
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn svg_open(width: f64, height: f64, title: &str) -> String {
    format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{width:.0}' height='{height:.0}' \
         viewBox='0 0 {width:.0} {height:.0}' font-family='sans-serif'>\n\
         <style>.caption{{font-size:13px;fill:#374151}}.tick{{font-size:11px;fill:#4b5563}}\
         .cell{{font-size:13px}}.frame{{fill:none;stroke:#9ca3af}}\
         .grid{{stroke:#e5e7eb}}text{{font-family:sans-serif}}</style>\n\
         <rect width='100%' height='100%' fill='#ffffff'/>\n\
         <text x='{:.1}' y='24' font-size='15' fill='#111827'>{}</text>\n",
        MARGIN_L,
        esc(title)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_split_the_before_series_into_segments() {
        let before = [1.0, 1.1, 0.0, 0.0, 1.2, 1.3, 1.25];
        let after = [1.0, 1.1, 1.1, 1.15, 1.2, 1.3, 1.25];
        let svg = track_panels("RAnkle.y — s01_toward_00", "meters", &before, &after);
        // Two runs before the gap and after it, plus the repaired series.
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.starts_with("<svg xmlns="));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("before repair"));
        assert!(svg.contains("after repair"));
        assert!(svg.contains("meters"));
    }

    #[test]
    fn lone_samples_between_gaps_become_dots() {
        let before = [0.0, 2.0, 0.0, 2.1, 2.2, 0.0];
        let after = [2.0, 2.0, 2.05, 2.1, 2.2, 2.2];
        let svg = track_panels("t", "m", &before, &after);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn titles_are_xml_escaped() {
        let svg = track_panels("a < b & c", "m", &[1.0, 2.0], &[1.0, 2.0]);
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(!svg.contains("a < b"));
    }

    #[test]
    fn heatmap_draws_every_cell_and_skips_zero_labels() {
        let matrix = ConfusionMatrix {
            labels: vec!["s01".into(), "s02".into()],
            counts: vec![vec![3, 1], vec![0, 4]],
        };
        let svg = confusion_heatmap(&matrix, "sequence confusion");
        assert_eq!(svg.matches("<rect").count(), 1 + 4); // background + cells
        assert!(svg.contains(">3</text>"));
        assert!(svg.contains(">4</text>"));
        // The zero cell draws no count text: exactly three cell labels.
        assert_eq!(svg.matches("class='cell'").count(), 3);
        assert!(svg.contains("sequence confusion"));
    }

    #[test]
    fn constant_and_empty_tracks_still_render() {
        let svg = track_panels("flat", "m", &[5.0; 10], &[5.0; 10]);
        assert!(svg.contains("<polyline"));
        let svg = track_panels("empty", "m", &[], &[]);
        assert!(svg.starts_with("<svg"));
        let svg = track_panels("all-missing", "m", &[0.0; 8], &[0.0; 8]);
        assert!(svg.contains("after repair")); // repaired zeros still drawn
    }
}
