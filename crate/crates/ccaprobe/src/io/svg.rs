//! Self-contained SVG line charts for projection curves: metric vs. subspace
//! dimension, one line per method, a ±1 std band per line, the upper panel
//! before head retraining and the lower one after, and a dotted vertical
//! marker at the class count.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiments::CurveResult;
use crate::projectors::Method;

const WIDTH: f64 = 860.0;
const PANEL_LEFT: f64 = 64.0;
const PANEL_RIGHT: f64 = 660.0;
const PANEL_HEIGHT: f64 = 240.0;
const PANEL_TOP: [f64; 2] = [48.0, 344.0];
const HEIGHT: f64 = 640.0;

fn color(method: Method) -> &'static str {
    match method {
        Method::CcaHighest => "#d62728",       // red
        Method::CcaLowest => "#e6c229",        // yellow
        Method::CcaRandom => "#ff7f0e",        // orange
        Method::PcaTop => "#2ca02c",           // green
        Method::RandomProjection => "#1f4e9c", // dark blue
        Method::RandomSelection => "#5ac8fa",  // light blue
        Method::MaxActivation => "#9467bd",    // purple
    }
}

/// Renders one sensor pair's curves. Every curve must share the pair and the
/// metric; `n_c` places the dotted class-count marker.
pub fn curves_to_svg(curves: &[CurveResult], n_c: usize, title: &str) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::InvalidArgument("curves_to_svg: no curves".into()));
    }
    let n_max = curves
        .iter()
        .flat_map(|c| c.aggregate.iter().map(|p| p.n_s))
        .max()
        .unwrap_or(1);
    let metric_name = curves[0].metric.name();

    let x_of = |n_s: usize| -> f64 {
        let span = (n_max as f64).log2().max(1e-9);
        PANEL_LEFT + (n_s as f64).log2() / span * (PANEL_RIGHT - PANEL_LEFT)
    };
    let y_of = |top: f64, v: f64| -> f64 { top + (1.0 - v.clamp(0.0, 1.0)) * PANEL_HEIGHT };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
    );
    let _ = writeln!(
        svg,
        r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16">{}</text>"##,
        PANEL_LEFT,
        escape(title)
    );

    for (panel, label) in [(0usize, "before retraining"), (1, "after retraining")] {
        let top = PANEL_TOP[panel];
        let bottom = top + PANEL_HEIGHT;
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="#444">{label}</text>"##,
            PANEL_LEFT,
            top - 6.0
        );
        // Frame and y ticks.
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#999"/>"##,
            PANEL_LEFT,
            top,
            PANEL_RIGHT - PANEL_LEFT,
            PANEL_HEIGHT
        );
        for i in 0..=4 {
            let v = i as f64 * 0.25;
            let y = y_of(top, v);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
                PANEL_LEFT, PANEL_RIGHT
            );
            let _ = writeln!(
                svg,
                r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end" fill="#444">{v:.2}</text>"##,
                PANEL_LEFT - 6.0,
                y + 3.0
            );
        }
        // x ticks: 1, n_c, and powers of two up to n_max.
        let mut ticks = vec![1usize, n_c];
        let mut p = 2usize;
        while p <= n_max {
            ticks.push(p);
            p *= 2;
        }
        ticks.push(n_max);
        ticks.sort_unstable();
        ticks.dedup();
        for t in ticks {
            let x = x_of(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##,
                top, bottom
            );
            let _ = writeln!(
                svg,
                r##"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle" fill="#444">{t}</text>"##,
                bottom + 14.0
            );
        }
        // The class-count marker.
        let xc = x_of(n_c);
        let _ = writeln!(
            svg,
            r##"<line x1="{xc:.2}" y1="{:.2}" x2="{xc:.2}" y2="{:.2}" stroke="#333" stroke-dasharray="4 3"/>"##,
            top, bottom
        );

        for curve in curves {
            let pick = |p: &crate::experiments::AggregatePoint| -> (f64, f64) {
                if panel == 0 {
                    (p.mean_before, p.std_before)
                } else {
                    (p.mean_after, p.std_after)
                }
            };
            // ±1 std band.
            let mut band = String::new();
            for p in &curve.aggregate {
                let (m, s) = pick(p);
                let _ = write!(band, "{:.2},{:.2} ", x_of(p.n_s), y_of(top, m + s));
            }
            for p in curve.aggregate.iter().rev() {
                let (m, s) = pick(p);
                let _ = write!(band, "{:.2},{:.2} ", x_of(p.n_s), y_of(top, m - s));
            }
            let _ = writeln!(
                svg,
                r##"<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>"##,
                band.trim_end(),
                color(curve.method)
            );
            // Mean line.
            let mut line = String::new();
            for p in &curve.aggregate {
                let (m, _) = pick(p);
                let _ = write!(line, "{:.2},{:.2} ", x_of(p.n_s), y_of(top, m));
            }
            let _ = writeln!(
                svg,
                r##"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"/>"##,
                line.trim_end(),
                color(curve.method)
            );
        }
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle" fill="#444">subspace dimension</text>"##,
            (PANEL_LEFT + PANEL_RIGHT) / 2.0,
            bottom + 30.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="16" y="{:.2}" font-family="sans-serif" font-size="11" fill="#444" transform="rotate(-90 16 {:.2})">{metric_name}</text>"##,
            top + PANEL_HEIGHT / 2.0,
            top + PANEL_HEIGHT / 2.0
        );
    }

    // Legend.
    let legend_x = PANEL_RIGHT + 18.0;
    let mut ly = PANEL_TOP[0] + 8.0;
    for curve in curves {
        let _ = writeln!(
            svg,
            r##"<line x1="{legend_x:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2.5"/>"##,
            legend_x + 24.0,
            color(curve.method)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="#222">{}</text>"##,
            legend_x + 30.0,
            ly + 3.5,
            curve.method
        );
        ly += 18.0;
    }
    let _ = writeln!(
        svg,
        r##"<text x="{legend_x:.2}" y="{:.2}" font-family="sans-serif" font-size="10" fill="#666">band: ±1 std over repeats</text>"##,
        ly + 6.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{legend_x:.2}" y="{:.2}" font-family="sans-serif" font-size="10" fill="#666">dotted line: n_s = {n_c}</text>"##,
        ly + 20.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::CurvePoint;
    use crate::heads::Metric;

    fn toy_curve(method: Method) -> CurveResult {
        CurveResult::from_points(
            method,
            ("s0".into(), "s0".into()),
            Metric::Accuracy,
            vec![
                CurvePoint { n_s: 1, repeat: 0, metric_before: 0.3, metric_after: 0.4 },
                CurvePoint { n_s: 4, repeat: 0, metric_before: 0.8, metric_after: 0.82 },
                CurvePoint { n_s: 8, repeat: 0, metric_before: 0.9, metric_after: 0.9 },
            ],
        )
    }

    #[test]
    fn renders_marker_band_and_legend_per_method() {
        let curves = vec![toy_curve(Method::CcaHighest), toy_curve(Method::PcaTop)];
        let svg = curves_to_svg(&curves, 3, "s0 vs s0").unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("cca_highest"));
        assert!(svg.contains("pca_top"));
        assert_eq!(svg.matches("<polygon").count(), 4); // 2 methods × 2 panels
        assert_eq!(svg.matches("<polyline").count(), 4);
    }

    #[test]
    fn deterministic_bytes() {
        let curves = vec![toy_curve(Method::RandomSelection)];
        let a = curves_to_svg(&curves, 3, "t").unwrap();
        let b = curves_to_svg(&curves, 3, "t").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_empty_input() {
        assert!(curves_to_svg(&[], 3, "t").is_err());
    }
}
