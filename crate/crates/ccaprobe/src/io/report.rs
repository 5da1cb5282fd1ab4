//! CSV and plain-text emission of curve, fusion and similarity results, each
//! parseable back into the emitting type.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{CurvePoint, CurveResult};
use crate::fusion::FusionReport;
use crate::heads::Metric;
use crate::projectors::Method;
use crate::similarity::SimilarityReport;

pub const CURVE_HEADER: &str =
    "basis_sensor,evaluated_sensor,method,metric,n_s,repeat,metric_before,metric_after";
pub const FUSION_HEADER: &str = "k_used,acc_cca_fusion,acc_logit_sum,acc_prob_average,agreement,sensor_a,acc_sensor_a,sensor_b,acc_sensor_b";
pub const SIMILARITY_HEADER: &str =
    "mean_cca,svcca,pwcca,linear_cka,variance_keep,svcca_variance_keep";

/// One curve file holds every method of one sensor pair, one row per point.
/// Floats print in shortest-roundtrip form so parsing restores exact values.
pub fn curves_to_csv(curves: &[CurveResult]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for curve in curves {
        for p in &curve.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                curve.sensor_pair.0,
                curve.sensor_pair.1,
                curve.method,
                curve.metric.name(),
                p.n_s,
                p.repeat,
                p.metric_before,
                p.metric_after
            );
        }
    }
    out
}

/// Parses a curve CSV back into per-(pair, method) results; aggregates are
/// recomputed from the points.
pub fn curves_from_csv(text: &str) -> Result<Vec<CurveResult>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad_csv("empty document"))?;
    if header != CURVE_HEADER {
        return Err(bad_csv(format!("unexpected header {header:?}")));
    }
    // Keyed by (basis, evaluated, method, metric) in first-appearance order.
    let mut order: Vec<(String, String, Method, Metric)> = Vec::new();
    let mut groups: Vec<Vec<CurvePoint>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad_csv(format!(
                "row {}: {} fields, expected 8",
                lineno + 2,
                f.len()
            )));
        }
        let key = (
            f[0].to_string(),
            f[1].to_string(),
            f[2].parse::<Method>()?,
            f[3].parse::<Metric>()?,
        );
        let point = CurvePoint {
            n_s: parse_num(f[4], lineno)?,
            repeat: parse_num(f[5], lineno)?,
            metric_before: parse_float(f[6], lineno)?,
            metric_after: parse_float(f[7], lineno)?,
        };
        match order.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(point),
            None => {
                order.push(key);
                groups.push(vec![point]);
            }
        }
    }
    Ok(order
        .into_iter()
        .zip(groups)
        .map(|((basis, evaluated, method, metric), points)| {
            CurveResult::from_points(method, (basis, evaluated), metric, points)
        })
        .collect())
}

pub fn fusion_to_csv(report: &FusionReport) -> String {
    let mut out = String::from(FUSION_HEADER);
    out.push('\n');
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        report.k_used,
        report.acc_cca_fusion,
        report.acc_logit_sum,
        report.acc_prob_average,
        report.agreement,
        report.per_sensor[0].0,
        report.per_sensor[0].1,
        report.per_sensor[1].0,
        report.per_sensor[1].1,
    );
    out
}

pub fn fusion_from_csv(text: &str) -> Result<FusionReport> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad_csv("empty document"))?;
    if header != FUSION_HEADER {
        return Err(bad_csv(format!("unexpected header {header:?}")));
    }
    let row = lines
        .find(|l| !l.is_empty())
        .ok_or_else(|| bad_csv("missing data row"))?;
    let f: Vec<&str> = row.split(',').collect();
    if f.len() != 9 {
        return Err(bad_csv(format!("{} fields, expected 9", f.len())));
    }
    Ok(FusionReport {
        k_used: parse_num(f[0], 0)?,
        acc_cca_fusion: parse_float(f[1], 0)?,
        acc_logit_sum: parse_float(f[2], 0)?,
        acc_prob_average: parse_float(f[3], 0)?,
        agreement: parse_float(f[4], 0)?,
        per_sensor: vec![
            (f[5].to_string(), parse_float(f[6], 0)?),
            (f[7].to_string(), parse_float(f[8], 0)?),
        ],
    })
}

/// Aligned text form of the fusion report.
pub fn fusion_to_text(report: &FusionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fusion equivalence report (k = {})", report.k_used);
    for (name, acc) in &report.per_sensor {
        let _ = writeln!(out, "  {name:<18} {:.4}", acc);
    }
    let _ = writeln!(out, "  {:<18} {:.4}", "cca_fusion", report.acc_cca_fusion);
    let _ = writeln!(out, "  {:<18} {:.4}", "logit_sum", report.acc_logit_sum);
    let _ = writeln!(out, "  {:<18} {:.4}", "prob_average", report.acc_prob_average);
    let _ = writeln!(out, "  {:<18} {:.4}", "agreement", report.agreement);
    out
}

pub fn similarity_to_csv(report: &SimilarityReport) -> String {
    let mut out = String::from(SIMILARITY_HEADER);
    out.push('\n');
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        report.mean_cca,
        report.svcca,
        report.pwcca,
        report.linear_cka,
        report.variance_keep,
        report.svcca_variance_keep,
    );
    out
}

pub fn similarity_from_csv(text: &str) -> Result<SimilarityReport> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad_csv("empty document"))?;
    if header != SIMILARITY_HEADER {
        return Err(bad_csv(format!("unexpected header {header:?}")));
    }
    let row = lines
        .find(|l| !l.is_empty())
        .ok_or_else(|| bad_csv("missing data row"))?;
    let f: Vec<&str> = row.split(',').collect();
    if f.len() != 6 {
        return Err(bad_csv(format!("{} fields, expected 6", f.len())));
    }
    Ok(SimilarityReport {
        mean_cca: parse_float(f[0], 0)?,
        svcca: parse_float(f[1], 0)?,
        pwcca: parse_float(f[2], 0)?,
        linear_cka: parse_float(f[3], 0)?,
        variance_keep: parse_float(f[4], 0)?,
        svcca_variance_keep: parse_float(f[5], 0)?,
    })
}

pub fn similarity_to_text(report: &SimilarityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "similarity report");
    let _ = writeln!(
        out,
        "  {:<12} {:.4}  (variance kept {})",
        "mean_cca", report.mean_cca, report.variance_keep
    );
    let _ = writeln!(
        out,
        "  {:<12} {:.4}  (variance kept {})",
        "svcca", report.svcca, report.svcca_variance_keep
    );
    let _ = writeln!(out, "  {:<12} {:.4}", "pwcca", report.pwcca);
    let _ = writeln!(out, "  {:<12} {:.4}", "linear_cka", report.linear_cka);
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn bad_csv(reason: impl Into<String>) -> Error {
    Error::Corrupt {
        path: "<csv>".into(),
        reason: reason.into(),
    }
}

fn parse_num(s: &str, lineno: usize) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| bad_csv(format!("row {}: bad integer {s:?}", lineno + 2)))
}

fn parse_float(s: &str, lineno: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| bad_csv(format!("row {}: bad number {s:?}", lineno + 2)))
}
