//! Result persistence: characterization CSVs, generation logs, drift and
//! hypervolume reports, tidy plot data, and a minimal SVG scatter.
//!
//! Every file starts with a `# axop-results v1 runconfig_sha256=...` header
//! line so a replay can be checked against its configuration. Reals are
//! written with 17 significant digits, which round-trips `f64` exactly; rows
//! are sorted lexicographically by config before writing, so output bytes do
//! not depend on worker count.

use axop::behav::BehavMetrics;
use axop::dse::{AppBehavMetrics, DesignPoint, DriftReport, Fidelity, GenLogRow, MetricKey, Objectives};
use axop::ppa::{PpaMetrics, PpaSource};
use std::fmt::Write as _;
use thiserror::Error;

pub const RESULTS_MAGIC: &str = "# axop-results v1";

/// Fixed column order for operator-level results.
pub const OPERATOR_COLUMNS: &[&str] = &[
    "config",
    "fidelity",
    "avg_abs_err",
    "avg_rel_err",
    "max_abs_err",
    "err_prob",
    "mse",
    "lut_count",
    "carry_count",
    "cpd_proxy",
    "power_proxy",
    "pdp_proxy",
    "ppa_source",
];

/// Fixed column order for application-level results.
pub const APP_COLUMNS: &[&str] = &[
    "config",
    "fidelity",
    "output_mse",
    "output_max_abs_err",
    "psnr_db",
    "lut_count",
    "carry_count",
    "cpd_proxy",
    "power_proxy",
    "pdp_proxy",
    "ppa_source",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("results line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("result sets have mismatched schemas: {left:?} vs {right:?}")]
    SchemaMismatch { left: String, right: String },
    #[error("no input rows")]
    Empty,
}

/// 17-significant-digit real formatting; round-trips f64 bit-exactly.
pub fn format_real(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else if value.is_infinite() {
        if value > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{value:.16e}")
    }
}

pub fn parse_real(text: &str) -> Result<f64, std::num::ParseFloatError> {
    match text {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other.parse::<f64>(),
    }
}

fn ppa_source_label(source: PpaSource) -> &'static str {
    match source {
        PpaSource::Proxy => "proxy",
        PpaSource::Imported => "imported",
    }
}

fn operator_row(point: &DesignPoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        point.config,
        point.fidelity.label(),
        format_real(point.behav.avg_abs_err),
        format_real(point.behav.avg_rel_err),
        format_real(point.behav.max_abs_err),
        format_real(point.behav.err_prob),
        format_real(point.behav.mse),
        point.ppa.lut_count,
        point.ppa.carry_count,
        format_real(point.ppa.cpd_proxy),
        format_real(point.ppa.power_proxy),
        format_real(point.ppa.pdp_proxy),
        ppa_source_label(point.ppa.source),
    )
}

fn app_row(point: &DesignPoint) -> String {
    let app = point.app_behav.unwrap_or(AppBehavMetrics {
        output_mse: f64::NAN,
        output_max_abs_err: f64::NAN,
        psnr_db: f64::NAN,
    });
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        point.config,
        point.fidelity.label(),
        format_real(app.output_mse),
        format_real(app.output_max_abs_err),
        format_real(app.psnr_db),
        point.ppa.lut_count,
        point.ppa.carry_count,
        format_real(point.ppa.cpd_proxy),
        format_real(point.ppa.power_proxy),
        format_real(point.ppa.pdp_proxy),
        ppa_source_label(point.ppa.source),
    )
}

/// Serializes points (already in their intended order) as a results CSV.
pub fn write_results(points: &[DesignPoint], runconfig_hash: &str, app_level: bool) -> String {
    let columns = if app_level { APP_COLUMNS } else { OPERATOR_COLUMNS };
    let mut text = format!("{RESULTS_MAGIC} runconfig_sha256={runconfig_hash}\n");
    text.push_str(&columns.join(","));
    text.push('\n');
    for point in points {
        text.push_str(&if app_level { app_row(point) } else { operator_row(point) });
        text.push('\n');
    }
    text
}

/// One parsed results row: config, fidelity, and named numeric fields.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub config: String,
    pub fidelity: String,
    pub values: Vec<(String, f64)>,
    pub ppa_source: String,
}

impl ResultRow {
    pub fn value(&self, column: &str) -> Option<f64> {
        self.values
            .iter()
            .find(|(name, _)| name == column)
            .map(|(_, v)| *v)
    }

    /// Rebuilds a design point; columns missing from the file become NaN.
    pub fn to_design_point(&self) -> Result<DesignPoint, ReportError> {
        let config = axop::axmodel::AxoConfig::parse(&self.config).map_err(|e| {
            ReportError::Malformed {
                line: 0,
                reason: format!("config {:?}: {e}", self.config),
            }
        })?;
        let get = |name: &str| self.value(name).unwrap_or(f64::NAN);
        let behav = BehavMetrics {
            avg_abs_err: get("avg_abs_err"),
            avg_rel_err: get("avg_rel_err"),
            max_abs_err: get("max_abs_err"),
            err_prob: get("err_prob"),
            mse: get("mse"),
        };
        let app = if self.value("output_mse").is_some() {
            Some(AppBehavMetrics {
                output_mse: get("output_mse"),
                output_max_abs_err: get("output_max_abs_err"),
                psnr_db: get("psnr_db"),
            })
        } else {
            None
        };
        let ppa = PpaMetrics {
            lut_count: get("lut_count") as u64,
            carry_count: get("carry_count") as u64,
            cpd_proxy: get("cpd_proxy"),
            power_proxy: get("power_proxy"),
            pdp_proxy: get("pdp_proxy"),
            source: if self.ppa_source == "imported" {
                PpaSource::Imported
            } else {
                PpaSource::Proxy
            },
        };
        Ok(DesignPoint {
            config,
            behav,
            app_behav: app,
            ppa,
            fidelity: if self.fidelity == "predicted" {
                Fidelity::Predicted
            } else {
                Fidelity::Characterized
            },
        })
    }
}

/// A parsed results file: header columns plus rows.
#[derive(Debug, Clone)]
pub struct ResultSet {
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
}

pub fn parse_results(text: &str) -> Result<ResultSet, ReportError> {
    let mut lines = text.lines().enumerate().peekable();
    // Optional hash header.
    if let Some((_, first)) = lines.peek() {
        if first.starts_with('#') {
            lines.next();
        }
    }
    let (_, header) = lines.next().ok_or(ReportError::Empty)?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    if columns.first().map(String::as_str) != Some("config") {
        return Err(ReportError::Malformed {
            line: 2,
            reason: format!("expected a config column first, got {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(ReportError::Malformed {
                line: idx + 1,
                reason: format!("expected {} fields, got {}", columns.len(), fields.len()),
            });
        }
        let mut row = ResultRow {
            config: String::new(),
            fidelity: String::new(),
            values: Vec::new(),
            ppa_source: "proxy".to_string(),
        };
        for (column, field) in columns.iter().zip(fields) {
            match column.as_str() {
                "config" => row.config = field.to_string(),
                "fidelity" => row.fidelity = field.to_string(),
                "ppa_source" => row.ppa_source = field.to_string(),
                _ => {
                    let value = parse_real(field).map_err(|e| ReportError::Malformed {
                        line: idx + 1,
                        reason: format!("{column}: {e}"),
                    })?;
                    row.values.push((column.clone(), value));
                }
            }
        }
        rows.push(row);
    }
    Ok(ResultSet { columns, rows })
}

/// Generation-log CSV for evolutionary runs.
pub fn write_genlog(log: &[GenLogRow], objectives: &Objectives, runconfig_hash: &str) -> String {
    let mut text = format!("{RESULTS_MAGIC} runconfig_sha256={runconfig_hash}\n");
    let names: Vec<&str> = objectives.minimize.iter().map(|k| k.label()).collect();
    let _ = writeln!(text, "generation,config,{},feasible,fidelity", names.join(","));
    for row in log {
        let values: Vec<String> = row.objective_values.iter().map(|v| format_real(*v)).collect();
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            row.generation,
            row.config,
            values.join(","),
            row.feasible,
            row.fidelity.label(),
        );
    }
    text
}

/// Drift report CSV: per-metric mean absolute prediction drift.
pub fn write_drift(report: &DriftReport, runconfig_hash: &str) -> String {
    let mut text = format!("{RESULTS_MAGIC} runconfig_sha256={runconfig_hash}\n");
    let _ = writeln!(text, "metric,prediction_drift_mae");
    for (metric, drift) in &report.by_metric {
        let _ = writeln!(text, "{metric},{}", format_real(*drift));
    }
    text
}

/// Hypervolume report CSV over named sets (normalized jointly).
pub fn write_hypervolumes(names: &[String], values: &[f64], runconfig_hash: &str) -> String {
    let mut text = format!("{RESULTS_MAGIC} runconfig_sha256={runconfig_hash}\n");
    let _ = writeln!(text, "set,hypervolume_normalized");
    for (name, value) in names.iter().zip(values) {
        let _ = writeln!(text, "{name},{}", format_real(*value));
    }
    text
}

/// Long-format tidy CSV over several result sets: `set,metric,value`.
pub fn write_plotdata(sets: &[(String, ResultSet)]) -> Result<String, ReportError> {
    if sets.is_empty() {
        return Err(ReportError::Empty);
    }
    let schema = &sets[0].1.columns;
    for (name, set) in sets {
        if &set.columns != schema {
            return Err(ReportError::SchemaMismatch {
                left: format!("{}: {}", sets[0].0, schema.join(",")),
                right: format!("{}: {}", name, set.columns.join(",")),
            });
        }
    }
    let mut text = String::from("set,metric,value\n");
    for (name, set) in sets {
        for row in &set.rows {
            for (metric, value) in &row.values {
                let _ = writeln!(text, "{name},{metric},{}", format_real(*value));
            }
        }
    }
    Ok(text)
}

/// Minimal static SVG scatter of two columns with Pareto points marked.
pub fn write_svg_scatter(
    sets: &[(String, ResultSet)],
    x_column: &str,
    y_column: &str,
    pareto_configs: &[String],
) -> Result<String, ReportError> {
    let mut points: Vec<(String, f64, f64, bool)> = Vec::new();
    for (name, set) in sets {
        for row in &set.rows {
            let x = row
                .value(x_column)
                .ok_or_else(|| ReportError::SchemaMismatch {
                    left: x_column.to_string(),
                    right: set.columns.join(","),
                })?;
            let y = row
                .value(y_column)
                .ok_or_else(|| ReportError::SchemaMismatch {
                    left: y_column.to_string(),
                    right: set.columns.join(","),
                })?;
            if x.is_finite() && y.is_finite() {
                points.push((
                    name.clone(),
                    x,
                    y,
                    pareto_configs.contains(&row.config),
                ));
            }
        }
    }
    if points.is_empty() {
        return Err(ReportError::Empty);
    }
    let (width, height, margin) = (640.0, 480.0, 48.0);
    let min_max = |select: fn(&(String, f64, f64, bool)) -> f64| {
        let lo = points.iter().map(select).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(select).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) }
    };
    let (x_lo, x_hi) = min_max(|p| p.1);
    let (y_lo, y_hi) = min_max(|p| p.2);
    let sx = |x: f64| margin + (x - x_lo) / (x_hi - x_lo) * (width - 2.0 * margin);
    let sy = |y: f64| height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2.0 * margin);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        height - margin,
        width - margin,
        height - margin
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"black\"/>",
        height - margin
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{x_column}</text>",
        width / 2.0,
        height - 12.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{y_column}</text>",
        height / 2.0,
        height / 2.0
    );
    let palette = ["#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4"];
    let mut set_names: Vec<&String> = sets.iter().map(|(n, _)| n).collect();
    set_names.dedup();
    for (name, x, y, on_front) in &points {
        let color_index = set_names.iter().position(|n| *n == name).unwrap_or(0);
        let color = palette[color_index % palette.len()];
        if *on_front {
            let _ = writeln!(
                svg,
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{color}\" stroke=\"black\" stroke-width=\"1.5\"/>",
                sx(*x),
                sy(*y)
            );
        } else {
            let _ = writeln!(
                svg,
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.55\"/>",
                sx(*x),
                sy(*y)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Extracts 2-D objective vectors from a parsed result set.
pub fn objective_vectors(
    set: &ResultSet,
    keys: &[MetricKey],
) -> Result<Vec<Vec<f64>>, ReportError> {
    set.rows
        .iter()
        .map(|row| {
            keys.iter()
                .map(|key| {
                    row.value(key.label()).ok_or_else(|| ReportError::SchemaMismatch {
                        left: key.label().to_string(),
                        right: set.columns.join(","),
                    })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use axop::axmodel::AxoConfig;

    fn sample_point(config: &str) -> DesignPoint {
        DesignPoint {
            config: AxoConfig::parse(config).unwrap(),
            behav: BehavMetrics {
                avg_abs_err: 1.5,
                avg_rel_err: 0.1,
                max_abs_err: 3.0,
                err_prob: 0.25,
                mse: 4.75,
            },
            app_behav: None,
            ppa: PpaMetrics {
                lut_count: 3,
                carry_count: 1,
                cpd_proxy: 1.4,
                power_proxy: 2.25,
                pdp_proxy: 3.15,
                source: PpaSource::Proxy,
            },
            fidelity: Fidelity::Characterized,
        }
    }

    #[test]
    fn results_round_trip_preserves_reals_exactly() {
        let mut point = sample_point("1011");
        point.behav.avg_abs_err = 1.0 / 3.0;
        point.ppa.power_proxy = std::f64::consts::PI;
        let text = write_results(&[point.clone()], "deadbeef", false);
        assert!(text.starts_with("# axop-results v1 runconfig_sha256=deadbeef"));
        let parsed = parse_results(&text).unwrap();
        let row = &parsed.rows[0];
        assert_eq!(row.value("avg_abs_err").unwrap(), 1.0 / 3.0);
        assert_eq!(row.value("power_proxy").unwrap(), std::f64::consts::PI);
        let rebuilt = row.to_design_point().unwrap();
        assert_eq!(rebuilt.behav.avg_abs_err, point.behav.avg_abs_err);
        assert_eq!(rebuilt.ppa.power_proxy, point.ppa.power_proxy);
    }

    #[test]
    fn nan_and_inf_round_trip() {
        assert!(parse_real(&format_real(f64::NAN)).unwrap().is_nan());
        assert_eq!(parse_real(&format_real(f64::INFINITY)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn plotdata_is_tidy_and_checks_schema() {
        let text = write_results(&[sample_point("10")], "h", false);
        let set = parse_results(&text).unwrap();
        let tidy = write_plotdata(&[("one".into(), set.clone()), ("two".into(), set.clone())])
            .unwrap();
        assert!(tidy.starts_with("set,metric,value\n"));
        assert!(tidy.contains("one,avg_abs_err,"));
        assert!(tidy.contains("two,pdp_proxy,"));

        let app_text = write_results(&[sample_point("10")], "h", true);
        let app_set = parse_results(&app_text).unwrap();
        assert!(matches!(
            write_plotdata(&[("a".into(), set), ("b".into(), app_set)]),
            Err(ReportError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn empty_plotdata_is_an_error() {
        assert!(matches!(write_plotdata(&[]), Err(ReportError::Empty)));
    }

    #[test]
    fn svg_marks_pareto_points() {
        let text = write_results(&[sample_point("10"), sample_point("01")], "h", false);
        let set = parse_results(&text).unwrap();
        let svg = write_svg_scatter(
            &[("s".into(), set)],
            "pdp_proxy",
            "avg_abs_err",
            &["10".to_string()],
        )
        .unwrap();
        assert!(svg.contains("stroke=\"black\"")); // marked front point
        assert!(svg.contains("fill-opacity")); // unmarked point
    }
}
