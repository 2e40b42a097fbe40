//! Surrogate model persistence: a metadata header line plus a CSV of
//! (feature name, coefficient). Coefficients use 17 significant digits and
//! round-trip bit-exactly.

use crate::report::{format_real, parse_real};
use axop::surrogate::{FeatureMode, SurrogateModel};
use thiserror::Error;

pub const MODEL_MAGIC: &str = "# axop-surrogate v1";

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("model line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("expected magic header {MODEL_MAGIC:?}")]
    BadMagic,
}

pub fn write_model(model: &SurrogateModel) -> String {
    let mut text = format!(
        "{MODEL_MAGIC} target={} features={} length={} lambda={} train_mae={} test_mae={}\n",
        model.target_metric,
        model.feature_mode.label(),
        model.config_len,
        format_real(model.ridge_lambda),
        format_real(model.train_mae),
        format_real(model.test_mae),
    );
    text.push_str("feature,coefficient\n");
    let names = model.feature_mode.feature_names(model.config_len);
    for (name, coefficient) in names.iter().zip(&model.coefficients) {
        text.push_str(&format!("{name},{}\n", format_real(*coefficient)));
    }
    text
}

pub fn parse_model(text: &str) -> Result<SurrogateModel, ModelIoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ModelIoError::BadMagic)?;
    if !header.starts_with(MODEL_MAGIC) {
        return Err(ModelIoError::BadMagic);
    }
    let mut target_metric = String::new();
    let mut feature_mode = FeatureMode::BitsLinear;
    let mut config_len = 0usize;
    let mut ridge_lambda = 0.0;
    let mut train_mae = 0.0;
    let mut test_mae = 0.0;
    for field in header[MODEL_MAGIC.len()..].split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| ModelIoError::Malformed {
            line: 1,
            reason: format!("bad header field {field:?}"),
        })?;
        let bad = |reason: String| ModelIoError::Malformed { line: 1, reason };
        match key {
            "target" => target_metric = value.to_string(),
            "features" => {
                feature_mode = FeatureMode::parse(value)
                    .ok_or_else(|| bad(format!("unknown feature mode {value:?}")))?
            }
            "length" => {
                config_len = value.parse().map_err(|e| bad(format!("length: {e}")))?
            }
            "lambda" => {
                ridge_lambda = parse_real(value).map_err(|e| bad(format!("lambda: {e}")))?
            }
            "train_mae" => {
                train_mae = parse_real(value).map_err(|e| bad(format!("train_mae: {e}")))?
            }
            "test_mae" => {
                test_mae = parse_real(value).map_err(|e| bad(format!("test_mae: {e}")))?
            }
            other => return Err(bad(format!("unknown header key {other:?}"))),
        }
    }
    let (_, columns) = lines.next().ok_or(ModelIoError::Malformed {
        line: 2,
        reason: "missing column header".into(),
    })?;
    if columns.trim() != "feature,coefficient" {
        return Err(ModelIoError::Malformed {
            line: 2,
            reason: format!("expected feature,coefficient, got {columns:?}"),
        });
    }
    let expected_names = feature_mode.feature_names(config_len);
    let mut coefficients = Vec::with_capacity(expected_names.len());
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (name, value) = line.split_once(',').ok_or_else(|| ModelIoError::Malformed {
            line: idx + 1,
            reason: "expected feature,coefficient".into(),
        })?;
        let position = coefficients.len();
        if expected_names.get(position).map(String::as_str) != Some(name) {
            return Err(ModelIoError::Malformed {
                line: idx + 1,
                reason: format!(
                    "feature {name:?} out of order (expected {:?})",
                    expected_names.get(position)
                ),
            });
        }
        coefficients.push(parse_real(value).map_err(|e| ModelIoError::Malformed {
            line: idx + 1,
            reason: format!("coefficient: {e}"),
        })?);
    }
    if coefficients.len() != expected_names.len() {
        return Err(ModelIoError::Malformed {
            line: text.lines().count(),
            reason: format!(
                "expected {} coefficients, got {}",
                expected_names.len(),
                coefficients.len()
            ),
        });
    }
    Ok(SurrogateModel {
        target_metric,
        feature_mode,
        config_len,
        coefficients,
        ridge_lambda,
        train_mae,
        test_mae,
    })
}
