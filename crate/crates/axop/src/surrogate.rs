//! Config-to-metric regression models used as low-cost fitness functions
//! during design-space exploration.
//!
//! A surrogate predicts one metric from a pruning configuration's bits:
//! ridge-regularized least squares on either the raw bits (`BitsLinear`) or
//! bits plus all pairwise products (`BitsPairwise`), intercept always
//! included. The normal equations are solved in exact rational arithmetic,
//! so targets that are exactly linear in the features (LUT count, for one)
//! are recovered with literally zero residual, and fitting is deterministic
//! across platforms.

use crate::axmodel::AxoConfig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Feature encoding of a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Intercept plus one feature per bit.
    BitsLinear,
    /// Intercept, bits, and all pairwise bit products.
    BitsPairwise,
}

impl FeatureMode {
    /// Feature-vector length, intercept included, for configs of length `len`.
    pub fn feature_count(&self, len: usize) -> usize {
        match self {
            FeatureMode::BitsLinear => 1 + len,
            FeatureMode::BitsPairwise => 1 + len + len * (len - 1) / 2,
        }
    }

    /// Feature names in coefficient order.
    pub fn feature_names(&self, len: usize) -> Vec<String> {
        let mut names = vec!["intercept".to_string()];
        for i in 0..len {
            names.push(format!("bit{i}"));
        }
        if matches!(self, FeatureMode::BitsPairwise) {
            for i in 0..len {
                for j in (i + 1)..len {
                    names.push(format!("bit{i}*bit{j}"));
                }
            }
        }
        names
    }

    fn encode(&self, config: &AxoConfig) -> Vec<f64> {
        let len = config.len();
        let mut row = Vec::with_capacity(self.feature_count(len));
        row.push(1.0);
        for i in 0..len {
            row.push(if config.bit(i) { 1.0 } else { 0.0 });
        }
        if matches!(self, FeatureMode::BitsPairwise) {
            for i in 0..len {
                for j in (i + 1)..len {
                    row.push(if config.bit(i) && config.bit(j) { 1.0 } else { 0.0 });
                }
            }
        }
        row
    }

    pub fn parse(text: &str) -> Option<FeatureMode> {
        match text {
            "bits_linear" => Some(FeatureMode::BitsLinear),
            "bits_pairwise" => Some(FeatureMode::BitsPairwise),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FeatureMode::BitsLinear => "bits_linear",
            FeatureMode::BitsPairwise => "bits_pairwise",
        }
    }
}

/// A fitted config-to-metric regression model.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub target_metric: String,
    pub feature_mode: FeatureMode,
    pub config_len: usize,
    pub coefficients: Vec<f64>,
    pub ridge_lambda: f64,
    pub train_mae: f64,
    pub test_mae: f64,
}

/// Errors from surrogate fitting and prediction.
#[derive(Debug, Error, PartialEq)]
pub enum SurrogateError {
    #[error("need at least {needed} samples for {features} features, got {got}")]
    InsufficientData {
        got: usize,
        needed: usize,
        features: usize,
    },
    #[error("target metric has zero variance; nothing to fit")]
    DegenerateTarget,
    #[error("config length {got} does not match the model's training length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("normal equations are singular even with ridge {lambda}")]
    Singular { lambda: f64 },
    #[error("dataset mixes config lengths ({first} vs {other})")]
    MixedLengths { first: usize, other: usize },
    #[error("metric values must be finite")]
    NonFiniteTarget,
}

/// Fits a surrogate on `(config, metric value)` pairs.
///
/// The dataset is split 80/20 by a seeded shuffle; the mean absolute error on
/// each side is recorded on the model. Requires at least twice as many
/// samples as features.
pub fn fit_surrogate(
    dataset: &[(AxoConfig, f64)],
    target_metric: &str,
    feature_mode: FeatureMode,
    ridge_lambda: f64,
    split_seed: u64,
) -> Result<SurrogateModel, SurrogateError> {
    let config_len = dataset.first().map(|(c, _)| c.len()).unwrap_or(0);
    for (config, value) in dataset {
        if config.len() != config_len {
            return Err(SurrogateError::MixedLengths {
                first: config_len,
                other: config.len(),
            });
        }
        if !value.is_finite() {
            return Err(SurrogateError::NonFiniteTarget);
        }
    }
    let features = feature_mode.feature_count(config_len);
    if dataset.len() < 2 * features {
        return Err(SurrogateError::InsufficientData {
            got: dataset.len(),
            needed: 2 * features,
            features,
        });
    }
    let first = dataset[0].1;
    if dataset.iter().all(|(_, v)| *v == first) {
        return Err(SurrogateError::DegenerateTarget);
    }

    // Deterministic 80/20 split.
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    for i in (1..indices.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        indices.swap(i, j);
    }
    let train_count = (dataset.len() * 4) / 5;
    let (train_idx, test_idx) = indices.split_at(train_count);

    // Exact rational normal equations: features are 0/1 and lambda/targets
    // are f64 (hence rational), so the solve itself introduces no rounding.
    let lambda = BigRational::from_f64(ridge_lambda).expect("finite lambda");
    let mut xtx = vec![vec![BigRational::zero(); features]; features];
    let mut xty = vec![BigRational::zero(); features];
    for &idx in train_idx {
        let (config, value) = &dataset[idx];
        let row = feature_mode.encode(config);
        let y = BigRational::from_f64(*value).ok_or(SurrogateError::NonFiniteTarget)?;
        for (i, xi) in row.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (j, xj) in row.iter().enumerate() {
                if *xj != 0.0 {
                    xtx[i][j] += BigRational::from_integer(BigInt::from(1));
                }
            }
            xty[i] += y.clone();
        }
    }
    // Ridge penalty on every coefficient including the intercept would bias
    // exact recovery; penalize non-intercept terms only.
    for (i, row) in xtx.iter_mut().enumerate().skip(1) {
        row[i] += lambda.clone();
    }

    let coefficients_exact =
        solve_rational(xtx, xty).ok_or(SurrogateError::Singular { lambda: ridge_lambda })?;
    let coefficients: Vec<f64> = coefficients_exact
        .iter()
        .map(|c| c.to_f64().unwrap_or(0.0))
        .collect();

    let mae = |idx: &[usize]| -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        let sum: f64 = idx
            .iter()
            .map(|&i| {
                let (config, value) = &dataset[i];
                (predict_with(&coefficients, feature_mode, config) - value).abs()
            })
            .sum();
        sum / idx.len() as f64
    };

    Ok(SurrogateModel {
        target_metric: target_metric.to_string(),
        feature_mode,
        config_len,
        train_mae: mae(train_idx),
        test_mae: mae(test_idx),
        coefficients,
        ridge_lambda,
    })
}

fn predict_with(coefficients: &[f64], mode: FeatureMode, config: &AxoConfig) -> f64 {
    coefficients
        .iter()
        .zip(mode.encode(config))
        .map(|(c, x)| c * x)
        .sum()
}

impl SurrogateModel {
    /// Predicted metric value for one config.
    pub fn predict(&self, config: &AxoConfig) -> Result<f64, SurrogateError> {
        if config.len() != self.config_len {
            return Err(SurrogateError::LengthMismatch {
                expected: self.config_len,
                got: config.len(),
            });
        }
        Ok(predict_with(&self.coefficients, self.feature_mode, config))
    }
}

/// Exact Gauss-Jordan over rationals; `None` on a zero pivot.
fn solve_rational(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for j in col..n {
            a[col][j] /= pivot.clone();
        }
        b[col] /= pivot;
        for row in 0..n {
            if row != col && !a[row][col].is_zero() {
                let factor = a[row][col].clone();
                for j in col..n {
                    let delta = factor.clone() * a[col][j].clone();
                    a[row][j] -= delta;
                }
                let delta = factor * b[col].clone();
                b[row] -= delta;
            }
        }
    }
    // Exactness guard: all pivots were nonzero rationals.
    debug_assert!(b.iter().all(|v| v.numer().abs() >= BigInt::zero()));
    Some(b)
}

/// Mean absolute error of the constant-mean predictor, the sanity floor any
/// useful surrogate must beat.
pub fn constant_mean_mae(dataset: &[(AxoConfig, f64)]) -> f64 {
    if dataset.is_empty() {
        return 0.0;
    }
    let mean: f64 = dataset.iter().map(|(_, v)| v).sum::<f64>() / dataset.len() as f64;
    dataset.iter().map(|(_, v)| (v - mean).abs()).sum::<f64>() / dataset.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axmodel::enumerate_configs;

    fn popcount_dataset(len: usize) -> Vec<(AxoConfig, f64)> {
        enumerate_configs(len, 1 << 24)
            .unwrap()
            .map(|c| {
                let v = c.popcount() as f64;
                (c, v)
            })
            .collect()
    }

    #[test]
    fn linear_target_recovered_exactly() {
        let dataset = popcount_dataset(4);
        let model =
            fit_surrogate(&dataset, "lut_count", FeatureMode::BitsLinear, 0.0, 13).unwrap();
        assert_eq!(model.train_mae, 0.0);
        assert_eq!(model.test_mae, 0.0);
        let probe = AxoConfig::parse("1010").unwrap();
        assert_eq!(model.predict(&probe).unwrap(), 2.0);
        assert_eq!(model.predict(&AxoConfig::all_ones(4)).unwrap(), 4.0);
    }

    #[test]
    fn degenerate_target_rejected() {
        let dataset: Vec<(AxoConfig, f64)> = enumerate_configs(4, 1 << 24)
            .unwrap()
            .map(|c| (c, 7.5))
            .collect();
        assert_eq!(
            fit_surrogate(&dataset, "x", FeatureMode::BitsLinear, 0.0, 1),
            Err(SurrogateError::DegenerateTarget)
        );
    }

    #[test]
    fn fitting_is_deterministic() {
        let dataset = popcount_dataset(5);
        let a = fit_surrogate(&dataset, "m", FeatureMode::BitsLinear, 0.25, 7).unwrap();
        let b = fit_surrogate(&dataset, "m", FeatureMode::BitsLinear, 0.25, 7).unwrap();
        assert_eq!(a.coefficients, b.coefficients);
    }

    #[test]
    fn insufficient_data_rejected() {
        let dataset: Vec<(AxoConfig, f64)> = popcount_dataset(4).into_iter().take(9).collect();
        assert!(matches!(
            fit_surrogate(&dataset, "m", FeatureMode::BitsLinear, 0.0, 1),
            Err(SurrogateError::InsufficientData { .. })
        ));
    }

    #[test]
    fn pairwise_features_never_fit_worse_on_train() {
        // Quadratic-ish target: popcount squared.
        let dataset: Vec<(AxoConfig, f64)> = enumerate_configs(5, 1 << 24)
            .unwrap()
            .map(|c| {
                let v = (c.popcount() * c.popcount()) as f64;
                (c, v)
            })
            .collect();
        let linear = fit_surrogate(&dataset, "m", FeatureMode::BitsLinear, 0.0, 3).unwrap();
        let pairwise = fit_surrogate(&dataset, "m", FeatureMode::BitsPairwise, 0.0, 3).unwrap();
        assert!(pairwise.train_mae <= linear.train_mae + 1e-12);
    }

    #[test]
    fn prediction_length_checked() {
        let dataset = popcount_dataset(4);
        let model = fit_surrogate(&dataset, "m", FeatureMode::BitsLinear, 0.0, 1).unwrap();
        assert!(matches!(
            model.predict(&AxoConfig::all_ones(5)),
            Err(SurrogateError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn beats_constant_mean_on_linear_target() {
        let dataset = popcount_dataset(4);
        let model = fit_surrogate(&dataset, "m", FeatureMode::BitsLinear, 0.0, 5).unwrap();
        let floor = constant_mean_mae(&dataset);
        assert!(floor > 0.0);
        assert!(model.test_mae < floor);
    }
}
