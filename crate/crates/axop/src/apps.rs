//! Application-specific evaluation harness: task models whose multiplies
//! route through a chosen operator, producing application-level behavioral
//! metrics for cross-granularity exploration (task error against
//! operator-level hardware cost).
//!
//! Accumulators are exact wide integers; only the multiplies are approximate
//! unless an approximate adder is supplied as well. Operands are quantized
//! to the operator's range by symmetric round-half-away-from-zero with
//! saturation.

use crate::axmodel::AxoConfig;
use crate::behav::{BehavError, OutputEstimator};
use crate::dse::{
    nsga2_search, pareto_front, AppBehavMetrics, DesignPoint, DseError, Fidelity, GaParams,
    Objectives, ParetoArchive, SearchOutcome,
};
use crate::netlist::Netlist;
use crate::opgen::OperatorSpec;
use crate::ppa::{characterize_ppa, DelayModel, PowerPlan};
use rayon::prelude::*;
use thiserror::Error;

/// Sentinel PSNR for exact outputs (mse == 0).
pub const PSNR_EXACT: f64 = f64::INFINITY;

/// A grayscale image, row-major, values `0..=maxval`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> i64 {
        self.pixels[y * self.width + x] as i64
    }
}

/// Functional task models routed through an approximate multiplier.
#[derive(Debug, Clone)]
pub enum TaskModel {
    /// Direct-form FIR filter over an integer signal.
    FirLowPass { taps: Vec<i64>, signal: Vec<i64> },
    /// 3x3 convolution over an image, valid region only (no padding).
    Conv2d3x3 { kernel: [[i64; 3]; 3], image: Image },
}

/// Errors from the application harness.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("operand width mismatch: {0}")]
    WidthMismatch(String),
    #[error("output sequences differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("signal file line {line}: {reason}")]
    BadSignal { line: usize, reason: String },
    #[error("image: {0}")]
    BadImage(String),
    #[error(transparent)]
    Behav(#[from] BehavError),
    #[error(transparent)]
    Dse(#[from] DseError),
    #[error("ppa characterization failed: {0}")]
    Ppa(String),
}

/// Quantizes a value to the operator's operand range: round half away from
/// zero, then saturate.
pub fn quantize(value: f64, min: i64, max: i64) -> i64 {
    let rounded = if value >= 0.0 {
        (value + 0.5).floor() as i64
    } else {
        (value - 0.5).ceil() as i64
    };
    rounded.clamp(min, max)
}

impl TaskModel {
    /// Number of output samples the task produces.
    pub fn output_len(&self) -> usize {
        match self {
            TaskModel::FirLowPass { signal, .. } => signal.len(),
            TaskModel::Conv2d3x3 { image, .. } => {
                (image.width.saturating_sub(2)) * (image.height.saturating_sub(2))
            }
        }
    }

    /// Clamps task coefficients and samples into the operator's ranges.
    pub fn quantized_for(&self, spec: &OperatorSpec) -> TaskModel {
        let (a_min, a_max, b_min, b_max) = spec.operand_ranges();
        match self {
            TaskModel::FirLowPass { taps, signal } => TaskModel::FirLowPass {
                taps: taps.iter().map(|t| (*t).clamp(b_min, b_max)).collect(),
                signal: signal.iter().map(|s| (*s).clamp(a_min, a_max)).collect(),
            },
            TaskModel::Conv2d3x3 { kernel, image } => {
                let mut k = *kernel;
                for row in &mut k {
                    for v in row.iter_mut() {
                        *v = (*v).clamp(b_min, b_max);
                    }
                }
                let mut img = image.clone();
                for p in &mut img.pixels {
                    *p = (*p as i64).clamp(a_min.max(0), a_max) as u16;
                }
                TaskModel::Conv2d3x3 { kernel: k, image: img }
            }
        }
    }
}

/// Runs a task with every multiply routed through `multiplier`; products
/// accumulate in exact 128-bit integers.
///
/// Samples are the multiplier's `a` operand and coefficients the `b`
/// operand; both must already fit the operator's ranges (see
/// [`TaskModel::quantized_for`]).
pub fn run_task(task: &TaskModel, multiplier: &OutputEstimator) -> Result<Vec<i64>, AppError> {
    let spec = multiplier.spec();
    let (a_min, a_max, b_min, b_max) = spec.operand_ranges();
    let check = |a: i64, b: i64| -> Result<(), AppError> {
        if a < a_min || a > a_max {
            return Err(AppError::WidthMismatch(format!(
                "sample {a} outside [{a_min}, {a_max}] for {}",
                spec.name()
            )));
        }
        if b < b_min || b > b_max {
            return Err(AppError::WidthMismatch(format!(
                "coefficient {b} outside [{b_min}, {b_max}] for {}",
                spec.name()
            )));
        }
        Ok(())
    };
    match task {
        TaskModel::FirLowPass { taps, signal } => {
            let mut outputs = Vec::with_capacity(signal.len());
            for k in 0..signal.len() {
                let mut acc: i128 = 0;
                for (j, tap) in taps.iter().enumerate() {
                    if k >= j {
                        let sample = signal[k - j];
                        check(sample, *tap)?;
                        acc += multiplier.eval(sample, *tap)? as i128;
                    }
                }
                outputs.push(acc as i64);
            }
            Ok(outputs)
        }
        TaskModel::Conv2d3x3 { kernel, image } => {
            if image.width < 3 || image.height < 3 {
                return Err(AppError::BadImage(format!(
                    "image {}x{} too small for a 3x3 kernel",
                    image.width, image.height
                )));
            }
            let mut outputs = Vec::with_capacity(task.output_len());
            for y in 1..image.height - 1 {
                for x in 1..image.width - 1 {
                    let mut acc: i128 = 0;
                    for (dy, row) in kernel.iter().enumerate() {
                        for (dx, coeff) in row.iter().enumerate() {
                            let sample = image.pixel(x + dx - 1, y + dy - 1);
                            check(sample, *coeff)?;
                            acc += multiplier.eval(sample, *coeff)? as i128;
                        }
                    }
                    outputs.push(acc as i64);
                }
            }
            Ok(outputs)
        }
    }
}

/// Exact integer reference outputs for a task (golden outputs).
pub fn golden_outputs(task: &TaskModel) -> Vec<i64> {
    match task {
        TaskModel::FirLowPass { taps, signal } => (0..signal.len())
            .map(|k| {
                taps.iter()
                    .enumerate()
                    .filter(|(j, _)| k >= *j)
                    .map(|(j, tap)| (signal[k - j] as i128) * (*tap as i128))
                    .sum::<i128>() as i64
            })
            .collect(),
        TaskModel::Conv2d3x3 { kernel, image } => {
            let mut outputs = Vec::new();
            for y in 1..image.height - 1 {
                for x in 1..image.width - 1 {
                    let mut acc: i128 = 0;
                    for (dy, row) in kernel.iter().enumerate() {
                        for (dx, coeff) in row.iter().enumerate() {
                            acc += (image.pixel(x + dx - 1, y + dy - 1) as i128) * (*coeff as i128);
                        }
                    }
                    outputs.push(acc as i64);
                }
            }
            outputs
        }
    }
}

/// MSE, max-abs error, and PSNR of task outputs against golden outputs.
///
/// PSNR uses the 8-bit image peak (255) and only means anything for the
/// convolution task; exact outputs report the infinite sentinel.
pub fn app_behav(outputs: &[i64], golden: &[i64]) -> Result<AppBehavMetrics, AppError> {
    if outputs.len() != golden.len() {
        return Err(AppError::LengthMismatch {
            left: outputs.len(),
            right: golden.len(),
        });
    }
    let mut sq_sum: u128 = 0;
    let mut max_abs: u64 = 0;
    for (got, want) in outputs.iter().zip(golden) {
        let err = (got - want).unsigned_abs();
        sq_sum += u128::from(err) * u128::from(err);
        max_abs = max_abs.max(err);
    }
    let mse = sq_sum as f64 / outputs.len().max(1) as f64;
    let psnr_db = if mse == 0.0 {
        PSNR_EXACT
    } else {
        10.0 * ((255.0f64 * 255.0) / mse).log10()
    };
    Ok(AppBehavMetrics {
        output_mse: mse,
        output_max_abs_err: max_abs as f64,
        psnr_db,
    })
}

/// Exploration method for [`app_dse`].
#[derive(Debug, Clone)]
pub enum AppDseMethod {
    /// Evaluate a fixed config list and extract the front.
    Sampling { configs: Vec<AxoConfig> },
    /// Evolutionary search with task-backed fitness.
    Ga { params: GaParams },
}

/// One application-level fitness evaluation: task error plus operator PPA.
pub fn app_fitness(
    task: &TaskModel,
    base: &Netlist,
    spec: &OperatorSpec,
    delay: &DelayModel,
    power: &PowerPlan,
    config: &AxoConfig,
) -> Result<DesignPoint, String> {
    let pruned = crate::axmodel::apply_config(base, config, crate::axmodel::TiePolarity::Zero)
        .map_err(|e| e.to_string())?;
    let estimator = OutputEstimator::from_netlist(*spec, &pruned).map_err(|e| e.to_string())?;
    let outputs = run_task(task, &estimator).map_err(|e| e.to_string())?;
    let golden = golden_outputs(task);
    let app = app_behav(&outputs, &golden).map_err(|e| e.to_string())?;
    let ppa = characterize_ppa(&pruned, delay, power).map_err(|e| e.to_string())?;
    Ok(DesignPoint {
        config: config.clone(),
        behav: Default::default(),
        app_behav: Some(app),
        ppa,
        fidelity: Fidelity::Characterized,
    })
}

/// Outcome of application-specific exploration.
#[derive(Debug)]
pub struct AppDseOutcome {
    pub front: ParetoArchive,
    pub evaluated: Vec<DesignPoint>,
    /// Present for GA runs only.
    pub search: Option<SearchOutcome>,
}

/// Application-specific exploration: objectives over task-level error and
/// operator-level hardware proxies, reusing the operator-level machinery
/// with task-backed fitness.
pub fn app_dse(
    task: &TaskModel,
    base: &Netlist,
    spec: &OperatorSpec,
    objectives: &Objectives,
    method: &AppDseMethod,
    delay: &DelayModel,
    power: &PowerPlan,
) -> Result<AppDseOutcome, AppError> {
    let task = task.quantized_for(spec);
    let fitness = |config: &AxoConfig| app_fitness(&task, base, spec, delay, power, config);
    match method {
        AppDseMethod::Sampling { configs } => {
            let evaluated: Vec<DesignPoint> = configs
                .par_iter()
                .map(|c| {
                    fitness(c).map_err(|message| DseError::Fitness {
                        config: c.to_string(),
                        message,
                    })
                })
                .collect::<Result<_, _>>()?;
            let front = pareto_front(&evaluated, objectives)?;
            Ok(AppDseOutcome {
                front,
                evaluated,
                search: None,
            })
        }
        AppDseMethod::Ga { params } => {
            let outcome = nsga2_search(spec.config_len(), objectives, params, fitness)?;
            Ok(AppDseOutcome {
                front: outcome.archive_front.clone(),
                evaluated: outcome.evaluated.values().cloned().collect(),
                search: Some(outcome),
            })
        }
    }
}

/// Parses a one-integer-per-line signal file.
pub fn parse_signal_csv(text: &str) -> Result<Vec<i64>, AppError> {
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        samples.push(trimmed.parse::<i64>().map_err(|e| AppError::BadSignal {
            line: idx + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(samples)
}

/// Parses an ASCII PGM (P2) image.
pub fn parse_pgm(text: &str) -> Result<Image, AppError> {
    let mut tokens = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split_whitespace());
    let magic = tokens.next().ok_or_else(|| AppError::BadImage("empty file".into()))?;
    if magic != "P2" {
        return Err(AppError::BadImage(format!("expected P2, got {magic}")));
    }
    let mut next_usize = |what: &str| -> Result<usize, AppError> {
        tokens
            .next()
            .ok_or_else(|| AppError::BadImage(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|e| AppError::BadImage(format!("{what}: {e}")))
    };
    let width = next_usize("width")?;
    let height = next_usize("height")?;
    let maxval = next_usize("maxval")? as u16;
    let mut pixels = Vec::with_capacity(width * height);
    for token in tokens {
        let value = token
            .parse::<u16>()
            .map_err(|e| AppError::BadImage(format!("pixel: {e}")))?;
        if value > maxval {
            return Err(AppError::BadImage(format!(
                "pixel {value} exceeds maxval {maxval}"
            )));
        }
        pixels.push(value);
    }
    if pixels.len() != width * height {
        return Err(AppError::BadImage(format!(
            "expected {} pixels, got {}",
            width * height,
            pixels.len()
        )));
    }
    Ok(Image {
        width,
        height,
        maxval,
        pixels,
    })
}

/// Writes an image back out as ASCII PGM, one row per line.
pub fn write_pgm(image: &Image) -> String {
    let mut text = format!("P2\n{} {}\n{}\n", image.width, image.height, image.maxval);
    for y in 0..image.height {
        let row: Vec<String> = (0..image.width)
            .map(|x| image.pixels[y * image.width + x].to_string())
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    text
}

/// The bundled FIR fixture: sine-plus-noise signal with a small smoothing
/// tap set, quantized for the given operator.
pub fn bundled_fir_task(spec: &OperatorSpec) -> TaskModel {
    let signal = parse_signal_csv(crate::fixtures::SIGNAL_CSV).expect("bundled signal parses");
    let taps = vec![1, 2, 3, 4, 4, 3, 2, 1];
    TaskModel::FirLowPass { taps, signal }.quantized_for(spec)
}

/// The bundled convolution fixture: 64x64 gradient with a smoothing kernel.
pub fn bundled_conv_task(spec: &OperatorSpec) -> TaskModel {
    let image = parse_pgm(crate::fixtures::GRADIENT_PGM).expect("bundled image parses");
    let kernel = [[1, 1, 1], [1, 2, 1], [1, 1, 1]];
    TaskModel::Conv2d3x3 { kernel, image }.quantized_for(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axmodel::{apply_config, AxoConfig, TiePolarity};
    use crate::dse::MetricKey;

    fn mul_spec() -> OperatorSpec {
        OperatorSpec::signed_mul_bw(8, 8)
    }

    fn accurate_multiplier() -> OutputEstimator {
        let spec = mul_spec();
        OutputEstimator::from_netlist(spec, &spec.generate().unwrap()).unwrap()
    }

    fn zero_multiplier() -> OutputEstimator {
        let spec = mul_spec();
        let base = spec.generate().unwrap();
        let pruned = apply_config(&base, &AxoConfig::all_zeros(65), TiePolarity::Zero).unwrap();
        OutputEstimator::from_netlist(spec, &pruned).unwrap()
    }

    #[test]
    fn fir_with_accurate_multiplier_is_exact() {
        let task = bundled_fir_task(&mul_spec());
        let outputs = run_task(&task, &accurate_multiplier()).unwrap();
        let golden = golden_outputs(&task);
        assert_eq!(outputs, golden);
        let metrics = app_behav(&outputs, &golden).unwrap();
        assert_eq!(metrics.output_mse, 0.0);
        assert_eq!(metrics.psnr_db, PSNR_EXACT);
    }

    #[test]
    fn fir_with_zero_multiplier_matches_closed_form() {
        let task = bundled_fir_task(&mul_spec());
        let outputs = run_task(&task, &zero_multiplier()).unwrap();
        assert!(outputs.iter().all(|v| *v == 0));
        let golden = golden_outputs(&task);
        let metrics = app_behav(&outputs, &golden).unwrap();
        let expected: f64 = golden
            .iter()
            .map(|g| (*g as f64) * (*g as f64))
            .sum::<f64>()
            / golden.len() as f64;
        assert_eq!(metrics.output_mse, expected);
    }

    #[test]
    fn conv_identity_kernel_reproduces_interior() {
        let spec = mul_spec();
        let image = parse_pgm(crate::fixtures::GRADIENT_PGM).unwrap();
        let kernel = [[0, 0, 0], [0, 1, 0], [0, 0, 0]];
        let task = TaskModel::Conv2d3x3 {
            kernel,
            image: image.clone(),
        }
        .quantized_for(&spec);
        let outputs = run_task(&task, &accurate_multiplier()).unwrap();
        let mut expected = Vec::new();
        for y in 1..image.height - 1 {
            for x in 1..image.width - 1 {
                // Quantization clamps pixels to the signed operand range.
                expected.push(image.pixel(x, y).min(127));
            }
        }
        assert_eq!(outputs, expected);
    }

    #[test]
    fn app_behav_examples() {
        let golden = vec![3, -4, 5];
        let same = app_behav(&golden, &golden).unwrap();
        assert_eq!(same.output_mse, 0.0);
        let offset: Vec<i64> = golden.iter().map(|v| v + 1).collect();
        assert_eq!(app_behav(&offset, &golden).unwrap().output_mse, 1.0);
        let zeros = vec![0, 0, 0];
        let mse = app_behav(&zeros, &golden).unwrap().output_mse;
        assert_eq!(mse, (9.0 + 16.0 + 25.0) / 3.0);
        assert!(app_behav(&golden, &[1, 2]).is_err());
    }

    #[test]
    fn lookup_wrapped_netlist_matches_netlist_run() {
        let task = bundled_fir_task(&OperatorSpec::signed_mul_bw(4, 4));
        let spec = OperatorSpec::signed_mul_bw(4, 4);
        let base = spec.generate().unwrap();
        let pruned = apply_config(
            &base,
            &AxoConfig::parse("10101100101010111").unwrap(),
            TiePolarity::Zero,
        )
        .unwrap();
        let netlist_est = OutputEstimator::from_netlist(spec, &pruned).unwrap();
        let table_est = OutputEstimator::table_from(&netlist_est).unwrap();
        let via_netlist = run_task(&task, &netlist_est).unwrap();
        let via_table = run_task(&task, &table_est).unwrap();
        assert_eq!(via_netlist, via_table);
    }

    #[test]
    fn quantize_rounds_half_away_and_saturates() {
        assert_eq!(quantize(2.5, -8, 7), 3);
        assert_eq!(quantize(-2.5, -8, 7), -3);
        assert_eq!(quantize(99.0, -8, 7), 7);
        assert_eq!(quantize(-99.0, -8, 7), -8);
    }

    #[test]
    fn sampling_dse_front_is_internally_non_dominated() {
        let spec = OperatorSpec::signed_mul_bw(4, 4);
        let base = spec.generate().unwrap();
        let task = bundled_fir_task(&spec);
        let objectives = Objectives::new(vec![MetricKey::OutputMse, MetricKey::PdpProxy]);
        let configs = crate::axmodel::sample_configs(
            &crate::axmodel::SamplingStrategy::Random { seed: 5 },
            spec.config_len(),
            32,
        )
        .unwrap();
        let outcome = app_dse(
            &task,
            &base,
            &spec,
            &objectives,
            &AppDseMethod::Sampling { configs },
            &DelayModel::default(),
            &PowerPlan { vectors: 16, seed: 2 },
        )
        .unwrap();
        let front = &outcome.front.points;
        assert!(!front.is_empty());
        for a in front {
            for b in front {
                if a.config != b.config {
                    let av = objectives.values(a);
                    let bv = objectives.values(b);
                    let dominates = av.iter().zip(&bv).all(|(x, y)| x <= y)
                        && av.iter().zip(&bv).any(|(x, y)| x < y);
                    assert!(!dominates, "{} dominates {}", a.config, b.config);
                }
            }
        }
    }

    #[test]
    fn pgm_round_trip() {
        let image = parse_pgm(crate::fixtures::GRADIENT_PGM).unwrap();
        assert_eq!(image.width, 64);
        assert_eq!(image.height, 64);
        let text = write_pgm(&image);
        let again = parse_pgm(&text).unwrap();
        assert_eq!(image, again);
    }

    #[test]
    fn signal_parfailures_name_lines() {
        let err = parse_signal_csv("1\n2\nxyz\n").unwrap_err();
        assert!(matches!(err, AppError::BadSignal { line: 3, .. }));
    }
}
