//! Behavioral-error characterization and the output-estimation methods that
//! stand in for an operator's exact evaluation.
//!
//! Error statistics compare an operator's integer outputs against the
//! accurate reference over an exhaustive or Monte Carlo operand plan. Three
//! estimator kinds answer "what does this operator output for (a, b)": a full
//! lookup table, functional netlist simulation, and a polynomial-regression
//! predictor fitted on seeded random samples. Any estimator can stand in for
//! the operator argument of [`characterize_behav`], so metrics computed
//! through a lookup table of a netlist equal the netlist's own metrics
//! exactly.

use crate::netlist::{bits_from_i64, bits_from_u64, i64_from_bits, u64_from_bits, Netlist, NetlistError, Simulator};
use crate::opgen::OperatorSpec;
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

/// Behavioral-error statistics of one design against the accurate reference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BehavMetrics {
    /// Mean absolute error, in output units.
    pub avg_abs_err: f64,
    /// Mean of `|err| / max(|accurate|, 1)`.
    pub avg_rel_err: f64,
    pub max_abs_err: f64,
    /// Fraction of operand pairs with any error.
    pub err_prob: f64,
    pub mse: f64,
}

impl BehavMetrics {
    pub fn is_zero(&self) -> bool {
        self.avg_abs_err == 0.0
            && self.avg_rel_err == 0.0
            && self.max_abs_err == 0.0
            && self.err_prob == 0.0
            && self.mse == 0.0
    }
}

/// Input plan for characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPlan {
    /// Every operand pair; allowed up to 2^24 pairs.
    Exhaustive,
    /// Seeded uniform operand pairs.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Cap on exhaustive operand spaces (keeps a 12-bit adder sweep possible).
pub const EXHAUSTIVE_CAP: u128 = 1 << 24;

/// Errors from behavioral characterization and estimator fitting.
#[derive(Debug, Error)]
pub enum BehavError {
    #[error("operand space of {space} pairs exceeds the exhaustive cap of {cap}")]
    SpaceTooLarge { space: u128, cap: u128 },
    #[error("evaluation plan is empty")]
    EmptyPlan,
    #[error("invalid netlist: {0}")]
    InvalidNetlist(#[from] NetlistError),
    #[error("netlist shape does not match spec: expected {expected} input bits, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("operand ({a}, {b}) out of range for {spec}")]
    OperandOutOfRange { a: i64, b: i64, spec: String },
    #[error("polynomial degree {got} outside supported range 1..=4")]
    BadDegree { got: usize },
    #[error("{got} samples cannot fit {needed} monomials")]
    TooFewSamples { got: usize, needed: usize },
    #[error("sample matrix is rank deficient; increase the sample count")]
    RankDeficient,
}

/// An operand-to-output map for one operator.
///
/// `LookupTable` and `NetlistFunctional` are exact by construction;
/// `PolyRegression` predicts a rounded polynomial evaluation.
#[derive(Clone)]
pub enum OutputEstimator {
    LookupTable {
        spec: OperatorSpec,
        table: Arc<Vec<i64>>,
    },
    NetlistFunctional {
        spec: OperatorSpec,
        sim: Arc<Simulator>,
    },
    PolyRegression {
        spec: OperatorSpec,
        degree: usize,
        samples: usize,
        seed: u64,
        coefficients: Arc<Vec<f64>>,
    },
}

impl std::fmt::Debug for OutputEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutputEstimator::LookupTable { spec, .. } => {
                write!(f, "LookupTable({})", spec.name())
            }
            OutputEstimator::NetlistFunctional { spec, .. } => {
                write!(f, "NetlistFunctional({})", spec.name())
            }
            OutputEstimator::PolyRegression { spec, degree, .. } => {
                write!(f, "PolyRegression({}, d={degree})", spec.name())
            }
        }
    }
}

impl OutputEstimator {
    /// Wraps a netlist in a functional estimator. The netlist must have
    /// `width_a + width_b` input bits.
    pub fn from_netlist(spec: OperatorSpec, netlist: &Netlist) -> Result<OutputEstimator, BehavError> {
        let sim = Simulator::new(netlist)?;
        let expected = spec.width_a + spec.width_b;
        if sim.input_width() != expected {
            return Err(BehavError::ShapeMismatch {
                expected,
                got: sim.input_width(),
            });
        }
        Ok(OutputEstimator::NetlistFunctional {
            spec,
            sim: Arc::new(sim),
        })
    }

    /// Builds a full lookup table by exhaustively evaluating another
    /// estimator (typically a netlist).
    pub fn table_from(source: &OutputEstimator) -> Result<OutputEstimator, BehavError> {
        let spec = *source.spec();
        let space = spec.operand_space();
        if space > EXHAUSTIVE_CAP {
            return Err(BehavError::SpaceTooLarge {
                space,
                cap: EXHAUSTIVE_CAP,
            });
        }
        let (a_min, a_max, b_min, b_max) = spec.operand_ranges();
        let mut table = Vec::with_capacity(space as usize);
        for a in a_min..=a_max {
            for b in b_min..=b_max {
                table.push(source.eval(a, b)?);
            }
        }
        Ok(OutputEstimator::LookupTable {
            spec,
            table: Arc::new(table),
        })
    }

    /// Builds a lookup table directly from stored values (library entries).
    pub fn from_table(spec: OperatorSpec, table: Vec<i64>) -> OutputEstimator {
        OutputEstimator::LookupTable {
            spec,
            table: Arc::new(table),
        }
    }

    pub fn spec(&self) -> &OperatorSpec {
        match self {
            OutputEstimator::LookupTable { spec, .. } => spec,
            OutputEstimator::NetlistFunctional { spec, .. } => spec,
            OutputEstimator::PolyRegression { spec, .. } => spec,
        }
    }

    /// Output value for one operand pair.
    pub fn eval(&self, a: i64, b: i64) -> Result<i64, BehavError> {
        let spec = self.spec();
        let (a_min, a_max, b_min, b_max) = spec.operand_ranges();
        if a < a_min || a > a_max || b < b_min || b > b_max {
            return Err(BehavError::OperandOutOfRange {
                a,
                b,
                spec: spec.name(),
            });
        }
        match self {
            OutputEstimator::LookupTable { table, .. } => {
                let b_span = (b_max - b_min + 1) as usize;
                let index = (a - a_min) as usize * b_span + (b - b_min) as usize;
                Ok(table[index])
            }
            OutputEstimator::NetlistFunctional { spec, sim } => {
                let bits = encode_operands(spec, a, b);
                let out = sim.eval_bits(&bits)?;
                Ok(decode_output(spec, &out))
            }
            OutputEstimator::PolyRegression {
                degree,
                coefficients,
                ..
            } => {
                let mut value = 0.0;
                for (k, (p, q)) in monomials(*degree).into_iter().enumerate() {
                    value += coefficients[k] * (a as f64).powi(p as i32) * (b as f64).powi(q as i32);
                }
                Ok(value.round() as i64)
            }
        }
    }
}

/// Encodes operands into the netlist input bit vector (a bus then b bus).
pub fn encode_operands(spec: &OperatorSpec, a: i64, b: i64) -> Vec<bool> {
    let mut bits = if spec.signed() {
        bits_from_i64(a, spec.width_a)
    } else {
        bits_from_u64(a as u64, spec.width_a)
    };
    bits.extend(if spec.signed() {
        bits_from_i64(b, spec.width_b)
    } else {
        bits_from_u64(b as u64, spec.width_b)
    });
    bits
}

/// Decodes the output bus as an integer; signed operators decode
/// two's-complement, so error metrics stay arithmetic rather than Hamming.
pub fn decode_output(spec: &OperatorSpec, bits: &[bool]) -> i64 {
    if spec.signed() {
        i64_from_bits(bits)
    } else {
        u64_from_bits(bits) as i64
    }
}

/// Computes behavioral-error statistics of `operator` against `reference`
/// over the plan's operand pairs.
///
/// Exhaustive plans iterate `a` ascending, `b` ascending inner — signed
/// spaces cover the full two's-complement range. Integer-valued sums
/// accumulate in 128-bit integers, so integer-derived fields are exact.
pub fn characterize_behav(
    operator: &OutputEstimator,
    reference: &OutputEstimator,
    plan: &EvalPlan,
) -> Result<BehavMetrics, BehavError> {
    let spec = *operator.spec();
    match plan {
        EvalPlan::Exhaustive => {
            let space = spec.operand_space();
            if space > EXHAUSTIVE_CAP {
                return Err(BehavError::SpaceTooLarge {
                    space,
                    cap: EXHAUSTIVE_CAP,
                });
            }
            // The packed fast path covers netlist-vs-netlist comparisons.
            if let (
                OutputEstimator::NetlistFunctional { sim: op_sim, .. },
                OutputEstimator::NetlistFunctional { sim: ref_sim, .. },
            ) = (operator, reference)
            {
                return exhaustive_packed(&spec, op_sim, ref_sim);
            }
            let (a_min, a_max, b_min, b_max) = spec.operand_ranges();
            let mut acc = MetricAccumulator::new();
            for a in a_min..=a_max {
                for b in b_min..=b_max {
                    acc.record(operator.eval(a, b)?, reference.eval(a, b)?);
                }
            }
            Ok(acc.finish())
        }
        EvalPlan::MonteCarlo { samples, seed } => {
            if *samples == 0 {
                return Err(BehavError::EmptyPlan);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let (a_min, _, b_min, _) = spec.operand_ranges();
            let a_mask = (1u64 << spec.width_a) - 1;
            let b_mask = (1u64 << spec.width_b) - 1;
            let mut acc = MetricAccumulator::new();
            for _ in 0..*samples {
                // Operand spans are powers of two, so masking is unbiased.
                let a = a_min + (rng.next_u64() & a_mask) as i64;
                let b = b_min + (rng.next_u64() & b_mask) as i64;
                acc.record(operator.eval(a, b)?, reference.eval(a, b)?);
            }
            Ok(acc.finish())
        }
    }
}

/// 64-lane exhaustive sweep for netlist-backed operator and reference.
/// The hot loop works on raw bit patterns with no per-pair allocation.
fn exhaustive_packed(
    spec: &OperatorSpec,
    op_sim: &Simulator,
    ref_sim: &Simulator,
) -> Result<BehavMetrics, BehavError> {
    let (a_min, _, b_min, b_max) = spec.operand_ranges();
    let b_span = (b_max - b_min + 1) as u64;
    let total = spec.operand_space() as u64;
    let (wa, wb, out_w) = (spec.width_a, spec.width_b, spec.width_out);
    let signed = spec.signed();

    let mut acc = MetricAccumulator::new();
    let mut op_scratch = Vec::new();
    let mut ref_scratch = Vec::new();
    let mut op_out = Vec::new();
    let mut ref_out = Vec::new();
    let mut words = vec![0u64; wa + wb];
    let sign_extend = |raw: u64| -> i64 {
        if signed && out_w < 64 && (raw >> (out_w - 1)) & 1 == 1 {
            raw as i64 - (1i64 << out_w)
        } else {
            raw as i64
        }
    };
    let mut pair = 0u64;
    while pair < total {
        let lanes = 64.min(total - pair) as usize;
        for w in words.iter_mut() {
            *w = 0;
        }
        for lane in 0..lanes {
            let t = pair + lane as u64;
            // Two's-complement raw patterns match the bus encoding.
            let raw_a = ((a_min + (t / b_span) as i64) as u64) & ((1u64 << wa) - 1);
            let raw_b = ((b_min + (t % b_span) as i64) as u64) & ((1u64 << wb) - 1);
            for i in 0..wa {
                words[i] |= ((raw_a >> i) & 1) << lane;
            }
            for i in 0..wb {
                words[wa + i] |= ((raw_b >> i) & 1) << lane;
            }
        }
        op_sim.eval_words_into(&words, &mut op_scratch, &mut op_out)?;
        ref_sim.eval_words_into(&words, &mut ref_scratch, &mut ref_out)?;
        for lane in 0..lanes {
            let mut raw_op = 0u64;
            let mut raw_ref = 0u64;
            for k in 0..out_w {
                raw_op |= ((op_out[k] >> lane) & 1) << k;
                raw_ref |= ((ref_out[k] >> lane) & 1) << k;
            }
            acc.record(sign_extend(raw_op), sign_extend(raw_ref));
        }
        pair += lanes as u64;
    }
    Ok(acc.finish())
}

struct MetricAccumulator {
    count: u64,
    abs_sum: u128,
    sq_sum: u128,
    rel_sum: f64,
    max_abs: u64,
    err_count: u64,
}

impl MetricAccumulator {
    fn new() -> Self {
        MetricAccumulator {
            count: 0,
            abs_sum: 0,
            sq_sum: 0,
            rel_sum: 0.0,
            max_abs: 0,
            err_count: 0,
        }
    }

    fn record(&mut self, got: i64, accurate: i64) {
        let err = (got - accurate).unsigned_abs();
        self.count += 1;
        self.abs_sum += u128::from(err);
        self.sq_sum += u128::from(err) * u128::from(err);
        self.rel_sum += err as f64 / (accurate.unsigned_abs().max(1)) as f64;
        self.max_abs = self.max_abs.max(err);
        if err != 0 {
            self.err_count += 1;
        }
    }

    fn finish(self) -> BehavMetrics {
        let n = self.count.max(1) as f64;
        BehavMetrics {
            avg_abs_err: self.abs_sum as f64 / n,
            avg_rel_err: self.rel_sum / n,
            max_abs_err: self.max_abs as f64,
            err_prob: self.err_count as f64 / n,
            mse: self.sq_sum as f64 / n,
        }
    }
}

/// Monomial exponents `(p, q)` with `p + q <= degree`, in a fixed order:
/// total degree ascending, then `p` descending.
pub fn monomials(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for total in 0..=degree {
        for p in (0..=total).rev() {
            out.push((p, total - p));
        }
    }
    out
}

/// Fits a polynomial-regression output estimator by least squares on
/// monomials of both operands over `samples` seeded random operand pairs.
///
/// Refitting with the same inputs is bit-identical. A singular sample matrix
/// reports [`BehavError::RankDeficient`]; the caller increases the count.
pub fn fit_poly_estimator(
    operator: &OutputEstimator,
    degree: usize,
    samples: usize,
    seed: u64,
) -> Result<OutputEstimator, BehavError> {
    if !(1..=4).contains(&degree) {
        return Err(BehavError::BadDegree { got: degree });
    }
    let terms = monomials(degree);
    if samples < terms.len() {
        return Err(BehavError::TooFewSamples {
            got: samples,
            needed: terms.len(),
        });
    }
    let spec = *operator.spec();
    let (a_min, _, b_min, _) = spec.operand_ranges();
    let a_mask = (1u64 << spec.width_a) - 1;
    let b_mask = (1u64 << spec.width_b) - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Normal equations X'X beta = X'y accumulated directly.
    let k = terms.len();
    let mut xtx = vec![vec![0.0f64; k]; k];
    let mut xty = vec![0.0f64; k];
    let mut row = vec![0.0f64; k];
    for _ in 0..samples {
        let a = a_min + (rng.next_u64() & a_mask) as i64;
        let b = b_min + (rng.next_u64() & b_mask) as i64;
        let y = operator.eval(a, b)? as f64;
        for (idx, (p, q)) in terms.iter().enumerate() {
            row[idx] = (a as f64).powi(*p as i32) * (b as f64).powi(*q as i32);
        }
        for i in 0..k {
            for j in 0..k {
                xtx[i][j] += row[i] * row[j];
            }
            xty[i] += row[i] * y;
        }
    }
    let coefficients = solve_linear(xtx, xty).ok_or(BehavError::RankDeficient)?;
    Ok(OutputEstimator::PolyRegression {
        spec,
        degree,
        samples,
        seed,
        coefficients: Arc::new(coefficients),
    })
}

/// Gauss-Jordan with partial pivoting; `None` when a pivot collapses.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|x, y| a[*x][col].abs().partial_cmp(&a[*y][col].abs()).unwrap())?;
        if a[pivot_row][col].abs() <= scale * 1e-12 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col];
        for j in col..n {
            a[col][j] /= pivot;
        }
        b[col] /= pivot;
        for row in 0..n {
            if row != col && a[row][col] != 0.0 {
                let factor = a[row][col];
                for j in col..n {
                    a[row][j] -= factor * a[col][j];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    Some(b)
}

/// Timing and fidelity of one estimator against functional ground truth.
#[derive(Debug, Clone)]
pub struct EstimatorReport {
    pub label: String,
    /// Mean wall-clock time per query, nanoseconds.
    pub ns_per_query: f64,
    /// Error statistics of the estimator against the functional reference.
    pub deviation: BehavMetrics,
}

/// Benchmarks estimators against the netlist-functional ground truth over a
/// plan: wall-clock per estimator plus deviation statistics. Lookup-table and
/// functional estimators report zero deviation by construction.
pub fn estimator_benchmark(
    estimators: &[(String, OutputEstimator)],
    ground_truth: &OutputEstimator,
    plan: &EvalPlan,
) -> Result<Vec<EstimatorReport>, BehavError> {
    let mut reports = Vec::with_capacity(estimators.len());
    for (label, estimator) in estimators {
        let started = Instant::now();
        let deviation = characterize_behav(estimator, ground_truth, plan)?;
        let elapsed = started.elapsed().as_nanos() as f64;
        let queries = match plan {
            EvalPlan::Exhaustive => estimator.spec().operand_space() as f64,
            EvalPlan::MonteCarlo { samples, .. } => *samples as f64,
        };
        reports.push(EstimatorReport {
            label: label.clone(),
            ns_per_query: elapsed / queries.max(1.0),
            deviation,
        });
    }
    Ok(reports)
}
