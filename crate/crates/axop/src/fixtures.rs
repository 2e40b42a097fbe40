//! Bundled test assets and brute-force oracles.
//!
//! The oracle in this module double-checks behavioral characterization
//! through a code path that shares nothing with [`crate::behav`] except type
//! definitions: pruned adders are modeled directly at the arithmetic level
//! with a per-bit carry recurrence, and everything else goes through a
//! deliberately naive recursive netlist interpreter that re-applies the
//! pruning rule itself and recomputes from scratch for every input vector.
//! Divergent implementations catch shared-bug classes that a single fast
//! path cannot.

use crate::axmodel::AxoConfig;
use crate::behav::BehavMetrics;
use crate::netlist::{CarryCell, LutCell, Netlist, NetId, NET_CONST_0, NET_CONST_1};
use crate::opgen::{OperatorKind, OperatorSpec};
use std::collections::HashMap;
use thiserror::Error;

/// Bundled sine-plus-noise FIR test signal, one integer sample per line.
pub const SIGNAL_CSV: &str = include_str!("../fixtures/v1/signal.csv");
/// Bundled 64x64 diagonal-gradient image, PGM P2.
pub const GRADIENT_PGM: &str = include_str!("../fixtures/v1/gradient_64x64.pgm");
/// Sample externally-measured PPA file in the import schema.
pub const IMPORTED_PPA_SAMPLE: &str = include_str!("../fixtures/v1/imported_ppa_sample.csv");
/// Sample operator-library file with one table-backed accurate adder.
pub const OPERATOR_LIBRARY_SAMPLE: &str =
    include_str!("../fixtures/v1/operator_library_sample.lib");

/// Exhaustive metric record computed by direct evaluation, no shared
/// simulator machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub spec: OperatorSpec,
    pub config: AxoConfig,
    pub metrics: BehavMetrics,
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("operand space {space} exceeds the oracle cap 2^20")]
    SpaceTooLarge { space: u128 },
    #[error("config length {got} does not match prunable LUT count {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Computes exhaustive behavioral metrics for a pruned operator without
/// touching the production characterization path.
///
/// Adders use a closed-form per-bit recurrence; multipliers are evaluated by
/// the naive interpreter over the generator netlist with the pruning rule
/// re-applied independently.
pub fn oracle_behav(spec: &OperatorSpec, config: &AxoConfig) -> Result<OracleReport, OracleError> {
    if spec.operand_space() > (1 << 20) {
        return Err(OracleError::SpaceTooLarge {
            space: spec.operand_space(),
        });
    }
    if config.len() != spec.config_len() {
        return Err(OracleError::LengthMismatch {
            expected: spec.config_len(),
            got: config.len(),
        });
    }
    let (a_min, a_max, b_min, b_max) = spec.operand_ranges();
    let evaluator: Box<dyn Fn(i64, i64) -> i64> = match spec.kind {
        OperatorKind::UnsignedAdd => {
            let n = spec.width_a;
            let bits = config.bits().to_vec();
            Box::new(move |a, b| pruned_adder_arithmetic(a as u64, b as u64, n, &bits) as i64)
        }
        OperatorKind::SignedMulBW => {
            let netlist = spec.generate().expect("spec widths already vetted");
            let interp = NaiveInterpreter::new(&netlist, config);
            let spec_copy = *spec;
            Box::new(move |a, b| interp.eval(&spec_copy, a, b))
        }
    };

    // Plain accumulation loop, same operand order as the production path so
    // float sums stay comparable to the last bit.
    let mut count: u64 = 0;
    let mut abs_sum: u128 = 0;
    let mut sq_sum: u128 = 0;
    let mut rel_sum: f64 = 0.0;
    let mut max_abs: u64 = 0;
    let mut err_count: u64 = 0;
    for a in a_min..=a_max {
        for b in b_min..=b_max {
            let accurate = spec.accurate(a, b);
            let got = evaluator(a, b);
            let err = (got - accurate).unsigned_abs();
            count += 1;
            abs_sum += u128::from(err);
            sq_sum += u128::from(err) * u128::from(err);
            rel_sum += err as f64 / accurate.unsigned_abs().max(1) as f64;
            max_abs = max_abs.max(err);
            if err != 0 {
                err_count += 1;
            }
        }
    }
    let n = count as f64;
    Ok(OracleReport {
        spec: *spec,
        config: config.clone(),
        metrics: BehavMetrics {
            avg_abs_err: abs_sum as f64 / n,
            avg_rel_err: rel_sum / n,
            max_abs_err: max_abs as f64,
            err_prob: err_count as f64 / n,
            mse: sq_sum as f64 / n,
        },
    })
}

/// Arithmetic-level model of the pruned ripple adder.
///
/// Keeping bit `i` gives the usual propagate/generate pair; pruning it
/// silences both the select and the generate of that chain position, so the
/// sum bit degenerates to the incoming carry and the chain restarts at zero.
fn pruned_adder_arithmetic(a: u64, b: u64, n: usize, keep: &[bool]) -> u64 {
    let mut carry = 0u64;
    let mut sum = 0u64;
    for i in 0..n {
        let ai = (a >> i) & 1;
        let bi = (b >> i) & 1;
        let (o, next) = if keep[i] {
            let p = ai ^ bi;
            (p ^ carry, if p == 1 { carry } else { ai })
        } else {
            (carry, 0)
        };
        sum |= o << i;
        carry = next;
    }
    sum | (carry << n)
}

/// Recursive per-net evaluator with no topological precompilation. A memo
/// per input vector keeps carry chains from exploding; nothing is shared
/// between vectors.
struct NaiveInterpreter {
    luts: Vec<LutCell>,
    carries: Vec<CarryCell>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
}

impl NaiveInterpreter {
    /// Re-applies the pruning rule from first principles: drop pruned LUTs,
    /// read their fanout as constant zero, and silence the generate input of
    /// chain slots whose select they drove.
    fn new(base: &Netlist, config: &AxoConfig) -> NaiveInterpreter {
        let pruned: Vec<NetId> = base
            .luts
            .iter()
            .zip(config.bits())
            .filter(|(_, keep)| !**keep)
            .map(|(lut, _)| lut.output)
            .collect();
        let is_pruned = |net: NetId| pruned.contains(&net);
        let repoint = |net: NetId| if is_pruned(net) { NET_CONST_0 } else { net };

        let luts = base
            .luts
            .iter()
            .zip(config.bits())
            .filter(|(_, keep)| **keep)
            .map(|(lut, _)| LutCell {
                id: lut.id,
                inputs: lut.inputs.iter().map(|n| repoint(*n)).collect(),
                init: lut.init,
                output: lut.output,
            })
            .collect();
        let carries = base
            .carries
            .iter()
            .map(|carry| {
                let mut s = carry.s;
                let mut di = carry.di;
                for slot in 0..4 {
                    if is_pruned(s[slot]) {
                        s[slot] = NET_CONST_0;
                        di[slot] = NET_CONST_0;
                    } else {
                        di[slot] = repoint(di[slot]);
                    }
                }
                CarryCell {
                    cin: repoint(carry.cin),
                    s,
                    di,
                    ..carry.clone()
                }
            })
            .collect();
        NaiveInterpreter {
            luts,
            carries,
            inputs: base.primary_inputs().collect(),
            outputs: base
                .primary_outputs()
                .map(repoint)
                .collect(),
        }
    }

    fn eval(&self, spec: &OperatorSpec, a: i64, b: i64) -> i64 {
        let bits = crate::behav::encode_operands(spec, a, b);
        let mut memo: HashMap<NetId, bool> = HashMap::new();
        memo.insert(NET_CONST_0, false);
        memo.insert(NET_CONST_1, true);
        for (net, bit) in self.inputs.iter().zip(&bits) {
            memo.insert(*net, *bit);
        }
        let out_bits: Vec<bool> = self
            .outputs
            .iter()
            .map(|net| self.eval_net(*net, &mut memo))
            .collect();
        crate::behav::decode_output(spec, &out_bits)
    }

    fn eval_net(&self, net: NetId, memo: &mut HashMap<NetId, bool>) -> bool {
        if let Some(value) = memo.get(&net) {
            return *value;
        }
        if let Some(lut) = self.luts.iter().find(|l| l.output == net) {
            let mut index = 0u32;
            for (i, input) in lut.inputs.iter().enumerate() {
                if self.eval_net(*input, memo) {
                    index |= 1 << i;
                }
            }
            let value = lut.lookup(index);
            memo.insert(net, value);
            return value;
        }
        for carry in &self.carries {
            for slot in 0..4 {
                if carry.o[slot] == net || carry.co[slot] == net {
                    // Walk the chain from cin up to this slot.
                    let mut chain = self.eval_net(carry.cin, memo);
                    for k in 0..=slot {
                        let s = self.eval_net(carry.s[k], memo);
                        let di = self.eval_net(carry.di[k], memo);
                        let o = s ^ chain;
                        let co = if s { chain } else { di };
                        memo.insert(carry.o[k], o);
                        memo.insert(carry.co[k], co);
                        chain = co;
                    }
                    return memo[&net];
                }
            }
        }
        // Undriven nets read as zero; validated inputs never get here.
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axmodel::{apply_config, enumerate_configs, TiePolarity};
    use crate::behav::{characterize_behav, EvalPlan, OutputEstimator};

    #[test]
    fn oracle_accurate_adder_is_zero() {
        let spec = OperatorSpec::unsigned_add(4);
        let report = oracle_behav(&spec, &AxoConfig::all_ones(4)).unwrap();
        assert!(report.metrics.is_zero());
    }

    #[test]
    fn oracle_fully_pruned_adder_values() {
        let spec = OperatorSpec::unsigned_add(4);
        let report = oracle_behav(&spec, &AxoConfig::all_zeros(4)).unwrap();
        assert_eq!(report.metrics.avg_abs_err, 15.0);
        assert_eq!(report.metrics.err_prob, 255.0 / 256.0);
    }

    #[test]
    fn oracle_matches_production_on_every_adder_config() {
        let spec = OperatorSpec::unsigned_add(4);
        let base = spec.generate().unwrap();
        let accurate = OutputEstimator::from_netlist(spec, &base).unwrap();
        for config in enumerate_configs(4, 1 << 24).unwrap() {
            let pruned = apply_config(&base, &config, TiePolarity::Zero).unwrap();
            let op = OutputEstimator::from_netlist(spec, &pruned).unwrap();
            let produced = characterize_behav(&op, &accurate, &EvalPlan::Exhaustive).unwrap();
            let oracle = oracle_behav(&spec, &config).unwrap().metrics;
            assert_eq!(system_abs(&produced), system_abs(&oracle), "config {config}");
        }
    }

    // Integer-derived fields compare exactly; float sums share the operand
    // order so they match bitwise too.
    fn system_abs(m: &BehavMetrics) -> (u64, u64, u64, u64, u64) {
        (
            m.avg_abs_err.to_bits(),
            m.avg_rel_err.to_bits(),
            m.max_abs_err.to_bits(),
            m.err_prob.to_bits(),
            m.mse.to_bits(),
        )
    }

    #[test]
    fn oracle_matches_production_on_multiplier_configs() {
        let spec = OperatorSpec::signed_mul_bw(4, 4);
        let base = spec.generate().unwrap();
        let accurate = OutputEstimator::from_netlist(spec, &base).unwrap();
        let configs =
            crate::axmodel::sample_configs(&crate::axmodel::SamplingStrategy::Random { seed: 41 }, spec.config_len(), 8)
                .unwrap();
        for config in configs {
            let pruned = apply_config(&base, &config, TiePolarity::Zero).unwrap();
            let op = OutputEstimator::from_netlist(spec, &pruned).unwrap();
            let produced = characterize_behav(&op, &accurate, &EvalPlan::Exhaustive).unwrap();
            let oracle = oracle_behav(&spec, &config).unwrap().metrics;
            assert_eq!(system_abs(&produced), system_abs(&oracle), "config {config}");
        }
    }

    #[test]
    fn oracle_rejects_oversized_spaces() {
        let spec = OperatorSpec::unsigned_add(16);
        assert!(matches!(
            oracle_behav(&spec, &AxoConfig::all_ones(16)),
            Err(OracleError::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn fixtures_are_bundled() {
        assert_eq!(SIGNAL_CSV.lines().count(), 256);
        assert!(GRADIENT_PGM.starts_with("P2"));
        assert!(IMPORTED_PPA_SAMPLE.starts_with("config,"));
        assert!(OPERATOR_LIBRARY_SAMPLE.contains("entry acc_uadd4"));
    }
}
