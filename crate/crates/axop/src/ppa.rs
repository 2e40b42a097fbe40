//! Hardware-cost proxy metrics computed structurally from a netlist, plus an
//! import path for externally measured PPA records.
//!
//! The proxies replace tool-reported numbers with deterministic structural
//! analogues: area is live-cell counting after constant propagation, delay is
//! the longest weighted input-to-output path, and power is toggle counting
//! over a seeded random vector stream. Imported records override proxies in
//! downstream exploration when present.

use crate::netlist::{Netlist, NetId, NetlistError, Simulator, NET_CONST_1};
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Where a PPA record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PpaSource {
    /// Structural proxy computed by [`characterize_ppa`].
    #[default]
    Proxy,
    /// Parsed from an external measurement file.
    Imported,
}

/// Hardware-cost metrics for one design.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PpaMetrics {
    /// LUTs with a non-constant output.
    pub lut_count: u64,
    /// Carry cells with at least one non-constant input.
    pub carry_count: u64,
    /// Longest weighted input-to-output path.
    pub cpd_proxy: f64,
    /// Mean per-step toggle count over the vector stream.
    pub power_proxy: f64,
    /// `power_proxy * cpd_proxy` for proxies; as-imported otherwise.
    pub pdp_proxy: f64,
    pub source: PpaSource,
}

/// Per-cell delay weights. Net delay is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayModel {
    pub lut_delay: f64,
    pub carry_per_bit_delay: f64,
}

impl Default for DelayModel {
    /// Carry chains hop much faster than LUT stages on real fabrics.
    fn default() -> Self {
        DelayModel {
            lut_delay: 1.0,
            carry_per_bit_delay: 0.1,
        }
    }
}

/// Power-proxy vector plan: `vectors` seeded consecutive random input
/// vectors, toggles averaged over the `vectors - 1` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowerPlan {
    pub vectors: usize,
    pub seed: u64,
}

impl Default for PowerPlan {
    fn default() -> Self {
        PowerPlan {
            vectors: 256,
            seed: 0x70776572,
        }
    }
}

/// Errors from PPA characterization and import.
#[derive(Debug, Error)]
pub enum PpaError {
    #[error("invalid netlist: {0}")]
    InvalidNetlist(#[from] NetlistError),
    #[error("power plan needs at least 2 vectors, got {got}")]
    TooFewVectors { got: usize },
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate config id {id:?} at line {line}")]
    DuplicateConfig { id: String, line: usize },
}

/// Three-valued abstract net value for constant propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AbstractBit {
    Const(bool),
    Varying,
}

/// Computes structural cost proxies for a validated netlist.
///
/// Area counts only live cells: LUTs whose output is non-constant after
/// constant propagation, and carry cells with any non-constant input (cells
/// fed entirely by constants are swept by synthesis, so they cost nothing).
/// The power proxy counts toggles on cell output nets only; primary-input
/// switching is externally imposed and excluded, which makes a fully pruned
/// design cost exactly zero.
pub fn characterize_ppa(
    netlist: &Netlist,
    delay: &DelayModel,
    plan: &PowerPlan,
) -> Result<PpaMetrics, PpaError> {
    if plan.vectors < 2 {
        return Err(PpaError::TooFewVectors { got: plan.vectors });
    }
    let sim = Simulator::new(netlist)?;
    let values = propagate_constants(netlist);
    let lut_count = netlist
        .luts
        .iter()
        .filter(|lut| values[lut.output.0 as usize] == AbstractBit::Varying)
        .count() as u64;
    let carry_count = netlist
        .carries
        .iter()
        .filter(|carry| {
            carry
                .s
                .iter()
                .chain(carry.di.iter())
                .chain([&carry.cin])
                .any(|net| values[net.0 as usize] == AbstractBit::Varying)
        })
        .count() as u64;

    let cpd_proxy = longest_path(netlist, delay);
    let power_proxy = toggle_power(netlist, &sim, plan);
    Ok(PpaMetrics {
        lut_count,
        carry_count,
        cpd_proxy,
        power_proxy,
        pdp_proxy: power_proxy * cpd_proxy,
        source: PpaSource::Proxy,
    })
}

/// Forward constant propagation over the cell DAG.
fn propagate_constants(netlist: &Netlist) -> Vec<AbstractBit> {
    let order = crate::netlist::topo_order(netlist).expect("validated netlist is acyclic");
    let mut values = vec![AbstractBit::Const(false); netlist.net_count as usize];
    values[NET_CONST_1.0 as usize] = AbstractBit::Const(true);
    for net in netlist.primary_inputs() {
        values[net.0 as usize] = AbstractBit::Varying;
    }
    let luts: BTreeMap<_, _> = netlist.luts.iter().map(|l| (l.id, l)).collect();
    let carries: BTreeMap<_, _> = netlist.carries.iter().map(|c| (c.id, c)).collect();
    for cell in order {
        if let Some(lut) = luts.get(&cell) {
            values[lut.output.0 as usize] = eval_lut_abstract(lut.init, &lut.inputs, &values);
        } else if let Some(carry) = carries.get(&cell) {
            let mut chain = values[carry.cin.0 as usize];
            for slot in 0..4 {
                let s = values[carry.s[slot].0 as usize];
                let di = values[carry.di[slot].0 as usize];
                let o = abstract_xor(s, chain);
                let co = abstract_mux(s, chain, di);
                values[carry.o[slot].0 as usize] = o;
                values[carry.co[slot].0 as usize] = co;
                chain = co;
            }
        }
    }
    values
}

fn abstract_xor(a: AbstractBit, b: AbstractBit) -> AbstractBit {
    match (a, b) {
        (AbstractBit::Const(x), AbstractBit::Const(y)) => AbstractBit::Const(x ^ y),
        _ => AbstractBit::Varying,
    }
}

/// `sel ? on_true : on_false` over abstract bits.
fn abstract_mux(sel: AbstractBit, on_true: AbstractBit, on_false: AbstractBit) -> AbstractBit {
    match sel {
        AbstractBit::Const(true) => on_true,
        AbstractBit::Const(false) => on_false,
        AbstractBit::Varying => {
            if on_true == on_false {
                on_true
            } else {
                AbstractBit::Varying
            }
        }
    }
}

/// Enumerates the free inputs of a LUT to decide whether its output is fixed.
fn eval_lut_abstract(init: u64, inputs: &[NetId], values: &[AbstractBit]) -> AbstractBit {
    let free: Vec<usize> = inputs
        .iter()
        .enumerate()
        .filter(|(_, net)| values[net.0 as usize] == AbstractBit::Varying)
        .map(|(i, _)| i)
        .collect();
    let fixed_index: u32 = inputs
        .iter()
        .enumerate()
        .map(|(i, net)| match values[net.0 as usize] {
            AbstractBit::Const(true) => 1u32 << i,
            _ => 0,
        })
        .sum();
    let mut first = None;
    for assignment in 0u32..(1 << free.len()) {
        let mut index = fixed_index;
        for (k, bit_pos) in free.iter().enumerate() {
            if (assignment >> k) & 1 == 1 {
                index |= 1 << bit_pos;
            }
        }
        let bit = (init >> index) & 1 == 1;
        match first {
            None => first = Some(bit),
            Some(prev) if prev != bit => return AbstractBit::Varying,
            _ => {}
        }
    }
    AbstractBit::Const(first.unwrap_or(false))
}

/// Longest weighted path from any primary input to any primary output.
/// Constants carry no arrival time, so paths cut by pruning disappear.
fn longest_path(netlist: &Netlist, delay: &DelayModel) -> f64 {
    let order = crate::netlist::topo_order(netlist).expect("validated netlist is acyclic");
    let mut arrival: Vec<Option<f64>> = vec![None; netlist.net_count as usize];
    for net in netlist.primary_inputs() {
        arrival[net.0 as usize] = Some(0.0);
    }
    let luts: BTreeMap<_, _> = netlist.luts.iter().map(|l| (l.id, l)).collect();
    let carries: BTreeMap<_, _> = netlist.carries.iter().map(|c| (c.id, c)).collect();
    let max_opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    };
    for cell in order {
        if let Some(lut) = luts.get(&cell) {
            let worst = lut
                .inputs
                .iter()
                .fold(None, |acc, net| max_opt(acc, arrival[net.0 as usize]));
            arrival[lut.output.0 as usize] = worst.map(|t| t + delay.lut_delay);
        } else if let Some(carry) = carries.get(&cell) {
            let mut chain = arrival[carry.cin.0 as usize];
            for slot in 0..4 {
                let s = arrival[carry.s[slot].0 as usize];
                let di = arrival[carry.di[slot].0 as usize];
                let o = max_opt(s, chain).map(|t| t + delay.carry_per_bit_delay);
                let co = max_opt(max_opt(s, di), chain).map(|t| t + delay.carry_per_bit_delay);
                arrival[carry.o[slot].0 as usize] = o;
                arrival[carry.co[slot].0 as usize] = co;
                chain = co;
            }
        }
    }
    netlist
        .primary_outputs()
        .filter_map(|net| arrival[net.0 as usize])
        .fold(0.0, f64::max)
}

/// Mean per-step toggle count over cell output nets for a seeded stream of
/// consecutive random input vectors.
fn toggle_power(netlist: &Netlist, sim: &Simulator, plan: &PowerPlan) -> f64 {
    let width = netlist.input_width();
    let mut cell_outputs: Vec<u32> = Vec::new();
    for lut in &netlist.luts {
        cell_outputs.push(lut.output.0);
    }
    for carry in &netlist.carries {
        cell_outputs.extend(carry.o.iter().chain(carry.co.iter()).map(|n| n.0));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut scratch = Vec::new();
    let mut prev: Option<Vec<bool>> = None;
    let mut toggles: u64 = 0;
    for _ in 0..plan.vectors {
        let words: Vec<u64> = (0..width)
            .map(|_| if rng.next_u32() & 1 == 1 { 1u64 } else { 0 })
            .collect();
        let mut outs = Vec::new();
        sim.eval_words_into(&words, &mut scratch, &mut outs)
            .expect("validated width");
        let current: Vec<bool> = cell_outputs
            .iter()
            .map(|net| scratch[*net as usize] & 1 == 1)
            .collect();
        if let Some(previous) = &prev {
            toggles += previous
                .iter()
                .zip(&current)
                .filter(|(a, b)| a != b)
                .count() as u64;
        }
        prev = Some(current);
    }
    toggles as f64 / (plan.vectors - 1) as f64
}

/// Column layout of the imported-PPA CSV: exact header and order required.
pub const IMPORT_HEADER: &str = "config,lut,carry,cpd_ns,power_mw,pdp";

/// Parses an external measurement CSV into per-config imported metrics.
///
/// The header line is required. Config ids may be binary strings or library
/// entry names; duplicate ids and malformed fields are errors, not warnings.
pub fn import_ppa(text: &str) -> Result<BTreeMap<String, PpaMetrics>, PpaError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(PpaError::MalformedRecord {
        line: 1,
        reason: "empty file, expected header".into(),
    })?;
    if header.trim() != IMPORT_HEADER {
        return Err(PpaError::MalformedRecord {
            line: 1,
            reason: format!("expected header {IMPORT_HEADER:?}, got {:?}", header.trim()),
        });
    }
    let mut records = BTreeMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(PpaError::MalformedRecord {
                line: line_no,
                reason: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let id = fields[0].to_string();
        let parse_u64 = |field: &str, what: &str| {
            field.parse::<u64>().map_err(|e| PpaError::MalformedRecord {
                line: line_no,
                reason: format!("{what}: {e}"),
            })
        };
        let parse_f64 = |field: &str, what: &str| {
            field.parse::<f64>().map_err(|e| PpaError::MalformedRecord {
                line: line_no,
                reason: format!("{what}: {e}"),
            })
        };
        let metrics = PpaMetrics {
            lut_count: parse_u64(fields[1], "lut")?,
            carry_count: parse_u64(fields[2], "carry")?,
            cpd_proxy: parse_f64(fields[3], "cpd_ns")?,
            power_proxy: parse_f64(fields[4], "power_mw")?,
            pdp_proxy: parse_f64(fields[5], "pdp")?,
            source: PpaSource::Imported,
        };
        if records.insert(id.clone(), metrics).is_some() {
            return Err(PpaError::DuplicateConfig { id, line: line_no });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axmodel::{apply_config, AxoConfig, TiePolarity};
    use crate::opgen::{gen_signed_mul_bw, gen_unsigned_adder};

    #[test]
    fn accurate_adder_counts() {
        let netlist = gen_unsigned_adder(4).unwrap();
        let metrics =
            characterize_ppa(&netlist, &DelayModel::default(), &PowerPlan::default()).unwrap();
        assert_eq!(metrics.lut_count, 4);
        assert_eq!(metrics.carry_count, 1);
        assert!(metrics.cpd_proxy > 0.0);
        assert!(metrics.power_proxy > 0.0);
        assert_eq!(metrics.pdp_proxy, metrics.power_proxy * metrics.cpd_proxy);
        assert_eq!(metrics.source, PpaSource::Proxy);
    }

    #[test]
    fn fully_pruned_adder_costs_zero() {
        let base = gen_unsigned_adder(4).unwrap();
        let pruned = apply_config(&base, &AxoConfig::all_zeros(4), TiePolarity::Zero).unwrap();
        let metrics =
            characterize_ppa(&pruned, &DelayModel::default(), &PowerPlan::default()).unwrap();
        assert_eq!(metrics.lut_count, 0);
        assert_eq!(metrics.carry_count, 0);
        assert_eq!(metrics.power_proxy, 0.0);
        assert_eq!(metrics.cpd_proxy, 0.0);
        assert_eq!(metrics.pdp_proxy, 0.0);
    }

    #[test]
    fn lut_count_tracks_popcount() {
        let base = gen_unsigned_adder(4).unwrap();
        for config in crate::axmodel::enumerate_configs(4, 1 << 24).unwrap() {
            let pruned = apply_config(&base, &config, TiePolarity::Zero).unwrap();
            let metrics =
                characterize_ppa(&pruned, &DelayModel::default(), &PowerPlan::default()).unwrap();
            assert_eq!(metrics.lut_count, config.popcount() as u64, "config {config}");
        }
    }

    #[test]
    fn cpd_strictly_increases_with_adder_width() {
        let delay = DelayModel::default();
        let plan = PowerPlan { vectors: 2, seed: 1 };
        let mut last = 0.0;
        for n in [2usize, 4, 6, 8, 12, 16] {
            let netlist = gen_unsigned_adder(n).unwrap();
            let metrics = characterize_ppa(&netlist, &delay, &plan).unwrap();
            assert!(
                metrics.cpd_proxy > last,
                "width {n}: {} <= {last}",
                metrics.cpd_proxy
            );
            last = metrics.cpd_proxy;
        }
    }

    #[test]
    fn accurate_cpd_is_maximal_over_config_family() {
        let base = gen_unsigned_adder(4).unwrap();
        let delay = DelayModel::default();
        let plan = PowerPlan::default();
        let accurate = characterize_ppa(&base, &delay, &plan).unwrap().cpd_proxy;
        for config in crate::axmodel::enumerate_configs(4, 1 << 24).unwrap() {
            let pruned = apply_config(&base, &config, TiePolarity::Zero).unwrap();
            let metrics = characterize_ppa(&pruned, &delay, &plan).unwrap();
            assert!(metrics.cpd_proxy <= accurate, "config {config}");
        }
    }

    #[test]
    fn pruning_monotone_on_contained_multiplier_configs_for_area_delay() {
        let base = gen_signed_mul_bw(4, 4).unwrap();
        let delay = DelayModel::default();
        let plan = PowerPlan { vectors: 8, seed: 3 };
        let small = AxoConfig::parse("10101010101010101").unwrap();
        let big = AxoConfig::parse("11101010111010101").unwrap();
        assert!(small.contained_in(&big));
        let m_small =
            characterize_ppa(&apply_config(&base, &small, TiePolarity::Zero).unwrap(), &delay, &plan)
                .unwrap();
        let m_big =
            characterize_ppa(&apply_config(&base, &big, TiePolarity::Zero).unwrap(), &delay, &plan)
                .unwrap();
        assert!(m_small.lut_count <= m_big.lut_count);
        assert!(m_small.cpd_proxy <= m_big.cpd_proxy);
    }

    #[test]
    fn power_is_deterministic_for_fixed_seed() {
        let netlist = gen_unsigned_adder(8).unwrap();
        let delay = DelayModel::default();
        let plan = PowerPlan { vectors: 64, seed: 11 };
        let a = characterize_ppa(&netlist, &delay, &plan).unwrap();
        let b = characterize_ppa(&netlist, &delay, &plan).unwrap();
        assert_eq!(a.power_proxy, b.power_proxy);
    }

    #[test]
    fn import_parses_schema_row() {
        let text = "config,lut,carry,cpd_ns,power_mw,pdp\n1111,4,1,1.85,0.012,0.0222\n";
        let map = import_ppa(text).unwrap();
        let rec = &map["1111"];
        assert_eq!(rec.lut_count, 4);
        assert_eq!(rec.carry_count, 1);
        assert_eq!(rec.cpd_proxy, 1.85);
        assert_eq!(rec.source, PpaSource::Imported);
    }

    #[test]
    fn import_rejects_duplicates() {
        let text = "config,lut,carry,cpd_ns,power_mw,pdp\n1111,4,1,1.0,1.0,1.0\n1111,4,1,2.0,2.0,4.0\n";
        assert!(matches!(
            import_ppa(text),
            Err(PpaError::DuplicateConfig { .. })
        ));
    }

    #[test]
    fn import_header_only_gives_empty_map() {
        let map = import_ppa("config,lut,carry,cpd_ns,power_mw,pdp\n").unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn import_rejects_malformed_rows() {
        let text = "config,lut,carry,cpd_ns,power_mw,pdp\n1111,four,1,1.0,1.0,1.0\n";
        assert!(matches!(
            import_ppa(text),
            Err(PpaError::MalformedRecord { line: 2, .. })
        ));
    }
}
