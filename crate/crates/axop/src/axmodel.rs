//! Approximation models: synthesis of operator variants by binary-string LUT
//! pruning, selection from an indexed operator library, and the sampling
//! strategies that seed design-space exploration.
//!
//! A pruning configuration is a bit string `l_0..l_{L-1}` over the base
//! netlist's LUTs in generator order; bit `i` keeps (1) or prunes (0) LUT
//! `i`, and the all-ones string is the accurate operator. The string form
//! writes `l_0` first, so `"1011"` prunes the second LUT.

use crate::netlist::{CarryCell, LutCell, Netlist, NetId, NET_CONST_0, NET_CONST_1};
use crate::ppa::PpaMetrics;
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Binary pruning configuration for one synthesized operator variant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxoConfig {
    bits: Vec<bool>,
}

impl AxoConfig {
    pub fn from_bits(bits: Vec<bool>) -> AxoConfig {
        AxoConfig { bits }
    }

    /// Parses a `0`/`1` string, `l_0` first.
    pub fn parse(text: &str) -> Result<AxoConfig, AxmodelError> {
        let mut bits = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(AxmodelError::BadConfigChar { ch: other }),
            }
        }
        Ok(AxoConfig { bits })
    }

    pub fn all_ones(len: usize) -> AxoConfig {
        AxoConfig {
            bits: vec![true; len],
        }
    }

    pub fn all_zeros(len: usize) -> AxoConfig {
        AxoConfig {
            bits: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    /// Number of kept LUTs.
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits.iter().all(|b| *b)
    }

    /// Bitwise containment: every kept bit of `self` is kept in `other`.
    pub fn contained_in(&self, other: &AxoConfig) -> bool {
        self.len() == other.len()
            && self
                .bits
                .iter()
                .zip(&other.bits)
                .all(|(mine, theirs)| !*mine || *theirs)
    }
}

impl fmt::Display for AxoConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Value a pruned LUT's fanout is tied to. Constant zero models removed
/// logic; constant one is available for experimentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolarity {
    #[default]
    Zero,
    One,
}

impl TiePolarity {
    fn net(self) -> NetId {
        match self {
            TiePolarity::Zero => NET_CONST_0,
            TiePolarity::One => NET_CONST_1,
        }
    }
}

/// Errors from the approximation-model operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AxmodelError {
    #[error("config length {got} does not match prunable LUT count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("config space 2^{len} exceeds the enumeration cap {cap}")]
    SpaceTooLarge { len: usize, cap: u64 },
    #[error("requested {requested} configs but the family only has {available}")]
    CountExceedsFamily { requested: usize, available: usize },
    #[error("invalid character {ch:?} in config string")]
    BadConfigChar { ch: char },
    #[error("library index {index} out of range ({len} entries)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sample count must be at least 1")]
    EmptyCount,
}

/// Applies a pruning configuration to a base netlist.
///
/// For each zero bit, LUT `i` (in generator order) is removed and every
/// consumer of its output net is re-pointed to the tie constant. A carry
/// slot whose select input was driven by the pruned LUT loses its generate
/// path as well (`di` re-pointed to the same constant): select and generate
/// of one chain position belong to the same physical dual-output LUT, so
/// removing the LUT silences the whole slot. The all-ones config returns a
/// netlist identical to the base.
pub fn apply_config(
    base: &Netlist,
    config: &AxoConfig,
    tie: TiePolarity,
) -> Result<Netlist, AxmodelError> {
    if config.len() != base.luts.len() {
        return Err(AxmodelError::LengthMismatch {
            expected: base.luts.len(),
            got: config.len(),
        });
    }
    let tie_net = tie.net();
    let pruned: BTreeSet<NetId> = base
        .luts
        .iter()
        .zip(config.bits())
        .filter(|(_, keep)| !**keep)
        .map(|(lut, _)| lut.output)
        .collect();
    let repoint = |net: NetId| -> NetId {
        if pruned.contains(&net) {
            tie_net
        } else {
            net
        }
    };

    let luts: Vec<LutCell> = base
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

    let carries: Vec<CarryCell> = base
        .carries
        .iter()
        .map(|carry| {
            let mut s = carry.s;
            let mut di = carry.di;
            for slot in 0..4 {
                if pruned.contains(&s[slot]) {
                    s[slot] = tie_net;
                    di[slot] = tie_net;
                } else {
                    di[slot] = repoint(di[slot]);
                }
            }
            CarryCell {
                id: carry.id,
                s,
                di,
                cin: repoint(carry.cin),
                o: carry.o,
                co: carry.co,
            }
        })
        .collect();

    let outputs = base
        .outputs
        .iter()
        .map(|port| crate::netlist::Port {
            name: port.name.clone(),
            bits: port.bits.iter().map(|n| repoint(*n)).collect(),
        })
        .collect();

    Ok(Netlist {
        name: base.name.clone(),
        inputs: base.inputs.clone(),
        outputs,
        luts,
        carries,
        net_count: base.net_count,
    })
}

/// Default cap on enumerable config spaces.
pub const ENUMERATION_CAP: u64 = 1 << 24;

/// Enumerates all `2^L` configs in lexicographic order of their string form.
pub fn enumerate_configs(
    len: usize,
    limit: u64,
) -> Result<impl Iterator<Item = AxoConfig>, AxmodelError> {
    if len >= 64 || (1u64 << len) > limit {
        return Err(AxmodelError::SpaceTooLarge { len, cap: limit });
    }
    let total = 1u64 << len;
    // Lexicographic order over the l_0-first string means counting with l_0
    // as the most significant digit.
    Ok((0..total).map(move |value| {
        AxoConfig::from_bits((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect())
    }))
}

/// Sampling strategies over the config space.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingStrategy {
    /// Seeded uniform i.i.d. bits, de-duplicated within the batch.
    Random { seed: u64 },
    /// All-ones base with a zero window of the given length swept across all
    /// positions, plus the complementary ones-window-in-zeros family.
    Patterned { window: usize },
    /// Alternating 01/10, one-hot and one-cold families.
    Special,
}

/// Draws `count` unique configs of length `len` under the given strategy.
/// Deterministic for fixed `(strategy, len, count)`.
pub fn sample_configs(
    strategy: &SamplingStrategy,
    len: usize,
    count: usize,
) -> Result<Vec<AxoConfig>, AxmodelError> {
    if count == 0 {
        return Err(AxmodelError::EmptyCount);
    }
    match strategy {
        SamplingStrategy::Random { seed } => {
            let space = if len >= 64 { u64::MAX } else { 1u64 << len };
            if count as u64 > space {
                return Err(AxmodelError::CountExceedsFamily {
                    requested: count,
                    available: space as usize,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut seen = BTreeSet::new();
            let mut batch = Vec::with_capacity(count);
            while batch.len() < count {
                let bits: Vec<bool> = (0..len).map(|_| rng.next_u32() & 1 == 1).collect();
                let config = AxoConfig::from_bits(bits);
                if seen.insert(config.clone()) {
                    batch.push(config);
                }
            }
            Ok(batch)
        }
        SamplingStrategy::Patterned { window } => {
            let family = patterned_family(len, *window);
            take_family(family, count)
        }
        SamplingStrategy::Special => take_family(special_family(len), count),
    }
}

fn take_family(family: Vec<AxoConfig>, count: usize) -> Result<Vec<AxoConfig>, AxmodelError> {
    if count > family.len() {
        return Err(AxmodelError::CountExceedsFamily {
            requested: count,
            available: family.len(),
        });
    }
    Ok(family.into_iter().take(count).collect())
}

/// Zero-window sweep over an all-ones base, then the complementary family;
/// duplicates removed keeping first occurrence.
fn patterned_family(len: usize, window: usize) -> Vec<AxoConfig> {
    let mut family = Vec::new();
    let mut seen = BTreeSet::new();
    if window == 0 || window > len {
        return family;
    }
    for invert in [false, true] {
        for start in 0..=(len - window) {
            let bits: Vec<bool> = (0..len)
                .map(|i| {
                    let in_window = i >= start && i < start + window;
                    in_window == invert
                })
                .collect();
            let config = AxoConfig::from_bits(bits);
            if seen.insert(config.clone()) {
                family.push(config);
            }
        }
    }
    family
}

/// Alternating patterns, then one-hot, then one-cold.
fn special_family(len: usize) -> Vec<AxoConfig> {
    let mut family = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |config: AxoConfig, family: &mut Vec<AxoConfig>| {
        if seen.insert(config.clone()) {
            family.push(config);
        }
    };
    push(
        AxoConfig::from_bits((0..len).map(|i| i % 2 == 1).collect()),
        &mut family,
    );
    push(
        AxoConfig::from_bits((0..len).map(|i| i % 2 == 0).collect()),
        &mut family,
    );
    for hot in 0..len {
        push(
            AxoConfig::from_bits((0..len).map(|i| i == hot).collect()),
            &mut family,
        );
    }
    for cold in 0..len {
        push(
            AxoConfig::from_bits((0..len).map(|i| i != cold).collect()),
            &mut family,
        );
    }
    family
}

/// How a library entry resolves operand pairs to outputs.
#[derive(Debug, Clone)]
pub enum EntryBehavior {
    /// Full output table over the operand space, indexed
    /// `(a - a_min) * b_span + (b - b_min)`.
    Table {
        spec: crate::opgen::OperatorSpec,
        values: Vec<i64>,
    },
    /// Netlist-backed behavior.
    Netlist {
        spec: crate::opgen::OperatorSpec,
        netlist: Netlist,
    },
}

/// One pre-characterized operator in a selection library.
#[derive(Debug, Clone)]
pub struct LibraryEntry {
    pub name: String,
    pub behavior: EntryBehavior,
    /// Externally measured PPA, surfaced unchanged by lookups.
    pub imported_ppa: Option<PpaMetrics>,
}

/// An indexed table of operators for selection-based exploration.
#[derive(Debug, Clone, Default)]
pub struct OperatorLibrary {
    pub entries: Vec<LibraryEntry>,
}

impl OperatorLibrary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Resolves an entry index to its behavior and optional imported PPA.
    pub fn lookup(&self, index: usize) -> Result<&LibraryEntry, AxmodelError> {
        self.entries.get(index).ok_or(AxmodelError::IndexOutOfRange {
            index,
            len: self.entries.len(),
        })
    }
}
