//! Structural circuit representation of arithmetic operators as LUT cells and
//! 4-bit carry-chain cells, with a deterministic functional simulator.
//!
//! Netlists are immutable after construction. Simulation is a pure function of
//! `(netlist, input bits)` and is safe to run from many threads at once. The
//! simulator evaluates 64 input vectors per pass by packing one vector per bit
//! lane of a `u64`, which keeps exhaustive characterization of 16-bit operand
//! spaces cheap.
//!
//! Bus convention, used everywhere in this crate: bit 0 comes first. Input and
//! output buses are listed LSB-first, and a LUT's `inputs[0]` is the
//! least-significant selector bit of its truth table.

use std::collections::HashMap;
use thiserror::Error;

/// Identifier of one single-bit signal.
///
/// Nets 0 and 1 are reserved for the constants 0 and 1; every netlist has
/// them. All other nets are primary inputs or cell outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(pub u32);

/// The reserved constant-zero net.
pub const NET_CONST_0: NetId = NetId(0);
/// The reserved constant-one net.
pub const NET_CONST_1: NetId = NetId(1);

impl NetId {
    /// True for the two reserved constant nets.
    pub fn is_constant(self) -> bool {
        self == NET_CONST_0 || self == NET_CONST_1
    }
}

/// Identifier of one cell, unique across LUTs and carry cells of a netlist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub u32);

/// A lookup-table cell with 1..=6 inputs and a single output.
///
/// Bit `k` of `init` gives the output when the input vector, read with
/// `inputs[0]` as the least-significant selector bit, equals `k`. With `n`
/// inputs only the low `2^n` bits are meaningful and the rest must be zero,
/// so netlist equality stays byte-comparable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LutCell {
    pub id: CellId,
    pub inputs: Vec<NetId>,
    pub init: u64,
    pub output: NetId,
}

impl LutCell {
    /// Truth-table output for the given input index.
    pub fn lookup(&self, index: u32) -> bool {
        (self.init >> index) & 1 == 1
    }
}

/// A 4-bit carry-chain cell.
///
/// Semantics, fixed for all time with `c[-1] = cin`:
/// `co[i] = s[i] ? c[i-1] : di[i]` and `o[i] = s[i] XOR c[i-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarryCell {
    pub id: CellId,
    /// Select/propagate inputs.
    pub s: [NetId; 4],
    /// Data/generate inputs.
    pub di: [NetId; 4],
    /// Chain input.
    pub cin: NetId,
    /// XOR (sum) outputs.
    pub o: [NetId; 4],
    /// Carry outputs.
    pub co: [NetId; 4],
}

/// A named bus of single-bit nets, LSB first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub bits: Vec<NetId>,
}

/// A directed acyclic structural circuit of LUT and carry cells.
///
/// `inputs` and `outputs` group the primary nets into named buses so that RTL
/// emission and serialization keep stable port names; the flattened views
/// [`Netlist::primary_inputs`] and [`Netlist::primary_outputs`] give the raw
/// ordered net lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    pub name: String,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub luts: Vec<LutCell>,
    pub carries: Vec<CarryCell>,
    /// Total number of net ids allocated, including the two constants.
    pub net_count: u32,
}

/// Structural violations reported by [`validate`]. Violations are data, not
/// failures: an empty list means the netlist invariants hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A cell input or primary output references a net id outside the netlist.
    DanglingNet { net: NetId, context: String },
    /// Two drivers (cells, inputs or constants) target the same net.
    MultipleDrivers { net: NetId },
    /// A referenced net has no driver at all.
    UndrivenNet { net: NetId, context: String },
    /// A LUT has zero or more than six inputs.
    BadInputCount { cell: CellId, count: usize },
    /// Init bits above `2^n` are set for an `n`-input LUT.
    NonCanonicalInit { cell: CellId },
    /// No topological order over the cells exists.
    CycleDetected,
    /// Two cells share one cell id.
    DuplicateCellId { cell: CellId },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DanglingNet { net, context } => {
                write!(f, "dangling net {} ({context})", net.0)
            }
            Violation::MultipleDrivers { net } => write!(f, "multiple drivers on net {}", net.0),
            Violation::UndrivenNet { net, context } => {
                write!(f, "undriven net {} ({context})", net.0)
            }
            Violation::BadInputCount { cell, count } => {
                write!(f, "cell {} has {count} inputs, expected 1..=6", cell.0)
            }
            Violation::NonCanonicalInit { cell } => {
                write!(f, "cell {} has init bits above its input count", cell.0)
            }
            Violation::CycleDetected => write!(f, "no topological order exists"),
            Violation::DuplicateCellId { cell } => write!(f, "duplicate cell id {}", cell.0),
        }
    }
}

/// Errors from netlist operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("netlist has structural violations: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("no topological order exists (combinational cycle)")]
    CycleDetected,
    #[error("input width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Netlist {
    /// All primary input nets in bus order, LSB of the first bus first.
    pub fn primary_inputs(&self) -> impl Iterator<Item = NetId> + '_ {
        self.inputs.iter().flat_map(|p| p.bits.iter().copied())
    }

    /// All primary output nets, in bus order.
    pub fn primary_outputs(&self) -> impl Iterator<Item = NetId> + '_ {
        self.outputs.iter().flat_map(|p| p.bits.iter().copied())
    }

    pub fn input_width(&self) -> usize {
        self.inputs.iter().map(|p| p.bits.len()).sum()
    }

    pub fn output_width(&self) -> usize {
        self.outputs.iter().map(|p| p.bits.len()).sum()
    }

    pub fn cell_count(&self) -> usize {
        self.luts.len() + self.carries.len()
    }
}

/// Incremental netlist builder used by the generators.
#[derive(Debug)]
pub struct NetlistBuilder {
    name: String,
    inputs: Vec<Port>,
    outputs: Vec<Port>,
    luts: Vec<LutCell>,
    carries: Vec<CarryCell>,
    next_net: u32,
    next_cell: u32,
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            name: name.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            luts: Vec::new(),
            carries: Vec::new(),
            next_net: 2, // nets 0 and 1 are the constants
            next_cell: 0,
        }
    }

    pub fn fresh_net(&mut self) -> NetId {
        let id = NetId(self.next_net);
        self.next_net += 1;
        id
    }

    pub fn add_input_port(&mut self, name: impl Into<String>, width: usize) -> Vec<NetId> {
        let bits: Vec<NetId> = (0..width).map(|_| self.fresh_net()).collect();
        self.inputs.push(Port {
            name: name.into(),
            bits: bits.clone(),
        });
        bits
    }

    pub fn set_output_port(&mut self, name: impl Into<String>, bits: Vec<NetId>) {
        self.outputs.push(Port {
            name: name.into(),
            bits,
        });
    }

    pub fn add_lut(&mut self, inputs: Vec<NetId>, init: u64) -> NetId {
        let output = self.fresh_net();
        let id = CellId(self.next_cell);
        self.next_cell += 1;
        self.luts.push(LutCell {
            id,
            inputs,
            init,
            output,
        });
        output
    }

    /// Adds a carry cell, allocating its eight output nets.
    pub fn add_carry(&mut self, s: [NetId; 4], di: [NetId; 4], cin: NetId) -> ([NetId; 4], [NetId; 4]) {
        let o = [
            self.fresh_net(),
            self.fresh_net(),
            self.fresh_net(),
            self.fresh_net(),
        ];
        let co = [
            self.fresh_net(),
            self.fresh_net(),
            self.fresh_net(),
            self.fresh_net(),
        ];
        let id = CellId(self.next_cell);
        self.next_cell += 1;
        self.carries.push(CarryCell {
            id,
            s,
            di,
            cin,
            o,
            co,
        });
        (o, co)
    }

    pub fn finish(self) -> Netlist {
        Netlist {
            name: self.name,
            inputs: self.inputs,
            outputs: self.outputs,
            luts: self.luts,
            carries: self.carries,
            net_count: self.next_net,
        }
    }
}

/// Checks every structural invariant and returns the list of violations.
///
/// An empty list means the netlist is well-formed: all referenced nets
/// resolve, every referenced net has exactly one driver, LUT shapes are
/// canonical and a topological order exists.
pub fn validate(netlist: &Netlist) -> Vec<Violation> {
    let mut violations = Vec::new();
    let n = netlist.net_count;

    // Driver map: net -> how many drivers. Constants and primary inputs drive
    // themselves.
    let mut drivers: HashMap<NetId, u32> = HashMap::new();
    drivers.insert(NET_CONST_0, 1);
    drivers.insert(NET_CONST_1, 1);
    for net in netlist.primary_inputs() {
        *drivers.entry(net).or_insert(0) += 1;
    }
    for lut in &netlist.luts {
        *drivers.entry(lut.output).or_insert(0) += 1;
    }
    for carry in &netlist.carries {
        for net in carry.o.iter().chain(carry.co.iter()) {
            *drivers.entry(*net).or_insert(0) += 1;
        }
    }
    for (net, count) in &drivers {
        if *count > 1 {
            violations.push(Violation::MultipleDrivers { net: *net });
        }
        if net.0 >= n {
            violations.push(Violation::DanglingNet {
                net: *net,
                context: "driver target outside net space".into(),
            });
        }
    }

    let mut seen_cells = HashMap::new();
    let check_ref = |net: NetId, context: String, violations: &mut Vec<Violation>| {
        if net.0 >= n {
            violations.push(Violation::DanglingNet { net, context });
        } else if !drivers.contains_key(&net) {
            violations.push(Violation::UndrivenNet { net, context });
        }
    };

    for lut in &netlist.luts {
        if *seen_cells.entry(lut.id).or_insert(0u32) == 1 {
            violations.push(Violation::DuplicateCellId { cell: lut.id });
        }
        seen_cells.insert(lut.id, 1);
        if lut.inputs.is_empty() || lut.inputs.len() > 6 {
            violations.push(Violation::BadInputCount {
                cell: lut.id,
                count: lut.inputs.len(),
            });
        } else {
            let meaningful = 1u128 << (1 << lut.inputs.len());
            if u128::from(lut.init) >= meaningful {
                violations.push(Violation::NonCanonicalInit { cell: lut.id });
            }
        }
        for (k, net) in lut.inputs.iter().enumerate() {
            check_ref(*net, format!("lut {} input {k}", lut.id.0), &mut violations);
        }
    }
    for carry in &netlist.carries {
        if *seen_cells.entry(carry.id).or_insert(0u32) == 1 {
            violations.push(Violation::DuplicateCellId { cell: carry.id });
        }
        seen_cells.insert(carry.id, 1);
        for (k, net) in carry.s.iter().enumerate() {
            check_ref(*net, format!("carry {} s[{k}]", carry.id.0), &mut violations);
        }
        for (k, net) in carry.di.iter().enumerate() {
            check_ref(*net, format!("carry {} di[{k}]", carry.id.0), &mut violations);
        }
        check_ref(carry.cin, format!("carry {} cin", carry.id.0), &mut violations);
    }
    for (k, net) in netlist.primary_outputs().enumerate() {
        check_ref(net, format!("primary output {k}"), &mut violations);
    }

    if topo_order(netlist).is_err() {
        violations.push(Violation::CycleDetected);
    }

    violations
}

/// Deterministic topological order over all cells: every cell appears after
/// the cells driving its inputs, ties broken by ascending cell id.
pub fn topo_order(netlist: &Netlist) -> Result<Vec<CellId>, NetlistError> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    // Map net -> producing cell (constants and primary inputs have none).
    let mut producer: HashMap<NetId, CellId> = HashMap::new();
    for lut in &netlist.luts {
        producer.insert(lut.output, lut.id);
    }
    for carry in &netlist.carries {
        for net in carry.o.iter().chain(carry.co.iter()) {
            producer.insert(*net, carry.id);
        }
    }

    let mut pending: HashMap<CellId, u32> = HashMap::new();
    let mut consumers: HashMap<CellId, Vec<CellId>> = HashMap::new();
    let mut note_edge = |from: NetId, to: CellId, pending: &mut HashMap<CellId, u32>| {
        if let Some(src) = producer.get(&from) {
            if *src != to {
                consumers.entry(*src).or_default().push(to);
                *pending.entry(to).or_insert(0) += 1;
            }
        }
    };

    let mut all_cells: Vec<CellId> = Vec::with_capacity(netlist.cell_count());
    for lut in &netlist.luts {
        all_cells.push(lut.id);
        pending.entry(lut.id).or_insert(0);
        for net in &lut.inputs {
            note_edge(*net, lut.id, &mut pending);
        }
    }
    for carry in &netlist.carries {
        all_cells.push(carry.id);
        pending.entry(carry.id).or_insert(0);
        for net in carry.s.iter().chain(carry.di.iter()).chain([&carry.cin]) {
            note_edge(*net, carry.id, &mut pending);
        }
    }

    let mut ready: BinaryHeap<Reverse<CellId>> = all_cells
        .iter()
        .filter(|c| pending[c] == 0)
        .map(|c| Reverse(*c))
        .collect();
    let mut order = Vec::with_capacity(all_cells.len());
    while let Some(Reverse(cell)) = ready.pop() {
        order.push(cell);
        if let Some(next) = consumers.get(&cell) {
            for succ in next {
                let count = pending.get_mut(succ).expect("edge target tracked");
                *count -= 1;
                if *count == 0 {
                    ready.push(Reverse(*succ));
                }
            }
        }
    }
    if order.len() != all_cells.len() {
        return Err(NetlistError::CycleDetected);
    }
    Ok(order)
}

enum Step {
    Lut {
        init: u64,
        inputs: Vec<u32>,
        out: u32,
    },
    Carry {
        s: [u32; 4],
        di: [u32; 4],
        cin: u32,
        o: [u32; 4],
        co: [u32; 4],
    },
}

/// A compiled, immutable evaluator for one netlist.
///
/// Construction validates the netlist and freezes a topological program so
/// repeated evaluation does no graph work. Evaluation packs 64 input vectors
/// into the bit lanes of each `u64` word.
pub struct Simulator {
    steps: Vec<Step>,
    input_nets: Vec<u32>,
    output_nets: Vec<u32>,
    net_count: usize,
}

impl Simulator {
    pub fn new(netlist: &Netlist) -> Result<Simulator, NetlistError> {
        let violations = validate(netlist);
        if !violations.is_empty() {
            return Err(NetlistError::Invalid(violations));
        }
        let order = topo_order(netlist)?;
        let lut_by_id: HashMap<CellId, &LutCell> =
            netlist.luts.iter().map(|l| (l.id, l)).collect();
        let carry_by_id: HashMap<CellId, &CarryCell> =
            netlist.carries.iter().map(|c| (c.id, c)).collect();
        let steps = order
            .iter()
            .map(|cell| {
                if let Some(lut) = lut_by_id.get(cell) {
                    Step::Lut {
                        init: lut.init,
                        inputs: lut.inputs.iter().map(|n| n.0).collect(),
                        out: lut.output.0,
                    }
                } else {
                    let c = carry_by_id[cell];
                    Step::Carry {
                        s: c.s.map(|n| n.0),
                        di: c.di.map(|n| n.0),
                        cin: c.cin.0,
                        o: c.o.map(|n| n.0),
                        co: c.co.map(|n| n.0),
                    }
                }
            })
            .collect();
        Ok(Simulator {
            steps,
            input_nets: netlist.primary_inputs().map(|n| n.0).collect(),
            output_nets: netlist.primary_outputs().map(|n| n.0).collect(),
            net_count: netlist.net_count as usize,
        })
    }

    pub fn input_width(&self) -> usize {
        self.input_nets.len()
    }

    pub fn output_width(&self) -> usize {
        self.output_nets.len()
    }

    /// Evaluates 64 packed input vectors at once. `inputs[i]` holds input bit
    /// `i` for all 64 lanes; the returned words hold the output bits the same
    /// way. `scratch` is reused between calls to avoid reallocation.
    pub fn eval_words_into(
        &self,
        inputs: &[u64],
        scratch: &mut Vec<u64>,
        outputs: &mut Vec<u64>,
    ) -> Result<(), NetlistError> {
        if inputs.len() != self.input_nets.len() {
            return Err(NetlistError::WidthMismatch {
                expected: self.input_nets.len(),
                got: inputs.len(),
            });
        }
        scratch.clear();
        scratch.resize(self.net_count, 0u64);
        scratch[NET_CONST_0.0 as usize] = 0;
        scratch[NET_CONST_1.0 as usize] = !0u64;
        for (net, word) in self.input_nets.iter().zip(inputs) {
            scratch[*net as usize] = *word;
        }
        for step in &self.steps {
            match step {
                Step::Lut { init, inputs, out } => {
                    scratch[*out as usize] = eval_lut_word(*init, inputs, scratch);
                }
                Step::Carry { s, di, cin, o, co } => {
                    let mut chain = scratch[*cin as usize];
                    for i in 0..4 {
                        let sel = scratch[s[i] as usize];
                        let data = scratch[di[i] as usize];
                        scratch[o[i] as usize] = sel ^ chain;
                        let carry = (sel & chain) | (!sel & data);
                        scratch[co[i] as usize] = carry;
                        chain = carry;
                    }
                }
            }
        }
        outputs.clear();
        outputs.extend(self.output_nets.iter().map(|n| scratch[*n as usize]));
        Ok(())
    }

    /// Single-vector evaluation; lane 0 of the packed path.
    pub fn eval_bits(&self, input_bits: &[bool]) -> Result<Vec<bool>, NetlistError> {
        if input_bits.len() != self.input_nets.len() {
            return Err(NetlistError::WidthMismatch {
                expected: self.input_nets.len(),
                got: input_bits.len(),
            });
        }
        let words: Vec<u64> = input_bits.iter().map(|b| if *b { 1 } else { 0 }).collect();
        let mut scratch = Vec::new();
        let mut outputs = Vec::new();
        self.eval_words_into(&words, &mut scratch, &mut outputs)?;
        Ok(outputs.iter().map(|w| w & 1 == 1).collect())
    }
}

/// Shannon-fold evaluation of one LUT over 64 packed lanes.
fn eval_lut_word(init: u64, inputs: &[u32], values: &[u64]) -> u64 {
    let n = inputs.len();
    let mut table = [0u64; 64];
    for (k, entry) in table.iter_mut().enumerate().take(1 << n) {
        *entry = if (init >> k) & 1 == 1 { !0u64 } else { 0 };
    }
    let mut size = 1usize << n;
    // Fold the most-significant selector first.
    for i in (0..n).rev() {
        let sel = values[inputs[i] as usize];
        size /= 2;
        for j in 0..size {
            table[j] = (sel & table[j + size]) | (!sel & table[j]);
        }
    }
    table[0]
}

/// Computes primary outputs for one input vector over a validated netlist.
///
/// Convenience wrapper that builds a fresh [`Simulator`]; hot loops should
/// build the simulator once instead.
pub fn simulate(netlist: &Netlist, input_bits: &[bool]) -> Result<Vec<bool>, NetlistError> {
    Simulator::new(netlist)?.eval_bits(input_bits)
}

/// Encodes an unsigned integer as an LSB-first bit vector of the given width.
pub fn bits_from_u64(value: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (value >> i) & 1 == 1).collect()
}

/// Decodes an LSB-first bit vector as an unsigned integer.
pub fn u64_from_bits(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, b)| acc | ((*b as u64) << i))
}

/// Decodes an LSB-first bit vector as a two's-complement signed integer.
pub fn i64_from_bits(bits: &[bool]) -> i64 {
    let raw = u64_from_bits(bits);
    let width = bits.len();
    if width == 0 || width >= 64 {
        return raw as i64;
    }
    if bits[width - 1] {
        (raw as i64) - (1i64 << width)
    } else {
        raw as i64
    }
}

/// Encodes a signed integer into an LSB-first two's-complement bit vector.
pub fn bits_from_i64(value: i64, width: usize) -> Vec<bool> {
    bits_from_u64((value as u64) & mask(width), width)
}

fn mask(width: usize) -> u64 {
    if width >= 64 {
        !0
    } else {
        (1u64 << width) - 1
    }
}
