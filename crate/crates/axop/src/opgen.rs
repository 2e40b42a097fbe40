//! Generators for accurate operator netlists: unsigned ripple-carry adders
//! and Baugh-Wooley signed multipliers, mapped onto LUT + carry-chain cells
//! the way FPGA synthesis maps them.
//!
//! Both generators are pure: the same spec always yields a byte-identical
//! netlist. The LUT list order doubles as the pruning-configuration bit
//! order, so the prunable-LUT count `L` reported by [`OperatorSpec::config_len`]
//! is part of the generator contract.

use crate::netlist::{Netlist, NetlistBuilder, NetId, NET_CONST_0, NET_CONST_1};
use thiserror::Error;

/// Supported operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Unsigned integer adder, `out = a + b`, full carry-out kept.
    UnsignedAdd,
    /// Two's-complement Baugh-Wooley multiplier, `out = a * b`.
    SignedMulBW,
}

/// Shape of one operator: kind plus operand and output bit widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub width_a: usize,
    pub width_b: usize,
    pub width_out: usize,
}

/// Errors from the operator generators.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpgenError {
    #[error("unsupported width: {what} (got {got}, supported {min}..={max})")]
    UnsupportedWidth {
        what: &'static str,
        got: usize,
        min: usize,
        max: usize,
    },
}

impl OperatorSpec {
    pub fn unsigned_add(n: usize) -> OperatorSpec {
        OperatorSpec {
            kind: OperatorKind::UnsignedAdd,
            width_a: n,
            width_b: n,
            width_out: n + 1,
        }
    }

    pub fn signed_mul_bw(n: usize, m: usize) -> OperatorSpec {
        OperatorSpec {
            kind: OperatorKind::SignedMulBW,
            width_a: n,
            width_b: m,
            width_out: n + m,
        }
    }

    /// True when operands are two's-complement signed.
    pub fn signed(&self) -> bool {
        matches!(self.kind, OperatorKind::SignedMulBW)
    }

    /// Inclusive operand ranges, `(a_min, a_max, b_min, b_max)`.
    pub fn operand_ranges(&self) -> (i64, i64, i64, i64) {
        if self.signed() {
            (
                -(1i64 << (self.width_a - 1)),
                (1i64 << (self.width_a - 1)) - 1,
                -(1i64 << (self.width_b - 1)),
                (1i64 << (self.width_b - 1)) - 1,
            )
        } else {
            (0, (1i64 << self.width_a) - 1, 0, (1i64 << self.width_b) - 1)
        }
    }

    /// Number of operand pairs in the full input space.
    pub fn operand_space(&self) -> u128 {
        (1u128 << self.width_a) * (1u128 << self.width_b)
    }

    /// The exact integer result of the accurate operator.
    pub fn accurate(&self, a: i64, b: i64) -> i64 {
        match self.kind {
            OperatorKind::UnsignedAdd => a + b,
            OperatorKind::SignedMulBW => a * b,
        }
    }

    /// Prunable-LUT count of the generated netlist (the config length).
    pub fn config_len(&self) -> usize {
        match self.kind {
            OperatorKind::UnsignedAdd => self.width_a,
            OperatorKind::SignedMulBW => self.width_a * self.width_b + 1,
        }
    }

    /// Canonical `<kind><n>x<m>_<k>`-style short name.
    pub fn name(&self) -> String {
        match self.kind {
            OperatorKind::UnsignedAdd => format!("uadd{}", self.width_a),
            OperatorKind::SignedMulBW => format!("smulbw{}x{}", self.width_a, self.width_b),
        }
    }

    /// Generates the accurate netlist for this spec.
    pub fn generate(&self) -> Result<Netlist, OpgenError> {
        match self.kind {
            OperatorKind::UnsignedAdd => gen_unsigned_adder(self.width_a),
            OperatorKind::SignedMulBW => gen_signed_mul_bw(self.width_a, self.width_b),
        }
    }
}

/// XOR-of-two-inputs truth table.
const LUT2_XOR: u64 = 0x6;
/// `in0 XOR (in1 AND in2)` truth table (sum-propagate fused with a partial
/// product): bit index is `in0 + 2*in1 + 4*in2`.
const LUT3_XOR_AND: u64 = 0x6A;
/// `in0 XOR NOT(in1 AND in2)` (complemented partial product).
const LUT3_XOR_NAND: u64 = 0x95;
/// Single-input inverter.
const LUT1_NOT: u64 = 0x1;

/// Builds an n-bit unsigned ripple-carry adder with `2n` primary inputs and
/// `n+1` outputs.
///
/// One propagate LUT per bit (`p_i = a_i XOR b_i`) feeds the carry-chain
/// select input; the generate path routes `a_i` into the chain data input.
/// Sum bits come from the chain XOR outputs and the final carry is output
/// bit `n`. The LUT list order is the pruning-config bit order, LSB first.
pub fn gen_unsigned_adder(n: usize) -> Result<Netlist, OpgenError> {
    if !(2..=16).contains(&n) {
        return Err(OpgenError::UnsupportedWidth {
            what: "unsigned adder width",
            got: n,
            min: 2,
            max: 16,
        });
    }
    let mut b = NetlistBuilder::new(OperatorSpec::unsigned_add(n).name());
    let a_bits = b.add_input_port("a", n);
    let b_bits = b.add_input_port("b", n);

    let propagate: Vec<NetId> = (0..n)
        .map(|i| b.add_lut(vec![a_bits[i], b_bits[i]], LUT2_XOR))
        .collect();

    let mut sum = Vec::with_capacity(n + 1);
    let mut cin = NET_CONST_0;
    let cells = n.div_ceil(4);
    for cell in 0..cells {
        let base = cell * 4;
        let mut s = [NET_CONST_0; 4];
        let mut di = [NET_CONST_0; 4];
        for slot in 0..4 {
            let bit = base + slot;
            if bit < n {
                s[slot] = propagate[bit];
                di[slot] = a_bits[bit];
            }
        }
        let (o, co) = b.add_carry(s, di, cin);
        for slot in 0..4 {
            if base + slot < n {
                sum.push(o[slot]);
            }
        }
        let top = if base + 4 <= n { 3 } else { n - 1 - base };
        cin = co[top];
    }
    sum.push(cin);
    b.set_output_port("out", sum);
    Ok(b.finish())
}

/// Builds an `n x m` Baugh-Wooley two's-complement multiplier.
///
/// The array is a row-ripple accumulator: the accumulator starts as the low
/// part of the Baugh-Wooley sign-correction constant (`2^(n-1) + 2^(m-1)`)
/// wired from constant nets, and each row `j` adds the partial-product row
/// for `b_j` through one carry chain. Each row LUT packs the partial-product
/// AND (or NAND at the complemented border positions) together with the
/// accumulator XOR, so one LUT covers one product bit and one sum bit. Chain
/// positions above the row reuse the accumulator bit as the select so ripple
/// carries are absorbed without extra LUTs. The remaining `2^(n+m-1)`
/// correction term is a top-bit inverter LUT in the last row (adding 1 at
/// the most significant column is an XOR there, carries out are dropped).
///
/// The LUT list order — row-major, column within row, sign inverter last —
/// is the pruning-config bit order, giving `L = n * m + 1`.
pub fn gen_signed_mul_bw(n: usize, m: usize) -> Result<Netlist, OpgenError> {
    for (what, w) in [("multiplier width_a", n), ("multiplier width_b", m)] {
        if !(2..=8).contains(&w) {
            return Err(OpgenError::UnsupportedWidth {
                what,
                got: w,
                min: 2,
                max: 8,
            });
        }
    }
    let out_w = n + m;
    let mut b = NetlistBuilder::new(OperatorSpec::signed_mul_bw(n, m).name());
    let a_bits = b.add_input_port("a", n);
    let b_bits = b.add_input_port("b", m);

    // Accumulator seeded with the low sign-correction bits.
    let correction = (1u64 << (n - 1)) + (1u64 << (m - 1));
    let mut acc: Vec<NetId> = (0..out_w)
        .map(|k| {
            if (correction >> k) & 1 == 1 {
                NET_CONST_1
            } else {
                NET_CONST_0
            }
        })
        .collect();

    for j in 0..m {
        // Select nets for chain positions j..out_w-1: product positions get a
        // fused LUT, carry-absorb positions reuse the accumulator bit, and
        // the last row's top position folds in the MSB correction.
        let span = out_w - j;
        let mut selects = Vec::with_capacity(span);
        let mut datas = Vec::with_capacity(span);
        for pos in j..out_w {
            let i = pos - j;
            if i < n {
                let complemented = (i == n - 1) ^ (j == m - 1);
                let init = if complemented { LUT3_XOR_NAND } else { LUT3_XOR_AND };
                let lut_out = b.add_lut(vec![acc[pos], a_bits[i], b_bits[j]], init);
                selects.push(lut_out);
                datas.push(acc[pos]);
            } else if i == n && j == m - 1 {
                let lut_out = b.add_lut(vec![acc[pos]], LUT1_NOT);
                selects.push(lut_out);
                datas.push(NET_CONST_0);
            } else {
                selects.push(acc[pos]);
                datas.push(NET_CONST_0);
            }
        }
        // One ripple of carry cells over the row span; carries past the top
        // output bit are dropped (arithmetic is mod 2^(n+m)).
        let mut cin = NET_CONST_0;
        let cells = span.div_ceil(4);
        for cell in 0..cells {
            let base = cell * 4;
            let mut s = [NET_CONST_0; 4];
            let mut di = [NET_CONST_0; 4];
            for slot in 0..4 {
                if base + slot < span {
                    s[slot] = selects[base + slot];
                    di[slot] = datas[base + slot];
                }
            }
            let (o, co) = b.add_carry(s, di, cin);
            for slot in 0..4 {
                if base + slot < span {
                    acc[j + base + slot] = o[slot];
                }
            }
            cin = co[3.min(span - 1 - base)];
        }
    }

    b.set_output_port("out", acc);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{bits_from_i64, bits_from_u64, i64_from_bits, u64_from_bits, validate, Simulator};

    #[test]
    fn adder_structure_matches_contract() {
        let netlist = gen_unsigned_adder(4).unwrap();
        assert!(validate(&netlist).is_empty());
        assert_eq!(netlist.luts.len(), 4);
        assert_eq!(netlist.carries.len(), 1);
        assert_eq!(netlist.input_width(), 8);
        assert_eq!(netlist.output_width(), 5);
        assert_eq!(OperatorSpec::unsigned_add(4).config_len(), 4);
    }

    #[test]
    fn adder_exhaustive_matches_integer_addition() {
        for n in [2usize, 3, 4, 5, 8] {
            let netlist = gen_unsigned_adder(n).unwrap();
            let sim = Simulator::new(&netlist).unwrap();
            for a in 0..(1u64 << n) {
                for b in 0..(1u64 << n) {
                    let mut bits = bits_from_u64(a, n);
                    bits.extend(bits_from_u64(b, n));
                    let out = sim.eval_bits(&bits).unwrap();
                    assert_eq!(u64_from_bits(&out), a + b, "width {n}: {a}+{b}");
                }
            }
        }
    }

    #[test]
    fn adder_max_operands() {
        let netlist = gen_unsigned_adder(4).unwrap();
        let mut bits = bits_from_u64(15, 4);
        bits.extend(bits_from_u64(15, 4));
        let out = crate::netlist::simulate(&netlist, &bits).unwrap();
        assert_eq!(u64_from_bits(&out), 30);
    }

    #[test]
    fn adder_propagate_luts_precede_their_carry() {
        // Every LUT drives a carry select, so in topo order all LUTs of a
        // 4-bit adder come before its single carry cell.
        let netlist = gen_unsigned_adder(4).unwrap();
        let order = crate::netlist::topo_order(&netlist).unwrap();
        let carry_pos = order
            .iter()
            .position(|c| *c == netlist.carries[0].id)
            .unwrap();
        for lut in &netlist.luts {
            let lut_pos = order.iter().position(|c| *c == lut.id).unwrap();
            assert!(lut_pos < carry_pos);
        }
    }

    #[test]
    fn adder_rejects_unsupported_widths() {
        assert!(gen_unsigned_adder(1).is_err());
        assert!(gen_unsigned_adder(17).is_err());
    }

    fn check_multiplier_exhaustive(n: usize, m: usize) {
        let spec = OperatorSpec::signed_mul_bw(n, m);
        let netlist = spec.generate().unwrap();
        assert!(validate(&netlist).is_empty());
        assert_eq!(netlist.luts.len(), n * m + 1);
        let sim = Simulator::new(&netlist).unwrap();
        let (a_min, a_max, b_min, b_max) = spec.operand_ranges();
        for a in a_min..=a_max {
            for b in b_min..=b_max {
                let mut bits = bits_from_i64(a, n);
                bits.extend(bits_from_i64(b, m));
                let out = sim.eval_bits(&bits).unwrap();
                assert_eq!(i64_from_bits(&out), a * b, "{n}x{m}: {a}*{b}");
            }
        }
    }

    #[test]
    fn multiplier_2x2_full_truth_table() {
        check_multiplier_exhaustive(2, 2);
    }

    #[test]
    fn multiplier_4x4_exhaustive() {
        check_multiplier_exhaustive(4, 4);
    }

    #[test]
    fn multiplier_rectangular_exhaustive() {
        check_multiplier_exhaustive(3, 5);
        check_multiplier_exhaustive(5, 3);
    }

    #[test]
    fn multiplier_4x4_spot_values() {
        let netlist = gen_signed_mul_bw(4, 4).unwrap();
        let sim = Simulator::new(&netlist).unwrap();
        let mut bits = bits_from_i64(-8, 4);
        bits.extend(bits_from_i64(7, 4));
        assert_eq!(i64_from_bits(&sim.eval_bits(&bits).unwrap()), -56);
    }

    #[test]
    fn multiplier_zero_annihilates() {
        let netlist = gen_signed_mul_bw(8, 8).unwrap();
        let sim = Simulator::new(&netlist).unwrap();
        for b in [-128i64, -77, -1, 0, 1, 77, 127] {
            let mut bits = bits_from_i64(0, 8);
            bits.extend(bits_from_i64(b, 8));
            assert_eq!(i64_from_bits(&sim.eval_bits(&bits).unwrap()), 0);
        }
    }

    #[test]
    fn multiplier_most_negative_square() {
        let netlist = gen_signed_mul_bw(8, 8).unwrap();
        let sim = Simulator::new(&netlist).unwrap();
        let mut bits = bits_from_i64(-128, 8);
        bits.extend(bits_from_i64(-128, 8));
        assert_eq!(i64_from_bits(&sim.eval_bits(&bits).unwrap()), 16384);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(gen_unsigned_adder(6).unwrap(), gen_unsigned_adder(6).unwrap());
        assert_eq!(
            gen_signed_mul_bw(4, 4).unwrap(),
            gen_signed_mul_bw(4, 4).unwrap()
        );
    }

    #[test]
    fn multiplier_rejects_unsupported_widths() {
        assert!(gen_signed_mul_bw(1, 4).is_err());
        assert!(gen_signed_mul_bw(4, 9).is_err());
    }
}
