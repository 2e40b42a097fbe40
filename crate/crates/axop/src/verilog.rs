//! Structural Verilog emission for external characterization flows.
//!
//! Two flavors of the same netlist:
//!
//! * [`VerilogMode::Generic`] — self-contained synthesizable text using one
//!   continuous assignment per LUT (sum-of-products of its truth table) and
//!   per carry-chain position (ternary/xor forms of the chain equations).
//! * [`VerilogMode::VendorPrimitives`] — `LUT6` instances with `INIT`
//!   attributes and `CARRY4` instances, for vendor place-and-route flows.
//!
//! Ports follow the `a[n-1:0]`, `b[m-1:0]`, `out[k-1:0]` convention with
//! bit 0 as the LSB; files are UTF-8 with LF line endings.

use crate::netlist::{Netlist, NetId, NetlistError, Violation, NET_CONST_0, NET_CONST_1};
use std::collections::HashMap;
use std::fmt::Write;

/// Emission flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerilogMode {
    Generic,
    VendorPrimitives,
}

/// Comment tag placed on every LUT-derived assignment in Generic mode, so
/// external tooling can count or strip them.
pub const LUT_ASSIGN_TAG: &str = "// lut ";

/// Emits one Verilog module for a validated netlist.
pub fn emit_verilog(netlist: &Netlist, mode: VerilogMode) -> Result<String, NetlistError> {
    let violations: Vec<Violation> = crate::netlist::validate(netlist);
    if !violations.is_empty() {
        return Err(NetlistError::Invalid(violations));
    }
    let names = NetNames::build(netlist);
    let mut text = String::new();
    let _ = writeln!(text, "// {} : structural netlist", netlist.name);
    let _ = writeln!(text, "module {} (", netlist.name);
    let mut port_lines = Vec::new();
    for port in &netlist.inputs {
        port_lines.push(format!(
            "  input  [{}:0] {}",
            port.bits.len() - 1,
            port.name
        ));
    }
    for port in &netlist.outputs {
        port_lines.push(format!(
            "  output [{}:0] {}",
            port.bits.len() - 1,
            port.name
        ));
    }
    let _ = writeln!(text, "{}", port_lines.join(",\n"));
    let _ = writeln!(text, ");");

    // Internal wire declarations.
    let mut wires: Vec<String> = names
        .internal
        .values()
        .cloned()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    wires.sort();
    if !wires.is_empty() {
        let _ = writeln!(text, "  wire {};", wires.join(", "));
    }

    match mode {
        VerilogMode::Generic => emit_generic(netlist, &names, &mut text),
        VerilogMode::VendorPrimitives => emit_vendor(netlist, &names, &mut text),
    }

    // Output bits driven by inputs or constants need explicit assigns.
    for port in &netlist.outputs {
        for (k, bit) in port.bits.iter().enumerate() {
            let driver = names.lookup(*bit);
            let target = format!("{}[{k}]", port.name);
            if driver != target {
                let _ = writeln!(text, "  assign {target} = {driver};");
            }
        }
    }
    let _ = writeln!(text, "endmodule");
    Ok(text)
}

struct NetNames {
    by_net: HashMap<NetId, String>,
    internal: HashMap<NetId, String>,
}

impl NetNames {
    fn build(netlist: &Netlist) -> NetNames {
        let mut by_net = HashMap::new();
        by_net.insert(NET_CONST_0, "1'b0".to_string());
        by_net.insert(NET_CONST_1, "1'b1".to_string());
        for port in &netlist.inputs {
            for (k, bit) in port.bits.iter().enumerate() {
                by_net.insert(*bit, format!("{}[{k}]", port.name));
            }
        }
        // Cell outputs that are also primary output bits take the port name;
        // everything else becomes an internal wire.
        let mut output_names: HashMap<NetId, String> = HashMap::new();
        for port in &netlist.outputs {
            for (k, bit) in port.bits.iter().enumerate() {
                output_names
                    .entry(*bit)
                    .or_insert_with(|| format!("{}[{k}]", port.name));
            }
        }
        let mut internal = HashMap::new();
        let mut claim = |net: NetId, by_net: &mut HashMap<NetId, String>| {
            if by_net.contains_key(&net) {
                return;
            }
            if let Some(name) = output_names.get(&net) {
                by_net.insert(net, name.clone());
            } else {
                let name = format!("n{}", net.0);
                by_net.insert(net, name.clone());
                internal.insert(net, name);
            }
        };
        for lut in &netlist.luts {
            claim(lut.output, &mut by_net);
        }
        for carry in &netlist.carries {
            for net in carry.o.iter().chain(carry.co.iter()) {
                claim(*net, &mut by_net);
            }
        }
        NetNames { by_net, internal }
    }

    fn lookup(&self, net: NetId) -> String {
        self.by_net
            .get(&net)
            .cloned()
            .unwrap_or_else(|| format!("n{}", net.0))
    }
}

/// Sum-of-products expression of a LUT truth table.
fn lut_expression(init: u64, inputs: &[String]) -> String {
    let n = inputs.len();
    let size = 1u64 << n;
    if init == 0 {
        return "1'b0".to_string();
    }
    if init == (if n == 6 { u64::MAX } else { (1u64 << size) - 1 }) {
        return "1'b1".to_string();
    }
    let mut terms = Vec::new();
    for k in 0..size {
        if (init >> k) & 1 == 0 {
            continue;
        }
        let literals: Vec<String> = inputs
            .iter()
            .enumerate()
            .map(|(i, name)| {
                if (k >> i) & 1 == 1 {
                    name.clone()
                } else {
                    format!("~{name}")
                }
            })
            .collect();
        terms.push(format!("({})", literals.join(" & ")));
    }
    terms.join(" | ")
}

fn emit_generic(netlist: &Netlist, names: &NetNames, text: &mut String) {
    for lut in &netlist.luts {
        let inputs: Vec<String> = lut.inputs.iter().map(|n| names.lookup(*n)).collect();
        let expr = lut_expression(lut.init, &inputs);
        let _ = writeln!(
            text,
            "  assign {} = {expr}; {LUT_ASSIGN_TAG}{}",
            names.lookup(lut.output),
            lut.id.0
        );
    }
    for carry in &netlist.carries {
        let mut chain = names.lookup(carry.cin);
        for slot in 0..4 {
            let s = names.lookup(carry.s[slot]);
            let di = names.lookup(carry.di[slot]);
            let o = names.lookup(carry.o[slot]);
            let co = names.lookup(carry.co[slot]);
            let _ = writeln!(text, "  assign {o} = {s} ^ {chain}; // carry {} o[{slot}]", carry.id.0);
            let _ = writeln!(
                text,
                "  assign {co} = {s} ? {chain} : {di}; // carry {} co[{slot}]",
                carry.id.0
            );
            chain = co;
        }
    }
}

/// Tiles an n-input truth table up to the 64-bit LUT6 INIT value, so the
/// padded high inputs are don't-cares.
fn expand_init(init: u64, n: usize) -> u64 {
    let mut value = init;
    let mut width = 1u32 << n;
    while width < 64 {
        value |= value << width;
        width *= 2;
    }
    value
}

fn emit_vendor(netlist: &Netlist, names: &NetNames, text: &mut String) {
    for lut in &netlist.luts {
        let init = expand_init(lut.init, lut.inputs.len());
        let mut pins = Vec::new();
        for i in 0..6 {
            let name = lut
                .inputs
                .get(i)
                .map(|n| names.lookup(*n))
                .unwrap_or_else(|| "1'b0".to_string());
            pins.push(format!(".I{i}({name})"));
        }
        pins.push(format!(".O({})", names.lookup(lut.output)));
        let _ = writeln!(
            text,
            "  LUT6 #(.INIT(64'h{init:016X})) lut_{} ({});",
            lut.id.0,
            pins.join(", ")
        );
    }
    for carry in &netlist.carries {
        let bus = |nets: &[NetId; 4]| -> String {
            // Verilog concatenation lists MSB first.
            let parts: Vec<String> = nets.iter().rev().map(|n| names.lookup(*n)).collect();
            format!("{{{}}}", parts.join(", "))
        };
        let _ = writeln!(
            text,
            "  CARRY4 carry_{} (.CI({}), .CYINIT(1'b0), .DI({}), .S({}), .O({}), .CO({}));",
            carry.id.0,
            names.lookup(carry.cin),
            bus(&carry.di),
            bus(&carry.s),
            bus(&carry.o),
            bus(&carry.co),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axmodel::{apply_config, AxoConfig, TiePolarity};
    use crate::opgen::gen_unsigned_adder;

    #[test]
    fn generic_adder_has_one_assign_per_lut() {
        let netlist = gen_unsigned_adder(4).unwrap();
        let text = emit_verilog(&netlist, VerilogMode::Generic).unwrap();
        let count = text.matches(LUT_ASSIGN_TAG).count();
        assert_eq!(count, 4);
        assert!(text.contains("module uadd4"));
        assert!(text.contains("input  [3:0] a"));
        assert!(text.contains("output [4:0] out"));
    }

    #[test]
    fn vendor_adder_has_one_carry4() {
        let netlist = gen_unsigned_adder(4).unwrap();
        let text = emit_verilog(&netlist, VerilogMode::VendorPrimitives).unwrap();
        assert_eq!(text.matches("CARRY4").count(), 1);
        assert_eq!(text.matches("LUT6 #").count(), 4);
    }

    #[test]
    fn fully_pruned_config_emits_constant_outputs() {
        let base = gen_unsigned_adder(4).unwrap();
        let pruned = apply_config(&base, &AxoConfig::all_zeros(4), TiePolarity::Zero).unwrap();
        let text = emit_verilog(&pruned, VerilogMode::Generic).unwrap();
        assert_eq!(text.matches(LUT_ASSIGN_TAG).count(), 0);
        // Every sum bit collapses to a constant expression of 1'b0 terms.
        assert!(text.contains("1'b0"));
    }

    #[test]
    fn init_expansion_tiles_tables() {
        // XOR2 = 0x6 tiles to 0x6666..66.
        assert_eq!(expand_init(0x6, 2), 0x6666_6666_6666_6666);
        assert_eq!(expand_init(0x95, 3), 0x9595_9595_9595_9595);
    }

    #[test]
    fn emission_uses_lf_only() {
        let netlist = gen_unsigned_adder(2).unwrap();
        let text = emit_verilog(&netlist, VerilogMode::Generic).unwrap();
        assert!(!text.contains('\r'));
    }
}
