//! Line-oriented text serialization for netlists: diffable, byte-identical
//! on round trip, no binary schema versioning burden.
//!
//! ```text
//! axop-netlist v1
//! name uadd4
//! nets 27
//! input a 2 3 4 5
//! output out 10 14 15 16 21
//! lut 0 10 6 2 6
//! carry 4 0 s 10 11 12 13 di 2 3 4 5 o 14 15 16 17 co 18 19 20 21
//! ```
//!
//! `lut <cell> <output> <init-hex> <inputs...>`, carry nets in fixed
//! s/di/o/co groups, all net ids decimal.

use axop::netlist::{CarryCell, CellId, LutCell, Netlist, NetId, Port};
use std::fmt::Write as _;
use thiserror::Error;

pub const NETLIST_MAGIC: &str = "axop-netlist v1";

#[derive(Debug, Error)]
pub enum SerialError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("expected magic header {NETLIST_MAGIC:?}")]
    BadMagic,
}

/// Canonical text form; writing is a pure function of the structure.
pub fn write_netlist(netlist: &Netlist) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "{NETLIST_MAGIC}");
    let _ = writeln!(text, "name {}", netlist.name);
    let _ = writeln!(text, "nets {}", netlist.net_count);
    for port in &netlist.inputs {
        let bits: Vec<String> = port.bits.iter().map(|n| n.0.to_string()).collect();
        let _ = writeln!(text, "input {} {}", port.name, bits.join(" "));
    }
    for port in &netlist.outputs {
        let bits: Vec<String> = port.bits.iter().map(|n| n.0.to_string()).collect();
        let _ = writeln!(text, "output {} {}", port.name, bits.join(" "));
    }
    for lut in &netlist.luts {
        let inputs: Vec<String> = lut.inputs.iter().map(|n| n.0.to_string()).collect();
        let _ = writeln!(
            text,
            "lut {} {} {:x} {}",
            lut.id.0,
            lut.output.0,
            lut.init,
            inputs.join(" ")
        );
    }
    for carry in &netlist.carries {
        let group = |nets: &[NetId; 4]| {
            nets.iter()
                .map(|n| n.0.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            text,
            "carry {} {} s {} di {} o {} co {}",
            carry.id.0,
            carry.cin.0,
            group(&carry.s),
            group(&carry.di),
            group(&carry.o),
            group(&carry.co),
        );
    }
    text
}

pub fn parse_netlist(text: &str) -> Result<Netlist, SerialError> {
    let mut lines = text.lines().enumerate();
    let malformed = |line: usize, reason: String| SerialError::Malformed { line, reason };

    let (_, magic) = lines.next().ok_or(SerialError::BadMagic)?;
    if magic.trim() != NETLIST_MAGIC {
        return Err(SerialError::BadMagic);
    }

    let mut name = String::new();
    let mut net_count = 0u32;
    let mut inputs: Vec<Port> = Vec::new();
    let mut outputs: Vec<Port> = Vec::new();
    let mut luts: Vec<LutCell> = Vec::new();
    let mut carries: Vec<CarryCell> = Vec::new();

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let keyword = fields.next().unwrap();
        let rest: Vec<&str> = fields.collect();
        let parse_net = |field: &str| -> Result<NetId, SerialError> {
            field
                .parse::<u32>()
                .map(NetId)
                .map_err(|e| malformed(line_no, format!("net id {field:?}: {e}")))
        };
        match keyword {
            "name" => {
                name = rest.join(" ");
            }
            "nets" => {
                net_count = rest
                    .first()
                    .ok_or_else(|| malformed(line_no, "missing net count".into()))?
                    .parse()
                    .map_err(|e| malformed(line_no, format!("net count: {e}")))?;
            }
            "input" | "output" => {
                if rest.is_empty() {
                    return Err(malformed(line_no, "missing port name".into()));
                }
                let port = Port {
                    name: rest[0].to_string(),
                    bits: rest[1..]
                        .iter()
                        .map(|f| parse_net(f))
                        .collect::<Result<_, _>>()?,
                };
                if keyword == "input" {
                    inputs.push(port);
                } else {
                    outputs.push(port);
                }
            }
            "lut" => {
                if rest.len() < 4 {
                    return Err(malformed(line_no, "lut needs id, output, init, inputs".into()));
                }
                let id = rest[0]
                    .parse::<u32>()
                    .map_err(|e| malformed(line_no, format!("cell id: {e}")))?;
                let output = parse_net(rest[1])?;
                let init = u64::from_str_radix(rest[2], 16)
                    .map_err(|e| malformed(line_no, format!("init: {e}")))?;
                let cell_inputs = rest[3..]
                    .iter()
                    .map(|f| parse_net(f))
                    .collect::<Result<_, _>>()?;
                luts.push(LutCell {
                    id: CellId(id),
                    inputs: cell_inputs,
                    init,
                    output,
                });
            }
            "carry" => {
                // carry <id> <cin> s a b c d di a b c d o a b c d co a b c d
                if rest.len() != 22
                    || rest[2] != "s"
                    || rest[7] != "di"
                    || rest[12] != "o"
                    || rest[17] != "co"
                {
                    return Err(malformed(line_no, "carry needs id, cin, s/di/o/co groups".into()));
                }
                let id = rest[0]
                    .parse::<u32>()
                    .map_err(|e| malformed(line_no, format!("cell id: {e}")))?;
                let cin = parse_net(rest[1])?;
                let quad = |base: usize| -> Result<[NetId; 4], SerialError> {
                    Ok([
                        parse_net(rest[base])?,
                        parse_net(rest[base + 1])?,
                        parse_net(rest[base + 2])?,
                        parse_net(rest[base + 3])?,
                    ])
                };
                carries.push(CarryCell {
                    id: CellId(id),
                    cin,
                    s: quad(3)?,
                    di: quad(8)?,
                    o: quad(13)?,
                    co: quad(18)?,
                });
            }
            other => {
                return Err(malformed(line_no, format!("unknown keyword {other:?}")));
            }
        }
    }
    Ok(Netlist {
        name,
        inputs,
        outputs,
        luts,
        carries,
        net_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use axop::axmodel::{apply_config, AxoConfig, TiePolarity};
    use axop::opgen::{gen_signed_mul_bw, gen_unsigned_adder};

    #[test]
    fn round_trip_is_byte_identical() {
        for netlist in [
            gen_unsigned_adder(4).unwrap(),
            gen_unsigned_adder(7).unwrap(),
            gen_signed_mul_bw(3, 4).unwrap(),
        ] {
            let text = write_netlist(&netlist);
            let parsed = parse_netlist(&text).unwrap();
            assert_eq!(parsed, netlist);
            assert_eq!(write_netlist(&parsed), text);
        }
    }

    #[test]
    fn pruned_netlists_round_trip() {
        let base = gen_unsigned_adder(6).unwrap();
        let pruned =
            apply_config(&base, &AxoConfig::parse("010110").unwrap(), TiePolarity::Zero).unwrap();
        let text = write_netlist(&pruned);
        assert_eq!(parse_netlist(&text).unwrap(), pruned);
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(matches!(parse_netlist("nonsense\n"), Err(SerialError::BadMagic)));
    }

    #[test]
    fn malformed_lines_name_their_line() {
        let text = format!("{NETLIST_MAGIC}\nname x\nnets 4\nlut zero\n");
        match parse_netlist(&text) {
            Err(SerialError::Malformed { line: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
