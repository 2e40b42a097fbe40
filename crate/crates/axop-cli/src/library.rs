//! Operator-library file loader: an ordered list of named entries whose
//! behavior is a full output table (up to 2^16 values inline) or a reference
//! to a netlist file, each with an optional imported PPA record.
//!
//! ```text
//! # axop operator library v1
//! entry acc_uadd4
//! spec uadd 4 4
//! ppa 4 1 1.85 0.012 0.0222
//! table 0 1 2 3 ...
//! end
//! ```

use axop::axmodel::{EntryBehavior, LibraryEntry, OperatorLibrary};
use axop::opgen::OperatorSpec;
use axop::ppa::{PpaMetrics, PpaSource};
use std::path::Path;
use thiserror::Error;

pub const LIBRARY_MAGIC: &str = "# axop operator library v1";
/// Tables above this size must be netlist-backed instead.
pub const MAX_TABLE_ENTRIES: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("library line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("expected magic header {LIBRARY_MAGIC:?}")]
    BadMagic,
    #[error("entry {name:?}: table has {got} values, spec needs {expected}")]
    TableSize {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("entry {name:?}: table of {got} values exceeds the {MAX_TABLE_ENTRIES} cap; use a netlist")]
    TableTooLarge { name: String, got: usize },
    #[error("entry {name:?}: duplicate name")]
    DuplicateName { name: String },
    #[error("entry {name:?}: netlist file {path:?}: {reason}")]
    NetlistRef {
        name: String,
        path: String,
        reason: String,
    },
}

fn parse_spec(fields: &[&str], line: usize) -> Result<OperatorSpec, LibraryError> {
    let malformed = |reason: String| LibraryError::Malformed { line, reason };
    if fields.len() != 3 {
        return Err(malformed("spec needs kind, width_a, width_b".into()));
    }
    let width_a: usize = fields[1]
        .parse()
        .map_err(|e| malformed(format!("width_a: {e}")))?;
    let width_b: usize = fields[2]
        .parse()
        .map_err(|e| malformed(format!("width_b: {e}")))?;
    match fields[0] {
        "uadd" => Ok(OperatorSpec::unsigned_add(width_a)),
        "smul-bw" => Ok(OperatorSpec::signed_mul_bw(width_a, width_b)),
        other => Err(malformed(format!("unknown operator kind {other:?}"))),
    }
}

/// Loads a library file; `base_dir` resolves netlist references.
pub fn load_library(text: &str, base_dir: &Path) -> Result<OperatorLibrary, LibraryError> {
    let mut lines = text.lines().enumerate().peekable();
    match lines.next() {
        Some((_, first)) if first.trim() == LIBRARY_MAGIC => {}
        _ => return Err(LibraryError::BadMagic),
    }

    let mut library = OperatorLibrary::default();
    let mut current: Option<(String, Option<OperatorSpec>, Option<PpaMetrics>, Option<EntryBehavior>)> =
        None;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| LibraryError::Malformed {
            line: line_no,
            reason,
        };
        let mut fields = line.split_whitespace();
        let keyword = fields.next().unwrap();
        let rest: Vec<&str> = fields.collect();
        match keyword {
            "entry" => {
                if current.is_some() {
                    return Err(malformed("entry before previous end".into()));
                }
                let name = rest
                    .first()
                    .ok_or_else(|| malformed("entry needs a name".into()))?
                    .to_string();
                if library.entries.iter().any(|e| e.name == name) {
                    return Err(LibraryError::DuplicateName { name });
                }
                current = Some((name, None, None, None));
            }
            "spec" => {
                let spec = parse_spec(&rest, line_no)?;
                match &mut current {
                    Some((_, slot @ None, _, _)) => *slot = Some(spec),
                    Some(_) => return Err(malformed("duplicate spec line".into())),
                    None => return Err(malformed("spec outside an entry".into())),
                }
            }
            "ppa" => {
                if rest.len() != 5 {
                    return Err(malformed("ppa needs lut carry cpd power pdp".into()));
                }
                let metrics = PpaMetrics {
                    lut_count: rest[0].parse().map_err(|e| malformed(format!("lut: {e}")))?,
                    carry_count: rest[1].parse().map_err(|e| malformed(format!("carry: {e}")))?,
                    cpd_proxy: rest[2].parse().map_err(|e| malformed(format!("cpd: {e}")))?,
                    power_proxy: rest[3].parse().map_err(|e| malformed(format!("power: {e}")))?,
                    pdp_proxy: rest[4].parse().map_err(|e| malformed(format!("pdp: {e}")))?,
                    source: PpaSource::Imported,
                };
                match &mut current {
                    Some((_, _, slot @ None, _)) => *slot = Some(metrics),
                    Some(_) => return Err(malformed("duplicate ppa line".into())),
                    None => return Err(malformed("ppa outside an entry".into())),
                }
            }
            "table" => {
                let values: Vec<i64> = rest
                    .iter()
                    .map(|f| f.parse::<i64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| malformed(format!("table value: {e}")))?;
                match &mut current {
                    Some((name, Some(spec), _, slot @ None)) => {
                        if values.len() > MAX_TABLE_ENTRIES {
                            return Err(LibraryError::TableTooLarge {
                                name: name.clone(),
                                got: values.len(),
                            });
                        }
                        if values.len() as u128 != spec.operand_space() {
                            return Err(LibraryError::TableSize {
                                name: name.clone(),
                                got: values.len(),
                                expected: spec.operand_space() as usize,
                            });
                        }
                        *slot = Some(EntryBehavior::Table {
                            spec: *spec,
                            values,
                        });
                    }
                    Some((_, None, _, _)) => {
                        return Err(malformed("table before spec line".into()))
                    }
                    Some(_) => return Err(malformed("duplicate behavior line".into())),
                    None => return Err(malformed("table outside an entry".into())),
                }
            }
            "netlist" => {
                let path = rest
                    .first()
                    .ok_or_else(|| malformed("netlist needs a path".into()))?
                    .to_string();
                match &mut current {
                    Some((name, Some(spec), _, slot @ None)) => {
                        let full = base_dir.join(&path);
                        let content = std::fs::read_to_string(&full).map_err(|e| {
                            LibraryError::NetlistRef {
                                name: name.clone(),
                                path: path.clone(),
                                reason: e.to_string(),
                            }
                        })?;
                        let netlist = crate::serial::parse_netlist(&content).map_err(|e| {
                            LibraryError::NetlistRef {
                                name: name.clone(),
                                path: path.clone(),
                                reason: e.to_string(),
                            }
                        })?;
                        *slot = Some(EntryBehavior::Netlist {
                            spec: *spec,
                            netlist,
                        });
                    }
                    Some((_, None, _, _)) => {
                        return Err(malformed("netlist before spec line".into()))
                    }
                    Some(_) => return Err(malformed("duplicate behavior line".into())),
                    None => return Err(malformed("netlist outside an entry".into())),
                }
            }
            "end" => match current.take() {
                Some((name, _, imported_ppa, Some(behavior))) => {
                    library.entries.push(LibraryEntry {
                        name,
                        behavior,
                        imported_ppa,
                    });
                }
                Some((name, _, _, None)) => {
                    return Err(malformed(format!("entry {name:?} has no behavior source")))
                }
                None => return Err(malformed("end outside an entry".into())),
            },
            other => return Err(malformed(format!("unknown keyword {other:?}"))),
        }
    }
    if let Some((name, ..)) = current {
        return Err(LibraryError::Malformed {
            line: text.lines().count(),
            reason: format!("entry {name:?} missing end"),
        });
    }
    Ok(library)
}

#[cfg(test)]
mod tests {
    use super::*;
    use axop::behav::OutputEstimator;

    #[test]
    fn bundled_sample_loads_and_answers_queries() {
        let library =
            load_library(axop::fixtures::OPERATOR_LIBRARY_SAMPLE, Path::new(".")).unwrap();
        assert_eq!(library.len(), 1);
        let entry = library.lookup(0).unwrap();
        assert_eq!(entry.name, "acc_uadd4");
        let estimator = match &entry.behavior {
            EntryBehavior::Table { spec, values } => {
                OutputEstimator::from_table(*spec, values.clone())
            }
            EntryBehavior::Netlist { .. } => unreachable!(),
        };
        assert_eq!(estimator.eval(3, 5).unwrap(), 8);
        let ppa = entry.imported_ppa.unwrap();
        assert_eq!(ppa.lut_count, 4);
        assert_eq!(ppa.cpd_proxy, 1.85);
        assert_eq!(ppa.source, PpaSource::Imported);
    }

    #[test]
    fn out_of_range_lookup_errors() {
        let library =
            load_library(axop::fixtures::OPERATOR_LIBRARY_SAMPLE, Path::new(".")).unwrap();
        assert!(library.lookup(1).is_err());
    }

    #[test]
    fn wrong_table_size_rejected() {
        let text = format!("{LIBRARY_MAGIC}\nentry x\nspec uadd 4 4\ntable 0 1 2\nend\n");
        assert!(matches!(
            load_library(&text, Path::new(".")),
            Err(LibraryError::TableSize { .. })
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut text = format!("{LIBRARY_MAGIC}\n");
        for _ in 0..2 {
            text.push_str("entry same\nspec uadd 2 2\ntable ");
            let values: Vec<String> = (0..16).map(|i| (i % 4).to_string()).collect();
            text.push_str(&values.join(" "));
            text.push_str("\nend\n");
        }
        assert!(matches!(
            load_library(&text, Path::new(".")),
            Err(LibraryError::DuplicateName { .. })
        ));
    }
}
