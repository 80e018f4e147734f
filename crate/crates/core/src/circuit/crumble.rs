use super::stim::{parse_args, parse_rec};
use super::{Circuit, Instruction, Kind, QubitDecl, RecordRef, Target};
use crate::error::{Error, Result};

fn malformed(token: &str, position: usize) -> Error {
    Error::MalformedToken {
        token: token.to_string(),
        position,
    }
}

/// Parses the body of a Crumble URL fragment (the text after `circuit=`).
pub fn parse_crumble(fragment: &str) -> Result<Circuit> {
    let fragment = fragment.trim();
    let mut qubits = Vec::new();
    let mut instructions = Vec::new();
    let mut measured = 0usize;
    if fragment.is_empty() {
        return Ok(Circuit::default());
    }
    let mut offset = 0usize;
    for token in fragment.split(';') {
        let pos = offset;
        offset += token.len() + 1;
        if token.is_empty() {
            return Err(Error::DanglingSeparator { position: pos });
        }
        let name_end = token.find(['(', '_']).unwrap_or(token.len());
        let name = &token[..name_end];
        let mut rest = &token[name_end..];
        let mut args = Vec::new();
        if rest.starts_with('(') {
            let close = rest.find(')').ok_or_else(|| malformed(token, pos))?;
            args = parse_args(&rest[1..close], ',').map_err(|_| malformed(token, pos))?;
            rest = &rest[close + 1..];
        } else if let Some(r) = rest.strip_prefix('_') {
            rest = r;
            if rest.is_empty() {
                return Err(Error::DanglingSeparator {
                    position: pos + name_end,
                });
            }
        }
        let parts: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split('_').collect()
        };
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::DanglingSeparator { position: pos });
        }

        if name == "Q" {
            if args.len() != 2 || parts.len() != 1 {
                return Err(malformed(token, pos));
            }
            let index = parts[0].parse::<u32>().map_err(|_| malformed(token, pos))?;
            qubits.push(QubitDecl {
                index,
                coord: (args[0], args[1]),
            });
            continue;
        }
        let kind = match name {
            "R" => Kind::ResetZ,
            "RX" => Kind::ResetX,
            "M" => Kind::MeasureZ,
            "MX" => Kind::MeasureX,
            "H" => Kind::H,
            "CX" => Kind::Cx,
            "TICK" => Kind::Tick,
            "DT" => Kind::Detector,
            "OI" => Kind::ObservableInclude,
            "POLYGON" => Kind::Polygon,
            _ => return Err(malformed(token, pos)),
        };
        let needs_recs = matches!(kind, Kind::Detector | Kind::ObservableInclude);
        let mut targets = Vec::with_capacity(parts.len());
        for p in parts {
            if needs_recs {
                let k = parse_rec(p).ok_or_else(|| malformed(token, pos))?;
                if k as usize > measured {
                    return Err(Error::RecordOutOfRange {
                        lookback: k,
                        available: measured,
                        location: format!("position {pos}"),
                    });
                }
                targets.push(Target::Rec(RecordRef {
                    lookback: k,
                    absolute: measured as i64 - k as i64,
                }));
            } else {
                targets.push(Target::Qubit(p.parse().map_err(|_| malformed(token, pos))?));
            }
        }
        if kind.is_measurement() {
            measured += targets.len();
        }
        instructions.push(Instruction::new(kind, targets, args));
    }
    Ok(Circuit::new(qubits, instructions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{serialize, Format};

    #[test]
    fn single_qubit_round_trip() {
        let c = parse_crumble("Q(0,0)0;RX_0;MX_0").unwrap();
        assert_eq!(c.qubits().len(), 1);
        assert_eq!(c.instructions()[0].kind, Kind::ResetX);
        assert_eq!(c.instructions()[1].kind, Kind::MeasureX);
        assert_eq!(c.measurement_count(), 1);
        assert_eq!(serialize(&c, Format::Crumble), "Q(0,0)0;RX_0;MX_0");
    }

    #[test]
    fn detectors_and_polygons() {
        let c = parse_crumble(
            "Q(0,0)0;Q(1,0)1;POLYGON(1,0,0,0.25)0_1;M_0_1;DT(8.5,4,6)rec[-1]_rec[-2];OI(0)rec[-1]",
        )
        .unwrap();
        assert_eq!(c.detector_count(), 1);
        let det = c.detectors().next().unwrap();
        assert_eq!(det.args, vec![8.5, 4.0, 6.0]);
        assert_eq!(det.absolute_records(), vec![1, 0]);
        assert_eq!(c.observables(), vec![vec![1]]);
    }

    #[test]
    fn dangling_separators() {
        assert!(matches!(
            parse_crumble("R_0;"),
            Err(Error::DanglingSeparator { .. })
        ));
        assert!(matches!(
            parse_crumble("R_0;;M_0"),
            Err(Error::DanglingSeparator { .. })
        ));
        assert!(matches!(
            parse_crumble("R_"),
            Err(Error::DanglingSeparator { .. })
        ));
        assert!(matches!(
            parse_crumble("R_0__1"),
            Err(Error::DanglingSeparator { .. })
        ));
    }

    #[test]
    fn malformed_and_out_of_range() {
        assert!(matches!(parse_crumble("S_0"), Err(Error::MalformedToken { .. })));
        assert!(matches!(
            parse_crumble("Q(0)0"),
            Err(Error::MalformedToken { .. })
        ));
        assert!(matches!(
            parse_crumble("M_0;DT(0,0,0)rec[-2]"),
            Err(Error::RecordOutOfRange { .. })
        ));
    }
}
