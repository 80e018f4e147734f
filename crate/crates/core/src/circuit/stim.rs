use super::{Circuit, Instruction, Kind, QubitDecl, RecordRef, Target};
use crate::error::{Error, Result};

fn kind_of(name: &str) -> Option<Kind> {
    Some(match name {
        "R" | "RZ" => Kind::ResetZ,
        "RX" => Kind::ResetX,
        "M" | "MZ" => Kind::MeasureZ,
        "MX" => Kind::MeasureX,
        "H" => Kind::H,
        "CX" | "CNOT" | "ZCX" => Kind::Cx,
        "TICK" => Kind::Tick,
        "DETECTOR" => Kind::Detector,
        "OBSERVABLE_INCLUDE" => Kind::ObservableInclude,
        "POLYGON" => Kind::Polygon,
        _ => return None,
    })
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn parse_args(body: &str, sep: char) -> std::result::Result<Vec<f64>, String> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(sep)
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad numeric argument `{}`", a.trim()))
        })
        .collect()
}

pub(crate) fn parse_rec(tok: &str) -> Option<u32> {
    let inner = tok.strip_prefix("rec[-")?.strip_suffix(']')?;
    let k: u32 = inner.parse().ok()?;
    (k > 0).then_some(k)
}

/// Parses the line-oriented text format. Noise instructions are rejected as unknown.
pub fn parse_stim_text(text: &str) -> Result<Circuit> {
    let mut qubits = Vec::new();
    let mut instructions = Vec::new();
    let mut measured = 0usize;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let lead = content.len() - content.trim_start().len();
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let name_end = content
            .find(|c: char| c == '(' || c.is_whitespace())
            .unwrap_or(content.len());
        let name = &content[..name_end];
        let mut rest = &content[name_end..];
        let mut args = Vec::new();
        if rest.starts_with('(') {
            let close = rest
                .find(')')
                .ok_or_else(|| syntax(line_no, lead + name_end + 1, "unclosed `(`"))?;
            args = parse_args(&rest[1..close], ',').map_err(|m| syntax(line_no, lead + name_end + 2, m))?;
            rest = &rest[close + 1..];
        }
        let target_col = lead + content.len() - rest.len() + 1;
        let toks: Vec<&str> = rest.split_whitespace().collect();

        if name == "QUBIT_COORDS" {
            if args.len() != 2 || toks.len() != 1 {
                return Err(syntax(
                    line_no,
                    1,
                    "QUBIT_COORDS takes two coordinates and one qubit",
                ));
            }
            let index = toks[0]
                .parse::<u32>()
                .map_err(|_| syntax(line_no, target_col, format!("bad qubit `{}`", toks[0])))?;
            qubits.push(QubitDecl {
                index,
                coord: (args[0], args[1]),
            });
            continue;
        }
        let kind = kind_of(name).ok_or_else(|| Error::UnknownInstruction {
            name: name.to_string(),
            line: line_no,
        })?;
        let mut targets = Vec::with_capacity(toks.len());
        for tok in toks {
            if tok.starts_with("rec[") {
                let k = parse_rec(tok)
                    .ok_or_else(|| syntax(line_no, target_col, format!("bad record `{tok}`")))?;
                if k as usize > measured {
                    return Err(Error::RecordOutOfRange {
                        lookback: k,
                        available: measured,
                        location: format!("line {line_no}"),
                    });
                }
                targets.push(Target::Rec(RecordRef {
                    lookback: k,
                    absolute: measured as i64 - k as i64,
                }));
            } else {
                let q = tok
                    .parse::<u32>()
                    .map_err(|_| syntax(line_no, target_col, format!("bad target `{tok}`")))?;
                targets.push(Target::Qubit(q));
            }
        }
        let needs_recs = matches!(kind, Kind::Detector | Kind::ObservableInclude);
        if targets.iter().any(|t| matches!(t, Target::Rec(_)) != needs_recs) {
            return Err(syntax(
                line_no,
                target_col,
                format!("wrong target type for {name}"),
            ));
        }
        if kind.is_measurement() {
            measured += targets.len();
        }
        instructions.push(Instruction::new(kind, targets, args));
    }
    Ok(Circuit::new(qubits, instructions))
}
