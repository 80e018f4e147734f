use super::{Circuit, Kind, Target};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    DuplicateDeclaration(u32),
    UndeclaredQubit(u32),
    CxParity(usize),
    RepeatedTarget(u32),
    WrongTargetType,
    RecordOutOfRange { lookback: u32 },
    LayerConflict(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Instruction index; declarations are reported at `usize::MAX`.
    pub instruction: usize,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let why = match &self.kind {
            DiagnosticKind::DuplicateDeclaration(q) => format!("qubit {q} declared twice"),
            DiagnosticKind::UndeclaredQubit(q) => format!("qubit {q} is not declared"),
            DiagnosticKind::CxParity(n) => format!("CX has an odd number of targets ({n})"),
            DiagnosticKind::RepeatedTarget(q) => format!("qubit {q} targeted twice"),
            DiagnosticKind::WrongTargetType => "target type does not match instruction".into(),
            DiagnosticKind::RecordOutOfRange { lookback } => {
                format!("rec[-{lookback}] precedes the first measurement")
            }
            DiagnosticKind::LayerConflict(q) => {
                format!("qubit {q} is used twice between consecutive TICKs")
            }
        };
        if self.instruction == usize::MAX {
            write!(f, "declarations: {why}")
        } else {
            write!(f, "instruction {}: {why}", self.instruction)
        }
    }
}

/// Checks every circuit invariant; an empty result means the circuit is valid.
pub fn validate(circuit: &Circuit) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut declared = HashSet::new();
    for q in circuit.qubits() {
        if !declared.insert(q.index) {
            out.push(Diagnostic {
                instruction: usize::MAX,
                kind: DiagnosticKind::DuplicateDeclaration(q.index),
            });
        }
    }
    let mut layer_use: HashMap<u32, usize> = HashMap::new();
    for (i, ins) in circuit.instructions().iter().enumerate() {
        let push = |out: &mut Vec<Diagnostic>, kind| out.push(Diagnostic { instruction: i, kind });
        if ins.kind == Kind::Tick {
            layer_use.clear();
            continue;
        }
        let wants_recs = matches!(ins.kind, Kind::Detector | Kind::ObservableInclude);
        if ins
            .targets
            .iter()
            .any(|t| matches!(t, Target::Rec(_)) != wants_recs)
        {
            push(&mut out, DiagnosticKind::WrongTargetType);
        }
        for r in ins.records() {
            if r.absolute < 0 {
                push(
                    &mut out,
                    DiagnosticKind::RecordOutOfRange { lookback: r.lookback },
                );
            }
        }
        if ins.kind == Kind::Cx && ins.targets.len() % 2 == 1 {
            push(&mut out, DiagnosticKind::CxParity(ins.targets.len()));
        }
        let mut seen = HashSet::new();
        for q in ins.qubits() {
            if !declared.contains(&q) {
                push(&mut out, DiagnosticKind::UndeclaredQubit(q));
            }
            if !seen.insert(q) && ins.kind != Kind::Polygon {
                push(&mut out, DiagnosticKind::RepeatedTarget(q));
            }
            if ins.kind.is_gate() {
                if let Some(prev) = layer_use.insert(q, i) {
                    if prev != i {
                        push(&mut out, DiagnosticKind::LayerConflict(q));
                    }
                }
            }
        }
    }
    out
}
