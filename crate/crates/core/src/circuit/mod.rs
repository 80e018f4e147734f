//! Stabilizer circuit representation shared by every stage of the pipeline.

mod crumble;
mod stim;
mod validate;

pub use crumble::parse_crumble;
pub use stim::parse_stim_text;
pub use validate::{validate, Diagnostic, DiagnosticKind};

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::X => write!(f, "X"),
            Basis::Z => write!(f, "Z"),
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" | "X" => Ok(Basis::X),
            "z" | "Z" => Ok(Basis::Z),
            _ => Err(format!("unknown basis `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitDecl {
    pub index: u32,
    pub coord: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    ResetZ,
    ResetX,
    MeasureZ,
    MeasureX,
    H,
    Cx,
    Tick,
    Detector,
    ObservableInclude,
    Polygon,
}

impl Kind {
    pub fn is_gate(self) -> bool {
        matches!(
            self,
            Kind::ResetZ | Kind::ResetX | Kind::MeasureZ | Kind::MeasureX | Kind::H | Kind::Cx
        )
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, Kind::MeasureZ | Kind::MeasureX)
    }

    pub fn is_reset(self) -> bool {
        matches!(self, Kind::ResetZ | Kind::ResetX)
    }

    pub fn basis(self) -> Option<Basis> {
        match self {
            Kind::ResetZ | Kind::MeasureZ => Some(Basis::Z),
            Kind::ResetX | Kind::MeasureX => Some(Basis::X),
            _ => None,
        }
    }

    pub fn measure(basis: Basis) -> Kind {
        match basis {
            Basis::Z => Kind::MeasureZ,
            Basis::X => Kind::MeasureX,
        }
    }

    pub fn reset(basis: Basis) -> Kind {
        match basis {
            Basis::Z => Kind::ResetZ,
            Basis::X => Kind::ResetX,
        }
    }
}

/// `rec[-lookback]`, plus the absolute measurement index it resolves to.
/// `absolute` is negative when the reference points before the start of the record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RecordRef {
    pub lookback: u32,
    pub absolute: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Qubit(u32),
    Rec(RecordRef),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instruction {
    pub kind: Kind,
    pub targets: Vec<Target>,
    /// Parenthesized numeric arguments: detector coordinates, observable index or polygon colour.
    pub args: Vec<f64>,
}

impl Instruction {
    pub fn new(kind: Kind, targets: Vec<Target>, args: Vec<f64>) -> Self {
        Instruction { kind, targets, args }
    }

    pub fn qubits(&self) -> impl Iterator<Item = u32> + '_ {
        self.targets.iter().filter_map(|t| match t {
            Target::Qubit(q) => Some(*q),
            Target::Rec(_) => None,
        })
    }

    pub fn records(&self) -> impl Iterator<Item = RecordRef> + '_ {
        self.targets.iter().filter_map(|t| match t {
            Target::Rec(r) => Some(*r),
            Target::Qubit(_) => None,
        })
    }

    /// Absolute measurement indices, for instructions that passed validation.
    pub fn absolute_records(&self) -> Vec<usize> {
        self.records().map(|r| r.absolute as usize).collect()
    }

    pub fn observable_index(&self) -> usize {
        self.args.first().copied().unwrap_or(0.0) as usize
    }
}

/// Immutable circuit. Built with [`Circuit::new`], [`CircuitBuilder`] or one of the parsers.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    qubits: Vec<QubitDecl>,
    instructions: Vec<Instruction>,
    measurement_count: usize,
}

impl Circuit {
    /// Takes instructions whose record references carry `lookback`; absolute indices are
    /// recomputed from the instruction order.
    pub fn new(qubits: Vec<QubitDecl>, mut instructions: Vec<Instruction>) -> Self {
        let mut measured = 0i64;
        for ins in instructions.iter_mut() {
            for t in ins.targets.iter_mut() {
                if let Target::Rec(r) = t {
                    r.absolute = measured - r.lookback as i64;
                }
            }
            if ins.kind.is_measurement() {
                measured += ins.qubits().count() as i64;
            }
        }
        Circuit {
            qubits,
            instructions,
            measurement_count: measured as usize,
        }
    }

    pub fn qubits(&self) -> &[QubitDecl] {
        &self.qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn measurement_count(&self) -> usize {
        self.measurement_count
    }

    /// One past the largest declared or referenced qubit index.
    pub fn num_qubits(&self) -> usize {
        let declared = self
            .qubits
            .iter()
            .map(|q| q.index as usize + 1)
            .max()
            .unwrap_or(0);
        let used = self
            .instructions
            .iter()
            .flat_map(|i| i.qubits())
            .map(|q| q as usize + 1)
            .max()
            .unwrap_or(0);
        declared.max(used)
    }

    pub fn detector_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| i.kind == Kind::Detector)
            .count()
    }

    pub fn observable_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| i.kind == Kind::ObservableInclude)
            .map(|i| i.observable_index() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn detectors(&self) -> impl Iterator<Item = &Instruction> {
        self.instructions.iter().filter(|i| i.kind == Kind::Detector)
    }

    /// Records per observable index, XOR-accumulated over all OBSERVABLE_INCLUDEs.
    pub fn observables(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.observable_count()];
        for ins in &self.instructions {
            if ins.kind == Kind::ObservableInclude {
                let k = ins.observable_index();
                out[k] = xor_sorted(&out[k], &sorted(ins.absolute_records()));
            }
        }
        out
    }

    /// (qubit, basis) of every measurement, in record order.
    pub fn measurement_targets(&self) -> Vec<(u32, Basis)> {
        let mut out = Vec::with_capacity(self.measurement_count);
        for ins in &self.instructions {
            if let (true, Some(b)) = (ins.kind.is_measurement(), ins.kind.basis()) {
                out.extend(ins.qubits().map(|q| (q, b)));
            }
        }
        out
    }

    /// Measurement layers: maximal runs of measurement instructions not separated by a TICK.
    /// Each entry lists the absolute record indices of that layer.
    pub fn measurement_layers(&self) -> Vec<Vec<usize>> {
        let mut layers: Vec<Vec<usize>> = Vec::new();
        let mut in_layer = false;
        let mut next = 0usize;
        for ins in &self.instructions {
            if ins.kind.is_measurement() {
                if !in_layer {
                    layers.push(Vec::new());
                    in_layer = true;
                }
                let n = ins.qubits().count();
                layers.last_mut().unwrap().extend(next..next + n);
                next += n;
            } else if ins.kind == Kind::Tick || ins.kind.is_gate() {
                in_layer = false;
            }
        }
        layers
    }

    pub fn coord_of(&self, qubit: u32) -> Option<(f64, f64)> {
        self.qubits.iter().find(|q| q.index == qubit).map(|q| q.coord)
    }
}

pub(crate) fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Symmetric difference of two sorted, duplicate-free slices.
pub fn xor_sorted<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Incremental construction with absolute record indices.
#[derive(Default)]
pub struct CircuitBuilder {
    qubits: Vec<QubitDecl>,
    instructions: Vec<Instruction>,
    measured: usize,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, index: u32, coord: (f64, f64)) {
        self.qubits.push(QubitDecl { index, coord });
    }

    pub fn polygon(&mut self, color: [f64; 4], qubits: &[u32]) {
        let targets = qubits.iter().map(|&q| Target::Qubit(q)).collect();
        self.instructions
            .push(Instruction::new(Kind::Polygon, targets, color.to_vec()));
    }

    pub fn tick(&mut self) {
        self.instructions
            .push(Instruction::new(Kind::Tick, vec![], vec![]));
    }

    pub fn gate(&mut self, kind: Kind, qubits: &[u32]) {
        if qubits.is_empty() {
            return;
        }
        let targets = qubits.iter().map(|&q| Target::Qubit(q)).collect();
        self.instructions.push(Instruction::new(kind, targets, vec![]));
    }

    pub fn reset(&mut self, basis: Basis, qubits: &[u32]) {
        self.gate(Kind::reset(basis), qubits);
    }

    pub fn cx(&mut self, pairs: &[(u32, u32)]) {
        let flat: Vec<u32> = pairs.iter().flat_map(|&(c, t)| [c, t]).collect();
        self.gate(Kind::Cx, &flat);
    }

    /// Returns the absolute index of the first record produced.
    pub fn measure(&mut self, basis: Basis, qubits: &[u32]) -> usize {
        let first = self.measured;
        self.gate(Kind::measure(basis), qubits);
        self.measured += qubits.len();
        first
    }

    pub fn measurement_count(&self) -> usize {
        self.measured
    }

    fn rec_targets(&self, records: &[usize]) -> Vec<Target> {
        records
            .iter()
            .map(|&r| {
                assert!(r < self.measured, "record {r} not yet measured");
                Target::Rec(RecordRef {
                    lookback: (self.measured - r) as u32,
                    absolute: r as i64,
                })
            })
            .collect()
    }

    pub fn detector(&mut self, coords: &[f64], records: &[usize]) {
        let t = self.rec_targets(records);
        self.instructions
            .push(Instruction::new(Kind::Detector, t, coords.to_vec()));
    }

    pub fn observable(&mut self, index: usize, records: &[usize]) {
        let t = self.rec_targets(records);
        self.instructions
            .push(Instruction::new(Kind::ObservableInclude, t, vec![index as f64]));
    }

    pub fn finish(self) -> Circuit {
        Circuit::new(self.qubits, self.instructions)
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn fmt_args(args: &[f64], sep: &str) -> String {
    args.iter().map(|&a| fmt_num(a)).collect::<Vec<_>>().join(sep)
}

/// One stim-text line without the trailing newline.
pub(crate) fn stim_line(kind: Kind, args: &[f64], targets: &[Target]) -> String {
    let mut out = stim_name(kind).to_string();
    if !args.is_empty() {
        out.push_str(&format!("({})", fmt_args(args, ", ")));
    }
    for t in targets {
        out.push(' ');
        out.push_str(&fmt_target(t));
    }
    out
}

fn stim_name(kind: Kind) -> &'static str {
    match kind {
        Kind::ResetZ => "R",
        Kind::ResetX => "RX",
        Kind::MeasureZ => "M",
        Kind::MeasureX => "MX",
        Kind::H => "H",
        Kind::Cx => "CX",
        Kind::Tick => "TICK",
        Kind::Detector => "DETECTOR",
        Kind::ObservableInclude => "OBSERVABLE_INCLUDE",
        Kind::Polygon => "POLYGON",
    }
}

fn crumble_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Detector => "DT",
        Kind::ObservableInclude => "OI",
        k => stim_name(k),
    }
}

fn fmt_target(t: &Target) -> String {
    match t {
        Target::Qubit(q) => q.to_string(),
        Target::Rec(r) => format!("rec[-{}]", r.lookback),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    StimText,
    Crumble,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stim" | "stim-text" => Ok(Format::StimText),
            "crumble" => Ok(Format::Crumble),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

pub fn serialize(circuit: &Circuit, format: Format) -> String {
    match format {
        Format::StimText => {
            let mut out = String::new();
            for q in circuit.qubits() {
                out.push_str(&format!(
                    "QUBIT_COORDS({}, {}) {}\n",
                    fmt_num(q.coord.0),
                    fmt_num(q.coord.1),
                    q.index
                ));
            }
            for ins in circuit.instructions() {
                out.push_str(&stim_line(ins.kind, &ins.args, &ins.targets));
                out.push('\n');
            }
            out
        }
        Format::Crumble => {
            let mut tokens = Vec::new();
            for q in circuit.qubits() {
                tokens.push(format!(
                    "Q({},{}){}",
                    fmt_num(q.coord.0),
                    fmt_num(q.coord.1),
                    q.index
                ));
            }
            for ins in circuit.instructions() {
                let mut tok = crumble_name(ins.kind).to_string();
                let targets: Vec<String> = ins.targets.iter().map(fmt_target).collect();
                if !ins.args.is_empty() {
                    tok.push_str(&format!("({})", fmt_args(&ins.args, ",")));
                    tok.push_str(&targets.join("_"));
                } else if !targets.is_empty() {
                    tok.push('_');
                    tok.push_str(&targets.join("_"));
                }
                tokens.push(tok);
            }
            tokens.join(";")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_resolves_lookbacks() {
        let mut b = CircuitBuilder::new();
        b.declare(0, (0.0, 0.0));
        b.reset(Basis::Z, &[0]);
        let r = b.measure(Basis::Z, &[0]);
        b.measure(Basis::X, &[0]);
        b.detector(&[0.0, 0.0, 0.0], &[r]);
        let c = b.finish();
        let det = c.detectors().next().unwrap();
        assert_eq!(det.records().next().unwrap().lookback, 2);
        assert_eq!(det.absolute_records(), vec![0]);
        assert_eq!(c.measurement_count(), 2);
    }

    #[test]
    fn xor_sorted_cancels_common() {
        assert_eq!(xor_sorted(&[1, 3, 5], &[3, 4]), vec![1, 4, 5]);
        assert!(xor_sorted::<u32>(&[], &[]).is_empty());
    }

    #[test]
    fn layers_split_on_tick() {
        let mut b = CircuitBuilder::new();
        b.measure(Basis::Z, &[0, 1]);
        b.measure(Basis::X, &[2]);
        b.tick();
        b.measure(Basis::Z, &[0]);
        let c = b.finish();
        assert_eq!(c.measurement_layers(), vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn single_cx_formats() {
        let mut b = CircuitBuilder::new();
        b.cx(&[(0, 1)]);
        let c = b.finish();
        assert_eq!(serialize(&c, Format::StimText), "CX 0 1\n");
        assert_eq!(serialize(&c, Format::Crumble), "CX_0_1");
        assert_eq!(serialize(&Circuit::default(), Format::StimText), "");
    }
}
