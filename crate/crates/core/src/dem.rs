//! Detector error models: which detectors and observables each elementary fault flips.

use crate::circuit::{xor_sorted, Basis, Circuit, Kind};
use crate::error::{Error, Result};
use crate::noise::{ChannelKind, NoisyCircuit};
use std::collections::{BTreeMap, HashSet};
use std::fmt;

/// Detectors and observables flipped together. Both lists sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symptom {
    pub detectors: Vec<u32>,
    pub observables: Vec<u32>,
}

impl Symptom {
    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty() && self.observables.is_empty()
    }

    pub fn xor(&self, other: &Symptom) -> Symptom {
        Symptom {
            detectors: xor_sorted(&self.detectors, &other.detectors),
            observables: xor_sorted(&self.observables, &other.observables),
        }
    }

    /// At most two detectors, all of one basis when the basis is known.
    pub fn is_graphlike(&self, basis: &[Option<Basis>]) -> bool {
        match self.detectors[..] {
            [a, b] => basis[a as usize] == basis[b as usize],
            _ => self.detectors.len() < 2,
        }
    }

    fn from_combined(ids: &[u32], num_detectors: u32) -> Symptom {
        let split = ids.partition_point(|&i| i < num_detectors);
        Symptom {
            detectors: ids[..split].to_vec(),
            observables: ids[split..].iter().map(|&i| i - num_detectors).collect(),
        }
    }
}

impl fmt::Display for Symptom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .detectors
            .iter()
            .map(|d| format!("D{d}"))
            .chain(self.observables.iter().map(|o| format!("L{o}")))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMechanism {
    pub probability: f64,
    pub symptom: Symptom,
    /// Single-qubit, single-basis pieces of the underlying fault, used to suggest a split.
    /// Empty for models that were read back from text.
    pub components: Vec<(Basis, Symptom)>,
    /// Graphlike split whose XOR is `symptom`; empty when the mechanism is graphlike itself.
    pub parts: Vec<Symptom>,
}

impl ErrorMechanism {
    /// The pieces the matching graph sees.
    pub fn graph_parts(&self) -> Vec<&Symptom> {
        if self.parts.is_empty() {
            vec![&self.symptom]
        } else {
            self.parts.iter().collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub mechanisms: Vec<ErrorMechanism>,
    pub num_detectors: usize,
    pub num_observables: usize,
    pub graphlike: bool,
    /// Basis of the measurements each detector compares; `None` when mixed or unknown.
    pub detector_basis: Vec<Option<Basis>>,
    pub detector_coords: Vec<Vec<f64>>,
}

/// XOR-combination of independent flips.
pub fn combine(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

/// Per-outcome probability of independent Pauli channels equivalent to a uniform depolarizing
/// channel of total strength `p` on `qubits` qubits.
pub fn independent_depolarizing(p: f64, qubits: u32) -> f64 {
    let n = 4f64.powi(qubits as i32);
    let exponent = 1.0 / (n / 2.0);
    0.5 - 0.5 * (1.0 - n * p / (n - 1.0)).powf(exponent)
}

fn detector_bases(circuit: &Circuit) -> Vec<Option<Basis>> {
    let targets = circuit.measurement_targets();
    circuit
        .detectors()
        .map(|d| {
            let mut it = d.absolute_records().into_iter().map(|r| targets[r].1);
            let first = it.next();
            if it.all(|b| Some(b) == first) {
                first
            } else {
                None
            }
        })
        .collect()
}

struct Extraction {
    num_detectors: u32,
    merged: BTreeMap<Symptom, (f64, Vec<(Basis, Symptom)>)>,
}

impl Extraction {
    fn add(&mut self, probability: f64, atoms: &[(Basis, &[u32])]) {
        if probability <= 0.0 {
            return;
        }
        let mut all: Vec<u32> = Vec::new();
        for (_, s) in atoms {
            all = xor_sorted(&all, s);
        }
        if all.is_empty() {
            return;
        }
        let symptom = Symptom::from_combined(&all, self.num_detectors);
        let components: Vec<(Basis, Symptom)> = atoms
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(b, s)| (*b, Symptom::from_combined(s, self.num_detectors)))
            .collect();
        match self.merged.get_mut(&symptom) {
            Some((q, comps)) => {
                *q = combine(*q, probability);
                // Keep a canonical component list so the result does not depend on order.
                if (components.len(), &components) < (comps.len(), &*comps) {
                    *comps = components;
                }
            }
            None => {
                self.merged.insert(symptom, (probability, components));
            }
        }
    }
}

/// Extracts the merged (not yet decomposed) model by propagating detector sensitivities
/// backwards through the circuit.
pub fn extract_dem(noisy: &NoisyCircuit) -> Result<DetectorErrorModel> {
    let circuit = &noisy.base;
    let n = circuit.num_qubits();
    let num_detectors = circuit.detector_count() as u32;
    let mut sx: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut sz: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut rec: Vec<Vec<u32>> = vec![Vec::new(); circuit.measurement_count()];
    let mut ex = Extraction {
        num_detectors,
        merged: BTreeMap::new(),
    };

    // First record of every measurement instruction.
    let mut first_record = Vec::with_capacity(circuit.instructions().len());
    let mut count = 0usize;
    for ins in circuit.instructions() {
        first_record.push(count);
        if ins.kind.is_measurement() {
            count += ins.qubits().count();
        }
    }

    let mut next_detector = num_detectors;
    let mut channels = noisy.channels.iter().rev().peekable();
    for (i, ins) in circuit.instructions().iter().enumerate().rev() {
        while let Some(ch) = channels.next_if(|c| c.position == i) {
            add_channel(&mut ex, ch, &sx, &sz, &rec);
        }
        match ins.kind {
            Kind::Detector => {
                next_detector -= 1;
                for r in ins.absolute_records() {
                    rec[r] = xor_sorted(&rec[r], &[next_detector]);
                }
            }
            Kind::ObservableInclude => {
                let id = num_detectors + ins.observable_index() as u32;
                for r in ins.absolute_records() {
                    rec[r] = xor_sorted(&rec[r], &[id]);
                }
            }
            Kind::MeasureZ | Kind::MeasureX => {
                let (flip, other) = if ins.kind == Kind::MeasureZ {
                    (&mut sx, &sz)
                } else {
                    (&mut sz, &sx)
                };
                for (k, q) in ins.qubits().enumerate() {
                    let q = q as usize;
                    if let Some(&d) = other[q].first() {
                        return Err(Error::NonDeterministicDetector(d as usize));
                    }
                    let r = first_record[i] + k;
                    flip[q] = xor_sorted(&flip[q], &rec[r]);
                }
            }
            Kind::ResetZ | Kind::ResetX => {
                let other = if ins.kind == Kind::ResetZ { &sz } else { &sx };
                for q in ins.qubits() {
                    if let Some(&d) = other[q as usize].first() {
                        return Err(Error::NonDeterministicDetector(d as usize));
                    }
                }
                for q in ins.qubits() {
                    sx[q as usize].clear();
                    sz[q as usize].clear();
                }
            }
            Kind::H => {
                for q in ins.qubits() {
                    std::mem::swap(&mut sx[q as usize], &mut sz[q as usize]);
                }
            }
            Kind::Cx => {
                let qs: Vec<u32> = ins.qubits().collect();
                for p in qs.chunks_exact(2).rev() {
                    let (c, t) = (p[0] as usize, p[1] as usize);
                    sx[c] = xor_sorted(&sx[c], &sx[t]);
                    sz[t] = xor_sorted(&sz[t], &sz[c]);
                }
            }
            Kind::Tick | Kind::Polygon => {}
        }
    }
    // Anything still sensitive at the start acts on the all-|0> initial state.
    for q in 0..n {
        if let Some(&d) = sz[q].first() {
            return Err(Error::NonDeterministicDetector(d as usize));
        }
    }

    let detector_basis = detector_bases(circuit);
    let mechanisms = ex
        .merged
        .into_iter()
        .map(|(symptom, (probability, components))| ErrorMechanism {
            probability,
            symptom,
            components,
            parts: Vec::new(),
        })
        .collect::<Vec<_>>();
    let graphlike = mechanisms.iter().all(|m| m.symptom.is_graphlike(&detector_basis));
    Ok(DetectorErrorModel {
        mechanisms,
        num_detectors: num_detectors as usize,
        num_observables: circuit.observable_count(),
        graphlike,
        detector_basis,
        detector_coords: circuit.detectors().map(|d| d.args.clone()).collect(),
    })
}

fn add_channel(
    ex: &mut Extraction,
    ch: &crate::noise::Channel,
    sx: &[Vec<u32>],
    sz: &[Vec<u32>],
    rec: &[Vec<u32>],
) {
    match ch.kind {
        ChannelKind::XError => {
            for &q in &ch.targets {
                ex.add(ch.probability, &[(Basis::X, &sx[q as usize])]);
            }
        }
        ChannelKind::ZError => {
            for &q in &ch.targets {
                ex.add(ch.probability, &[(Basis::Z, &sz[q as usize])]);
            }
        }
        ChannelKind::MeasureFlip => {
            for &r in &ch.records {
                ex.add(ch.probability, &[(Basis::X, &rec[r])]);
            }
        }
        ChannelKind::Depolarize1 => {
            let q = independent_depolarizing(ch.probability, 1);
            for &t in &ch.targets {
                let t = t as usize;
                ex.add(q, &[(Basis::X, &sx[t])]);
                ex.add(q, &[(Basis::X, &sx[t]), (Basis::Z, &sz[t])]);
                ex.add(q, &[(Basis::Z, &sz[t])]);
            }
        }
        ChannelKind::Depolarize2 => {
            let q = independent_depolarizing(ch.probability, 2);
            for pair in ch.targets.chunks_exact(2) {
                let (a, b) = (pair[0] as usize, pair[1] as usize);
                let pieces = [
                    (Basis::X, &sx[a]),
                    (Basis::Z, &sz[a]),
                    (Basis::X, &sx[b]),
                    (Basis::Z, &sz[b]),
                ];
                for k in 1..16u32 {
                    let atoms: Vec<(Basis, &[u32])> = (0..4)
                        .filter(|bit| k >> bit & 1 == 1)
                        .map(|bit| (pieces[bit].0, pieces[bit].1.as_slice()))
                        .collect();
                    ex.add(q, &atoms);
                }
            }
        }
    }
}

/// All set partitions of `0..n`, as block-index vectors.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, blocks: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=blocks {
            cur.push(b);
            rec(i + 1, n, cur, blocks.max(b + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Splits a mechanism using its own components: prefers the split into its X and Z parts,
/// then any grouping with the fewest parts, ties broken by symptom order.
fn split_by_components(m: &ErrorMechanism, basis: &[Option<Basis>]) -> Option<Vec<Symptom>> {
    let comps = &m.components;
    if comps.is_empty() || comps.len() > 8 {
        return None;
    }
    let mut best: Option<(bool, usize, Vec<Symptom>)> = None;
    for assignment in set_partitions(comps.len()) {
        let blocks = assignment.iter().max().map_or(0, |b| b + 1);
        let mut parts = vec![Symptom::default(); blocks];
        let mut block_basis: Vec<Option<Basis>> = vec![None; blocks];
        let mut single_basis = true;
        for (c, &b) in comps.iter().zip(&assignment) {
            parts[b] = parts[b].xor(&c.1);
            match block_basis[b] {
                None => block_basis[b] = Some(c.0),
                Some(x) if x != c.0 => single_basis = false,
                _ => {}
            }
        }
        if parts
            .iter()
            .any(|p| p.detectors.is_empty() || !p.is_graphlike(basis))
        {
            continue;
        }
        parts.sort();
        // Rank: projections by Pauli basis first, then fewest parts, then symptom order.
        let key = (!single_basis, parts.len(), parts);
        if best
            .as_ref()
            .is_none_or(|b| (b.0, b.1, &b.2) > (key.0, key.1, &key.2))
        {
            best = Some(key);
        }
    }
    best.map(|b| b.2)
}

/// Splits `target` into at most `depth` known graphlike symptoms.
fn split_by_known(target: &Symptom, known: &HashSet<Symptom>, depth: usize) -> Option<Vec<Symptom>> {
    if target.detectors.is_empty() {
        return if target.observables.is_empty() {
            Some(Vec::new())
        } else {
            None
        };
    }
    if depth == 0 {
        return None;
    }
    if known.contains(target) {
        return Some(vec![target.clone()]);
    }
    let d0 = target.detectors[0];
    let rest = &target.detectors[1..];
    let mut options: Vec<Vec<u32>> = vec![vec![d0]];
    options.extend(rest.iter().map(|&d| vec![d0, d]));
    let obs_choices: Vec<Vec<u32>> = {
        let o = &target.observables;
        (0..1u32 << o.len().min(4))
            .map(|mask| {
                o.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect()
    };
    let mut best: Option<Vec<Symptom>> = None;
    for dets in &options {
        for obs in &obs_choices {
            let part = Symptom {
                detectors: dets.clone(),
                observables: obs.clone(),
            };
            if !known.contains(&part) {
                continue;
            }
            if let Some(mut tail) = split_by_known(&target.xor(&part), known, depth - 1) {
                tail.push(part);
                tail.sort();
                if best.as_ref().is_none_or(|b| (tail.len(), &tail) < (b.len(), b)) {
                    best = Some(tail);
                }
            }
        }
    }
    best
}

/// Rewrites every non-graphlike mechanism as an exact XOR of graphlike parts.
pub fn decompose_graphlike(dem: &DetectorErrorModel) -> Result<DetectorErrorModel> {
    let basis = &dem.detector_basis;
    let mut out = dem.clone();
    let mut known: HashSet<Symptom> = HashSet::new();
    for m in &dem.mechanisms {
        for p in m.graph_parts() {
            if !p.detectors.is_empty() && p.is_graphlike(basis) {
                known.insert(p.clone());
            }
        }
    }
    for m in out.mechanisms.iter_mut() {
        if m.parts.iter().all(|p| p.is_graphlike(basis)) && !m.parts.is_empty() {
            continue;
        }
        m.parts.clear();
        if m.symptom.is_graphlike(basis) {
            continue;
        }
        let parts = split_by_components(m, basis)
            .or_else(|| split_by_known(&m.symptom, &known, 4))
            .ok_or_else(|| Error::Undecomposable(m.symptom.to_string()))?;
        m.parts = parts;
    }
    out.graphlike = true;
    Ok(out)
}

/// Extraction followed by decomposition.
pub fn graphlike_dem(noisy: &NoisyCircuit) -> Result<DetectorErrorModel> {
    decompose_graphlike(&extract_dem(noisy)?)
}

/// Fewest graphlike parts whose XOR flips `observable` and no detector: a breadth-first
/// search over (detector, observable parity) with the boundary as a shared endpoint.
/// `None` when the observable cannot be flipped undetectably.
pub fn graphlike_distance(dem: &DetectorErrorModel, observable: u32) -> Option<usize> {
    let boundary = dem.num_detectors;
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); boundary + 1];
    let mut seen: HashSet<&Symptom> = HashSet::new();
    for m in &dem.mechanisms {
        if m.symptom.detectors.is_empty() && m.symptom.observables.contains(&observable) {
            return Some(1);
        }
        for p in m.graph_parts() {
            if !seen.insert(p) {
                continue;
            }
            let flips = p.observables.contains(&observable);
            let (a, b) = match p.detectors[..] {
                [a] => (a as usize, boundary),
                [a, b] => (a as usize, b as usize),
                _ => continue,
            };
            adj[a].push((b, flips));
            adj[b].push((a, flips));
        }
    }
    let mut dist = vec![[usize::MAX; 2]; boundary + 1];
    let mut queue = std::collections::VecDeque::new();
    dist[boundary][0] = 0;
    queue.push_back((boundary, 0usize));
    while let Some((v, par)) = queue.pop_front() {
        let d = dist[v][par];
        for &(u, f) in &adj[v] {
            let np = par ^ f as usize;
            if dist[u][np] == usize::MAX {
                dist[u][np] = d + 1;
                if u == boundary && np == 1 {
                    return Some(d + 1);
                }
                queue.push_back((u, np));
            }
        }
    }
    None
}

impl DetectorErrorModel {
    /// Text form: optional `detector(coords) Dk` lines, then one `error(q) ...` line per
    /// mechanism, with graphlike parts separated by `^`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.detector_coords.iter().enumerate() {
            if !c.is_empty() {
                let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                out.push_str(&format!("detector({}) D{k}\n", cs.join(", ")));
            }
        }
        for m in &self.mechanisms {
            let body: Vec<String> = m.graph_parts().iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("error({}) {}\n", m.probability, body.join(" ^ ")));
        }
        out
    }

    /// Reads [`to_text`](Self::to_text) output. Detector bases are not part of the text and
    /// come back unknown.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut mechanisms = Vec::new();
        let mut coords: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let (mut nd, mut no) = (0usize, 0usize);
        let bad = |line: usize, msg: &str| Error::Format(format!("line {}: {msg}", line + 1));
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let open = line.find('(').ok_or_else(|| bad(ln, "missing `(`"))?;
            let close = line.find(')').ok_or_else(|| bad(ln, "missing `)`"))?;
            let head = &line[..open];
            let args: Vec<f64> = line[open + 1..close]
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<f64>().map_err(|_| bad(ln, "bad number")))
                .collect::<Result<_>>()?;
            let mut parts = vec![Symptom::default()];
            for tok in line[close + 1..].split_whitespace() {
                if tok == "^" {
                    parts.push(Symptom::default());
                    continue;
                }
                let (kind, idx) = tok.split_at(1);
                let idx: u32 = idx.parse().map_err(|_| bad(ln, "bad target"))?;
                let p = parts.last_mut().unwrap();
                match kind {
                    "D" => {
                        p.detectors.push(idx);
                        nd = nd.max(idx as usize + 1);
                    }
                    "L" => {
                        p.observables.push(idx);
                        no = no.max(idx as usize + 1);
                    }
                    _ => return Err(bad(ln, "bad target")),
                }
            }
            for p in parts.iter_mut() {
                p.detectors.sort_unstable();
                p.observables.sort_unstable();
            }
            match head {
                "detector" => {
                    let d = parts[0].detectors.first().ok_or_else(|| bad(ln, "no detector"))?;
                    coords.insert(*d as usize, args);
                }
                "error" => {
                    let probability = *args.first().ok_or_else(|| bad(ln, "no probability"))?;
                    let symptom = parts.iter().fold(Symptom::default(), |a, p| a.xor(p));
                    mechanisms.push(ErrorMechanism {
                        probability,
                        symptom,
                        components: Vec::new(),
                        parts: if parts.len() > 1 { parts } else { Vec::new() },
                    });
                }
                _ => return Err(bad(ln, "unknown line")),
            }
        }
        let mut detector_coords = vec![Vec::new(); nd];
        for (k, c) in coords {
            detector_coords[k] = c;
        }
        let detector_basis = vec![None; nd];
        let graphlike = mechanisms
            .iter()
            .all(|m| m.graph_parts().iter().all(|p| p.is_graphlike(&detector_basis)));
        Ok(DetectorErrorModel {
            mechanisms,
            num_detectors: nd,
            num_observables: no,
            graphlike,
            detector_basis,
            detector_coords,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_stim_text;
    use crate::gen::{build_memory_circuit, ExperimentSpec};
    use crate::noise::{apply_si1000, Channel, NoiseParams, Site};
    use crate::Family;
    use approx::assert_relative_eq;

    fn memory(family: Family, d: usize, basis: Basis, p: f64) -> NoisyCircuit {
        let c = build_memory_circuit(&ExperimentSpec::protocol(family, d, basis)).unwrap();
        apply_si1000(c, NoiseParams::si1000(p)).unwrap()
    }

    #[test]
    fn zero_noise_gives_empty_model() {
        let noisy = memory(Family::Diamond, 3, Basis::Z, 0.0);
        let dem = extract_dem(&noisy).unwrap();
        assert!(dem.mechanisms.is_empty());
        assert_eq!(dem.num_detectors, noisy.base.detector_count());
    }

    #[test]
    fn equal_symptoms_merge() {
        let c = parse_stim_text("R 0\nM 0\nDETECTOR rec[-1]").unwrap();
        let flip = |p| Channel {
            position: 0,
            kind: ChannelKind::XError,
            site: Site::ResetFlip,
            targets: vec![0],
            records: vec![],
            probability: p,
        };
        let noisy = NoisyCircuit {
            base: c,
            params: NoiseParams::si1000(0.0),
            channels: vec![flip(0.1), flip(0.1)],
        };
        let dem = extract_dem(&noisy).unwrap();
        assert_eq!(dem.mechanisms.len(), 1);
        assert_relative_eq!(dem.mechanisms[0].probability, 2.0 * 0.1 * 0.9);
    }

    #[test]
    fn depolarizing_conversion() {
        // Three independent channels at q reproduce a total non-identity weight of p.
        let p = 0.03;
        let q = independent_depolarizing(p, 1);
        // P(net X) = q(1-q)^2 + q^2(1-q)... computed by enumeration.
        let mut net = [0.0; 4];
        for m in 0..8u32 {
            let prob: f64 = (0..3)
                .map(|i| if m >> i & 1 == 1 { q } else { 1.0 - q })
                .product();
            // bits: X, Y, Z as (1,0), (1,1), (0,1)
            let mut x = 0;
            let mut z = 0;
            for (i, (a, b)) in [(1, 0), (1, 1), (0, 1)].iter().enumerate() {
                if m >> i & 1 == 1 {
                    x ^= a;
                    z ^= b;
                }
            }
            net[x + 2 * z] += prob;
        }
        for k in 1..4 {
            assert_relative_eq!(net[k], p / 3.0, epsilon = 1e-12);
        }
        let q2 = independent_depolarizing(0.01, 2);
        assert!(q2 > 0.01 / 15.0 && q2 < 0.01 / 14.0);
    }

    #[test]
    fn decomposes_diamond_and_standard() {
        for family in [Family::Diamond, Family::Standard] {
            for basis in [Basis::X, Basis::Z] {
                let dem = extract_dem(&memory(family, 3, basis, 1e-3)).unwrap();
                let g = decompose_graphlike(&dem).unwrap();
                assert!(g.graphlike);
                for m in &g.mechanisms {
                    let total = m.graph_parts().iter().fold(Symptom::default(), |a, p| a.xor(p));
                    assert_eq!(total, m.symptom);
                    for p in m.graph_parts() {
                        assert!(p.is_graphlike(&g.detector_basis), "{}", m.symptom);
                    }
                }
                // Idempotent.
                assert_eq!(decompose_graphlike(&g).unwrap(), g);
            }
        }
    }

    #[test]
    fn y_error_splits_into_projections() {
        let dem = extract_dem(&memory(Family::Diamond, 3, Basis::Z, 1e-3)).unwrap();
        let g = decompose_graphlike(&dem).unwrap();
        let split = g
            .mechanisms
            .iter()
            .find(|m| m.parts.len() == 2 && m.components.len() == 2 && m.components[0].0 != m.components[1].0)
            .expect("some Y fault needs splitting");
        let bases: Vec<_> = split
            .parts
            .iter()
            .map(|p| g.detector_basis[p.detectors[0] as usize])
            .collect();
        assert_ne!(bases[0], bases[1]);
    }

    #[test]
    fn distance_matches_code_distance() {
        for family in [Family::Diamond, Family::Standard] {
            for basis in [Basis::X, Basis::Z] {
                let g = graphlike_dem(&memory(family, 3, basis, 1e-3)).unwrap();
                assert_eq!(graphlike_distance(&g, 0), Some(3), "{family} {basis}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let g = graphlike_dem(&memory(Family::Standard, 3, Basis::X, 1e-3)).unwrap();
        let back = DetectorErrorModel::from_text(&g.to_text()).unwrap();
        assert_eq!(back.mechanisms.len(), g.mechanisms.len());
        assert_eq!(back.num_detectors, g.num_detectors);
        for (a, b) in back.mechanisms.iter().zip(&g.mechanisms) {
            assert_eq!(a.symptom, b.symptom);
            assert_eq!(a.parts, b.parts);
            assert_relative_eq!(a.probability, b.probability, max_relative = 1e-12);
        }
        assert!(DetectorErrorModel::from_text("error(0.1) Q3").is_err());
    }

    #[test]
    fn non_deterministic_detector_is_rejected() {
        let c = parse_stim_text("R 0\nMX 0\nDETECTOR rec[-1]").unwrap();
        let noisy = apply_si1000(c, NoiseParams::si1000(1e-3)).unwrap();
        assert!(matches!(
            extract_dem(&noisy),
            Err(Error::NonDeterministicDetector(0))
        ));
    }
}
