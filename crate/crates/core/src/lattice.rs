//! Code layouts on the integer grid: data qubits at odd (x, y), measure qubits at even (x, y).

use crate::circuit::Basis;
use crate::error::{Error, Result};
use crate::pauli::Pauli;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type Coord = (i32, i32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Diamond,
    Standard,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Diamond => write!(f, "diamond"),
            Family::Standard => write!(f, "standard"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "diamond" => Ok(Family::Diamond),
            "standard" => Ok(Family::Standard),
            _ => Err(format!("unknown family `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Odd,
    /// Even distance with weight-3 stabilizers on all four corners.
    EvenA,
    /// Even distance with weight-6 stabilizers on all four corners.
    EvenB,
    NotApplicable,
}

impl Variant {
    /// The default diamond variant for a distance.
    pub fn for_distance(d: usize) -> Variant {
        if d % 2 == 1 {
            Variant::Odd
        } else {
            Variant::EvenA
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "odd" => Ok(Variant::Odd),
            "even-a" | "a" => Ok(Variant::EvenA),
            "even-b" | "b" => Ok(Variant::EvenB),
            "n/a" | "none" => Ok(Variant::NotApplicable),
            _ => Err(format!("unknown variant `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Data,
    MeasureZ,
    MeasureX,
    /// Bulk diamond measure qubit, measuring Z-type and X-type gauges in alternation.
    MeasureMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutQubit {
    pub coord: Coord,
    pub role: Role,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilizerKind {
    /// Diamond: unpaired weight-3 gauge. Standard: weight-2 boundary plaquette.
    Boundary,
    /// Diamond: weight-6 superstabilizer. Standard: weight-4 plaquette.
    Bulk,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub pauli: Basis,
    pub support: Vec<Coord>,
    pub weight: usize,
    pub kind: StabilizerKind,
}

/// A weight-3 operator measured by one diamond measure qubit: the measure qubit plus two data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gauge {
    pub pauli: Basis,
    pub measure: Coord,
    pub template: usize,
    pub support: Vec<Coord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub distance: usize,
    pub family: Family,
    pub variant: Variant,
    /// Sorted by coordinate; the position is the circuit qubit index.
    pub qubits: Vec<LayoutQubit>,
    pub couplers: Vec<(Coord, Coord)>,
    pub stabilizers: Vec<Stabilizer>,
    pub gauges: Vec<Gauge>,
    pub gauge_pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCount {
    pub qubit_lines: usize,
    pub coupler_lines: usize,
    pub total: usize,
}

/// Per template: gauge basis and the two data offsets, in CX order.
pub const DIAMOND_TEMPLATES: [(Basis, [Coord; 2]); 4] = [
    (Basis::Z, [(-1, 1), (-1, -1)]),
    (Basis::Z, [(1, -1), (1, 1)]),
    (Basis::X, [(-1, -1), (1, -1)]),
    (Basis::X, [(1, 1), (-1, 1)]),
];

const DIAGONALS: [Coord; 4] = [(-1, -1), (1, -1), (-1, 1), (1, 1)];

fn add(a: Coord, b: Coord) -> Coord {
    (a.0 + b.0, a.1 + b.1)
}

fn data_coords(d: usize) -> BTreeSet<Coord> {
    let mut s = BTreeSet::new();
    for a in 0..d as i32 {
        for b in 0..d as i32 {
            s.insert((2 * a + 1, 2 * b + 1));
        }
    }
    s
}

impl Layout {
    pub fn index_of(&self, c: Coord) -> Option<usize> {
        self.qubits.binary_search_by(|q| q.coord.cmp(&c)).ok()
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn data(&self) -> Vec<Coord> {
        self.qubits
            .iter()
            .filter(|q| q.role == Role::Data)
            .map(|q| q.coord)
            .collect()
    }

    pub fn measure(&self) -> Vec<Coord> {
        self.qubits
            .iter()
            .filter(|q| q.role != Role::Data)
            .map(|q| q.coord)
            .collect()
    }

    pub fn is_data(&self, c: Coord) -> bool {
        self.index_of(c)
            .map(|i| self.qubits[i].role == Role::Data)
            .unwrap_or(false)
    }

    pub fn pauli(&self, basis: Basis, support: &[Coord]) -> Pauli {
        let idx: Vec<usize> = support.iter().map(|&c| self.index_of(c).unwrap()).collect();
        Pauli::uniform(self.num_qubits(), &idx, basis)
    }

    /// Number of couplers touching each qubit, by index.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_qubits()];
        for &(a, b) in &self.couplers {
            deg[self.index_of(a).unwrap()] += 1;
            deg[self.index_of(b).unwrap()] += 1;
        }
        deg
    }

    /// Logical representative on the data qubits: X along the column x=1, Z along the row y=1.
    pub fn logical(&self, basis: Basis) -> Vec<Coord> {
        let d = self.distance as i32;
        match basis {
            Basis::X => (0..d).map(|b| (1, 2 * b + 1)).collect(),
            Basis::Z => (0..d).map(|a| (2 * a + 1, 1)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}

/// Diamond layout: a measure site is kept on one checkerboard colour and only when at least two
/// data qubits surround it.
pub fn build_diamond_layout(d: usize, variant: Variant) -> Result<Layout> {
    if d < 2 {
        return Err(Error::InvalidDistance(d));
    }
    let parity = match (d % 2, variant) {
        (1, Variant::Odd) => 1,
        (0, Variant::EvenA) => 0,
        (0, Variant::EvenB) => 1,
        _ => {
            return Err(Error::VariantMismatch {
                distance: d,
                variant: format!("{variant:?}"),
            })
        }
    };
    let data = data_coords(d);
    let mut measure = Vec::new();
    for i in 0..=d as i32 {
        for j in 0..=d as i32 {
            if (i + j).rem_euclid(2) != parity {
                continue;
            }
            let m = (2 * i, 2 * j);
            let nb = DIAGONALS.iter().filter(|&&o| data.contains(&add(m, o))).count();
            if nb >= 2 {
                measure.push(m);
            }
        }
    }

    let mut gauges = Vec::new();
    let mut couplers = BTreeSet::new();
    let mut basis_of: BTreeMap<Coord, BTreeSet<Basis>> = BTreeMap::new();
    for &m in &measure {
        for (t, (basis, offs)) in DIAMOND_TEMPLATES.iter().enumerate() {
            let pair = [add(m, offs[0]), add(m, offs[1])];
            if pair.iter().all(|p| data.contains(p)) {
                let mut support = vec![m, pair[0], pair[1]];
                support.sort();
                gauges.push(Gauge {
                    pauli: *basis,
                    measure: m,
                    template: t,
                    support,
                });
                basis_of.entry(m).or_default().insert(*basis);
                for p in pair {
                    couplers.insert(if p < m { (p, m) } else { (m, p) });
                }
            }
        }
    }

    let mut qubits: Vec<LayoutQubit> = data
        .iter()
        .map(|&c| LayoutQubit {
            coord: c,
            role: Role::Data,
        })
        .chain(measure.iter().map(|&m| {
            let bs = &basis_of[&m];
            let role = match (bs.contains(&Basis::Z), bs.contains(&Basis::X)) {
                (true, true) => Role::MeasureMixed,
                (true, false) => Role::MeasureZ,
                _ => Role::MeasureX,
            };
            LayoutQubit { coord: m, role }
        }))
        .collect();
    qubits.sort_by_key(|q| q.coord);

    // A right-hand Z gauge pairs with the left-hand Z gauge four columns over; a lower X gauge
    // with the upper X gauge four rows down. The same rule is used for both even variants: the
    // corner arrangement only changes which gauges are left unpaired.
    let by_site: BTreeMap<(Coord, usize), usize> = gauges
        .iter()
        .enumerate()
        .map(|(i, g)| ((g.measure, g.template), i))
        .collect();
    let find = |m: Coord, t: usize| by_site.get(&(m, t)).copied();
    let mut paired = vec![false; gauges.len()];
    let mut gauge_pairs = Vec::new();
    let mut stabilizers = Vec::new();
    for (gi, g) in gauges.iter().enumerate() {
        let partner = match g.template {
            1 => find(add(g.measure, (4, 0)), 0),
            3 => find(add(g.measure, (0, 4)), 2),
            _ => None,
        };
        if let Some(pi) = partner {
            paired[gi] = true;
            paired[pi] = true;
            gauge_pairs.push((gi, pi));
            let mut support: Vec<Coord> = g.support.iter().chain(&gauges[pi].support).copied().collect();
            support.sort();
            stabilizers.push(Stabilizer {
                pauli: g.pauli,
                weight: support.len(),
                support,
                kind: StabilizerKind::Bulk,
            });
        }
    }
    for (gi, g) in gauges.iter().enumerate() {
        if !paired[gi] {
            stabilizers.push(Stabilizer {
                pauli: g.pauli,
                support: g.support.clone(),
                weight: 3,
                kind: StabilizerKind::Boundary,
            });
        }
    }

    Ok(Layout {
        distance: d,
        family: Family::Diamond,
        variant,
        qubits,
        couplers: couplers.into_iter().collect(),
        stabilizers,
        gauges,
        gauge_pairs,
    })
}

/// Plaquette type of the standard rotated code at measure site (2i, 2j), if the site is used.
pub fn standard_plaquette(d: usize, i: i32, j: i32) -> Option<Basis> {
    let d = d as i32;
    if !(0..=d).contains(&i) || !(0..=d).contains(&j) {
        return None;
    }
    let checker = if (i + j) % 2 == 1 { Basis::Z } else { Basis::X };
    let on_lr = i == 0 || i == d;
    let on_tb = j == 0 || j == d;
    match (on_lr, on_tb) {
        (true, true) => None,
        (true, false) => (checker == Basis::Z).then_some(Basis::Z),
        (false, true) => (checker == Basis::X).then_some(Basis::X),
        (false, false) => Some(checker),
    }
}

pub fn build_standard_layout(d: usize) -> Result<Layout> {
    if d < 2 {
        return Err(Error::InvalidDistance(d));
    }
    let data = data_coords(d);
    let mut qubits: Vec<LayoutQubit> = data
        .iter()
        .map(|&c| LayoutQubit {
            coord: c,
            role: Role::Data,
        })
        .collect();
    let mut couplers = BTreeSet::new();
    let mut stabilizers = Vec::new();
    for i in 0..=d as i32 {
        for j in 0..=d as i32 {
            let Some(basis) = standard_plaquette(d, i, j) else {
                continue;
            };
            let m = (2 * i, 2 * j);
            let support: Vec<Coord> = DIAGONALS
                .iter()
                .map(|&o| add(m, o))
                .filter(|c| data.contains(c))
                .collect();
            for &p in &support {
                couplers.insert(if p < m { (p, m) } else { (m, p) });
            }
            let mut sorted = support.clone();
            sorted.sort();
            stabilizers.push(Stabilizer {
                pauli: basis,
                weight: sorted.len(),
                kind: if sorted.len() == 4 {
                    StabilizerKind::Bulk
                } else {
                    StabilizerKind::Boundary
                },
                support: sorted,
            });
            qubits.push(LayoutQubit {
                coord: m,
                role: match basis {
                    Basis::Z => Role::MeasureZ,
                    Basis::X => Role::MeasureX,
                },
            });
        }
    }
    qubits.sort_by_key(|q| q.coord);
    Ok(Layout {
        distance: d,
        family: Family::Standard,
        variant: Variant::NotApplicable,
        qubits,
        couplers: couplers.into_iter().collect(),
        stabilizers,
        gauges: Vec::new(),
        gauge_pairs: Vec::new(),
    })
}

pub fn build_layout(family: Family, d: usize, variant: Variant) -> Result<Layout> {
    match family {
        Family::Diamond => build_diamond_layout(d, variant),
        Family::Standard => build_standard_layout(d),
    }
}

pub fn line_count(layout: &Layout) -> LineCount {
    let qubit_lines = layout.qubits.len();
    let coupler_lines = layout.couplers.len();
    LineCount {
        qubit_lines,
        coupler_lines,
        total: qubit_lines + coupler_lines,
    }
}

/// Line count by enumerating sites and couplers with the same rules as the layout builders,
/// without materializing stabilizers. Agrees with [`line_count`] of [`build_layout`].
pub fn count_lines(family: Family, d: usize, variant: Variant) -> Result<LineCount> {
    if d < 2 {
        return Err(Error::InvalidDistance(d));
    }
    let n = d as i32;
    let is_data = |(x, y): Coord| x > 0 && y > 0 && x < 2 * n && y < 2 * n && x % 2 == 1 && y % 2 == 1;
    let parity = match (family, d % 2, variant) {
        (Family::Standard, _, _) => None,
        (_, 1, Variant::Odd) | (_, 0, Variant::EvenB) => Some(1),
        (_, 0, Variant::EvenA) => Some(0),
        _ => {
            return Err(Error::VariantMismatch {
                distance: d,
                variant: format!("{variant:?}"),
            })
        }
    };
    let mut measure = 0;
    let mut couplers = 0;
    for i in 0..=n {
        for j in 0..=n {
            let m = (2 * i, 2 * j);
            let used = match parity {
                None => {
                    if standard_plaquette(d, i, j).is_none() {
                        continue;
                    }
                    DIAGONALS.iter().filter(|&&o| is_data(add(m, o))).count()
                }
                Some(par) => {
                    if (i + j).rem_euclid(2) != par
                        || DIAGONALS.iter().filter(|&&o| is_data(add(m, o))).count() < 2
                    {
                        continue;
                    }
                    DIAGONALS
                        .iter()
                        .filter(|&&o| {
                            DIAMOND_TEMPLATES.iter().any(|(_, offs)| {
                                offs.contains(&o) && offs.iter().all(|&q| is_data(add(m, q)))
                            })
                        })
                        .count()
                }
            };
            measure += 1;
            couplers += used;
        }
    }
    let qubit_lines = d * d + measure;
    Ok(LineCount {
        qubit_lines,
        coupler_lines: couplers,
        total: qubit_lines + couplers,
    })
}

/// Exact line count of the default layout of a family at distance d.
pub fn family_lines(family: Family, d: usize) -> usize {
    count_lines(family, d, Variant::for_distance(d))
        .expect("d >= 2")
        .total
}
