//! Stabilizer tableau with symbolic signs: every random outcome becomes a fresh variable, so
//! the value of any later measurement is known as an XOR of earlier random outcomes.

use crate::circuit::{Basis, Circuit, Kind};
use crate::error::{Error, Result};
use crate::pauli::{Bits, Pauli};

/// `constant XOR (XOR of the variables in vars)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignExpr {
    pub constant: bool,
    pub vars: Bits,
}

impl SignExpr {
    pub fn is_deterministic(&self) -> bool {
        self.vars.is_zero()
    }

    pub fn xor_with(&mut self, other: &SignExpr) {
        self.constant ^= other.constant;
        self.vars.xor_with(&other.vars);
    }
}

#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    // Rows 0..n are destabilizers, n..2n stabilizers.
    x: Vec<Bits>,
    z: Vec<Bits>,
    phase: Vec<bool>,
    sym: Vec<Bits>,
    vars: usize,
    capacity: usize,
}

/// Phase exponent (power of i) picked up by `(x1|z1) *= (x2|z2)`, in place.
fn mul_rows(x1: &mut Bits, z1: &mut Bits, x2: &Bits, z2: &Bits) -> u32 {
    let mut cnt1 = 0u64;
    let mut cnt2 = 0u64;
    let mut acc1 = 0u32;
    let mut acc2 = 0u32;
    let xw = x1.words_mut();
    let zw = z1.words_mut();
    for i in 0..xw.len() {
        let ox = xw[i];
        let oz = zw[i];
        let (bx, bz) = (x2.words()[i], z2.words()[i]);
        let nx = ox ^ bx;
        let nz = oz ^ bz;
        xw[i] = nx;
        zw[i] = nz;
        let x1z2 = ox & bz;
        let anti = (bx & oz) ^ x1z2;
        cnt2 ^= (cnt1 ^ nx ^ nz ^ x1z2) & anti;
        cnt1 ^= anti;
        acc1 += cnt1.count_ones();
        acc2 += cnt2.count_ones();
        cnt1 = 0;
        cnt2 = 0;
    }
    (acc1 + 2 * acc2) & 3
}

impl Tableau {
    /// All qubits in |0>. `capacity` bounds the number of random outcomes that can be created;
    /// with 0 the tableau runs concretely.
    pub fn new(n: usize, capacity: usize) -> Self {
        let mut x = vec![Bits::new(n); 2 * n];
        let mut z = vec![Bits::new(n); 2 * n];
        for q in 0..n {
            x[q].set(q, true);
            z[n + q].set(q, true);
        }
        Tableau {
            n,
            x,
            z,
            phase: vec![false; 2 * n],
            sym: vec![Bits::new(capacity); 2 * n],
            vars: 0,
            capacity,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn rowmult(&mut self, h: usize, i: usize) {
        let (xi, zi) = (self.x[i].clone(), self.z[i].clone());
        let e = mul_rows(&mut self.x[h], &mut self.z[h], &xi, &zi);
        let total = e + 2 * (self.phase[h] as u32) + 2 * (self.phase[i] as u32);
        self.phase[h] = (total & 3) == 2;
        let si = self.sym[i].clone();
        self.sym[h].xor_with(&si);
    }

    pub fn h(&mut self, q: usize) {
        for r in 0..2 * self.n {
            let (xb, zb) = (self.x[r].get(q), self.z[r].get(q));
            if xb && zb {
                self.phase[r] ^= true;
            }
            self.x[r].set(q, zb);
            self.z[r].set(q, xb);
        }
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for r in 0..2 * self.n {
            let (xc, zt) = (self.x[r].get(c), self.z[r].get(t));
            let (xt, zc) = (self.x[r].get(t), self.z[r].get(c));
            if xc && zt && (xt == zc) {
                self.phase[r] ^= true;
            }
            if xc {
                self.x[r].toggle(t);
            }
            if zt {
                self.z[r].toggle(c);
            }
        }
    }

    fn fresh_var(&mut self) -> usize {
        assert!(self.vars < self.capacity, "tableau variable capacity exhausted");
        self.vars += 1;
        self.vars - 1
    }

    /// Z measurement; returns the outcome expression.
    pub fn measure_z(&mut self, q: usize) -> SignExpr {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&r| self.x[r].get(q)) {
            for r in 0..2 * n {
                if r != p && self.x[r].get(q) {
                    self.rowmult(r, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.phase[p - n] = self.phase[p];
            self.sym[p - n] = self.sym[p].clone();
            self.x[p] = Bits::new(n);
            self.z[p] = Bits::new(n);
            self.z[p].set(q, true);
            self.phase[p] = false;
            self.sym[p] = Bits::new(self.capacity);
            // Zero capacity: concrete mode, every random outcome is fixed to 0.
            if self.capacity > 0 {
                let v = self.fresh_var();
                self.sym[p].set(v, true);
            }
            SignExpr {
                constant: false,
                vars: self.sym[p].clone(),
            }
        } else {
            let mut sx = Bits::new(n);
            let mut sz = Bits::new(n);
            let mut phase = 0u32;
            let mut sym = Bits::new(self.capacity);
            for i in 0..n {
                if self.x[i].get(q) {
                    let r = i + n;
                    let e = mul_rows(&mut sx, &mut sz, &self.x[r], &self.z[r]);
                    phase = (phase + e + 2 * self.phase[r] as u32) & 3;
                    sym.xor_with(&self.sym[r]);
                }
            }
            SignExpr {
                constant: phase == 2,
                vars: sym,
            }
        }
    }

    pub fn measure(&mut self, q: usize, basis: Basis) -> SignExpr {
        match basis {
            Basis::Z => self.measure_z(q),
            Basis::X => {
                self.h(q);
                let r = self.measure_z(q);
                self.h(q);
                r
            }
        }
    }

    pub fn reset(&mut self, q: usize, basis: Basis) {
        if basis == Basis::X {
            self.h(q);
        }
        let e = self.measure_z(q);
        // Conditional X on q flips every generator containing Z_q.
        for r in self.n..2 * self.n {
            if self.z[r].get(q) {
                self.phase[r] ^= e.constant;
                self.sym[r].xor_with(&e.vars);
            }
        }
        if basis == Basis::X {
            self.h(q);
        }
    }

    /// Stabilizer generators (without signs).
    pub fn stabilizers(&self) -> Vec<Pauli> {
        (self.n..2 * self.n)
            .map(|r| Pauli {
                x: self.x[r].clone(),
                z: self.z[r].clone(),
            })
            .collect()
    }

    pub fn group(&self) -> StabilizerGroup {
        StabilizerGroup {
            generators: (self.n..2 * self.n)
                .map(|r| {
                    (
                        Pauli {
                            x: self.x[r].clone(),
                            z: self.z[r].clone(),
                        },
                        SignExpr {
                            constant: self.phase[r],
                            vars: self.sym[r].clone(),
                        },
                    )
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    pub generators: Vec<(Pauli, SignExpr)>,
}

impl StabilizerGroup {
    /// Whether `p` lies in the group up to sign (GF(2) span of the generators).
    pub fn contains(&self, p: &Pauli) -> bool {
        let n = p.num_qubits();
        let to_row = |q: &Pauli| {
            let mut b = Bits::new(2 * n);
            for i in q.x.ones() {
                b.set(i, true);
            }
            for i in q.z.ones() {
                b.set(n + i, true);
            }
            b
        };
        let mut basis: Vec<(usize, Bits)> = Vec::new();
        for (g, _) in &self.generators {
            let mut r = to_row(g);
            for (piv, b) in &basis {
                if r.get(*piv) {
                    r.xor_with(b);
                }
            }
            let lead = r.ones().next();
            if let Some(piv) = lead {
                for (_, b) in basis.iter_mut() {
                    if b.get(piv) {
                        b.xor_with(&r);
                    }
                }
                basis.push((piv, r));
            }
        }
        let mut t = to_row(p);
        for (piv, b) in &basis {
            if t.get(*piv) {
                t.xor_with(b);
            }
        }
        t.is_zero()
    }
}

#[derive(Clone, Debug)]
pub struct TableauReport {
    /// Outcome expression per measurement record.
    pub measurements: Vec<SignExpr>,
    /// Per detector: deterministic, and its noiseless value.
    pub detectors: Vec<(bool, bool)>,
    pub observables: Vec<(bool, bool)>,
    /// Stabilizer group right after each requested TICK (by TICK ordinal).
    pub snapshots: Vec<(usize, StabilizerGroup)>,
}

impl TableauReport {
    pub fn all_detectors_deterministic(&self) -> bool {
        self.detectors.iter().all(|&(det, v)| det && !v)
    }

    pub fn observables_deterministic(&self) -> bool {
        self.observables.iter().all(|&(det, _)| det)
    }
}

/// Runs a noiseless circuit symbolically. `ticks` lists TICK ordinals (0-based) after which a
/// snapshot of the stabilizer group is taken.
pub fn tableau_run(circuit: &Circuit, ticks: &[usize]) -> Result<TableauReport> {
    let capacity = circuit
        .instructions()
        .iter()
        .filter(|i| i.kind.is_measurement() || i.kind.is_reset())
        .map(|i| i.targets.len())
        .sum::<usize>();
    run(circuit, ticks, capacity.max(1))
}

/// Detector and observable values of one noiseless run in which every random measurement
/// returns 0. For deterministic detectors these are their fixed values.
pub fn reference_values(circuit: &Circuit) -> Result<(Vec<bool>, Vec<bool>)> {
    let r = run(circuit, &[], 0)?;
    Ok((
        r.detectors.iter().map(|d| d.1).collect(),
        r.observables.iter().map(|o| o.1).collect(),
    ))
}

fn run(circuit: &Circuit, ticks: &[usize], capacity: usize) -> Result<TableauReport> {
    let n = circuit.num_qubits();
    let mut t = Tableau::new(n, capacity);
    let mut measurements = Vec::with_capacity(circuit.measurement_count());
    let mut detectors = Vec::new();
    let mut observables: Vec<Option<SignExpr>> = vec![None; circuit.observable_count()];
    let mut snapshots = Vec::new();
    let mut tick = 0usize;
    for ins in circuit.instructions() {
        match ins.kind {
            Kind::ResetZ | Kind::ResetX => {
                let b = ins.kind.basis().unwrap();
                for q in ins.qubits() {
                    t.reset(q as usize, b);
                }
            }
            Kind::MeasureZ | Kind::MeasureX => {
                let b = ins.kind.basis().unwrap();
                for q in ins.qubits() {
                    measurements.push(t.measure(q as usize, b));
                }
            }
            Kind::H => {
                for q in ins.qubits() {
                    t.h(q as usize);
                }
            }
            Kind::Cx => {
                let qs: Vec<u32> = ins.qubits().collect();
                if qs.len() % 2 == 1 {
                    return Err(Error::InvalidCircuit("CX with odd target count".into()));
                }
                for pair in qs.chunks(2) {
                    t.cx(pair[0] as usize, pair[1] as usize);
                }
            }
            Kind::Tick => {
                if ticks.contains(&tick) {
                    snapshots.push((tick, t.group()));
                }
                tick += 1;
            }
            Kind::Detector | Kind::ObservableInclude => {
                let mut e = SignExpr {
                    constant: false,
                    vars: Bits::new(capacity),
                };
                for r in ins.absolute_records() {
                    e.xor_with(&measurements[r]);
                }
                if ins.kind == Kind::Detector {
                    detectors.push((e.is_deterministic(), e.constant));
                } else {
                    let k = ins.observable_index();
                    match &mut observables[k] {
                        Some(o) => o.xor_with(&e),
                        slot => *slot = Some(e),
                    }
                }
            }
            Kind::Polygon => {}
        }
    }
    Ok(TableauReport {
        measurements,
        detectors,
        observables: observables
            .into_iter()
            .map(|o| {
                o.map(|e| (e.is_deterministic(), e.constant))
                    .unwrap_or((true, false))
            })
            .collect(),
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_stim_text;

    #[test]
    fn reset_then_measure_is_zero() {
        let c = parse_stim_text("R 0\nM 0\nDETECTOR rec[-1]").unwrap();
        let r = tableau_run(&c, &[]).unwrap();
        assert!(r.measurements[0].is_deterministic());
        assert!(!r.measurements[0].constant);
        assert!(r.all_detectors_deterministic());
    }

    #[test]
    fn x_measure_of_zero_is_random() {
        let c = parse_stim_text("R 0\nMX 0\nMX 0\nDETECTOR rec[-1] rec[-2]").unwrap();
        let r = tableau_run(&c, &[]).unwrap();
        assert!(!r.measurements[0].is_deterministic());
        assert_eq!(r.detectors, vec![(true, false)]);
    }

    #[test]
    fn bell_pair_parities() {
        let c = parse_stim_text("RX 0\nR 1\nCX 0 1\nM 0 1\nDETECTOR rec[-1] rec[-2]").unwrap();
        let r = tableau_run(&c, &[]).unwrap();
        assert!(!r.measurements[0].is_deterministic());
        assert_eq!(r.detectors, vec![(true, false)]);
    }

    // Dense state vector with post-selection on outcome 0 for random measurements.
    fn sv_apply(state: &mut [(f64, f64)], op: (u8, usize, usize)) -> Option<(bool, f64)> {
        let n = state.len();
        match op.0 {
            0 => {
                let m = 1 << op.1;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..n {
                    if i & m == 0 {
                        let (a, b) = (state[i], state[i | m]);
                        state[i] = ((a.0 + b.0) * s, (a.1 + b.1) * s);
                        state[i | m] = ((a.0 - b.0) * s, (a.1 - b.1) * s);
                    }
                }
                None
            }
            1 => {
                let (c, t) = (1 << op.1, 1 << op.2);
                for i in 0..n {
                    if i & c != 0 && i & t == 0 {
                        state.swap(i, i | t);
                    }
                }
                None
            }
            _ => {
                let m = 1 << op.1;
                let p1: f64 = (0..n)
                    .filter(|i| i & m != 0)
                    .map(|i| state[i].0.powi(2) + state[i].1.powi(2))
                    .sum();
                let outcome = p1 > 1.0 - 1e-9;
                let keep_one = outcome;
                let norm = if keep_one { p1 } else { 1.0 - p1 }.sqrt();
                for i in 0..n {
                    if (i & m != 0) != keep_one {
                        state[i] = (0.0, 0.0);
                    } else {
                        state[i] = (state[i].0 / norm, state[i].1 / norm);
                    }
                }
                Some((outcome, p1))
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn agrees_with_state_vector(ops in proptest::collection::vec((0u8..3, 0usize..3, 1usize..3), 1..30)) {
            let mut state = vec![(0.0, 0.0); 8];
            state[0] = (1.0, 0.0);
            let mut t = Tableau::new(3, 64);
            for (kind, a, off) in ops {
                let b = (a + off) % 3;
                match kind {
                    0 => { t.h(a); sv_apply(&mut state, (0, a, 0)); }
                    1 => { t.cx(a, b); sv_apply(&mut state, (1, a, b)); }
                    _ => {
                        let before = t.vars;
                        let e = t.measure_z(a);
                        let (sv, p1) = sv_apply(&mut state, (2, a, 0)).unwrap();
                        // Random outcomes are post-selected to 0, i.e. every variable is 0.
                        proptest::prop_assert_eq!(e.constant, sv);
                        if t.vars > before {
                            proptest::prop_assert!((p1 - 0.5).abs() < 1e-9);
                        } else {
                            proptest::prop_assert!(!(1e-9..=1.0 - 1e-9).contains(&p1));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn group_membership() {
        let mut t = Tableau::new(3, 8);
        t.h(0);
        t.cx(0, 1);
        t.cx(1, 2);
        let g = t.group();
        assert!(g.contains(&Pauli::uniform(3, &[0, 1, 2], Basis::X)));
        assert!(g.contains(&Pauli::uniform(3, &[0, 2], Basis::Z)));
        assert!(!g.contains(&Pauli::uniform(3, &[0], Basis::Z)));
    }
}
