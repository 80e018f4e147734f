use super::{declare_layout, RoundSchedule, RoundTemplate};
use crate::circuit::{xor_sorted, Basis, Circuit, CircuitBuilder};
use crate::error::{Error, Result};
use crate::lattice::{Coord, Layout, Role, DIAMOND_TEMPLATES};
use crate::pauli::Pauli;
use crate::sim::Tableau;
use std::collections::HashMap;

/// The four-template cycle. Template t's A layer uses the first data offset, B the second.
pub fn diamond_schedule(layout: &Layout) -> RoundSchedule {
    let idx = |c: Coord| layout.index_of(c).unwrap() as u32;
    let measure = layout.measure();
    let cycle = (0..4)
        .map(|t| {
            let (basis, offs) = DIAMOND_TEMPLATES[t];
            let mut layers = [Vec::new(), Vec::new()];
            for g in layout.gauges.iter().filter(|g| g.template == t) {
                let m = g.measure;
                for (k, o) in offs.iter().enumerate() {
                    let dq = idx((m.0 + o.0, m.1 + o.1));
                    layers[k].push(match basis {
                        Basis::Z => (dq, idx(m)),
                        Basis::X => (idx(m), dq),
                    });
                }
            }
            for l in layers.iter_mut() {
                l.sort();
            }
            let (mut mz, mut mx) = (Vec::new(), Vec::new());
            for &m in &measure {
                let role = layout.qubits[layout.index_of(m).unwrap()].role;
                let b = match role {
                    Role::MeasureZ => Basis::Z,
                    Role::MeasureX => Basis::X,
                    _ => basis,
                };
                match b {
                    Basis::Z => mz.push(idx(m)),
                    Basis::X => mx.push(idx(m)),
                }
            }
            mz.sort();
            mx.sort();
            let [cx_a, cx_b] = layers;
            RoundTemplate {
                cx_a,
                cx_b,
                reset_z: mz.clone(),
                reset_x: mx.clone(),
                measure_z: mz,
                measure_x: mx,
            }
        })
        .collect();
    RoundSchedule { cycle }
}

/// Template of the first measurement layer. The cycle starts at template 0 when the final
/// template still allows a transversal readout in `basis` (templates 2 and 3 for X, 0 and 1 for
/// Z); otherwise the phase is shifted so the final template is 3 (X) or 1 (Z).
pub fn start_template(basis: Basis, rounds: usize) -> usize {
    let last_from_zero = (rounds - 1) % 4;
    let (allowed, top) = match basis {
        Basis::X => ([2, 3], 3),
        Basis::Z => ([0, 1], 1),
    };
    if allowed.contains(&last_from_zero) {
        0
    } else {
        (top + 4 - last_from_zero) % 4
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannedDetector {
    pub coords: [f64; 3],
    /// (measurement layer, qubit index) events whose parity is the detector.
    pub events: Vec<(usize, u32)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorPlan {
    pub start: usize,
    pub layers: Vec<Vec<PlannedDetector>>,
    pub observable: Vec<(usize, u32)>,
}

#[derive(Clone, Debug)]
struct Value {
    recs: Vec<usize>,
    syms: Vec<u32>,
}

/// Detector construction by gauge tracking in the mid-cycle frame.
///
/// Every distinct measured operator (a gauge triangle, or a bare measure qubit) and the logical
/// operator are tracked with their current value: an XOR of measurement events plus unknown
/// random symbols. Measuring an operator with no unknown symbols yields a detector; otherwise
/// one symbol is solved for. Operators anticommuting with a measured one pick up a fresh shared
/// symbol, and resets flip the values of operators that anticommute with the reset correction.
/// After the last layer, operators whose forward image is a product of final single-qubit
/// measurements give the closing detectors and the observable.
pub fn detector_rule(
    layout: &Layout,
    schedule: &RoundSchedule,
    basis: Basis,
    rounds: usize,
) -> Result<DetectorPlan> {
    let n = layout.num_qubits();
    let measure: Vec<u32> = layout
        .measure()
        .iter()
        .map(|&c| layout.index_of(c).unwrap() as u32)
        .collect();
    let data: Vec<u32> = layout
        .data()
        .iter()
        .map(|&c| layout.index_of(c).unwrap() as u32)
        .collect();
    let start = start_template(basis, rounds);
    let cyc = &schedule.cycle;

    let apply = |p: &mut Pauli, layer: &[(u32, u32)]| {
        for &(c, t) in layer {
            p.conj_cx(c as usize, t as usize);
        }
    };
    let mbasis = |m: u32, t: usize| cyc[t].measure_basis(m).expect("measure qubit in every template");
    let measured_op = |m: u32, t: usize| {
        let mut p = Pauli::single(n, m as usize, mbasis(m, t));
        apply(&mut p, &cyc[t].cx_b);
        apply(&mut p, &cyc[t].cx_a);
        p
    };

    // Tracked operators, with the measure qubit that first produced each one.
    let mut ops: Vec<Pauli> = Vec::new();
    let mut owner: Vec<u32> = Vec::new();
    let mut op_index: HashMap<Pauli, usize> = HashMap::new();
    let mut op_of = vec![vec![0usize; n]; 4];
    for (t, row) in op_of.iter_mut().enumerate() {
        for &m in &measure {
            let p = measured_op(m, t);
            let k = *op_index.entry(p.clone()).or_insert_with(|| {
                ops.push(p);
                owner.push(m);
                ops.len() - 1
            });
            row[m as usize] = k;
        }
    }
    let logical_idx: Vec<usize> = layout
        .logical(basis)
        .iter()
        .map(|&c| layout.index_of(c).unwrap())
        .collect();
    let logical = ops.len();
    ops.push(Pauli::uniform(n, &logical_idx, basis));
    owner.push(u32::MAX);
    let nops = ops.len();

    let anti: Vec<Vec<usize>> = (0..nops)
        .map(|i| (0..nops).filter(|&j| ops[i].anticommutes(&ops[j])).collect())
        .collect();
    let correction_hits = |m: u32, b: Basis| -> Vec<usize> {
        let c = Pauli::single(n, m as usize, b.other());
        (0..nops).filter(|&j| ops[j].anticommutes(&c)).collect()
    };
    let mut corr_cache: HashMap<(u32, Basis), Vec<usize>> = HashMap::new();

    // Initial values: which initial stabilizer generators each operator anticommutes with.
    let prev = (start + 3) % 4;
    let mut tab = Tableau::new(n, 1);
    if basis == Basis::X {
        for &q in &data {
            tab.h(q as usize);
        }
    }
    for &m in &measure {
        if mbasis(m, prev) == Basis::X {
            tab.h(m as usize);
        }
    }
    for layer in [&cyc[prev].cx_b, &cyc[prev].cx_a] {
        for &(c, t) in layer.iter() {
            tab.cx(c as usize, t as usize);
        }
    }
    let gens = tab.stabilizers();
    let mut vals: Vec<Value> = ops
        .iter()
        .map(|p| Value {
            recs: Vec::new(),
            syms: (0..n as u32)
                .filter(|&i| p.anticommutes(&gens[i as usize]))
                .collect(),
        })
        .collect();
    let mut next_sym = n as u32;

    // Events are numbered in (layer, measure order); `events[r]` names event r.
    let mut events: Vec<(usize, u32)> = Vec::new();
    let mut layers: Vec<Vec<PlannedDetector>> = Vec::with_capacity(rounds);
    let mut observable = None;
    let coord = |q: u32| layout.qubits[q as usize].coord;

    for k in 0..rounds {
        let t = (start + k) % 4;
        let mut dets = Vec::new();
        let mut current = Vec::with_capacity(measure.len());
        for &m in &measure {
            let o = op_of[t][m as usize];
            let r = events.len();
            events.push((k, m));
            current.push((m, o, r));
            if vals[o].syms.is_empty() {
                let recs = xor_sorted(&vals[o].recs, &[r]);
                let c = coord(m);
                dets.push(PlannedDetector {
                    coords: [c.0 as f64, c.1 as f64, k as f64],
                    events: recs.iter().map(|&e| events[e]).collect(),
                });
            } else {
                let s = *vals[o].syms.iter().max().unwrap();
                let sub_recs = xor_sorted(&vals[o].recs, &[r]);
                let sub_syms = xor_sorted(&vals[o].syms, &[s]);
                for v in vals.iter_mut() {
                    if v.syms.binary_search(&s).is_ok() {
                        v.recs = xor_sorted(&v.recs, &sub_recs);
                        v.syms = xor_sorted(&xor_sorted(&v.syms, &sub_syms), &[s]);
                    }
                }
                let w = next_sym;
                next_sym += 1;
                for &j in &anti[o] {
                    vals[j].syms = xor_sorted(&vals[j].syms, &[w]);
                }
            }
            vals[o] = Value {
                recs: vec![r],
                syms: Vec::new(),
            };
        }
        if k + 1 < rounds {
            for &(m, _, r) in &current {
                let b = mbasis(m, t);
                let hits = corr_cache.entry((m, b)).or_insert_with(|| correction_hits(m, b));
                for &j in hits.iter() {
                    vals[j].recs = xor_sorted(&vals[j].recs, &[r]);
                }
            }
            layers.push(dets);
            continue;
        }

        // Final layer: measure qubits in their template basis and all data in `basis`.
        let mut final_basis: HashMap<u32, (Basis, usize)> = HashMap::new();
        for &(m, _, r) in &current {
            final_basis.insert(m, (mbasis(m, t), r));
        }
        for &q in &data {
            let r = events.len();
            events.push((k, q));
            final_basis.insert(q, (basis, r));
        }
        let measured_now: Vec<usize> = current.iter().map(|&(_, o, _)| o).collect();
        let mut closing: Vec<(usize, PlannedDetector)> = Vec::new();
        for (j, p) in ops.iter().enumerate() {
            if measured_now.contains(&j) {
                continue;
            }
            let mut img = p.clone();
            apply(&mut img, &cyc[t].cx_a);
            apply(&mut img, &cyc[t].cx_b);
            let mut recs = Vec::new();
            let mut readable = true;
            for q in img.support() {
                let b = match img.at(q) {
                    (true, false) => Basis::X,
                    (false, true) => Basis::Z,
                    _ => {
                        readable = false;
                        break;
                    }
                };
                match final_basis.get(&(q as u32)) {
                    Some(&(fb, r)) if fb == b => recs.push(r),
                    _ => {
                        readable = false;
                        break;
                    }
                }
            }
            if !readable || !vals[j].syms.is_empty() {
                continue;
            }
            recs.sort_unstable();
            let total = xor_sorted(&recs, &vals[j].recs);
            if j == logical {
                observable = Some(total.iter().map(|&e| events[e]).collect::<Vec<_>>());
                continue;
            }
            let c = coord(owner[j]);
            let key = *total.iter().max().unwrap_or(&0);
            closing.push((
                key,
                PlannedDetector {
                    coords: [c.0 as f64, c.1 as f64, k as f64],
                    events: total.iter().map(|&e| events[e]).collect(),
                },
            ));
        }
        closing.sort_by_key(|(key, _)| *key);
        dets.extend(closing.into_iter().map(|(_, d)| d));
        layers.push(dets);
    }
    let observable =
        observable.ok_or_else(|| Error::DetectorRule("logical operator is not read out".into()))?;
    Ok(DetectorPlan {
        start,
        layers,
        observable,
    })
}

pub(super) fn build(layout: &Layout, basis: Basis, rounds: usize) -> Result<Circuit> {
    let schedule = diamond_schedule(layout);
    let plan = detector_rule(layout, &schedule, basis, rounds)?;
    let cyc = &schedule.cycle;
    let data: Vec<u32> = (0..layout.num_qubits() as u32)
        .filter(|&q| layout.qubits[q as usize].role == Role::Data)
        .collect();

    let mut b = CircuitBuilder::new();
    declare_layout(&mut b, layout);
    for g in &layout.gauges {
        let color = match g.pauli {
            Basis::Z => [0.0, 0.0, 1.0, 0.25],
            Basis::X => [1.0, 0.0, 0.0, 0.25],
        };
        let offs = DIAMOND_TEMPLATES[g.template].1;
        let m = g.measure;
        let tri = [
            layout.index_of((m.0 + offs[0].0, m.1 + offs[0].1)).unwrap() as u32,
            layout.index_of(m).unwrap() as u32,
            layout.index_of((m.0 + offs[1].0, m.1 + offs[1].1)).unwrap() as u32,
        ];
        b.polygon(color, &tri);
    }
    b.tick();

    // record index per (layer, qubit)
    let mut record: HashMap<(usize, u32), usize> = HashMap::new();
    for k in 0..rounds {
        let t = (plan.start + k) % 4;
        let p = (t + 3) % 4;
        if k == 0 {
            let mut rz: Vec<u32> = cyc[p].reset_z.clone();
            let mut rx: Vec<u32> = cyc[p].reset_x.clone();
            match basis {
                Basis::Z => rz.extend(&data),
                Basis::X => rx.extend(&data),
            }
            rz.sort();
            rx.sort();
            b.reset(Basis::Z, &rz);
            b.reset(Basis::X, &rx);
        } else {
            b.reset(Basis::Z, &cyc[p].reset_z);
            b.reset(Basis::X, &cyc[p].reset_x);
        }
        for layer in [&cyc[p].cx_b, &cyc[p].cx_a, &cyc[t].cx_a, &cyc[t].cx_b] {
            b.tick();
            b.cx(layer);
        }
        b.tick();
        let mut mz = cyc[t].measure_z.clone();
        let mut mx = cyc[t].measure_x.clone();
        if k + 1 == rounds {
            match basis {
                Basis::Z => mz.extend(&data),
                Basis::X => mx.extend(&data),
            }
            mz.sort();
            mx.sort();
        }
        let first = b.measure(Basis::Z, &mz);
        for (i, &q) in mz.iter().enumerate() {
            record.insert((k, q), first + i);
        }
        let first = b.measure(Basis::X, &mx);
        for (i, &q) in mx.iter().enumerate() {
            record.insert((k, q), first + i);
        }
        for det in &plan.layers[k] {
            let mut recs: Vec<usize> = det.events.iter().map(|e| record[e]).collect();
            recs.sort_unstable_by(|a, b| b.cmp(a));
            b.detector(&det.coords, &recs);
        }
        if k + 1 < rounds {
            b.tick();
        }
    }
    let mut obs: Vec<usize> = plan.observable.iter().map(|e| record[e]).collect();
    obs.sort_unstable_by(|a, b| b.cmp(a));
    b.observable(0, &obs);
    Ok(b.finish())
}
