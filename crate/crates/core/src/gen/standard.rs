use super::declare_layout;
use crate::circuit::{Basis, Circuit, CircuitBuilder};
use crate::lattice::{Coord, Layout, Role};
use std::collections::HashMap;

// Hook errors from the last two CXs of a check land perpendicular to the matching logical.
const X_ORDER: [Coord; 4] = [(-1, -1), (1, -1), (-1, 1), (1, 1)];
const Z_ORDER: [Coord; 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];

pub(super) fn build(layout: &Layout, basis: Basis, rounds: usize) -> Circuit {
    let idx = |c: Coord| layout.index_of(c).map(|i| i as u32);
    let n = layout.num_qubits() as u32;
    let role = |q: u32| layout.qubits[q as usize].role;
    let data: Vec<u32> = (0..n).filter(|&q| role(q) == Role::Data).collect();
    let anc_z: Vec<u32> = (0..n).filter(|&q| role(q) == Role::MeasureZ).collect();
    let anc_x: Vec<u32> = (0..n).filter(|&q| role(q) == Role::MeasureX).collect();

    let mut layers: Vec<Vec<(u32, u32)>> = vec![Vec::new(); 4];
    let mut support: HashMap<u32, Vec<u32>> = HashMap::new();
    for (q, lq) in layout.qubits.iter().enumerate() {
        let q = q as u32;
        let m = lq.coord;
        let (order, is_x) = match lq.role {
            Role::MeasureX => (X_ORDER, true),
            Role::MeasureZ => (Z_ORDER, false),
            _ => continue,
        };
        for (l, o) in order.iter().enumerate() {
            if let Some(dq) = idx((m.0 + o.0, m.1 + o.1)) {
                layers[l].push(if is_x { (q, dq) } else { (dq, q) });
                support.entry(q).or_default().push(dq);
            }
        }
    }
    for l in layers.iter_mut() {
        l.sort();
    }
    let checked: &[u32] = match basis {
        Basis::Z => &anc_z,
        Basis::X => &anc_x,
    };

    let mut b = CircuitBuilder::new();
    declare_layout(&mut b, layout);
    b.tick();
    let mut last: HashMap<u32, usize> = HashMap::new();
    let coord = |q: u32| {
        let c = layout.qubits[q as usize].coord;
        (c.0 as f64, c.1 as f64)
    };
    for k in 0..rounds {
        if k == 0 {
            let (mut rz, mut rx) = (anc_z.clone(), anc_x.clone());
            match basis {
                Basis::Z => rz.extend(&data),
                Basis::X => rx.extend(&data),
            }
            rz.sort();
            rx.sort();
            b.reset(Basis::Z, &rz);
            b.reset(Basis::X, &rx);
        } else {
            b.reset(Basis::Z, &anc_z);
            b.reset(Basis::X, &anc_x);
        }
        for layer in &layers {
            b.tick();
            b.cx(layer);
        }
        b.tick();
        let final_round = k + 1 == rounds;
        let (mut mz, mut mx) = (anc_z.clone(), anc_x.clone());
        if final_round {
            match basis {
                Basis::Z => mz.extend(&data),
                Basis::X => mx.extend(&data),
            }
            mz.sort();
            mx.sort();
        }
        let mut rec: HashMap<u32, usize> = HashMap::new();
        let first = b.measure(Basis::Z, &mz);
        rec.extend(mz.iter().enumerate().map(|(i, &q)| (q, first + i)));
        let first = b.measure(Basis::X, &mx);
        rec.extend(mx.iter().enumerate().map(|(i, &q)| (q, first + i)));

        for &a in anc_z.iter().chain(&anc_x) {
            let (x, y) = coord(a);
            match last.get(&a) {
                Some(&prev) => b.detector(&[x, y, k as f64], &[rec[&a], prev]),
                None if checked.contains(&a) => b.detector(&[x, y, k as f64], &[rec[&a]]),
                None => {}
            }
        }
        if final_round {
            for &a in checked {
                let mut recs: Vec<usize> = support[&a].iter().map(|q| rec[q]).collect();
                recs.push(rec[&a]);
                recs.sort_unstable_by(|a, b| b.cmp(a));
                let (x, y) = coord(a);
                b.detector(&[x, y, (k + 1) as f64], &recs);
            }
            let mut obs: Vec<usize> = layout
                .logical(basis)
                .iter()
                .map(|&c| rec[&idx(c).unwrap()])
                .collect();
            obs.sort_unstable_by(|a, b| b.cmp(a));
            b.observable(0, &obs);
        } else {
            b.tick();
        }
        for &a in anc_z.iter().chain(&anc_x) {
            last.insert(a, rec[&a]);
        }
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_standard_layout;

    #[test]
    fn one_round_d3() {
        let l = build_standard_layout(3).unwrap();
        let c = build(&l, Basis::Z, 1);
        assert_eq!(c.qubits().len(), 17);
        let layers = c.measurement_layers();
        assert_eq!(layers.len(), 1);
        assert_eq!(layers[0].len(), 8 + 9);
        // 4 initial Z checks, 4 closing Z checks.
        assert_eq!(c.detector_count(), 8);
        assert_eq!(c.observables()[0].len(), 3);
    }

    #[test]
    fn detector_count_over_rounds() {
        let l = build_standard_layout(5).unwrap();
        let c = build(&l, Basis::X, 5);
        assert_eq!(c.detector_count(), 12 + 4 * 24 + 12);
    }
}
