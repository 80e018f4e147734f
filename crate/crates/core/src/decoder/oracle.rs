//! Slow reference decoders for small instances.

use super::graph::MatchingGraph;
use crate::dem::DetectorErrorModel;
use crate::error::{Error, Result};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

pub const MAX_EXHAUSTIVE_MECHANISMS: usize = 25;

/// Most likely observable flips given the syndrome, by enumerating every subset of mechanisms.
/// Returns `None` when no subset produces the syndrome.
pub fn exhaustive_decode(dem: &DetectorErrorModel, syndrome: &[bool]) -> Result<Option<u64>> {
    let m = dem.mechanisms.len();
    if m > MAX_EXHAUSTIVE_MECHANISMS {
        return Err(Error::TooManyMechanisms(m));
    }
    let words = dem.num_detectors.div_ceil(64).max(1);
    let pack = |dets: &[u32]| {
        let mut v = vec![0u64; words];
        for &d in dets {
            v[d as usize / 64] ^= 1 << (d % 64);
        }
        v
    };
    let target = {
        let dets: Vec<u32> = (0..syndrome.len() as u32)
            .filter(|&d| syndrome[d as usize])
            .collect();
        pack(&dets)
    };
    let sy: Vec<Vec<u64>> = dem
        .mechanisms
        .iter()
        .map(|x| pack(&x.symptom.detectors))
        .collect();
    let obs: Vec<u64> = dem
        .mechanisms
        .iter()
        .map(|x| x.symptom.observables.iter().fold(0, |a, &o| a | 1 << o))
        .collect();
    let log_odds: Vec<f64> = dem
        .mechanisms
        .iter()
        .map(|x| (x.probability / (1.0 - x.probability)).ln())
        .collect();

    // Gray-code walk over all subsets; probabilities relative to the empty subset.
    let mut cur = vec![0u64; words];
    let mut cur_obs = 0u64;
    let mut logp = 0.0;
    let mut classes: BTreeMap<u64, f64> = BTreeMap::new();
    let mut chosen = vec![false; m];
    for step in 0..(1u64 << m) {
        if step > 0 {
            let k = step.trailing_zeros() as usize;
            chosen[k] = !chosen[k];
            for (c, s) in cur.iter_mut().zip(&sy[k]) {
                *c ^= s;
            }
            cur_obs ^= obs[k];
            logp += if chosen[k] { log_odds[k] } else { -log_odds[k] };
        }
        if cur == target {
            *classes.entry(cur_obs).or_insert(0.0) += logp.exp();
        }
    }
    Ok(classes
        .into_iter()
        .fold(None, |best: Option<(u64, f64)>, (o, p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((o, p)),
        })
        .map(|b| b.0))
}

/// Exact fixed-point shortest path lengths from `src` avoiding the boundary node as a relay.
fn distances(graph: &MatchingGraph, src: u32) -> Vec<i64> {
    let n = graph.num_detectors + 1;
    let boundary = graph.boundary();
    let mut dist = vec![i64::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = 0;
    heap.push(Reverse((0i64, src)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v as usize] || (v == boundary && v != src) {
            continue;
        }
        for &(u, e) in &graph.adjacency[v as usize] {
            let nd = d + graph.weights[e as usize];
            if nd < dist[u as usize] {
                dist[u as usize] = nd;
                heap.push(Reverse((nd, u)));
            }
        }
    }
    dist
}

/// Minimum total fixed-point weight over all ways to pair the defects or send them to the
/// boundary, by dynamic programming over subsets. `None` if no pairing exists.
pub fn brute_force_min_pairing(graph: &MatchingGraph, defects: &[u32]) -> Option<i64> {
    let k = defects.len();
    assert!(k <= 20, "brute-force pairing is exponential");
    let boundary = graph.boundary() as usize;
    let dist: Vec<Vec<i64>> = defects.iter().map(|&d| distances(graph, d)).collect();
    let pair = |i: usize, j: usize| dist[i][defects[j] as usize];
    let full = (1usize << k) - 1;
    let mut best = vec![i64::MAX; 1 << k];
    best[0] = 0;
    for mask in 1..=full {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut b = i64::MAX;
        let bd = dist[i][boundary];
        if bd != i64::MAX && best[rest] != i64::MAX {
            b = b.min(bd + best[rest]);
        }
        let mut r = rest;
        while r != 0 {
            let j = r.trailing_zeros() as usize;
            r &= r - 1;
            let d = pair(i, j);
            let sub = best[rest & !(1 << j)];
            if d != i64::MAX && sub != i64::MAX {
                b = b.min(d + sub);
            }
        }
        best[mask] = b;
    }
    (best[full] != i64::MAX).then_some(best[full])
}
