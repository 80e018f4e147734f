use super::blossom::min_weight_perfect_matching;
use super::graph::{fixed_weight, MatchingGraph, WEIGHT_SCALE};
use crate::dem::combine;
use crate::error::{Error, Result};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

const NONE: u32 = u32::MAX;
const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecodeResult {
    /// Predicted observable flips as a bit mask.
    pub observables: u64,
    /// Graph edges on the matched paths (edges used an even number of times cancel).
    pub edges: Vec<usize>,
    /// Sum of the matched path weights.
    pub weight: f64,
    /// Matched defect pairs; `None` marks a boundary match.
    pub pairs: Vec<(u32, Option<u32>)>,
}

impl DecodeResult {
    pub fn flips(&self, num_observables: usize) -> Vec<bool> {
        (0..num_observables)
            .map(|k| self.observables >> k & 1 == 1)
            .collect()
    }
}

/// Reusable decoding workspace bound to one graph.
pub struct Matcher<'g> {
    graph: &'g MatchingGraph,
    dist: Vec<i64>,
    pred: Vec<u32>,
    mask: Vec<u64>,
    touched: Vec<u32>,
    defect_slot: Vec<u32>,
    boundary_dist: Vec<i64>,
    boundary_mask: Vec<u64>,
}

struct Candidate {
    i: usize,
    j: usize,
    dist: i64,
    mask: u64,
}

impl<'g> Matcher<'g> {
    pub fn new(graph: &'g MatchingGraph) -> Self {
        let n = graph.num_detectors + 1;
        let mut m = Matcher {
            graph,
            dist: vec![INF; n],
            pred: vec![NONE; n],
            mask: vec![0; n],
            touched: Vec::new(),
            defect_slot: vec![NONE; n],
            boundary_dist: Vec::new(),
            boundary_mask: Vec::new(),
        };
        // Distances to the boundary under the graph's own weights, shared by every shot.
        m.run(graph.boundary(), &graph.weights, INF, true, |_, _| false);
        m.boundary_dist = m.dist.clone();
        m.boundary_mask = m.mask.clone();
        m.reset();
        m
    }

    pub fn graph(&self) -> &MatchingGraph {
        self.graph
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v as usize] = INF;
            self.pred[v as usize] = NONE;
            self.mask[v as usize] = 0;
        }
        self.touched.clear();
    }

    /// Dijkstra from `src`, never expanding through the boundary unless `through_boundary`.
    /// `stop` is called on every settled node and ends the search when it returns true.
    fn run(
        &mut self,
        src: u32,
        weights: &[i64],
        radius: i64,
        through_boundary: bool,
        mut stop: impl FnMut(u32, i64) -> bool,
    ) {
        self.reset();
        let boundary = self.graph.boundary();
        let mut heap = BinaryHeap::new();
        self.dist[src as usize] = 0;
        self.touched.push(src);
        heap.push(Reverse((0i64, src)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > self.dist[v as usize] {
                continue;
            }
            if d > radius || stop(v, d) {
                break;
            }
            if v == boundary && v != src && !through_boundary {
                continue;
            }
            for &(u, e) in &self.graph.adjacency[v as usize] {
                let nd = d + weights[e as usize];
                if nd < self.dist[u as usize] {
                    if self.dist[u as usize] == INF {
                        self.touched.push(u);
                    }
                    self.dist[u as usize] = nd;
                    self.pred[u as usize] = e;
                    self.mask[u as usize] = self.mask[v as usize] ^ self.graph.edges[e as usize].observables;
                    heap.push(Reverse((nd, u)));
                }
            }
        }
    }

    /// Edges on the settled shortest path from the last search source to `v`.
    fn path_to(&self, mut v: u32) -> Vec<usize> {
        let mut out = Vec::new();
        while self.pred[v as usize] != NONE {
            let e = self.pred[v as usize] as usize;
            out.push(e);
            let ed = &self.graph.edges[e];
            v = if ed.a == v { ed.b } else { ed.a };
        }
        out
    }

    pub fn decode_syndrome(&mut self, syndrome: &[bool]) -> Result<DecodeResult> {
        let defects: Vec<u32> = syndrome
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32)
            .collect();
        self.decode(&defects)
    }

    /// Exact minimum-weight matching of `defects` (sorted detector indices).
    pub fn decode(&mut self, defects: &[u32]) -> Result<DecodeResult> {
        let w = self.graph.weights.clone();
        self.decode_with(defects, &w, true, true)
    }

    /// Prediction only; skips path recovery.
    pub fn predict(&mut self, defects: &[u32]) -> Result<u64> {
        let w = self.graph.weights.clone();
        Ok(self.decode_with(defects, &w, true, false)?.observables)
    }

    fn decode_with(
        &mut self,
        defects: &[u32],
        weights: &[i64],
        base_weights: bool,
        want_edges: bool,
    ) -> Result<DecodeResult> {
        let k = defects.len();
        if k == 0 {
            return Ok(DecodeResult::default());
        }
        let boundary = self.graph.boundary();
        // Boundary distances.
        let mut bd = vec![INF; k];
        let mut bm = vec![0u64; k];
        for (i, &d) in defects.iter().enumerate() {
            if base_weights {
                bd[i] = self.boundary_dist[d as usize];
                bm[i] = self.boundary_mask[d as usize];
            } else {
                self.run(d, weights, INF, false, |v, _| v == boundary);
                bd[i] = self.dist[boundary as usize];
                bm[i] = self.mask[boundary as usize];
            }
        }
        let bmax = bd.iter().copied().filter(|&b| b < INF).max().unwrap_or(0);
        // Candidate pairs: only those cheaper than sending both defects to the boundary.
        for (i, &d) in defects.iter().enumerate() {
            self.defect_slot[d as usize] = i as u32;
        }
        let slots = std::mem::take(&mut self.defect_slot);
        let mut cands: Vec<Candidate> = Vec::new();
        for i in 0..k {
            let radius = if bd[i] >= INF { INF } else { bd[i] + bmax };
            let mut hits = Vec::new();
            self.run(defects[i], weights, radius, false, |v, dist| {
                let s = slots[v as usize];
                if s != NONE && s as usize > i {
                    hits.push((s as usize, dist));
                }
                false
            });
            for (j, dist) in hits {
                if dist < bd[i].saturating_add(bd[j]) {
                    cands.push(Candidate {
                        i,
                        j,
                        dist,
                        mask: self.mask[defects[j] as usize],
                    });
                }
            }
        }
        self.defect_slot = slots;
        for &d in defects {
            self.defect_slot[d as usize] = NONE;
        }

        // Clusters of defects joined by candidate pairs solve independently.
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let n = p[y];
                p[y] = r;
                y = n;
            }
            r
        }
        for c in &cands {
            let (a, b) = (find(&mut parent, c.i), find(&mut parent, c.j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..k {
            let r = find(&mut parent, i);
            clusters.entry(r).or_default().push(i);
        }
        let mut by_cluster: BTreeMap<usize, Vec<&Candidate>> = BTreeMap::new();
        for c in &cands {
            by_cluster.entry(find(&mut parent, c.i)).or_default().push(c);
        }

        let mut result = DecodeResult::default();
        let mut total: i64 = 0;
        for (root, members) in &clusters {
            let local: BTreeMap<usize, usize> = members.iter().enumerate().map(|(l, &g)| (g, l)).collect();
            let c = members.len();
            let pairs: Vec<(usize, Option<usize>, i64, u64)> = if c == 1 {
                let i = members[0];
                if bd[i] >= INF {
                    return Err(Error::UnmatchableSyndrome);
                }
                vec![(i, None, bd[i], bm[i])]
            } else {
                let mut edges: Vec<(usize, usize, i64)> = Vec::new();
                let mut info: Vec<(usize, Option<usize>, i64, u64)> = Vec::new();
                let mut edge_info: Vec<usize> = Vec::new();
                for cand in by_cluster.get(root).into_iter().flatten() {
                    edges.push((local[&cand.i], local[&cand.j], cand.dist));
                    edge_info.push(info.len());
                    info.push((cand.i, Some(cand.j), cand.dist, cand.mask));
                }
                let with_boundary: Vec<usize> = (0..c).filter(|&l| bd[members[l]] < INF).collect();
                for &l in &with_boundary {
                    let g = members[l];
                    edges.push((l, c + l, bd[g]));
                    edge_info.push(info.len());
                    info.push((g, None, bd[g], bm[g]));
                }
                for (x, &a) in with_boundary.iter().enumerate() {
                    for &b in &with_boundary[x + 1..] {
                        edges.push((c + a, c + b, 0));
                        edge_info.push(usize::MAX);
                    }
                }
                let n = c + with_boundary.len();
                // Twins of defects without a boundary route are simply absent; renumber.
                let mut twin_index = vec![usize::MAX; c];
                for (x, &l) in with_boundary.iter().enumerate() {
                    twin_index[l] = c + x;
                }
                let fix = |v: usize| if v < c { v } else { twin_index[v - c] };
                let edges: Vec<(usize, usize, i64)> =
                    edges.iter().map(|&(a, b, w)| (fix(a), fix(b), w)).collect();
                let mate = min_weight_perfect_matching(n, &edges).ok_or(Error::UnmatchableSyndrome)?;
                let mut out = Vec::new();
                for (ei, &(a, b, _)) in edges.iter().enumerate() {
                    if mate[a] == b && edge_info[ei] != usize::MAX {
                        out.push(info[edge_info[ei]]);
                    }
                }
                out
            };
            for (i, j, dist, mask) in pairs {
                total += dist;
                result.observables ^= mask;
                result.pairs.push((defects[i], j.map(|j| defects[j])));
                if want_edges {
                    let target = j.map_or(boundary, |j| defects[j]);
                    self.run(defects[i], weights, INF, false, |v, _| v == target);
                    result.edges.extend(self.path_to(target));
                }
            }
        }
        if want_edges {
            result.edges.sort_unstable();
            let mut kept = Vec::new();
            for e in result.edges.drain(..) {
                if kept.last() == Some(&e) {
                    kept.pop();
                } else {
                    kept.push(e);
                }
            }
            result.edges = kept;
        }
        result.pairs.sort_unstable();
        result.weight = total as f64 / WEIGHT_SCALE;
        Ok(result)
    }

    /// Decodes once, promotes edges correlated with the edges that first matching used, and
    /// decodes again with the promoted weights.
    pub fn decode_two_pass(&mut self, defects: &[u32]) -> Result<DecodeResult> {
        let w = self.graph.weights.clone();
        let first = self.decode_with(defects, &w, true, true)?;
        if self.graph.links.is_empty() || first.edges.is_empty() {
            return Ok(first);
        }
        let reweighted = reweight(self.graph, &first.edges);
        if reweighted.is_empty() {
            return Ok(first);
        }
        let mut w2 = w;
        for (e, q) in reweighted {
            w2[e] = fixed_weight(q);
        }
        self.decode_with(defects, &w2, false, true)
    }
}

/// Probability that a linked mechanism fired given that one of its edges fired, where the edge
/// has total probability `edge_q` and the mechanism contributes `link_q` to it.
pub fn conditional_link_probability(link_q: f64, edge_q: f64) -> f64 {
    let rest = remove_contribution(edge_q, link_q);
    if rest <= 0.0 {
        return 1.0;
    }
    let odds = rest / (1.0 - rest);
    link_q / (link_q + (1.0 - link_q) * odds)
}

/// Inverse of XOR-combination: the probability left after removing an independent `part`.
fn remove_contribution(total: f64, part: f64) -> f64 {
    ((total - part) / (1.0 - 2.0 * part)).max(0.0)
}

/// New probabilities for edges correlated with `used` edges.
pub fn reweight(graph: &MatchingGraph, used: &[usize]) -> BTreeMap<usize, f64> {
    let mut boost: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    for &e in used {
        for &li in &graph.edge_links[e] {
            let link = &graph.links[li];
            let c = conditional_link_probability(link.probability, graph.edges[e].probability);
            for &f in &link.edges {
                if f != e {
                    let slot = boost.entry(f).or_default().entry(li).or_insert(0.0);
                    *slot = slot.max(c);
                }
            }
        }
    }
    boost
        .into_iter()
        .map(|(f, links)| {
            let mut q = graph.edges[f].probability;
            for (li, c) in links {
                let base = remove_contribution(q, graph.links[li].probability);
                q = combine(base, c);
            }
            (f, q)
        })
        .collect()
}

/// One-shot convenience over a boolean syndrome.
pub fn decode(graph: &MatchingGraph, syndrome: &[bool]) -> Result<DecodeResult> {
    Matcher::new(graph).decode_syndrome(syndrome)
}

pub fn decode_two_pass(graph: &MatchingGraph, syndrome: &[bool]) -> Result<DecodeResult> {
    let defects: Vec<u32> = syndrome
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u32)
        .collect();
    Matcher::new(graph).decode_two_pass(&defects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::build_matching_graph;
    use crate::dem::{DetectorErrorModel, ErrorMechanism, Symptom};
    use approx::assert_relative_eq;

    fn sym(d: &[u32], o: &[u32]) -> Symptom {
        Symptom {
            detectors: d.to_vec(),
            observables: o.to_vec(),
        }
    }

    fn dem(mechs: Vec<ErrorMechanism>, nd: usize) -> DetectorErrorModel {
        DetectorErrorModel {
            mechanisms: mechs,
            num_detectors: nd,
            num_observables: 1,
            graphlike: true,
            detector_basis: vec![None; nd],
            detector_coords: vec![vec![]; nd],
        }
    }

    fn mech(p: f64, d: &[u32], o: &[u32]) -> ErrorMechanism {
        ErrorMechanism {
            probability: p,
            symptom: sym(d, o),
            components: vec![],
            parts: vec![],
        }
    }

    /// Repetition-code chain B - 0 - 1 - 2 - 3 - B with the logical on the left boundary edge.
    fn chain() -> MatchingGraph {
        build_matching_graph(&dem(
            vec![
                mech(0.1, &[0], &[0]),
                mech(0.1, &[0, 1], &[]),
                mech(0.1, &[1, 2], &[]),
                mech(0.1, &[2, 3], &[]),
                mech(0.1, &[3], &[]),
            ],
            4,
        ))
        .unwrap()
    }

    #[test]
    fn zero_syndrome() {
        let g = chain();
        let r = decode(&g, &[false; 4]).unwrap();
        assert_eq!(r, DecodeResult::default());
    }

    #[test]
    fn chain_cases() {
        let g = chain();
        let mut m = Matcher::new(&g);
        assert_eq!(m.decode(&[0]).unwrap().observables, 1);
        assert_eq!(m.decode(&[3]).unwrap().observables, 0);
        let r = m.decode(&[0, 1]).unwrap();
        assert_eq!(r.pairs, vec![(0, Some(1))]);
        assert_eq!(r.observables, 0);
        // Two defects far apart: each goes to its nearest boundary.
        let r = m.decode(&[0, 3]).unwrap();
        assert_eq!(r.pairs, vec![(0, None), (3, None)]);
        assert_eq!(r.observables, 1);
        assert_eq!(r.edges.len(), 2);
        assert_relative_eq!(r.weight, 2.0 * 9f64.ln(), epsilon = 1e-3);
    }

    #[test]
    fn reweighting_formula() {
        // Y-like mechanism linking edge {0,1} with edge {2,3}.
        let mut y = mech(0.05, &[0, 1, 2, 3], &[]);
        y.parts = vec![sym(&[0, 1], &[]), sym(&[2, 3], &[])];
        let d = dem(
            vec![
                mech(0.01, &[0, 1], &[]),
                mech(0.02, &[2, 3], &[]),
                y,
                mech(0.01, &[0], &[]),
                mech(0.01, &[3], &[]),
            ],
            4,
        );
        let g = build_matching_graph(&d).unwrap();
        let e01 = g.edge_between(0, 1, 0).unwrap();
        let e23 = g.edge_between(2, 3, 0).unwrap();
        let q01 = g.edges[e01].probability;
        let q23 = g.edges[e23].probability;
        assert_relative_eq!(q01, combine(0.01, 0.05));
        let new = reweight(&g, &[e01]);
        let r = 0.01 / 0.99;
        let cond = 0.05 / (0.05 + 0.95 * r);
        assert_relative_eq!(new[&e23], combine(0.02, cond), epsilon = 1e-12);
        assert_relative_eq!(conditional_link_probability(0.05, q01), cond, epsilon = 1e-12);
        assert!(new[&e23] > q23);
        assert_eq!(new.len(), 1);
    }

    #[test]
    fn uncorrelated_two_pass_is_single_pass() {
        let g = chain();
        let mut m = Matcher::new(&g);
        for defects in [vec![0], vec![1, 2], vec![0, 2], vec![0, 1, 2, 3]] {
            assert_eq!(
                m.decode_two_pass(&defects).unwrap().observables,
                m.decode(&defects).unwrap().observables
            );
        }
    }
}
