use crate::dem::{combine, DetectorErrorModel};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// Fixed-point scale for edge weights.
pub const WEIGHT_SCALE: f64 = 10_000.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub a: u32,
    /// Equal to the graph's boundary node for boundary edges.
    pub b: u32,
    pub probability: f64,
    /// Observable flips as a bit mask.
    pub observables: u64,
    /// Mechanisms contributing to this edge.
    pub sources: Vec<usize>,
}

/// A set of edges that one decomposed mechanism flips together.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub edges: Vec<usize>,
    pub probability: f64,
}

#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub num_detectors: usize,
    pub edges: Vec<Edge>,
    pub links: Vec<Link>,
    /// Links each edge takes part in.
    pub edge_links: Vec<Vec<usize>>,
    pub(crate) adjacency: Vec<Vec<(u32, u32)>>,
    pub(crate) weights: Vec<i64>,
}

pub fn weight_of(q: f64) -> f64 {
    ((1.0 - q) / q).ln()
}

pub(crate) fn fixed_weight(q: f64) -> i64 {
    if q >= 0.5 {
        0
    } else {
        (weight_of(q) * WEIGHT_SCALE).round() as i64
    }
}

impl MatchingGraph {
    pub fn boundary(&self) -> u32 {
        self.num_detectors as u32
    }

    pub fn weight(&self, e: usize) -> f64 {
        weight_of(self.edges[e].probability)
    }

    pub fn edge_between(&self, a: u32, b: u32, observables: u64) -> Option<usize> {
        self.adjacency
            .get(a as usize)?
            .iter()
            .map(|&(_, e)| e as usize)
            .find(|&e| {
                let ed = &self.edges[e];
                ((ed.a, ed.b) == (a, b) || (ed.a, ed.b) == (b, a)) && ed.observables == observables
            })
    }
}

/// One edge per distinct (endpoints, observable mask); parallel contributions are XOR-combined.
pub fn build_matching_graph(dem: &DetectorErrorModel) -> Result<MatchingGraph> {
    if dem.num_observables > 64 {
        return Err(Error::InvalidSpec("at most 64 observables are supported".into()));
    }
    let boundary = dem.num_detectors as u32;
    let mut edges: Vec<Edge> = Vec::new();
    let mut index: HashMap<(u32, u32, u64), usize> = HashMap::new();
    let mut links = Vec::new();
    for (mi, m) in dem.mechanisms.iter().enumerate() {
        let mut ids = Vec::new();
        for part in m.graph_parts() {
            let (a, b) = match part.detectors[..] {
                [a] => (a, boundary),
                [a, b] => (a, b),
                [] => continue,
                _ => return Err(Error::Undecomposable(part.to_string())),
            };
            let mask = part.observables.iter().fold(0u64, |acc, &o| acc | 1 << o);
            let id = *index.entry((a, b, mask)).or_insert_with(|| {
                edges.push(Edge {
                    a,
                    b,
                    probability: 0.0,
                    observables: mask,
                    sources: Vec::new(),
                });
                edges.len() - 1
            });
            let e = &mut edges[id];
            e.probability = combine(e.probability, m.probability);
            e.sources.push(mi);
            ids.push(id);
        }
        if ids.len() > 1 {
            links.push(Link {
                edges: ids,
                probability: m.probability,
            });
        }
    }
    for e in &edges {
        if e.probability >= 0.5 {
            return Err(Error::BadProbability(e.probability));
        }
    }
    let mut adjacency = vec![Vec::new(); dem.num_detectors + 1];
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.a as usize].push((e.b, i as u32));
        adjacency[e.b as usize].push((e.a, i as u32));
    }
    let mut edge_links = vec![Vec::new(); edges.len()];
    for (li, l) in links.iter().enumerate() {
        for &e in &l.edges {
            edge_links[e].push(li);
        }
    }
    let weights = edges.iter().map(|e| fixed_weight(e.probability)).collect();
    Ok(MatchingGraph {
        num_detectors: dem.num_detectors,
        edges,
        links,
        edge_links,
        adjacency,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dem::{ErrorMechanism, Symptom};
    use approx::assert_relative_eq;

    pub(crate) fn toy_dem(mechs: &[(f64, &[u32], &[u32])], nd: usize) -> DetectorErrorModel {
        DetectorErrorModel {
            mechanisms: mechs
                .iter()
                .map(|&(p, d, o)| ErrorMechanism {
                    probability: p,
                    symptom: Symptom {
                        detectors: d.to_vec(),
                        observables: o.to_vec(),
                    },
                    components: vec![],
                    parts: vec![],
                })
                .collect(),
            num_detectors: nd,
            num_observables: 1,
            graphlike: true,
            detector_basis: vec![None; nd],
            detector_coords: vec![vec![]; nd],
        }
    }

    #[test]
    fn empty_model() {
        let g = build_matching_graph(&toy_dem(&[], 0)).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.boundary(), 0);
    }

    #[test]
    fn single_edge_weight() {
        let g = build_matching_graph(&toy_dem(&[(0.1, &[0, 1], &[])], 2)).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_relative_eq!(g.weight(0), 9f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(g.weight(0), 2.197, epsilon = 1e-3);
    }

    #[test]
    fn parallel_edges_merge() {
        let g = build_matching_graph(&toy_dem(&[(0.1, &[0, 1], &[]), (0.1, &[0, 1], &[])], 2)).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_relative_eq!(g.edges[0].probability, 0.18);
        assert!(build_matching_graph(&toy_dem(&[(0.6, &[0], &[])], 1)).is_err());
    }
}
