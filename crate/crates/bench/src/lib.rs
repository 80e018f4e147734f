//! Fixtures shared by the criterion benches.

use diamond_core::decoder::{build_matching_graph, MatchingGraph};
use diamond_core::dem::graphlike_dem;
use diamond_core::gen::{build_memory_circuit, ExperimentSpec};
use diamond_core::noise::{apply_si1000, NoiseParams, NoisyCircuit};
use diamond_core::sim::sample;
use diamond_core::{Basis, Family};

pub fn noisy(family: Family, d: usize, p: f64) -> NoisyCircuit {
    let c = build_memory_circuit(&ExperimentSpec::protocol(family, d, Basis::Z)).expect("valid spec");
    apply_si1000(c, NoiseParams::si1000(p)).expect("valid p")
}

/// Matching graph plus the defect lists of `shots` sampled shots.
pub fn decoding_workload(family: Family, d: usize, p: f64, shots: usize) -> (MatchingGraph, Vec<Vec<u32>>) {
    let n = noisy(family, d, p);
    let graph = build_matching_graph(&graphlike_dem(&n).expect("decomposable")).expect("graph");
    let batch = sample(&n, shots, 1).expect("sampler");
    let defects = (0..shots)
        .map(|s| batch.detectors.ones(s).into_iter().map(|x| x as u32).collect())
        .collect();
    (graph, defects)
}
