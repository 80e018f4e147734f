//! Matching decoders over graphlike detector error models.

pub mod blossom;
mod graph;
mod matcher;
pub mod oracle;

pub use graph::{build_matching_graph, weight_of, Edge, Link, MatchingGraph, WEIGHT_SCALE};
pub use matcher::{conditional_link_probability, decode, decode_two_pass, reweight, DecodeResult, Matcher};
pub use oracle::{brute_force_min_pairing, exhaustive_decode};
