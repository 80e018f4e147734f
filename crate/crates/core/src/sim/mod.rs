//! Circuit execution: symbolic tableau for verification, Pauli-frame sampling for Monte Carlo.

pub mod frame;
pub mod tableau;

pub use frame::{
    detection_fraction, sample, BitMatrix, DetectionFraction, FrameSampler, SampleBatch, BLOCK_SHOTS,
};
pub use tableau::{reference_values, tableau_run, SignExpr, StabilizerGroup, Tableau, TableauReport};
