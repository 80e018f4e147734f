//! Memory-experiment circuit generation for both code families.

mod diamond;
mod standard;

pub use diamond::{detector_rule, diamond_schedule, start_template, DetectorPlan, PlannedDetector};

use crate::circuit::{Basis, Circuit};
use crate::error::{Error, Result};
use crate::lattice::{build_layout, Coord, Family, Layout, Variant};
use crate::pauli::Pauli;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub family: Family,
    pub distance: usize,
    pub rounds: usize,
    pub basis: Basis,
    pub variant: Variant,
}

impl ExperimentSpec {
    /// The benchmarking protocol: d rounds for the standard code, 4d for diamond circuits.
    pub fn protocol(family: Family, distance: usize, basis: Basis) -> Self {
        let rounds = match family {
            Family::Standard => distance,
            Family::Diamond => 4 * distance,
        };
        ExperimentSpec {
            family,
            distance,
            rounds,
            basis,
            variant: match family {
                Family::Diamond => Variant::for_distance(distance),
                Family::Standard => Variant::NotApplicable,
            },
        }
    }

    pub fn layout(&self) -> Result<Layout> {
        build_layout(self.family, self.distance, self.variant)
    }
}

/// One period element of the diamond schedule. Qubit indices follow the layout order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTemplate {
    pub cx_a: Vec<(u32, u32)>,
    pub cx_b: Vec<(u32, u32)>,
    pub measure_z: Vec<u32>,
    pub measure_x: Vec<u32>,
    pub reset_z: Vec<u32>,
    pub reset_x: Vec<u32>,
}

impl RoundTemplate {
    pub fn measure_basis(&self, q: u32) -> Option<Basis> {
        if self.measure_z.binary_search(&q).is_ok() {
            Some(Basis::Z)
        } else if self.measure_x.binary_search(&q).is_ok() {
            Some(Basis::X)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSchedule {
    pub cycle: Vec<RoundTemplate>,
}

pub fn build_memory_circuit(spec: &ExperimentSpec) -> Result<Circuit> {
    if spec.rounds < 1 {
        return Err(Error::InvalidSpec("rounds must be at least 1".into()));
    }
    let layout = spec.layout()?;
    match spec.family {
        Family::Diamond => diamond::build(&layout, spec.basis, spec.rounds),
        Family::Standard => Ok(standard::build(&layout, spec.basis, spec.rounds)),
    }
}

/// Logical representative of the requested basis, on data qubits.
pub fn logical_observable(layout: &Layout, basis: Basis) -> (Vec<Coord>, Pauli) {
    let support = layout.logical(basis);
    let p = layout.pauli(basis, &support);
    (support, p)
}

pub(crate) fn declare_layout(b: &mut crate::circuit::CircuitBuilder, layout: &Layout) {
    for (i, q) in layout.qubits.iter().enumerate() {
        b.declare(i as u32, (q.coord.0 as f64, q.coord.1 as f64));
    }
}
