use diamond_core::circuit::{parse_crumble, parse_stim_text, serialize, validate, Circuit, Format, Kind};
use diamond_core::gen::{build_memory_circuit, ExperimentSpec};
use diamond_core::{Basis, Family, Variant};
use std::collections::BTreeSet;

const LISTING: &str = include_str!("data/d5_x_memory.crumble");

type Event = (usize, u32, Basis);

fn events(c: &Circuit) -> Vec<Event> {
    let targets = c.measurement_targets();
    let mut out = vec![(0, 0, Basis::Z); targets.len()];
    for (layer, recs) in c.measurement_layers().iter().enumerate() {
        for &r in recs {
            out[r] = (layer, targets[r].0, targets[r].1);
        }
    }
    out
}

fn detector_sets(c: &Circuit) -> BTreeSet<BTreeSet<Event>> {
    let ev = events(c);
    c.detectors()
        .map(|d| d.absolute_records().into_iter().map(|r| ev[r]).collect())
        .collect()
}

#[test]
fn listing_shape() {
    let c = parse_crumble(LISTING).unwrap();
    assert_eq!(c.qubits().len(), 41);
    let layers = c.measurement_layers();
    assert_eq!(layers[0].len(), 16);
    let first_dets = c
        .instructions()
        .iter()
        .skip_while(|i| !i.kind.is_measurement())
        .skip_while(|i| i.kind.is_measurement())
        .take_while(|i| i.kind == Kind::Detector)
        .count();
    assert_eq!(first_dets, 6);
    assert!(validate(&c).is_empty());
    assert_eq!(c.detector_count(), 240);
}

#[test]
fn records_resolve_to_measurements() {
    let c = parse_crumble(LISTING).unwrap();
    let m = c.measurement_count();
    for ins in c.instructions() {
        for r in ins.records() {
            assert!(r.absolute >= 0 && (r.absolute as usize) < m);
        }
    }
}

#[test]
fn generated_matches_listing() {
    let reference = parse_crumble(LISTING).unwrap();
    let spec = ExperimentSpec {
        family: Family::Diamond,
        distance: 5,
        rounds: 20,
        basis: Basis::X,
        variant: Variant::Odd,
    };
    let ours = build_memory_circuit(&spec).unwrap();
    assert_eq!(reference.qubits().len(), ours.qubits().len());
    for (a, b) in reference.qubits().iter().zip(ours.qubits()) {
        assert_eq!(a, b);
    }
    let layer_sets = |c: &Circuit| -> Vec<BTreeSet<(u32, Basis)>> {
        let t = c.measurement_targets();
        c.measurement_layers()
            .iter()
            .map(|l| l.iter().map(|&r| t[r]).collect())
            .collect()
    };
    assert_eq!(layer_sets(&reference), layer_sets(&ours));
    assert_eq!(detector_sets(&reference), detector_sets(&ours));
    let obs = |c: &Circuit| -> BTreeSet<Event> {
        let ev = events(c);
        c.observables()[0].iter().map(|&r| ev[r]).collect()
    };
    assert_eq!(obs(&reference), obs(&ours));
}

#[test]
fn crumble_round_trip() {
    let c = parse_crumble(LISTING).unwrap();
    let again = parse_crumble(&serialize(&c, Format::Crumble)).unwrap();
    assert_eq!(c, again);
    let via_text = parse_stim_text(&serialize(&c, Format::StimText)).unwrap();
    assert_eq!(c, via_text);
    assert_eq!(via_text.qubits().len(), 41);
}

#[test]
fn layer_exclusivity_in_listing() {
    let c = parse_crumble(LISTING).unwrap();
    assert!(validate(&c)
        .iter()
        .all(|d| !matches!(d.kind, diamond_core::circuit::DiagnosticKind::LayerConflict(_))));
}
