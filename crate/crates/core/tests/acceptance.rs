//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! `DIAMOND_ACCEPTANCE_ONLY=1,4` runs a subset. `DIAMOND_ACCEPTANCE_SHOTS=N` overrides the
//! shots per point of the threshold sweep (the line is then marked as reduced statistics).
//! The process fails when a criterion fails, except those listed in `KNOWN_UNATTAINABLE`,
//! which still print FAIL.

use diamond_core::bench::{
    csv_string, distance_ratio, estimate_threshold, paired_decoder_comparison, point_seed, run_sweep,
    DecoderMode, FamilySweep, LerPoint, PointKey, SweepConfig,
};
use diamond_core::circuit::{parse_crumble, Circuit, Kind};
use diamond_core::decoder::{
    brute_force_min_pairing, build_matching_graph, exhaustive_decode, Matcher, WEIGHT_SCALE,
};
use diamond_core::dem::{graphlike_dem, DetectorErrorModel, ErrorMechanism, Symptom};
use diamond_core::gen::{build_memory_circuit, ExperimentSpec};
use diamond_core::lattice::{build_diamond_layout, build_standard_layout, family_lines};
use diamond_core::noise::{apply_si1000, Factors, NoiseParams, NoisyCircuit};
use diamond_core::sim::{sample, tableau_run};
use diamond_core::{Basis, Family, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::Instant;

const LISTING: &str = include_str!("data/d5_x_memory.crumble");

/// Criteria that cannot pass as specified; see the README.
const KNOWN_UNATTAINABLE: &[usize] = &[4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

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

fn golden() -> Outcome {
    let reference = match parse_crumble(LISTING) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("listing does not parse: {e}")),
    };
    let qubits = reference.qubits().len();
    let first_layer = reference.measurement_layers().first().map_or(0, |l| l.len());
    let first_dets = reference
        .instructions()
        .iter()
        .skip_while(|i| !i.kind.is_measurement())
        .skip_while(|i| i.kind.is_measurement())
        .take_while(|i| i.kind == Kind::Detector)
        .count();
    let spec = ExperimentSpec {
        family: Family::Diamond,
        distance: 5,
        rounds: 20,
        basis: Basis::X,
        variant: Variant::Odd,
    };
    let ours = build_memory_circuit(&spec).expect("generator");
    let layers = |c: &Circuit| -> Vec<BTreeSet<(u32, Basis)>> {
        let t = c.measurement_targets();
        c.measurement_layers()
            .iter()
            .map(|l| l.iter().map(|&r| t[r]).collect())
            .collect()
    };
    let dets = |c: &Circuit| -> BTreeSet<BTreeSet<Event>> {
        let ev = events(c);
        c.detectors()
            .map(|d| d.absolute_records().into_iter().map(|r| ev[r]).collect())
            .collect()
    };
    let obs = |c: &Circuit| -> BTreeSet<Event> {
        let ev = events(c);
        c.observables()[0].iter().map(|&r| ev[r]).collect()
    };
    let same_layers = layers(&reference) == layers(&ours);
    let same_dets = dets(&reference) == dets(&ours);
    let same_obs = obs(&reference) == obs(&ours);
    outcome(
        qubits == 41 && first_layer == 16 && first_dets == 6 && same_layers && same_dets && same_obs,
        format!(
            "{qubits} qubits, first layer {first_layer} measurements, {first_dets} first-layer detectors; \
             layers equal {same_layers}, detectors equal {same_dets}, observable equal {same_obs}"
        ),
    )
}

fn determinism() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for d in [2usize, 3, 4, 5, 7] {
        for basis in [Basis::X, Basis::Z] {
            let mut specs = vec![ExperimentSpec::protocol(Family::Standard, d, basis)];
            let variants: &[Variant] = if d % 2 == 1 {
                &[Variant::Odd]
            } else {
                &[Variant::EvenA, Variant::EvenB]
            };
            for &v in variants {
                let mut s = ExperimentSpec::protocol(Family::Diamond, d, basis);
                s.variant = v;
                specs.push(s);
            }
            for spec in specs {
                checked += 1;
                let ok = build_memory_circuit(&spec).is_ok_and(|c| {
                    let report = tableau_run(&c, &[]).expect("tableau");
                    let noiseless = NoisyCircuit::noiseless(c);
                    let batch = sample(&noiseless, 512, 1).expect("sampler");
                    report.all_detectors_deterministic()
                        && report.observables_deterministic()
                        && batch.detectors.count_ones() == 0
                        && batch.observables.count_ones() == 0
                });
                if !ok {
                    failures.push(format!("{} d={} {:?} {:?}", spec.family, d, basis, spec.variant));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} circuits deterministic, failures: {failures:?}"),
    )
}

fn distance() -> Outcome {
    let mut found = Vec::new();
    let mut pass = true;
    for family in [Family::Standard, Family::Diamond] {
        for d in [3usize, 5] {
            for basis in [Basis::X, Basis::Z] {
                let c = build_memory_circuit(&ExperimentSpec::protocol(family, d, basis)).expect("generator");
                let noisy = apply_si1000(c, NoiseParams::si1000(1e-3)).expect("noise");
                let dist = graphlike_dem(&noisy)
                    .ok()
                    .and_then(|dem| diamond_core::dem::graphlike_distance(&dem, 0));
                pass &= dist == Some(d);
                found.push(format!("{family} d={d} {basis:?}: {dist:?}"));
            }
        }
    }
    outcome(pass, found.join(", "))
}

fn counting() -> Outcome {
    let standard_ok =
        (2..=25).all(|d| build_standard_layout(d).is_ok_and(|l| l.num_qubits() == 2 * d * d - 1));
    let dia5 = build_diamond_layout(5, Variant::Odd)
        .map(|l| l.num_qubits())
        .unwrap_or(0);
    let ratios: Vec<(usize, f64)> = (7..=200)
        .map(|d| {
            (
                d,
                family_lines(Family::Diamond, d) as f64 / family_lines(Family::Standard, d) as f64,
            )
        })
        .collect();
    let bad: Vec<usize> = ratios.iter().filter(|r| r.1 >= 0.60).map(|r| r.0).collect();
    let ratio = distance_ratio(&[100_000]).expect("budget fits")[0]
        .ratio
        .unwrap_or(0.0);
    let target = (6.0f64 / 3.5).sqrt();
    let ratio_ok = (ratio / target - 1.0).abs() < 0.03;
    outcome(
        standard_ok && dia5 == 41 && bad.is_empty() && ratio_ok,
        format!(
            "standard 2d^2-1 for d<=25: {standard_ok}; diamond d=5 qubits {dia5}; \
             lines ratio at d=7 {:.4}, >= 0.60 for {} distances in 7..=200 (last d={}); \
             distance ratio at budget 1e5 {ratio:.4} vs {target:.4}",
            ratios[0].1,
            bad.len(),
            bad.last().copied().unwrap_or(0)
        ),
    )
}

fn by_family(points: &[LerPoint], f: Family) -> Vec<LerPoint> {
    points.iter().filter(|p| p.family == f).cloned().collect()
}

fn threshold_ratio() -> Outcome {
    let shots = std::env::var("DIAMOND_ACCEPTANCE_SHOTS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(100_000usize);
    let config = SweepConfig {
        seed: 2024,
        shots,
        p: Vec::new(),
        basis: Basis::Z,
        decoder: DecoderMode::Single,
        standard: Some(FamilySweep {
            distances: vec![3, 5, 7],
            p: Some(vec![0.003, 0.005, 0.007, 0.01, 0.02]),
            rounds_factor: None,
        }),
        diamond: Some(FamilySweep {
            distances: vec![3, 5, 7],
            p: Some(vec![0.001, 0.0015, 0.002, 0.003]),
            rounds_factor: None,
        }),
        factors: Factors::default(),
        csv: None,
        svg: None,
    };
    let points = match run_sweep(&config) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let s = estimate_threshold(&by_family(&points, Family::Standard));
    let d = estimate_threshold(&by_family(&points, Family::Diamond));
    let reduced = if shots < 100_000 {
        " [reduced statistics]"
    } else {
        ""
    };
    match (s, d) {
        (Ok(s), Ok(d)) => {
            let r = s.p_th / d.p_th;
            outcome(
                (2.0..=4.5).contains(&r) && shots >= 100_000,
                format!(
                    "standard p_th {:.5} [{:.5}, {:.5}], diamond p_th {:.5} [{:.5}, {:.5}], ratio {r:.3}, {shots} shots/point{reduced}",
                    s.p_th, s.p_min, s.p_max, d.p_th, d.p_min, d.p_max
                ),
            )
        }
        (s, d) => outcome(false, format!("threshold estimation failed: {s:?} {d:?}")),
    }
}

fn qualitative() -> Outcome {
    let ps = [0.0007, 0.001];
    let config = SweepConfig {
        seed: 66,
        shots: 200_000,
        p: ps.to_vec(),
        basis: Basis::Z,
        decoder: DecoderMode::Single,
        standard: Some(FamilySweep {
            distances: vec![3, 5, 7],
            p: None,
            rounds_factor: None,
        }),
        diamond: Some(FamilySweep {
            distances: vec![3, 5, 7],
            p: None,
            rounds_factor: None,
        }),
        factors: Factors::default(),
        csv: None,
        svg: None,
    };
    let points = match run_sweep(&config) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let find = |f: Family, d: usize, p: f64| {
        points
            .iter()
            .find(|x| x.family == f && x.d == d && x.p == p)
            .expect("point")
    };
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for &p in &ps {
        for f in [Family::Standard, Family::Diamond] {
            let lers: Vec<f64> = [3, 5, 7].iter().map(|&d| find(f, d, p).ler).collect();
            if !(lers[0] > lers[1] && lers[1] > lers[2]) {
                problems.push(format!("{f} p={p} not decreasing {lers:?}"));
            }
            summary.push(format!(
                "{f} p={p} {:?}",
                lers.iter().map(|l| format!("{l:.2e}")).collect::<Vec<_>>()
            ));
        }
        for d in [3, 5, 7] {
            let (s, di) = (find(Family::Standard, d, p), find(Family::Diamond, d, p));
            if di.ler <= s.ler {
                problems.push(format!(
                    "d={d} p={p}: diamond LER {} <= standard {}",
                    di.ler, s.ler
                ));
            }
            if di.detection_fraction <= s.detection_fraction {
                problems.push(format!(
                    "d={d} p={p}: diamond detection fraction {:.4} <= standard {:.4}",
                    di.detection_fraction, s.detection_fraction
                ));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!("{}; problems: {problems:?}", summary.join("; ")),
    )
}

fn random_dem(rng: &mut ChaCha8Rng, nd: usize, m: usize, qmax: f64) -> DetectorErrorModel {
    let mut mechanisms: Vec<ErrorMechanism> = Vec::new();
    while mechanisms.len() < m {
        let a = rng.gen_range(0..nd as u32);
        let mut dets = vec![a];
        if rng.gen_bool(0.7) {
            let b = rng.gen_range(0..nd as u32);
            if b == a {
                continue;
            }
            dets.push(b);
            dets.sort();
        }
        let observables = if rng.gen_bool(0.3) { vec![0] } else { vec![] };
        let symptom = Symptom {
            detectors: dets,
            observables,
        };
        if mechanisms.iter().any(|x| x.symptom == symptom) {
            continue;
        }
        mechanisms.push(ErrorMechanism {
            probability: rng.gen_range(0.001..qmax),
            symptom,
            components: vec![],
            parts: vec![],
        });
    }
    DetectorErrorModel {
        mechanisms,
        num_detectors: nd,
        num_observables: 1,
        graphlike: true,
        detector_basis: vec![None; nd],
        detector_coords: vec![vec![]; nd],
    }
}

fn decoder_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    // Blossom optimality against subset dynamic programming.
    let mut optimal = 0;
    let cases = 1000;
    for _ in 0..cases {
        let nd = rng.gen_range(4..16);
        let m = rng.gen_range(nd..3 * nd);
        let dem = random_dem(&mut rng, nd, m, 0.3);
        let graph = build_matching_graph(&dem).expect("graph");
        let mut defects: Vec<u32> = (0..nd as u32).filter(|_| rng.gen_bool(0.5)).collect();
        defects.truncate(12);
        let brute = brute_force_min_pairing(&graph, &defects);
        let ours = Matcher::new(&graph)
            .decode(&defects)
            .ok()
            .map(|r| (r.weight * WEIGHT_SCALE).round() as i64);
        optimal += (ours == brute) as usize;
    }
    // Agreement with the maximum-likelihood oracle on nonempty syndromes.
    let (mut agree, mut total) = (0, 0);
    for _ in 0..200 {
        let nd = rng.gen_range(5..9);
        let dem = random_dem(&mut rng, nd, 10, 0.05);
        let graph = build_matching_graph(&dem).expect("graph");
        let mut matcher = Matcher::new(&graph);
        let mut drawn = 0;
        while drawn < 10 {
            let mut syndrome = vec![false; nd];
            for m in &dem.mechanisms {
                if rng.gen_bool(m.probability) {
                    for &d in &m.symptom.detectors {
                        syndrome[d as usize] ^= true;
                    }
                }
            }
            if !syndrome.contains(&true) {
                continue;
            }
            drawn += 1;
            let defects: Vec<u32> = (0..nd as u32).filter(|&d| syndrome[d as usize]).collect();
            let ml = exhaustive_decode(&dem, &syndrome).expect("oracle");
            let mw = matcher.predict(&defects).ok();
            total += 1;
            agree += (ml.is_some() && ml == mw) as usize;
        }
    }
    let agreement = agree as f64 / total as f64;
    // Paired single-pass versus two-pass at d=5, p=2e-3.
    let mut paired = Vec::new();
    let mut two_ok = true;
    for family in [Family::Diamond, Family::Standard] {
        let key = PointKey {
            spec: ExperimentSpec::protocol(family, 5, Basis::Z),
            p: 0.002,
        };
        let (one, two) = paired_decoder_comparison(&key, &Factors::default(), 100_000, point_seed(5, &key))
            .expect("decode");
        two_ok &= two.errors <= one.errors;
        paired.push(format!("{family} single {:.5} two-pass {:.5}", one.ler, two.ler));
    }
    outcome(
        optimal == cases && agreement >= 0.95 && two_ok,
        format!(
            "blossom optimal {optimal}/{cases}; ML agreement {agreement:.4} over {total} nonempty syndromes; {}",
            paired.join(", ")
        ),
    )
}

fn pipeline_determinism() -> Outcome {
    let config = SweepConfig::from_toml(
        "seed = 11\nshots = 20000\np = [0.001, 0.003]\n[standard]\ndistances = [3, 5]\n[diamond]\ndistances = [3, 5]\n",
    )
    .expect("config");
    let run = |threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool");
        pool.install(|| csv_string(&run_sweep(&config).expect("sweep")).expect("csv"))
    };
    let one = run(1);
    let eight = run(8);
    let again = run(1);
    outcome(
        one == eight && one == again,
        format!(
            "{} bytes; 1 vs 8 threads identical {}, rerun identical {}",
            one.len(),
            one == eight,
            one == again
        ),
    )
}

fn main() {
    let only: Option<BTreeSet<usize>> = std::env::var("DIAMOND_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Outcome); 8] = [
        (1, "golden circuit fidelity", golden),
        (2, "noiseless determinism suite", determinism),
        (3, "spacelike distance", distance),
        (4, "counting economics", counting),
        (5, "threshold ratio", threshold_ratio),
        (6, "qualitative LER comparison", qualitative),
        (7, "decoder validity", decoder_validity),
        (8, "pipeline determinism", pipeline_determinism),
    ];
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let r = f();
        println!(
            "criterion {n} {}: {name}: {} ({:.1}s)",
            if r.pass { "PASS" } else { "FAIL" },
            r.detail,
            t.elapsed().as_secs_f64()
        );
        if !r.pass {
            failed.push(n);
        }
    }
    let unexpected: Vec<usize> = failed
        .iter()
        .copied()
        .filter(|n| !KNOWN_UNATTAINABLE.contains(n))
        .collect();
    if !failed.is_empty() {
        println!("failed criteria: {failed:?} (known unattainable: {KNOWN_UNATTAINABLE:?})");
    }
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
