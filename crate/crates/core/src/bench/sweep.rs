use crate::circuit::Basis;
use crate::decoder::{build_matching_graph, Matcher};
use crate::dem::graphlike_dem;
use crate::error::{Error, Result};
use crate::gen::{build_memory_circuit, ExperimentSpec};
use crate::lattice::Family;
use crate::noise::{apply_si1000, Factors, NoiseParams};
use crate::sim::{FrameSampler, BLOCK_SHOTS};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Blocks of 256 shots sampled and decoded together. Fixed, so results do not depend on
/// the thread count.
const CHUNK_BLOCKS: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderMode {
    #[default]
    Single,
    TwoPass,
}

impl std::str::FromStr for DecoderMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "single" => Ok(DecoderMode::Single),
            "two-pass" => Ok(DecoderMode::TwoPass),
            _ => Err(format!("unknown decoder mode `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FamilySweep {
    pub distances: Vec<usize>,
    /// Overrides the top-level p grid for this family.
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    /// Rounds = factor * d. Defaults to the protocol (1 for standard, 4 for diamond).
    #[serde(default)]
    pub rounds_factor: Option<usize>,
}

/// Sweep description, usually read from TOML:
///
/// ```toml
/// seed = 7
/// shots = 100000
/// p = [0.001, 0.002, 0.004]
/// basis = "Z"            # optional, default Z
/// decoder = "two-pass"   # optional, default single
///
/// [standard]
/// distances = [3, 5, 7]
///
/// [diamond]
/// distances = [3, 5, 7]
/// p = [0.0005, 0.001, 0.0015]
///
/// [factors]              # optional SI1000 factor overrides
/// measure-flip = 5.0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub shots: usize,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    #[serde(default)]
    pub decoder: DecoderMode,
    #[serde(default)]
    pub standard: Option<FamilySweep>,
    #[serde(default)]
    pub diamond: Option<FamilySweep>,
    #[serde(default)]
    pub factors: Factors,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

fn default_basis() -> Basis {
    Basis::Z
}

pub const MIN_SHOTS: usize = 1000;

/// One sweep point: the experiment plus its noise strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointKey {
    pub spec: ExperimentSpec,
    pub p: f64,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: SweepConfig = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn family(&self, family: Family) -> Option<&FamilySweep> {
        match family {
            Family::Standard => self.standard.as_ref(),
            Family::Diamond => self.diamond.as_ref(),
        }
    }

    pub fn p_grid(&self, family: Family) -> &[f64] {
        self.family(family)
            .and_then(|f| f.p.as_deref())
            .unwrap_or(&self.p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.shots < MIN_SHOTS {
            return bad(format!(
                "shots = {} is below the minimum of {MIN_SHOTS}",
                self.shots
            ));
        }
        if self.standard.is_none() && self.diamond.is_none() {
            return bad("no family to sweep".into());
        }
        for family in [Family::Standard, Family::Diamond] {
            let Some(f) = self.family(family) else { continue };
            let grid = self.p_grid(family);
            if f.distances.is_empty() || grid.is_empty() {
                return bad(format!("{family}: empty distance list or p grid"));
            }
            if f.distances.iter().any(|&d| d < 2) {
                return bad(format!("{family}: distances must be at least 2"));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{family}: p grid must be strictly ascending"));
            }
            if grid.iter().any(|p| !(0.0..0.5).contains(p)) {
                return bad(format!("{family}: p must lie in [0, 0.5)"));
            }
            if f.rounds_factor == Some(0) {
                return bad(format!("{family}: rounds-factor must be positive"));
            }
        }
        Ok(())
    }

    /// All points in deterministic order: family, distance, p.
    pub fn points(&self) -> Vec<PointKey> {
        let mut out = Vec::new();
        for family in [Family::Standard, Family::Diamond] {
            let Some(f) = self.family(family) else { continue };
            for &d in &f.distances {
                let mut spec = ExperimentSpec::protocol(family, d, self.basis);
                if let Some(k) = f.rounds_factor {
                    spec.rounds = k * d;
                }
                for &p in self.p_grid(family) {
                    out.push(PointKey { spec, p });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LerPoint {
    pub family: Family,
    pub d: usize,
    pub rounds: usize,
    pub p: f64,
    pub shots: u64,
    pub errors: u64,
    pub ler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean fraction of detectors firing per shot.
    pub detection_fraction: f64,
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, shots: u64) -> (f64, f64) {
    if shots == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = shots as f64;
    let phat = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (phat + z * z / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if errors == shots {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Sampling seed of one point, derived from the sweep seed and the point key only.
pub fn point_seed(seed: u64, key: &PointKey) -> u64 {
    let family = match key.spec.family {
        Family::Standard => 1,
        Family::Diamond => 2,
    };
    [
        family,
        key.spec.distance as u64,
        key.spec.rounds as u64,
        key.p.to_bits(),
    ]
    .into_iter()
    .fold(splitmix(seed), |h, v| splitmix(h ^ v))
}

/// Errors and detection events over `shots` shots, for each decoder mode requested.
struct Tally {
    errors: Vec<u64>,
    events: u64,
}

fn tally(
    key: &PointKey,
    factors: &Factors,
    shots: usize,
    seed: u64,
    modes: &[DecoderMode],
) -> Result<(Tally, usize)> {
    let circuit = build_memory_circuit(&key.spec)?;
    let params = NoiseParams {
        p: key.p,
        factors: *factors,
    };
    let noisy = apply_si1000(circuit, params)?;
    let dem = graphlike_dem(&noisy)?;
    let graph = build_matching_graph(&dem)?;
    let sampler = FrameSampler::new(&noisy)?;
    let chunk = CHUNK_BLOCKS * BLOCK_SHOTS;
    let chunks = shots.div_ceil(chunk);
    let parts: Vec<Result<Tally>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = chunk.min(shots - c * chunk);
            let batch = sampler.sample_blocks((c * CHUNK_BLOCKS) as u64, n, seed);
            let mut matcher = Matcher::new(&graph);
            let mut t = Tally {
                errors: vec![0; modes.len()],
                events: 0,
            };
            for s in 0..n {
                let defects: Vec<u32> = batch.detectors.ones(s).into_iter().map(|x| x as u32).collect();
                t.events += defects.len() as u64;
                let actual = batch.observables.row(s).first().copied().unwrap_or(0);
                for (m, mode) in modes.iter().enumerate() {
                    let predicted = match mode {
                        DecoderMode::Single => matcher.predict(&defects)?,
                        DecoderMode::TwoPass => matcher.decode_two_pass(&defects)?.observables,
                    };
                    t.errors[m] += (predicted != actual) as u64;
                }
            }
            Ok(t)
        })
        .collect();
    let mut total = Tally {
        errors: vec![0; modes.len()],
        events: 0,
    };
    for part in parts {
        let part = part?;
        for (a, b) in total.errors.iter_mut().zip(&part.errors) {
            *a += b;
        }
        total.events += part.events;
    }
    Ok((total, dem.num_detectors))
}

fn make_point(key: &PointKey, shots: usize, errors: u64, events: u64, detectors: usize) -> LerPoint {
    let (ci_low, ci_high) = wilson_interval(errors, shots as u64);
    LerPoint {
        family: key.spec.family,
        d: key.spec.distance,
        rounds: key.spec.rounds,
        p: key.p,
        shots: shots as u64,
        errors,
        ler: errors as f64 / shots as f64,
        ci_low,
        ci_high,
        detection_fraction: if detectors == 0 {
            0.0
        } else {
            events as f64 / (shots as f64 * detectors as f64)
        },
    }
}

/// Generates, adds noise, samples and decodes one point. A shot is a logical error when the
/// predicted observable flips differ from the sampled ones.
pub fn run_point(
    key: &PointKey,
    factors: &Factors,
    shots: usize,
    seed: u64,
    mode: DecoderMode,
) -> Result<LerPoint> {
    let (t, detectors) = tally(key, factors, shots, seed, &[mode])?;
    Ok(make_point(key, shots, t.errors[0], t.events, detectors))
}

/// Single-pass and two-pass results on the same shots.
pub fn paired_decoder_comparison(
    key: &PointKey,
    factors: &Factors,
    shots: usize,
    seed: u64,
) -> Result<(LerPoint, LerPoint)> {
    let (t, detectors) = tally(
        key,
        factors,
        shots,
        seed,
        &[DecoderMode::Single, DecoderMode::TwoPass],
    )?;
    Ok((
        make_point(key, shots, t.errors[0], t.events, detectors),
        make_point(key, shots, t.errors[1], t.events, detectors),
    ))
}

/// Runs every point of the sweep. Output order is [`SweepConfig::points`] order whatever the
/// thread count.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<LerPoint>> {
    config.validate()?;
    config
        .points()
        .par_iter()
        .map(|key| {
            run_point(
                key,
                &config.factors,
                config.shots,
                point_seed(config.seed, key),
                config.decoder,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(text: &str) -> SweepConfig {
        SweepConfig::from_toml(text).unwrap()
    }

    #[test]
    fn config_parsing_and_validation() {
        let c = config("seed = 1\nshots = 1000\np = [0.001, 0.002]\n[diamond]\ndistances = [3]\n");
        assert_eq!(c.basis, Basis::Z);
        assert_eq!(c.decoder, DecoderMode::Single);
        assert_eq!(c.points().len(), 2);
        assert_eq!(c.points()[0].spec.rounds, 12);
        for bad in [
            "seed = 1\nshots = 10\np = [0.001]\n[diamond]\ndistances = [3]\n",
            "seed = 1\nshots = 1000\np = [0.002, 0.001]\n[diamond]\ndistances = [3]\n",
            "seed = 1\nshots = 1000\np = [0.001]\n",
            "seed = 1\nshots = 1000\np = [0.001]\ntypo = 3\n[diamond]\ndistances = [3]\n",
        ] {
            assert!(SweepConfig::from_toml(bad).is_err(), "{bad}");
        }
        let c = config(
            "seed = 1\nshots = 1000\np = [0.001]\n[standard]\ndistances = [3]\nrounds-factor = 4\np = [0.003, 0.004]\n",
        );
        assert_eq!(c.points().len(), 2);
        assert_eq!(c.points()[1].spec.rounds, 12);
    }

    #[test]
    fn zero_noise_gives_zero_ler() {
        let c = config(
            "seed = 3\nshots = 1000\np = [0.0]\n[diamond]\ndistances = [3]\n[standard]\ndistances = [3]\n",
        );
        for pt in run_sweep(&c).unwrap() {
            assert_eq!(pt.errors, 0);
            assert_eq!(pt.detection_fraction, 0.0);
        }
    }

    #[test]
    fn point_seeds_differ() {
        let c = config("seed = 3\nshots = 1000\np = [0.001, 0.002]\n[diamond]\ndistances = [3, 5]\n");
        let seeds: std::collections::BTreeSet<u64> = c.points().iter().map(|k| point_seed(3, k)).collect();
        assert_eq!(seeds.len(), 4);
    }

    #[test]
    fn wilson_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (rate, n) = (0.03, 2000u64);
        let trials = 1000;
        let mut covered = 0;
        for _ in 0..trials {
            let k = (0..n).filter(|_| rng.gen_bool(rate)).count() as u64;
            let (lo, hi) = wilson_interval(k, n);
            covered += (lo <= rate && rate <= hi) as usize;
        }
        let frac = covered as f64 / trials as f64;
        assert!((0.93..=0.97).contains(&frac), "coverage {frac}");
        assert_eq!(wilson_interval(0, 100).0, 0.0);
    }

    #[test]
    fn standard_d5_beats_d3_below_threshold() {
        let c = config("seed = 5\nshots = 4000\np = [0.002]\n[standard]\ndistances = [3, 5]\n");
        let pts = run_sweep(&c).unwrap();
        assert!(pts[1].ler < pts[0].ler, "{pts:?}");
    }

    #[test]
    fn diamond_worse_than_standard_at_same_distance() {
        let c = config(
            "seed = 5\nshots = 4000\np = [0.001]\n[standard]\ndistances = [3]\n[diamond]\ndistances = [3]\n",
        );
        let pts = run_sweep(&c).unwrap();
        assert!(pts[1].ler > pts[0].ler, "{pts:?}");
        assert!(pts[1].detection_fraction > pts[0].detection_fraction);
    }
}
