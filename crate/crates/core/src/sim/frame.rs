//! Pauli-frame sampling, 256 shots per block in four 64-bit lanes.
//!
//! Each block draws from its own ChaCha8 stream (seed, stream = block index), so a shot's bits
//! depend only on the seed and the block it falls in, never on batch size or thread count.

use super::tableau::reference_values;
use crate::circuit::Kind;
use crate::error::{Error, Result};
use crate::noise::{ChannelKind, NoisyCircuit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{Read, Write};

const LANES: usize = 4;
pub const BLOCK_SHOTS: usize = 64 * LANES;
type Word = [u64; LANES];

/// Shot-major packed bits: row `s` holds the detector (or observable) bits of shot `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.words[r * self.stride..(r + 1) * self.stride]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.words[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.words[r * self.stride + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Set columns of row `r`, ascending.
    pub fn ones(&self, r: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.row(r).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(wi * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBatch {
    pub shots: usize,
    pub seed: u64,
    pub detectors: BitMatrix,
    pub observables: BitMatrix,
}

impl SampleBatch {
    pub fn num_detectors(&self) -> usize {
        self.detectors.cols()
    }

    pub fn num_observables(&self) -> usize {
        self.observables.cols()
    }

    /// Batch file: magic `DMDB`, u32 version 1, then u64 shots, u64 detectors, u64 observables,
    /// u64 seed (all little endian), then every detector row followed by every observable row,
    /// each row as ceil(cols/64) little-endian u64 words.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"DMDB")?;
        w.write_all(&1u32.to_le_bytes())?;
        for v in [
            self.shots as u64,
            self.num_detectors() as u64,
            self.num_observables() as u64,
            self.seed,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for m in [&self.detectors, &self.observables] {
            for word in m.words() {
                w.write_all(&word.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"DMDB" {
            return Err(Error::Format("not a sample batch file".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != 1 {
            return Err(Error::Format("unsupported batch version".into()));
        }
        let mut header = [0u64; 4];
        let mut b8 = [0u8; 8];
        for h in header.iter_mut() {
            r.read_exact(&mut b8)?;
            *h = u64::from_le_bytes(b8);
        }
        let [shots, dets, obs, seed] = header;
        let mut read_matrix = |cols: usize| -> Result<BitMatrix> {
            let mut m = BitMatrix::new(shots as usize, cols);
            for w in m.words.iter_mut() {
                r.read_exact(&mut b8)?;
                *w = u64::from_le_bytes(b8);
            }
            Ok(m)
        };
        let detectors = read_matrix(dets as usize)?;
        let observables = read_matrix(obs as usize)?;
        Ok(SampleBatch {
            shots: shots as usize,
            seed,
            detectors,
            observables,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionFraction {
    pub per_detector: Vec<f64>,
    pub mean: f64,
}

pub fn detection_fraction(batch: &SampleBatch) -> DetectionFraction {
    let n = batch.num_detectors();
    let mut counts = vec![0usize; n];
    for s in 0..batch.shots {
        for d in batch.detectors.ones(s) {
            counts[d] += 1;
        }
    }
    let shots = batch.shots.max(1) as f64;
    let per_detector: Vec<f64> = counts.iter().map(|&c| c as f64 / shots).collect();
    let mean = if n == 0 {
        0.0
    } else {
        per_detector.iter().sum::<f64>() / n as f64
    };
    DetectionFraction { per_detector, mean }
}

/// Precomputed sampling program. Cheap to share across threads.
pub struct FrameSampler<'a> {
    noisy: &'a NoisyCircuit,
    ref_detectors: Vec<bool>,
    ref_observables: Vec<bool>,
    detectors: Vec<Vec<usize>>,
    observables: Vec<Vec<usize>>,
}

impl<'a> FrameSampler<'a> {
    pub fn new(noisy: &'a NoisyCircuit) -> Result<Self> {
        let (ref_detectors, ref_observables) = reference_values(&noisy.base)?;
        Ok(FrameSampler {
            noisy,
            ref_detectors,
            ref_observables,
            detectors: noisy.base.detectors().map(|d| d.absolute_records()).collect(),
            observables: noisy.base.observables(),
        })
    }

    pub fn sample(&self, shots: usize, seed: u64) -> SampleBatch {
        self.sample_blocks(0, shots, seed)
    }

    /// Samples `shots` shots starting at block `first_block`, i.e. shots
    /// `first_block * BLOCK_SHOTS ..` of the stream [`sample`](Self::sample) would produce.
    pub fn sample_blocks(&self, first_block: u64, shots: usize, seed: u64) -> SampleBatch {
        let blocks = shots.div_ceil(BLOCK_SHOTS) as u64;
        let results: Vec<(Vec<Word>, Vec<Word>)> = (first_block..first_block + blocks)
            .into_par_iter()
            .map(|b| self.block(seed, b))
            .collect();
        let mut detectors = BitMatrix::new(shots, self.detectors.len());
        let mut observables = BitMatrix::new(shots, self.observables.len());
        for (b, (dets, obs)) in results.iter().enumerate() {
            let base = b * BLOCK_SHOTS;
            for (m, words) in [(&mut detectors, dets), (&mut observables, obs)] {
                for (col, word) in words.iter().enumerate() {
                    for (lane, &w) in word.iter().enumerate() {
                        let mut w = w;
                        while w != 0 {
                            let s = base + lane * 64 + w.trailing_zeros() as usize;
                            w &= w - 1;
                            if s < shots {
                                m.set(s, col, true);
                            }
                        }
                    }
                }
            }
        }
        SampleBatch {
            shots,
            seed,
            detectors,
            observables,
        }
    }

    /// Detector and observable words of one block.
    fn block(&self, seed: u64, block: u64) -> (Vec<Word>, Vec<Word>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let circuit = &self.noisy.base;
        let n = circuit.num_qubits();
        let mut x = vec![[0u64; LANES]; n];
        let mut z = vec![[0u64; LANES]; n];
        let mut rec = vec![[0u64; LANES]; circuit.measurement_count()];
        let mut next_rec = 0usize;
        let mut channels = self.noisy.channels.iter().peekable();
        for (i, ins) in circuit.instructions().iter().enumerate() {
            match ins.kind {
                Kind::ResetZ | Kind::ResetX => {
                    for q in ins.qubits() {
                        x[q as usize] = [0; LANES];
                        z[q as usize] = [0; LANES];
                    }
                }
                Kind::MeasureZ | Kind::MeasureX => {
                    let frame = if ins.kind == Kind::MeasureZ { &x } else { &z };
                    for q in ins.qubits() {
                        rec[next_rec] = frame[q as usize];
                        next_rec += 1;
                    }
                }
                Kind::H => {
                    for q in ins.qubits() {
                        std::mem::swap(&mut x[q as usize], &mut z[q as usize]);
                    }
                }
                Kind::Cx => {
                    let qs: Vec<u32> = ins.qubits().collect();
                    for p in qs.chunks_exact(2) {
                        let (c, t) = (p[0] as usize, p[1] as usize);
                        for l in 0..LANES {
                            x[t][l] ^= x[c][l];
                            z[c][l] ^= z[t][l];
                        }
                    }
                }
                _ => {}
            }
            while let Some(ch) = channels.next_if(|c| c.position == i) {
                apply_channel(ch, &mut rng, &mut x, &mut z, &mut rec);
            }
        }
        let fold = |sets: &[Vec<usize>], refs: &[bool]| -> Vec<Word> {
            sets.iter()
                .zip(refs)
                .map(|(recs, &r)| {
                    let mut w = if r { [u64::MAX; LANES] } else { [0; LANES] };
                    for &m in recs {
                        for l in 0..LANES {
                            w[l] ^= rec[m][l];
                        }
                    }
                    w
                })
                .collect()
        };
        (
            fold(&self.detectors, &self.ref_detectors),
            fold(&self.observables, &self.ref_observables),
        )
    }
}

/// Visits hits of independent Bernoulli(p) trials over `trials` slots by geometric skipping.
fn for_each_hit(rng: &mut ChaCha8Rng, p: f64, trials: usize, mut f: impl FnMut(usize, &mut ChaCha8Rng)) {
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for t in 0..trials {
            f(t, rng);
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut t = 0usize;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let gap = (u.ln() / log_q).floor();
        if gap >= (trials - t) as f64 {
            return;
        }
        t += gap as usize;
        f(t, rng);
        t += 1;
        if t >= trials {
            return;
        }
    }
}

fn apply_channel(
    ch: &crate::noise::Channel,
    rng: &mut ChaCha8Rng,
    x: &mut [Word],
    z: &mut [Word],
    rec: &mut [Word],
) {
    let flip = |w: &mut Word, shot: usize| w[shot / 64] ^= 1 << (shot % 64);
    match ch.kind {
        ChannelKind::XError | ChannelKind::ZError => {
            let frame = if ch.kind == ChannelKind::XError { x } else { z };
            for_each_hit(rng, ch.probability, ch.targets.len() * BLOCK_SHOTS, |t, _| {
                flip(&mut frame[ch.targets[t / BLOCK_SHOTS] as usize], t % BLOCK_SHOTS);
            });
        }
        ChannelKind::MeasureFlip => {
            for_each_hit(rng, ch.probability, ch.records.len() * BLOCK_SHOTS, |t, _| {
                flip(&mut rec[ch.records[t / BLOCK_SHOTS]], t % BLOCK_SHOTS);
            });
        }
        ChannelKind::Depolarize1 => {
            for_each_hit(rng, ch.probability, ch.targets.len() * BLOCK_SHOTS, |t, rng| {
                let q = ch.targets[t / BLOCK_SHOTS] as usize;
                let s = t % BLOCK_SHOTS;
                let k = rng.gen_range(1..4u32);
                if k & 1 == 1 {
                    flip(&mut x[q], s);
                }
                if k & 2 == 2 {
                    flip(&mut z[q], s);
                }
            });
        }
        ChannelKind::Depolarize2 => {
            let pairs = ch.targets.len() / 2;
            for_each_hit(rng, ch.probability, pairs * BLOCK_SHOTS, |t, rng| {
                let p = t / BLOCK_SHOTS;
                let (a, b) = (ch.targets[2 * p] as usize, ch.targets[2 * p + 1] as usize);
                let s = t % BLOCK_SHOTS;
                let k = rng.gen_range(1..16u32);
                if k & 1 == 1 {
                    flip(&mut x[a], s);
                }
                if k & 2 == 2 {
                    flip(&mut z[a], s);
                }
                if k & 4 == 4 {
                    flip(&mut x[b], s);
                }
                if k & 8 == 8 {
                    flip(&mut z[b], s);
                }
            });
        }
    }
}

/// Samples with a fresh [`FrameSampler`].
pub fn sample(noisy: &NoisyCircuit, shots: usize, seed: u64) -> Result<SampleBatch> {
    Ok(FrameSampler::new(noisy)?.sample(shots, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_stim_text;
    use crate::gen::{build_memory_circuit, ExperimentSpec};
    use crate::noise::{apply_si1000, Channel, NoiseParams, Site};
    use crate::{Basis, Family};

    #[test]
    fn noiseless_is_all_zero() {
        let c = build_memory_circuit(&ExperimentSpec::protocol(Family::Diamond, 3, Basis::Z)).unwrap();
        let n = apply_si1000(c, NoiseParams::si1000(0.0)).unwrap();
        let b = sample(&n, 300, 1).unwrap();
        assert_eq!(b.detectors.count_ones(), 0);
        assert_eq!(b.observables.count_ones(), 0);
        assert_eq!(detection_fraction(&b).mean, 0.0);
    }

    #[test]
    fn half_flip_is_binomial() {
        let c = parse_stim_text("R 0\nM 0\nDETECTOR rec[-1]").unwrap();
        let n = NoisyCircuit {
            base: c,
            params: NoiseParams::si1000(0.0),
            channels: vec![Channel {
                position: 0,
                kind: ChannelKind::XError,
                site: Site::ResetFlip,
                targets: vec![0],
                records: vec![],
                probability: 0.5,
            }],
        };
        let shots = 20_000;
        let b = sample(&n, shots, 7).unwrap();
        let mean = b.detectors.count_ones() as f64 / shots as f64;
        let sigma = (0.25 / shots as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn reference_sign_is_applied() {
        // The Z measurement of |+> is random, but repeating it is deterministic.
        let c = parse_stim_text("RX 0\nMX 0\nM 0\nM 0\nDETECTOR rec[-1] rec[-2]").unwrap();
        let n = NoisyCircuit::noiseless(c);
        assert_eq!(sample(&n, 100, 0).unwrap().detectors.count_ones(), 0);
    }

    #[test]
    fn prefix_stable_across_batch_sizes() {
        let c = build_memory_circuit(&ExperimentSpec::protocol(Family::Standard, 3, Basis::X)).unwrap();
        let n = apply_si1000(c, NoiseParams::si1000(5e-3)).unwrap();
        let s = FrameSampler::new(&n).unwrap();
        let a = s.sample(700, 11);
        let b = s.sample(300, 11);
        for shot in 0..300 {
            assert_eq!(a.detectors.row(shot), b.detectors.row(shot));
            assert_eq!(a.observables.row(shot), b.observables.row(shot));
        }
        assert!(a.detectors.count_ones() > 0);
        let tail = s.sample_blocks(1, 400, 11);
        for shot in 0..400 {
            assert_eq!(tail.detectors.row(shot), a.detectors.row(shot + BLOCK_SHOTS));
        }
    }

    #[test]
    fn batch_file_round_trip() {
        let c = build_memory_circuit(&ExperimentSpec::protocol(Family::Diamond, 2, Basis::X)).unwrap();
        let n = apply_si1000(c, NoiseParams::si1000(1e-2)).unwrap();
        let b = sample(&n, 130, 3).unwrap();
        let mut buf = Vec::new();
        b.write_to(&mut buf).unwrap();
        assert_eq!(SampleBatch::read_from(&buf[..]).unwrap(), b);
        assert!(SampleBatch::read_from(&b"XXXX"[..]).is_err());
    }
}
