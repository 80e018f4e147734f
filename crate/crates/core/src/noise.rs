//! SI1000 circuit noise. Channels are attached to a clean circuit without modifying it.

use crate::circuit::{stim_line, Circuit, Kind, Target};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Where a channel comes from; each site has its own multiplier of `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Site {
    TwoQubitGate,
    OneQubitGate,
    ResetFlip,
    MeasureFlip,
    MeasureDepolarize,
    Idle,
    ResonatorIdle,
}

impl Site {
    pub const ALL: [Site; 7] = [
        Site::TwoQubitGate,
        Site::OneQubitGate,
        Site::ResetFlip,
        Site::MeasureFlip,
        Site::MeasureDepolarize,
        Site::Idle,
        Site::ResonatorIdle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Site::TwoQubitGate => "two-qubit-gate",
            Site::OneQubitGate => "one-qubit-gate",
            Site::ResetFlip => "reset-flip",
            Site::MeasureFlip => "measure-flip",
            Site::MeasureDepolarize => "measure-depolarize",
            Site::Idle => "idle",
            Site::ResonatorIdle => "resonator-idle",
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Site {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Site::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown noise site `{s}`")))
    }
}

/// Multipliers of `p`. Defaults are the SI1000 profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct Factors {
    pub two_qubit_gate: f64,
    pub one_qubit_gate: f64,
    pub reset_flip: f64,
    pub measure_flip: f64,
    pub measure_depolarize: f64,
    pub idle: f64,
    pub resonator_idle: f64,
    /// Whether Idle also fires in time steps that contain measurements or resets.
    pub stack_idle: bool,
}

impl Default for Factors {
    fn default() -> Self {
        Factors {
            two_qubit_gate: 1.0,
            one_qubit_gate: 0.1,
            reset_flip: 2.0,
            measure_flip: 5.0,
            measure_depolarize: 1.0,
            idle: 0.1,
            resonator_idle: 2.0,
            stack_idle: true,
        }
    }
}

impl Factors {
    pub fn get(&self, site: Site) -> f64 {
        match site {
            Site::TwoQubitGate => self.two_qubit_gate,
            Site::OneQubitGate => self.one_qubit_gate,
            Site::ResetFlip => self.reset_flip,
            Site::MeasureFlip => self.measure_flip,
            Site::MeasureDepolarize => self.measure_depolarize,
            Site::Idle => self.idle,
            Site::ResonatorIdle => self.resonator_idle,
        }
    }

    pub fn set(&mut self, site: Site, v: f64) {
        match site {
            Site::TwoQubitGate => self.two_qubit_gate = v,
            Site::OneQubitGate => self.one_qubit_gate = v,
            Site::ResetFlip => self.reset_flip = v,
            Site::MeasureFlip => self.measure_flip = v,
            Site::MeasureDepolarize => self.measure_depolarize = v,
            Site::Idle => self.idle = v,
            Site::ResonatorIdle => self.resonator_idle = v,
        }
    }

    /// Flat key-value document; missing keys keep their SI1000 default.
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub factors: Factors,
}

impl NoiseParams {
    pub fn si1000(p: f64) -> Self {
        NoiseParams {
            p,
            factors: Factors::default(),
        }
    }

    pub fn probability(&self, site: Site) -> f64 {
        self.p * self.factors.get(site)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.p) {
            return Err(Error::NoiseRange(format!("p = {} outside [0, 0.5)", self.p)));
        }
        for site in Site::ALL {
            let f = self.factors.get(site);
            if !f.is_finite() || f < 0.0 {
                return Err(Error::NoiseRange(format!("factor {site} = {f}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Uniform over X, Y, Z.
    Depolarize1,
    /// Uniform over the 15 non-identity two-qubit Paulis; targets are flattened pairs.
    Depolarize2,
    XError,
    ZError,
    /// Classical flip of measurement records.
    MeasureFlip,
}

impl ChannelKind {
    /// Largest meaningful total probability.
    pub fn max_probability(self) -> f64 {
        match self {
            ChannelKind::Depolarize1 => 0.75,
            ChannelKind::Depolarize2 => 15.0 / 16.0,
            _ => 1.0,
        }
    }

    fn stim_name(self) -> &'static str {
        match self {
            ChannelKind::Depolarize1 => "DEPOLARIZE1",
            ChannelKind::Depolarize2 => "DEPOLARIZE2",
            ChannelKind::XError => "X_ERROR",
            ChannelKind::ZError => "Z_ERROR",
            ChannelKind::MeasureFlip => "M",
        }
    }
}

/// A noise channel applied right after instruction `position` of the base circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub position: usize,
    pub kind: ChannelKind,
    pub site: Site,
    /// Qubits acted on (the measured qubits for a record flip).
    pub targets: Vec<u32>,
    /// Absolute records flipped; only used by [`ChannelKind::MeasureFlip`].
    pub records: Vec<usize>,
    pub probability: f64,
}

impl Channel {
    /// Number of independent applications (qubits, pairs or records).
    pub fn applications(&self) -> usize {
        match self.kind {
            ChannelKind::Depolarize2 => self.targets.len() / 2,
            ChannelKind::MeasureFlip => self.records.len(),
            _ => self.targets.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyCircuit {
    pub base: Circuit,
    pub params: NoiseParams,
    /// Sorted by position; ties keep rule order.
    pub channels: Vec<Channel>,
}

impl NoisyCircuit {
    /// Base circuit with no channels at all.
    pub fn noiseless(base: Circuit) -> Self {
        NoisyCircuit {
            base,
            params: NoiseParams::si1000(0.0),
            channels: Vec::new(),
        }
    }

    pub fn census(&self) -> BTreeMap<Site, usize> {
        channel_census(self)
    }

    /// Stim text with noise instructions inlined; record flips become the measurement argument.
    pub fn to_stim(&self) -> String {
        let mut out = String::new();
        for q in self.base.qubits() {
            out.push_str(&format!(
                "QUBIT_COORDS({}, {}) {}\n",
                q.coord.0, q.coord.1, q.index
            ));
        }
        let mut ch = self.channels.iter().peekable();
        for (i, ins) in self.base.instructions().iter().enumerate() {
            let mut after = Vec::new();
            while let Some(c) = ch.next_if(|c| c.position == i) {
                after.push(c);
            }
            let flip: f64 = after
                .iter()
                .filter(|c| c.kind == ChannelKind::MeasureFlip)
                .map(|c| c.probability)
                .fold(0.0, |a, b| a * (1.0 - b) + b * (1.0 - a));
            let args = if ins.kind.is_measurement() && flip > 0.0 {
                vec![flip]
            } else {
                ins.args.clone()
            };
            out.push_str(&stim_line(ins.kind, &args, &ins.targets));
            out.push('\n');
            for c in after.iter().filter(|c| c.kind != ChannelKind::MeasureFlip) {
                if c.probability == 0.0 || c.targets.is_empty() {
                    continue;
                }
                let targets: Vec<Target> = c.targets.iter().map(|&q| Target::Qubit(q)).collect();
                out.push_str(&format!(
                    "{}({}) {}\n",
                    c.kind.stim_name(),
                    c.probability,
                    targets
                        .iter()
                        .map(|t| match t {
                            Target::Qubit(q) => q.to_string(),
                            Target::Rec(_) => unreachable!(),
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                ));
            }
        }
        out
    }
}

fn channel(
    position: usize,
    kind: ChannelKind,
    site: Site,
    targets: Vec<u32>,
    records: Vec<usize>,
    params: &NoiseParams,
) -> Result<Channel> {
    let probability = params.probability(site);
    if !(0.0..=kind.max_probability()).contains(&probability) {
        return Err(Error::NoiseRange(format!(
            "{site} channel probability {probability} exceeds {}",
            kind.max_probability()
        )));
    }
    Ok(Channel {
        position,
        kind,
        site,
        targets,
        records,
        probability,
    })
}

/// Noise for a two-qubit Pauli-product measurement: two-qubit depolarization on the pair and a
/// classical flip of its record. None of the generated circuits use such measurements.
pub fn mpp_channels(
    position: usize,
    pair: (u32, u32),
    record: usize,
    params: &NoiseParams,
) -> Result<[Channel; 2]> {
    Ok([
        channel(
            position,
            ChannelKind::MeasureFlip,
            Site::MeasureFlip,
            vec![pair.0, pair.1],
            vec![record],
            params,
        )?,
        channel(
            position,
            ChannelKind::Depolarize2,
            Site::MeasureDepolarize,
            vec![pair.0, pair.1],
            Vec::new(),
            params,
        )?,
    ])
}

/// Attaches SI1000 channels. Time steps are the spans between TICKs.
pub fn apply_si1000(circuit: Circuit, params: NoiseParams) -> Result<NoisyCircuit> {
    params.validate()?;
    let universe: BTreeSet<u32> = if circuit.qubits().is_empty() {
        (0..circuit.num_qubits() as u32).collect()
    } else {
        circuit.qubits().iter().map(|q| q.index).collect()
    };
    let mut channels = Vec::new();
    let mut used: BTreeSet<u32> = BTreeSet::new();
    let mut measured_or_reset: BTreeSet<u32> = BTreeSet::new();
    let mut last_gate: Option<usize> = None;
    let mut record = 0usize;

    let close_step = |channels: &mut Vec<Channel>,
                      used: &mut BTreeSet<u32>,
                      mr: &mut BTreeSet<u32>,
                      last_gate: &mut Option<usize>|
     -> Result<()> {
        if let Some(pos) = last_gate.take() {
            if mr.is_empty() || params.factors.stack_idle {
                let idle: Vec<u32> = universe.difference(used).copied().collect();
                if !idle.is_empty() {
                    channels.push(channel(
                        pos,
                        ChannelKind::Depolarize1,
                        Site::Idle,
                        idle,
                        vec![],
                        &params,
                    )?);
                }
            }
            if !mr.is_empty() {
                let waiting: Vec<u32> = universe.difference(mr).copied().collect();
                if !waiting.is_empty() {
                    channels.push(channel(
                        pos,
                        ChannelKind::Depolarize1,
                        Site::ResonatorIdle,
                        waiting,
                        vec![],
                        &params,
                    )?);
                }
            }
        }
        used.clear();
        mr.clear();
        Ok(())
    };

    for (i, ins) in circuit.instructions().iter().enumerate() {
        let qs: Vec<u32> = ins.qubits().collect();
        match ins.kind {
            Kind::Tick => {
                close_step(&mut channels, &mut used, &mut measured_or_reset, &mut last_gate)?;
                continue;
            }
            Kind::Cx => {
                channels.push(channel(
                    i,
                    ChannelKind::Depolarize2,
                    Site::TwoQubitGate,
                    qs.clone(),
                    vec![],
                    &params,
                )?);
            }
            Kind::H => {
                channels.push(channel(
                    i,
                    ChannelKind::Depolarize1,
                    Site::OneQubitGate,
                    qs.clone(),
                    vec![],
                    &params,
                )?);
            }
            Kind::ResetZ | Kind::ResetX => {
                let kind = if ins.kind == Kind::ResetZ {
                    ChannelKind::XError
                } else {
                    ChannelKind::ZError
                };
                channels.push(channel(i, kind, Site::ResetFlip, qs.clone(), vec![], &params)?);
                measured_or_reset.extend(&qs);
            }
            Kind::MeasureZ | Kind::MeasureX => {
                let records: Vec<usize> = (record..record + qs.len()).collect();
                record += qs.len();
                channels.push(channel(
                    i,
                    ChannelKind::MeasureFlip,
                    Site::MeasureFlip,
                    qs.clone(),
                    records,
                    &params,
                )?);
                channels.push(channel(
                    i,
                    ChannelKind::Depolarize1,
                    Site::MeasureDepolarize,
                    qs.clone(),
                    vec![],
                    &params,
                )?);
                measured_or_reset.extend(&qs);
            }
            Kind::Detector | Kind::ObservableInclude | Kind::Polygon => continue,
        }
        used.extend(&qs);
        last_gate = Some(i);
    }
    close_step(&mut channels, &mut used, &mut measured_or_reset, &mut last_gate)?;
    // Idle channels of a step sit at its last gate, after that gate's own channels.
    channels.sort_by_key(|c| c.position);
    Ok(NoisyCircuit {
        base: circuit,
        params,
        channels,
    })
}

/// Application counts per site.
pub fn channel_census(noisy: &NoisyCircuit) -> BTreeMap<Site, usize> {
    let mut out = BTreeMap::new();
    for c in &noisy.channels {
        *out.entry(c.site).or_insert(0) += c.applications();
    }
    out
}
