use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use diamond_core::bench::{
    crossover_analysis, crossover_samples, crossover_svg, csv_string, distance_ratio, estimate_threshold,
    fit_ler_model, ler_svg, read_points_csv, run_sweep, DecoderMode, LerPoint, SweepConfig,
    ThresholdEstimate,
};
use diamond_core::circuit::{parse_crumble, parse_stim_text, serialize, Format};
use diamond_core::decoder::{build_matching_graph, Matcher};
use diamond_core::dem::{graphlike_dem, DetectorErrorModel};
use diamond_core::gen::{build_memory_circuit, ExperimentSpec};
use diamond_core::noise::{apply_si1000, channel_census, Factors, NoiseParams, NoisyCircuit};
use diamond_core::sim::{FrameSampler, SampleBatch};
use diamond_core::{Basis, Circuit, Family, Variant};
use rayon::prelude::*;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "diamond",
    version,
    about = "Diamond and standard surface-code memory experiments"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "DIAMOND_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a noiseless memory-experiment circuit.
    Gen {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value = "stim")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add SI1000 noise and print the noisy circuit; the channel census goes to stderr.
    Noise {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample detector and observable bits into a batch file.
    Sample {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the decomposed detector error model.
    Dem {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Drop mechanisms with probability below this value.
        #[arg(long)]
        prune: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a batch file against a detector error model.
    Decode {
        #[arg(long)]
        dem: PathBuf,
        /// Batch file written by `sample`.
        #[arg(long)]
        shots: PathBuf,
        #[arg(long)]
        two_pass: bool,
        /// Predictions, one row of observable bits per shot.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an LER sweep from a config file.
    Ler {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        decoder: Option<DecoderMode>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Estimate per-family thresholds from a sweep CSV.
    Threshold {
        #[arg(long)]
        points: PathBuf,
        /// Write the estimates as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Fit per-family LER models and compare the largest codes fitting each line budget.
    Crossover {
        #[arg(long)]
        points: PathBuf,
        /// Budgets as `start:stop:step` or a comma-separated list.
        #[arg(long, default_value = "100:5000:20")]
        budgets: String,
        #[arg(long, default_value_t = 1e-5)]
        p_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        p_max: f64,
        #[arg(long, default_value_t = 60)]
        p_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Largest distance of each family within each control-line budget.
    Ratio {
        #[arg(long, default_value = "100,1000,10000,100000")]
        budgets: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot a sweep CSV as log-log LER curves.
    Plot {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value = "diamond")]
    family: Family,
    #[arg(long, default_value_t = 5)]
    d: usize,
    /// Defaults to d for the standard family and 4d for diamond.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value = "z")]
    basis: Basis,
    #[arg(long)]
    variant: Option<Variant>,
}

impl ExperimentArgs {
    fn spec(&self) -> ExperimentSpec {
        let mut spec = ExperimentSpec::protocol(self.family, self.d, self.basis);
        if let Some(r) = self.rounds {
            spec.rounds = r;
        }
        if let Some(v) = self.variant {
            spec.variant = v;
        }
        spec
    }
}

/// A circuit file, or generator flags when no file is given.
#[derive(Args)]
struct Source {
    /// Stim-text or Crumble file (by extension: `.crumble` is Crumble).
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[command(flatten)]
    exp: ExperimentArgs,
}

impl Source {
    fn load(&self) -> Result<Circuit> {
        match &self.circuit {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok(if path.extension().is_some_and(|e| e == "crumble") {
                    parse_crumble(&text)?
                } else {
                    parse_stim_text(&text)?
                })
            }
            None => Ok(build_memory_circuit(&self.exp.spec())?),
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long)]
    p: f64,
    /// Flat TOML file of SI1000 factor overrides.
    #[arg(long)]
    factors: Option<PathBuf>,
}

impl NoiseArgs {
    fn apply(&self, circuit: Circuit) -> Result<NoisyCircuit> {
        let factors = match &self.factors {
            Some(path) => Factors::from_toml(&std::fs::read_to_string(path)?)?,
            None => Factors::default(),
        };
        Ok(apply_si1000(circuit, NoiseParams { p: self.p, factors })?)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_budgets(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let [a, b, step] = [parts[0], parts[1], parts[2]].map(|x| x.trim().parse::<usize>());
        let (a, b, step) = (a?, b?, step?);
        if step == 0 {
            bail!("budget step must be positive");
        }
        return Ok((a..=b).step_by(step).collect());
    }
    s.split(',')
        .map(|x| Ok(x.trim().parse::<f64>().context("bad budget")? as usize))
        .collect()
}

fn families(points: &[LerPoint]) -> Vec<(Family, Vec<LerPoint>)> {
    [Family::Standard, Family::Diamond]
        .into_iter()
        .map(|f| {
            (
                f,
                points
                    .iter()
                    .filter(|p| p.family == f)
                    .cloned()
                    .collect::<Vec<_>>(),
            )
        })
        .filter(|(_, v)| !v.is_empty())
        .collect()
}

fn thresholds(points: &[LerPoint]) -> Result<Vec<(Family, ThresholdEstimate)>> {
    families(points)
        .into_iter()
        .map(|(f, v)| {
            Ok((
                f,
                estimate_threshold(&v).with_context(|| format!("{f} threshold"))?,
            ))
        })
        .collect()
}

fn decode_batch(dem: &DetectorErrorModel, batch: &SampleBatch, two_pass: bool) -> Result<Vec<u64>> {
    if batch.num_detectors() != dem.num_detectors {
        bail!(
            "batch has {} detectors but the model has {}",
            batch.num_detectors(),
            dem.num_detectors
        );
    }
    let graph = build_matching_graph(dem)?;
    let chunks: Vec<Result<Vec<u64>>> = (0..batch.shots)
        .collect::<Vec<_>>()
        .par_chunks(4096)
        .map(|shots| {
            let mut m = Matcher::new(&graph);
            shots
                .iter()
                .map(|&s| {
                    let defects: Vec<u32> = batch.detectors.ones(s).into_iter().map(|x| x as u32).collect();
                    Ok(if two_pass {
                        m.decode_two_pass(&defects)?.observables
                    } else {
                        m.predict(&defects)?
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(batch.shots);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen { exp, format, out } => {
            let format: Format = format.parse().map_err(anyhow::Error::msg)?;
            let c = build_memory_circuit(&exp.spec())?;
            emit(&out, &serialize(&c, format))
        }
        Cmd::Noise { src, noise, out } => {
            let noisy = noise.apply(src.load()?)?;
            for (site, n) in channel_census(&noisy) {
                eprintln!("{site}: {n}");
            }
            emit(&out, &noisy.to_stim())
        }
        Cmd::Sample {
            src,
            noise,
            shots,
            seed,
            out,
        } => {
            let noisy = noise.apply(src.load()?)?;
            let batch = FrameSampler::new(&noisy)?.sample(shots, seed);
            batch.write_to(std::io::BufWriter::new(std::fs::File::create(&out)?))?;
            eprintln!(
                "{} shots, {} detectors, {} observables -> {}",
                shots,
                batch.num_detectors(),
                batch.num_observables(),
                out.display()
            );
            Ok(())
        }
        Cmd::Dem {
            src,
            noise,
            prune,
            out,
        } => {
            let mut dem = graphlike_dem(&noise.apply(src.load()?)?)?;
            if let Some(q) = prune {
                dem.mechanisms.retain(|m| m.probability >= q);
            }
            emit(&out, &dem.to_text())
        }
        Cmd::Decode {
            dem,
            shots,
            two_pass,
            out,
        } => {
            let model = DetectorErrorModel::from_text(&std::fs::read_to_string(&dem)?)?;
            let batch = SampleBatch::read_from(std::io::BufReader::new(std::fs::File::open(&shots)?))?;
            let predictions = decode_batch(&model, &batch, two_pass)?;
            let no = batch.num_observables().max(model.num_observables);
            let mut text = String::with_capacity(predictions.len() * (no + 1));
            let mut errors = 0;
            for (s, &pred) in predictions.iter().enumerate() {
                for k in 0..no {
                    text.push(if pred >> k & 1 == 1 { '1' } else { '0' });
                }
                text.push('\n');
                let actual = batch.observables.row(s).first().copied().unwrap_or(0);
                errors += (actual != pred) as usize;
            }
            eprintln!(
                "logical errors: {errors} / {} ({:.6})",
                batch.shots,
                errors as f64 / batch.shots.max(1) as f64
            );
            emit(&out, &text)
        }
        Cmd::Ler {
            config,
            shots,
            seed,
            decoder,
            csv,
            svg,
        } => {
            let mut cfg = SweepConfig::from_toml(&std::fs::read_to_string(&config)?)?;
            cfg.shots = shots.unwrap_or(cfg.shots);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.decoder = decoder.unwrap_or(cfg.decoder);
            cfg.csv = csv.or(cfg.csv);
            cfg.svg = svg.or(cfg.svg);
            let points = run_sweep(&cfg)?;
            let text = csv_string(&points)?;
            emit(&cfg.csv, &text)?;
            if let Some(path) = &cfg.svg {
                std::fs::write(path, ler_svg(&points)?)?;
            }
            Ok(())
        }
        Cmd::Threshold { points, json } => {
            let est = thresholds(&read_points_csv(&points)?)?;
            for (f, t) in &est {
                println!(
                    "{f}: p_th = {:.6} (crossings {:.6} .. {:.6})",
                    t.p_th, t.p_min, t.p_max
                );
            }
            if let [(_, s), (_, d)] = &est[..] {
                println!("ratio standard/diamond = {:.3}", s.p_th / d.p_th);
            }
            if let Some(path) = json {
                let map: std::collections::BTreeMap<String, &ThresholdEstimate> =
                    est.iter().map(|(f, t)| (f.to_string(), t)).collect();
                std::fs::write(path, serde_json::to_string_pretty(&map)? + "\n")?;
            }
            Ok(())
        }
        Cmd::Crossover {
            points,
            budgets,
            p_min,
            p_max,
            p_steps,
            out,
            svg,
        } => {
            if !(p_min > 0.0 && p_max > p_min && p_steps >= 2) {
                bail!("need 0 < p-min < p-max and at least two p steps");
            }
            let points = read_points_csv(&points)?;
            let mut models = Vec::new();
            for (f, t) in thresholds(&points)? {
                let own: Vec<LerPoint> = points.iter().filter(|p| p.family == f).cloned().collect();
                let m = fit_ler_model(&own, t.p_th)?;
                eprintln!(
                    "{f}: log LER = {:.4} + {:.4} d ln(p/{:.6}), rms residual {:.3}",
                    m.a, m.b, m.p_ref, m.residual
                );
                models.push(m);
            }
            let [std_model, dia_model] = &models[..] else {
                bail!("crossover needs points from both families");
            };
            let grid: Vec<f64> = (0..p_steps)
                .map(|i| p_min * (p_max / p_min).powf(i as f64 / (p_steps - 1) as f64))
                .collect();
            let curve = crossover_analysis(dia_model, std_model, &parse_budgets(&budgets)?, &grid)?;
            emit(&out, &csv_string(&crossover_samples(&curve))?)?;
            if let Some(path) = svg {
                std::fs::write(path, crossover_svg(&curve)?)?;
            }
            Ok(())
        }
        Cmd::Ratio { budgets, out } => {
            let rows = distance_ratio(&parse_budgets(&budgets)?)?;
            emit(&out, &csv_string(&rows)?)
        }
        Cmd::Plot { points, out } => {
            std::fs::write(&out, ler_svg(&read_points_csv(&points)?)?)?;
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()?;
    }
    run(cli)
}
