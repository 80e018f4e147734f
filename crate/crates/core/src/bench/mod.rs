//! End-to-end experiments: LER sweeps, threshold and crossover analysis, line-count ratios,
//! CSV and SVG output.

pub mod crossover;
pub mod output;
pub mod sweep;
pub mod threshold;

pub use crossover::{
    crossover_analysis, distance_ratio, fit_ler_model, max_distance, CrossoverCurve, CrossoverRow,
    CrossoverStatus, DistanceRatio, LerModel,
};
pub use output::{
    crossover_samples, crossover_svg, csv_string, ler_svg, read_csv, read_points_csv, write_csv,
    write_points_csv, CrossoverSample,
};
pub use sweep::{
    paired_decoder_comparison, point_seed, run_point, run_sweep, wilson_interval, DecoderMode, FamilySweep,
    LerPoint, PointKey, SweepConfig,
};
pub use threshold::{estimate_threshold, Crossing, ThresholdEstimate};
