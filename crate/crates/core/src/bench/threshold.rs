use super::sweep::LerPoint;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Crossing of two consecutive distances' curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub d_low: usize,
    pub d_high: usize,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Median of the pairwise crossings (geometric mean of the middle two for an even count).
    pub p_th: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub crossings: Vec<Crossing>,
    /// Consecutive pairs whose curves do not cross inside the sampled range.
    pub missing: Vec<(usize, usize)>,
}

/// Log-log curve of one distance, sorted by p, points with zero errors dropped.
fn curves(points: &[LerPoint]) -> BTreeMap<usize, Vec<(f64, f64)>> {
    let mut by_d: BTreeMap<usize, BTreeMap<u64, (f64, f64)>> = BTreeMap::new();
    for pt in points {
        if pt.errors > 0 && pt.p > 0.0 {
            by_d.entry(pt.d)
                .or_default()
                .insert(pt.p.to_bits(), (pt.p.ln(), pt.ler.ln()));
        }
    }
    by_d.into_iter()
        .map(|(d, m)| {
            let mut v: Vec<(f64, f64)> = m.into_values().collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            (d, v)
        })
        .collect()
}

/// First p at which the larger distance stops being better, interpolating both curves
/// piecewise-linearly in log-log space.
fn crossing(low: &[(f64, f64)], high: &[(f64, f64)]) -> Option<f64> {
    let interp = |c: &[(f64, f64)], x: f64| -> Option<f64> {
        let i = c.windows(2).position(|w| w[0].0 <= x && x <= w[1].0)?;
        let (a, b) = (c[i], c[i + 1]);
        Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
    };
    let mut xs: Vec<f64> = low.iter().chain(high).map(|c| c.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let diffs: Vec<(f64, f64)> = xs
        .into_iter()
        .filter_map(|x| Some((x, interp(high, x)? - interp(low, x)?)))
        .collect();
    for w in diffs.windows(2) {
        let ((x0, f0), (x1, f1)) = (w[0], w[1]);
        if f0 < 0.0 && f1 >= 0.0 {
            return Some((x0 - f0 * (x1 - x0) / (f1 - f0)).exp());
        }
    }
    None
}

/// Threshold of one family from its LER points: per consecutive pair of distances, the
/// crossing of the log-log interpolants, then the median over pairs.
pub fn estimate_threshold(points: &[LerPoint]) -> Result<ThresholdEstimate> {
    let curves = curves(points);
    if curves.len() < 2 {
        return Err(Error::NoCrossing(
            "need at least two distances with logical errors".into(),
        ));
    }
    if curves.values().any(|c| c.len() < 2) {
        return Err(Error::NoCrossing(
            "every distance needs at least two points with errors".into(),
        ));
    }
    let ds: Vec<usize> = curves.keys().copied().collect();
    let mut crossings = Vec::new();
    let mut missing = Vec::new();
    for w in ds.windows(2) {
        match crossing(&curves[&w[0]], &curves[&w[1]]) {
            Some(p) => crossings.push(Crossing {
                d_low: w[0],
                d_high: w[1],
                p,
            }),
            None => missing.push((w[0], w[1])),
        }
    }
    if crossings.is_empty() {
        return Err(Error::NoCrossing(format!(
            "no consecutive distance pair crosses among {ds:?}"
        )));
    }
    let mut ps: Vec<f64> = crossings.iter().map(|c| c.p).collect();
    ps.sort_by(f64::total_cmp);
    let n = ps.len();
    let p_th = if n % 2 == 1 {
        ps[n / 2]
    } else {
        (ps[n / 2 - 1] * ps[n / 2]).sqrt()
    };
    Ok(ThresholdEstimate {
        p_th,
        p_min: ps[0],
        p_max: ps[n - 1],
        crossings,
        missing,
    })
}
