use super::sweep::LerPoint;
use crate::error::{Error, Result};
use crate::lattice::{family_lines, Family};
use serde::{Deserialize, Serialize};

/// log LER = a + b * d * ln(p / p_ref), fitted per family with p_ref fixed to its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LerModel {
    pub family: Family,
    pub a: f64,
    pub b: f64,
    pub p_ref: f64,
    /// Root-mean-square residual of log LER over the fitted points.
    pub residual: f64,
}

impl LerModel {
    pub fn log_ler(&self, d: usize, p: f64) -> f64 {
        self.a + self.b * d as f64 * (p / self.p_ref).ln()
    }

    pub fn ler(&self, d: usize, p: f64) -> f64 {
        self.log_ler(d, p).exp()
    }
}

/// Least-squares fit on the points below `p_ref` that saw at least one logical error.
pub fn fit_ler_model(points: &[LerPoint], p_ref: f64) -> Result<LerModel> {
    let family = points
        .first()
        .map(|p| p.family)
        .ok_or_else(|| Error::Empty("no points to fit".into()))?;
    if points.iter().any(|p| p.family != family) {
        return Err(Error::Config("points from more than one family".into()));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.errors > 0 && p.p > 0.0 && p.p < p_ref)
        .map(|p| (p.d as f64 * (p.p / p_ref).ln(), p.ler.ln()))
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|v| v.0).sum::<f64>() / n;
    let my = xy.iter().map(|v| v.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|v| (v.0 - mx).powi(2)).sum();
    if xy.len() < 2 || sxx <= 0.0 {
        return Err(Error::Empty(format!(
            "{family}: need two distinct sub-threshold points with errors"
        )));
    }
    let sxy: f64 = xy.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let residual = (xy.iter().map(|v| (v.1 - a - b * v.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(LerModel {
        family,
        a,
        b,
        p_ref,
        residual,
    })
}

/// Largest d whose default layout fits in `budget` control lines.
pub fn max_distance(family: Family, budget: usize) -> Option<usize> {
    if family_lines(family, 2) > budget {
        return None;
    }
    // Line counts grow strictly with d, so the largest fitting d can be found by bisection.
    let mut lo = 2;
    let mut hi = 4;
    while family_lines(family, hi) <= budget {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if family_lines(family, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceRatio {
    pub budget: usize,
    pub d_std: Option<usize>,
    pub d_dia: Option<usize>,
    /// d_dia / d_std, undefined when either family has no code within the budget.
    pub ratio: Option<f64>,
}

pub fn distance_ratio(budgets: &[usize]) -> Result<Vec<DistanceRatio>> {
    budgets
        .iter()
        .map(|&budget| {
            let d_std = max_distance(Family::Standard, budget);
            let d_dia = max_distance(Family::Diamond, budget);
            if d_std.is_none() && d_dia.is_none() {
                return Err(Error::Config(format!(
                    "budget {budget} is below the smallest code of either family"
                )));
            }
            Ok(DistanceRatio {
                budget,
                d_std,
                d_dia,
                ratio: d_std.zip(d_dia).map(|(s, d)| d as f64 / s as f64),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossoverStatus {
    /// Diamond and standard models cross at `crossover_p` inside the modeled range.
    Crossing,
    /// Only a diamond code fits: diamond wins at every modeled p.
    DiamondOnly,
    /// The models do not cross inside the modeled range.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub budget: usize,
    pub d_std: Option<usize>,
    pub d_dia: usize,
    pub status: CrossoverStatus,
    pub crossover_p: Option<f64>,
    /// LER_dia / LER_std per experiment block at each p of the curve's grid.
    pub ratio: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverCurve {
    pub p_grid: Vec<f64>,
    pub rows: Vec<CrossoverRow>,
}

/// Per budget, the largest code of each family and the p where their modeled LERs meet.
/// Below `crossover_p` the code with the steeper curve (normally diamond) wins.
pub fn crossover_analysis(
    diamond: &LerModel,
    standard: &LerModel,
    budgets: &[usize],
    p_grid: &[f64],
) -> Result<CrossoverCurve> {
    if p_grid.is_empty() || p_grid.windows(2).any(|w| w[0] >= w[1]) || p_grid[0] <= 0.0 {
        return Err(Error::Config(
            "p grid must be nonempty, positive and ascending".into(),
        ));
    }
    let (p_lo, p_hi) = (p_grid[0], p_grid[p_grid.len() - 1]);
    let mut rows = Vec::new();
    for &budget in budgets {
        let Some(d_dia) = max_distance(Family::Diamond, budget) else {
            return Err(Error::Config(format!("budget {budget} admits no diamond code")));
        };
        let d_std = max_distance(Family::Standard, budget);
        let Some(ds) = d_std else {
            rows.push(CrossoverRow {
                budget,
                d_std,
                d_dia,
                status: CrossoverStatus::DiamondOnly,
                crossover_p: None,
                ratio: vec![None; p_grid.len()],
            });
            continue;
        };
        // ln(LER_dia / LER_std) = c + s ln p
        let s = diamond.b * d_dia as f64 - standard.b * ds as f64;
        let c = diamond.a - standard.a - diamond.b * d_dia as f64 * diamond.p_ref.ln()
            + standard.b * ds as f64 * standard.p_ref.ln();
        let root = (s != 0.0)
            .then(|| (-c / s).exp())
            .filter(|p| (p_lo..=p_hi).contains(p));
        rows.push(CrossoverRow {
            budget,
            d_std,
            d_dia,
            status: if root.is_some() {
                CrossoverStatus::Crossing
            } else {
                CrossoverStatus::Unbounded
            },
            crossover_p: root,
            ratio: p_grid
                .iter()
                .map(|&p| Some((diamond.log_ler(d_dia, p) - standard.log_ler(ds, p)).exp()))
                .collect(),
        });
    }
    Ok(CrossoverCurve {
        p_grid: p_grid.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::threshold::tests::synthetic;

    fn models() -> (LerModel, LerModel) {
        let dia = LerModel {
            family: Family::Diamond,
            a: -2.0,
            b: 0.5,
            p_ref: 0.0015,
            residual: 0.0,
        };
        let std = LerModel {
            family: Family::Standard,
            a: -2.3,
            b: 0.5,
            p_ref: 0.0045,
            residual: 0.0,
        };
        (dia, std)
    }

    #[test]
    fn fit_recovers_parameters() {
        let ps = [2e-4, 4e-4, 8e-4, 1.6e-3, 3e-3];
        let pts = synthetic(Family::Standard, &[3, 5, 7], &ps, |d, p| {
            (-2.0 + 0.6 * d as f64 * (p / 0.005f64).ln()).exp()
        });
        let m = fit_ler_model(&pts, 0.005).unwrap();
        assert!((m.a + 2.0).abs() < 0.05 && (m.b - 0.6).abs() < 0.01, "{m:?}");
        assert!(fit_ler_model(&pts[..1], 0.005).is_err());
        assert!(fit_ler_model(&[], 0.005).is_err());
    }

    #[test]
    fn max_distance_matches_linear_scan() {
        let lines = |f, dmax: usize| (2..=dmax).map(|d| family_lines(f, d)).collect::<Vec<_>>();
        for f in [Family::Standard, Family::Diamond] {
            let table = lines(f, 200);
            assert!(table.windows(2).all(|w| w[0] < w[1]));
            for budget in (10..table[198]).step_by(997).chain([table[40], table[40] - 1]) {
                let scan = (2..=200).filter(|&d| table[d - 2] <= budget).max();
                assert_eq!(max_distance(f, budget), scan, "{f} {budget}");
            }
        }
    }

    #[test]
    fn ratio_tends_to_root_six_over_three_and_a_half() {
        let r = distance_ratio(&[100_000]).unwrap()[0];
        let target = (6.0f64 / 3.5).sqrt();
        assert!((r.ratio.unwrap() / target - 1.0).abs() < 0.03, "{r:?}");
    }

    #[test]
    fn tiny_budgets() {
        let dia2 = family_lines(Family::Diamond, 2);
        let std2 = family_lines(Family::Standard, 2);
        assert!(dia2 < std2);
        let r = distance_ratio(&[dia2]).unwrap()[0];
        assert_eq!((r.d_dia, r.d_std, r.ratio), (Some(2), None, None));
        assert!(distance_ratio(&[dia2 - 1]).is_err());
        let (dia, std) = models();
        let c = crossover_analysis(&dia, &std, &[dia2], &[1e-4, 1e-3]).unwrap();
        assert_eq!(c.rows[0].status, CrossoverStatus::DiamondOnly);
    }

    #[test]
    fn crossing_satisfies_both_models() {
        let (dia, std) = models();
        let budgets: Vec<usize> = (200..6000).step_by(50).collect();
        let grid: Vec<f64> = (0..40).map(|i| 1e-5 * 1.2f64.powi(i)).collect();
        let c = crossover_analysis(&dia, &std, &budgets, &grid).unwrap();
        let mut seen = 0;
        for r in &c.rows {
            if let Some(p) = r.crossover_p {
                seen += 1;
                let gap = dia.log_ler(r.d_dia, p) - std.log_ler(r.d_std.unwrap(), p);
                assert!(gap.abs() < 1e-9);
            }
        }
        assert!(seen > 10);
    }

    #[test]
    fn jumps_follow_distance_changes() {
        let (dia, std) = models();
        let budgets: Vec<usize> = (300..20_000).step_by(25).collect();
        let grid: Vec<f64> = (0..80).map(|i| 1e-7 * 1.2f64.powi(i)).collect();
        let c = crossover_analysis(&dia, &std, &budgets, &grid).unwrap();
        let (mut ups, mut downs) = (0, 0);
        for w in c.rows.windows(2) {
            let (Some(p0), Some(p1)) = (w[0].crossover_p, w[1].crossover_p) else {
                continue;
            };
            match (w[1].d_dia > w[0].d_dia, w[1].d_std > w[0].d_std) {
                (true, false) => {
                    assert!(p1 > p0);
                    ups += 1;
                }
                (false, true) => {
                    assert!(p1 < p0);
                    downs += 1;
                }
                (false, false) => assert_eq!(p0, p1),
                _ => {}
            }
        }
        assert!(ups > 3 && downs > 3, "{ups} {downs}");
    }
}
