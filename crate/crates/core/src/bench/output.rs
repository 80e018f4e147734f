//! CSV tables and SVG plots. Everything here is a pure function of its input, so files are
//! byte-stable across runs.

use super::crossover::{CrossoverCurve, CrossoverStatus, DistanceRatio};
use super::sweep::LerPoint;
use crate::error::{Error, Result};
use crate::lattice::Family;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Empty("nothing to write".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| Ok(row?)).collect()
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_points_csv(points: &[LerPoint], path: &Path) -> Result<()> {
    write_csv(points, std::fs::File::create(path)?)
}

pub fn read_points_csv(path: &Path) -> Result<Vec<LerPoint>> {
    read_csv(std::fs::File::open(path)?)
}

/// One row per (budget, p) sample of a crossover curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverSample {
    pub budget: usize,
    pub d_std: Option<usize>,
    pub d_dia: usize,
    pub status: CrossoverStatus,
    pub crossover_p: Option<f64>,
    pub p: f64,
    pub ratio: Option<f64>,
}

pub fn crossover_samples(curve: &CrossoverCurve) -> Vec<CrossoverSample> {
    curve
        .rows
        .iter()
        .flat_map(|r| {
            curve
                .p_grid
                .iter()
                .zip(&r.ratio)
                .map(|(&p, &ratio)| CrossoverSample {
                    budget: r.budget,
                    d_std: r.d_std,
                    d_dia: r.d_dia,
                    status: r.status,
                    crossover_p: r.crossover_p,
                    p,
                    ratio,
                })
        })
        .collect()
}

pub fn ratio_csv(rows: &[DistanceRatio]) -> Result<String> {
    csv_string(rows)
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        let t = if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        };
        self.from + t * (self.to - self.from)
    }

    /// Decades for log axes, five even steps otherwise.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().ceil() as i32, self.hi.log10().floor() as i32);
            (a..=b).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=5)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 5.0)
                .collect()
        }
    }
}

/// Pads a log range to whole decades, a linear one not at all.
fn log_range(lo: f64, hi: f64) -> (f64, f64) {
    let lo = 10f64.powf(lo.log10().floor());
    let hi = 10f64.powf(hi.log10().ceil());
    if lo == hi {
        (lo, lo * 10.0)
    } else {
        (lo, hi)
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else {
        format!("{}", v.round() as i64)
    }
}

fn frame(svg: &mut String, x: &Axis, y: &Axis, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for t in x.ticks() {
        let px = x.map(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            H - BOTTOM,
            H - BOTTOM + 16.0,
            tick_label(t, x.log)
        );
    }
    for t in y.ticks() {
        let py = y.map(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            py + 4.0,
            tick_label(t, y.log)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0
    );
}

fn family_colour(f: Family) -> &'static str {
    match f {
        Family::Standard => "#1f5fa8",
        Family::Diamond => "#c8372d",
    }
}

/// Log-log LER against p, one polyline with CI bars per (family, d).
pub fn ler_svg(points: &[LerPoint]) -> Result<String> {
    let shown: Vec<&LerPoint> = points.iter().filter(|p| p.p > 0.0 && p.errors > 0).collect();
    if shown.is_empty() {
        return Err(Error::Empty("no points with logical errors to plot".into()));
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, g: &dyn Fn(&LerPoint) -> f64| {
        shown.iter().fold(init, |a, p| f(a, g(p)))
    };
    let (px_lo, px_hi) = log_range(fold(f64::min, f64::MAX, &|p| p.p), fold(f64::max, 0.0, &|p| p.p));
    let (py_lo, py_hi) = log_range(
        fold(f64::min, f64::MAX, &|p| p.ci_low.max(p.ler / 10.0)),
        fold(f64::max, 0.0, &|p| p.ci_high),
    );
    let x = Axis {
        lo: px_lo,
        hi: px_hi,
        log: true,
        from: LEFT,
        to: W - RIGHT,
    };
    let y = Axis {
        lo: py_lo,
        hi: py_hi,
        log: true,
        from: H - BOTTOM,
        to: TOP,
    };
    let mut svg = String::new();
    frame(
        &mut svg,
        &x,
        &y,
        "physical error rate p",
        "logical error rate per block",
    );
    let mut curves: BTreeMap<(Family, usize), Vec<&LerPoint>> = BTreeMap::new();
    for p in &shown {
        curves.entry((p.family, p.d)).or_default().push(p);
    }
    for (i, ((family, d), mut pts)) in curves.into_iter().enumerate() {
        pts.sort_by(|a, b| a.p.total_cmp(&b.p));
        let colour = family_colour(family);
        let dash = ["", "6 3", "2 3", "8 3 2 3"][d / 2 % 4];
        let path: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", x.map(p.p), y.map(p.ler)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
            path.join(" ")
        );
        for p in &pts {
            let (cx, cy) = (x.map(p.p), y.map(p.ler));
            let lo = y.map(p.ci_low.max(y.lo));
            let _ = writeln!(
                svg,
                r#"<line x1="{cx:.2}" y1="{lo:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{colour}"/><circle cx="{cx:.2}" cy="{cy:.2}" r="2.5" fill="{colour}"/>"#,
                y.map(p.ci_high)
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="1.5" stroke-dasharray="{dash}"/><text x="{:.2}" y="{:.2}">{family} d={d}</text>"#,
            W - RIGHT + 10.0,
            W - RIGHT + 34.0,
            W - RIGHT + 40.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Budget against p, cells shaded by log10(LER_dia / LER_std): blue where diamond wins,
/// red where standard wins, grey line at the crossover.
pub fn crossover_svg(curve: &CrossoverCurve) -> Result<String> {
    if curve.rows.is_empty() || curve.p_grid.is_empty() {
        return Err(Error::Empty("empty crossover curve".into()));
    }
    let (b_lo, b_hi) = (
        curve.rows[0].budget as f64,
        curve.rows[curve.rows.len() - 1].budget as f64,
    );
    let x = Axis {
        lo: b_lo,
        hi: if b_hi > b_lo { b_hi } else { b_lo + 1.0 },
        log: false,
        from: LEFT,
        to: W - RIGHT,
    };
    let (p_lo, p_hi) = log_range(curve.p_grid[0], curve.p_grid[curve.p_grid.len() - 1]);
    let y = Axis {
        lo: p_lo,
        hi: p_hi,
        log: true,
        from: H - BOTTOM,
        to: TOP,
    };
    let mut svg = String::new();
    frame(&mut svg, &x, &y, "control lines", "physical error rate p");
    let cw = (W - LEFT - RIGHT) / curve.rows.len() as f64;
    let ps = &curve.p_grid;
    for (i, r) in curve.rows.iter().enumerate() {
        let cx = LEFT + cw * i as f64;
        for (j, &p) in ps.iter().enumerate() {
            // Cell spans halfway to the neighbouring grid points.
            let lo = if j == 0 { p } else { (ps[j - 1] * p).sqrt() };
            let hi = if j + 1 == ps.len() {
                p
            } else {
                (ps[j + 1] * p).sqrt()
            };
            let fill = match r.ratio[j] {
                None => "#3b6fb6".to_string(),
                Some(v) => {
                    let t = (v.log10() / 3.0).clamp(-1.0, 1.0);
                    let (rr, gg, bb) = if t < 0.0 {
                        (255.0 * (1.0 + t), 255.0 * (1.0 + t * 0.6), 255.0)
                    } else {
                        (255.0, 255.0 * (1.0 - t * 0.8), 255.0 * (1.0 - t))
                    };
                    format!("#{:02x}{:02x}{:02x}", rr as u8, gg as u8, bb as u8)
                }
            };
            let (y0, y1) = (y.map(hi), y.map(lo));
            let _ = writeln!(
                svg,
                r#"<rect x="{cx:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                cw + 0.01,
                (y1 - y0).max(0.5)
            );
        }
    }
    let mut segments: Vec<Vec<String>> = vec![Vec::new()];
    for (i, r) in curve.rows.iter().enumerate() {
        match r.crossover_p {
            Some(p) => {
                let cx = LEFT + cw * i as f64;
                let py = y.map(p);
                let seg = segments.last_mut().expect("nonempty");
                seg.push(format!("{cx:.2},{py:.2}"));
                seg.push(format!("{:.2},{py:.2}", cx + cw));
            }
            None => segments.push(Vec::new()),
        }
    }
    for s in segments.iter().filter(|s| !s.is_empty()) {
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#555" stroke-width="2"/>"##,
            s.join(" ")
        );
    }
    let lx = W - RIGHT + 10.0;
    let _ = writeln!(
        svg,
        r##"<rect x="{lx:.2}" y="30" width="12" height="12" fill="#3b6fb6"/><text x="{:.2}" y="40">diamond better</text>"##,
        lx + 18.0
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{lx:.2}" y="50" width="12" height="12" fill="#ff3300"/><text x="{:.2}" y="60">standard better</text>"##,
        lx + 18.0
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{lx:.2}" y1="76" x2="{:.2}" y2="76" stroke="#555" stroke-width="2"/><text x="{:.2}" y="80">crossover</text>"##,
        lx + 12.0,
        lx + 18.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::crossover::{crossover_analysis, distance_ratio, LerModel};
    use crate::bench::threshold::tests::synthetic;

    fn points() -> Vec<LerPoint> {
        let mut v = synthetic(Family::Standard, &[3, 5], &[0.001, 0.003, 0.01], |d, p| {
            (p / 0.006f64).powi(d as i32 / 2 + 1)
        });
        v.extend(synthetic(
            Family::Diamond,
            &[3, 5, 7],
            &[0.0005, 0.001, 0.002],
            |d, p| (p / 0.002f64).powi(d as i32 / 2 + 1) * 0.3,
        ));
        v
    }

    #[test]
    fn csv_round_trip() {
        let pts = points();
        let text = csv_string(&pts).unwrap();
        let back: Vec<LerPoint> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, pts);
        assert_eq!(csv_string(&pts).unwrap(), text);
        assert!(csv_string::<LerPoint>(&[]).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        write_points_csv(&pts, &path).unwrap();
        assert_eq!(read_points_csv(&path).unwrap(), pts);
    }

    #[test]
    fn ler_plot_has_one_curve_per_family_and_distance() {
        let svg = ler_svg(&points()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 5);
        assert!(svg.contains("diamond d=7") && svg.contains("standard d=3"));
        assert_eq!(svg, ler_svg(&points()).unwrap());
        assert!(ler_svg(&[]).is_err());
    }

    #[test]
    fn crossover_outputs() {
        let m = |family, a, p_ref| LerModel {
            family,
            a,
            b: 0.5,
            p_ref,
            residual: 0.0,
        };
        let budgets: Vec<usize> = (50..3000).step_by(50).collect();
        let grid: Vec<f64> = (0..30).map(|i| 1e-5 * 1.25f64.powi(i)).collect();
        let c = crossover_analysis(
            &m(Family::Diamond, -2.0, 0.0015),
            &m(Family::Standard, -2.3, 0.0045),
            &budgets,
            &grid,
        )
        .unwrap();
        let samples = crossover_samples(&c);
        assert_eq!(samples.len(), budgets.len() * grid.len());
        let text = csv_string(&samples).unwrap();
        let back: Vec<CrossoverSample> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, samples);
        let svg = crossover_svg(&c).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        let r = ratio_csv(&distance_ratio(&[100, 1000]).unwrap()).unwrap();
        assert_eq!(r.lines().count(), 3);
    }
}
