//! Statistics on computed minimizers: discrepancies, window-energy
//! uniformity, number variance and lattice field decay.

mod lattice;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{window_energy, FieldContext, QuadratureGrid, WindowEnergyReport};
use crate::geometry::{find_crenel_cube, Hyperrectangle, Region};
use crate::model::{Configuration, DensityField};

pub use lattice::{lattice_decay_fit, DecayFit, LatticeOptions};

/// Ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// OLS of `log y` against `log x`, skipping non-positive values.
pub fn loglog_fit(points: &[(f64, f64)]) -> Option<Fit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    linear_fit(&pts)
}

pub fn linear_fit(pts: &[(f64, f64)]) -> Option<Fit> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(Fit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub stdev: f64,
    /// `stdev / |mean|`.
    pub cv: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let stdev = var.sqrt();
        Some(Summary {
            mean,
            stdev,
            cv: stdev / mean.abs(),
            count: values.len(),
        })
    }
}

/// One scanned window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub center: Vec<f64>,
    pub ell: f64,
    pub window: Hyperrectangle,
    pub report: Option<WindowEnergyReport>,
    pub discrepancy: Option<f64>,
}

/// Rows plus a summary of per-volume energies (or of `|discrepancy|` for a
/// discrepancy scan) and an optional log–log fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub windows: Vec<ScanRow>,
    pub summary: Option<Summary>,
    pub fit: Option<Fit>,
}

fn count_half_open(config: &Configuration, k: &Hyperrectangle) -> usize {
    config.count_in(k)
}

/// `#(Λ ∩ K) − ∫_K m`, counting on the half-open window.
pub fn discrepancy(config: &Configuration, mu: &DensityField, k: &Hyperrectangle) -> Result<f64> {
    if k.dim() != config.dim() || k.dim() != mu.dim() {
        return Err(Error::Invalid("window, points and density must share the dimension".into()));
    }
    if !mu.support().contains_box(k) {
        return Err(Error::Geometry("discrepancy window is not inside the support".into()));
    }
    Ok(count_half_open(config, k) as f64 - mu.mass_in_box(k)?)
}

/// Centers `a + (i/(g−1) − 1/2) · spread` on a `g^d` grid.
fn center_grid(center: &[f64], per_axis: usize, spread: f64) -> Vec<Vec<f64>> {
    let d = center.len();
    let g = per_axis.max(1);
    let offs: Vec<f64> = (0..g)
        .map(|i| if g == 1 { 0.0 } else { (i as f64 / (g - 1) as f64 - 0.5) * spread })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in 0..d {
        out = out
            .into_iter()
            .flat_map(|c: Vec<f64>| {
                offs.iter().map(move |o| {
                    let mut c = c.clone();
                    c.push(center[axis] + o);
                    c
                })
            })
            .collect();
    }
    out
}

/// Maximum `|discrepancy|` over a grid of `per_axis^d` centers within unit
/// distance of `center`, for each size `ℓ`, with the log–log fit of the
/// maxima against `ℓ`.
///
/// Every window grown by `margin` must lie in the support.
pub fn discrepancy_scan(
    config: &Configuration,
    mu: &DensityField,
    center: &[f64],
    sizes: &[f64],
    margin: f64,
    per_axis: usize,
) -> Result<ScanResult> {
    let support = mu.support();
    let mut rows = Vec::new();
    for &ell in sizes {
        let mut best: Option<(f64, Vec<f64>, Hyperrectangle, f64)> = None;
        for c in center_grid(center, per_axis, 1.0) {
            let k = Hyperrectangle::cube(&c, ell)?;
            if !support.contains_box(&k.grown(2.0 * margin)?) {
                return Err(Error::Geometry(format!(
                    "window of side {ell} at {c:?} leaves the interior margin {margin}"
                )));
            }
            let disc = discrepancy(config, mu, &k)?;
            if best.as_ref().is_none_or(|b| disc.abs() > b.0) {
                best = Some((disc.abs(), c, k, disc));
            }
        }
        if let Some((_, c, k, disc)) = best {
            rows.push(ScanRow {
                center: c,
                ell,
                window: k,
                report: None,
                discrepancy: Some(disc),
            });
        }
    }
    let abs: Vec<f64> = rows.iter().filter_map(|r| r.discrepancy.map(f64::abs)).collect();
    let fit = loglog_fit(&rows.iter().map(|r| (r.ell, r.discrepancy.unwrap().abs())).collect::<Vec<_>>());
    Ok(ScanResult {
        summary: Summary::of(&abs),
        windows: rows,
        fit,
    })
}

/// Per-volume window energies on crenel-adjusted cubes `K_ℓ(a)`.
///
/// Each cube is shifted to a crenel cube whose boundary stays at distance
/// `≥ min(r1, ctx.eta)` (halved if needed) from all charges before the
/// energy is computed with the resolution of `template`. The summary's
/// coefficient of variation is the uniformity measure across windows.
pub fn equidistribution_scan(
    ctx: &FieldContext,
    centers: &[Vec<f64>],
    ell: f64,
    template: &QuadratureGrid,
    r1: f64,
) -> Result<ScanResult> {
    let points = ctx.charges.to_vecs();
    let mut rows = Vec::with_capacity(centers.len());
    for c in centers {
        let k = Hyperrectangle::cube(c, ell)?;
        let cren = find_crenel_cube(&points, &k, r1.min(ctx.eta))?;
        let grid = QuadratureGrid {
            window: Region::from_box(cren.cube.clone()),
            ..template.clone()
        };
        let report = window_energy(ctx, &grid)?;
        let disc = match &ctx.background {
            Some(mu) if mu.support().contains_box(&cren.cube) => Some(discrepancy(&ctx.charges, mu, &cren.cube)?),
            _ => None,
        };
        rows.push(ScanRow {
            center: c.clone(),
            ell,
            window: cren.cube,
            report: Some(report),
            discrepancy: disc,
        });
    }
    let pv: Vec<f64> = rows.iter().filter_map(|r| r.report.as_ref().map(|x| x.per_volume)).collect();
    Ok(ScanResult {
        summary: Summary::of(&pv),
        windows: rows,
        fit: None,
    })
}

/// Empirical variance of `#(Λ ∩ K_ℓ(c))` over `num_centers` seeded uniform
/// centers with `K_ℓ(c)` inside the support (inside the bounding box of the
/// points for an unbounded support).
pub fn number_variance(
    config: &Configuration,
    mu: &DensityField,
    ell: f64,
    num_centers: usize,
    seed: u64,
) -> Result<(f64, Vec<usize>)> {
    let d = config.dim();
    let support = mu.support();
    let bbox = match support.bounding_box() {
        Some(b) => b,
        None => {
            let pts = config.to_vecs();
            if pts.is_empty() {
                return Err(Error::Geometry("no points to bound the eligible region".into()));
            }
            let lo: Vec<f64> = (0..d).map(|i| pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min)).collect();
            let hi: Vec<f64> = (0..d).map(|i| pts.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
            Hyperrectangle::from_bounds(&lo, &hi)?
        }
    };
    let h = 0.5 * ell;
    if (0..d).any(|i| bbox.side(i) <= ell) {
        return Err(Error::Geometry(format!("no window of side {ell} fits in the eligible region")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(num_centers);
    let mut attempts = 0usize;
    let mut c = vec![0.0; d];
    while counts.len() < num_centers {
        attempts += 1;
        if attempts > 1000 * num_centers.max(1) {
            return Err(Error::Geometry("eligible center region is empty or negligible".into()));
        }
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = rng.random_range(bbox.lo(i) + h..bbox.hi(i) - h);
        }
        let k = Hyperrectangle::cube(&c, ell)?;
        if support.contains_box(&k) && bbox.contains_box(&k) {
            counts.push(count_half_open(config, &k));
        }
    }
    let v: Vec<f64> = counts.iter().map(|&x| x as f64).collect();
    let var = Summary::of(&v).map_or(0.0, |s| s.stdev * s.stdev);
    Ok((var, counts))
}
