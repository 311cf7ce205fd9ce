use serde::{Deserialize, Serialize};

use super::{window_energy, FieldContext, QuadratureGrid, WindowEnergyReport};
use crate::error::{Error, Result};
use crate::kernels::{KernelKind, KernelSpec};

const FIXTURE: &str = include_str!("../../fixtures/truncation_constants.json");

#[derive(Debug, Deserialize)]
struct Fixture {
    entries: Vec<FixtureEntry>,
}

#[derive(Debug, Deserialize)]
struct FixtureEntry {
    kind: String,
    s: f64,
    d: usize,
    #[serde(rename = "C")]
    c: f64,
}

fn kind_name(spec: &KernelSpec) -> &'static str {
    match spec.kind {
        KernelKind::Riesz { .. } => "riesz",
        KernelKind::Log1d => "log1d",
        KernelKind::Log2d => "log2d",
    }
}

/// Empirically calibrated constant of the truncation-difference bound for
/// `(kind, s, d)`.
pub fn calibrated_constant(spec: &KernelSpec) -> Result<f64> {
    let fx: Fixture = serde_json::from_str(FIXTURE)
        .map_err(|e| Error::Invalid(format!("malformed calibration fixture: {e}")))?;
    fx.entries
        .iter()
        .find(|e| e.kind == kind_name(spec) && e.d == spec.d && (e.s - spec.s()).abs() < 1e-9)
        .map(|e| e.c)
        .ok_or_else(|| {
            Error::Unsupported(format!(
                "no calibrated truncation constant for {} with s = {}, d = {}",
                kind_name(spec),
                spec.s(),
                spec.d
            ))
        })
}

/// `min(η^{d−s}, η^d |log η|)`.
pub fn truncation_rate(spec: &KernelSpec, eta: f64) -> f64 {
    let d = spec.d as f64;
    eta.powf(d - spec.s()).min(eta.powf(d) * eta.ln().abs())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationDifference {
    /// `W_α(A) − W_η(A)`.
    pub delta_w: f64,
    /// `C · max m · #(Λ ∩ A_η) · min(η^{d−s}, η^d |log η|)`.
    pub bound_i: f64,
    /// Unordered pairs of charges in `A_η` closer than `2η`.
    pub count_pairs: usize,
    /// `#(Λ ∩ A_η)`.
    pub points: usize,
    pub alpha_report: WindowEnergyReport,
    pub eta_report: WindowEnergyReport,
}

/// Change of the window energy when the truncation radius drops from `eta`
/// to `alpha` on the window of `grid`.
///
/// Requires every charge to stay at distance `≥ eta` from the window
/// boundary; use a crenel cube or crenel domain to arrange this.
pub fn truncation_difference(
    ctx: &FieldContext,
    grid: &QuadratureGrid,
    alpha: f64,
    eta: f64,
) -> Result<TruncationDifference> {
    if !(alpha > 0.0 && alpha < eta && eta < 1.0) {
        return Err(Error::Domain(format!("need 0 < alpha < eta < 1, got alpha = {alpha}, eta = {eta}")));
    }
    let a = &grid.window;
    let bbox = a.bounding_box();
    let mut near = Vec::new();
    for p in ctx.charges.points() {
        if bbox.distance_to(p) >= eta {
            continue;
        }
        let dist = a.boundary_distance(p);
        if dist < eta {
            return Err(Error::Geometry(format!(
                "charge at distance {dist} < eta = {eta} from the window boundary; \
                 adjust the window with crenel_cube or crenel_domain"
            )));
        }
        if a.contains(p) {
            near.push(p);
        }
    }
    let mut count_pairs = 0;
    for (i, p) in near.iter().enumerate() {
        for q in &near[i + 1..] {
            let r2: f64 = p.iter().zip(q.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            if r2 < 4.0 * eta * eta {
                count_pairs += 1;
            }
        }
    }
    let eta_report = window_energy(&ctx.with_eta(eta)?, grid)?;
    let alpha_report = window_energy(&ctx.with_eta(alpha)?, grid)?;
    let c = calibrated_constant(&ctx.spec)?;
    let bound_i = c * ctx.max_density() * near.len() as f64 * truncation_rate(&ctx.spec, eta);
    Ok(TruncationDifference {
        delta_w: alpha_report.w_eta - eta_report.w_eta,
        bound_i,
        count_pairs,
        points: near.len(),
        alpha_report,
        eta_report,
    })
}

/// Extrapolation of `W_η` to `η → 0` from a halving ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WEstimate {
    /// Estimate of the limit; an extrapolation, not a computed value.
    pub estimate: f64,
    /// Spread between the two finest Richardson values.
    pub spread: f64,
    pub rate: f64,
    pub ladder: Vec<(f64, f64)>,
}

/// Richardson extrapolation of `(η, W_η)` pairs with `η` halving each step,
/// assuming `W_η = W + C η^rate + …`.
pub fn extrapolate_w(ladder: &[(f64, f64)], rate: f64) -> Result<WEstimate> {
    if ladder.len() < 2 {
        return Err(Error::Invalid("extrapolation needs at least two truncation radii".into()));
    }
    for w in ladder.windows(2) {
        if ((w[0].0 / w[1].0) - 2.0).abs() > 1e-9 {
            return Err(Error::Invalid("extrapolation ladder must halve eta at each step".into()));
        }
    }
    let f = 2f64.powf(rate);
    let rich: Vec<f64> = ladder.windows(2).map(|w| (f * w[1].1 - w[0].1) / (f - 1.0)).collect();
    let n = rich.len();
    let estimate = rich[n - 1];
    let spread = if n >= 2 { (rich[n - 1] - rich[n - 2]).abs() } else { f64::NAN };
    Ok(WEstimate {
        estimate,
        spread,
        rate,
        ladder: ladder.to_vec(),
    })
}
