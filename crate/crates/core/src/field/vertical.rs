use rayon::prelude::*;

use super::FieldContext;
use crate::error::{Error, Result};
use crate::geometry::Hyperrectangle;
use crate::quadrature::gauss_legendre;

const CELL: f64 = 0.25;
const ORDER: usize = 8;
const MAX_LAYERS: usize = 400;

/// Tail energies `C₂(E, t, K) = |K|^{-1} ∫_{K×(ℝ∖[−t,t])} |y|^γ |E|²` of the
/// context field for each `t` in `t_values` (`k = 1`, `d = 1`).
///
/// Layers above the largest `t` are added until they become negligible and
/// the remainder is extrapolated geometrically; values are accumulated from
/// the top so the profile is non-increasing in `t`.
pub fn vertical_profile(ctx: &FieldContext, k: &Hyperrectangle, t_values: &[f64]) -> Result<Vec<f64>> {
    if ctx.spec.k == 0 {
        return Err(Error::Unsupported("vertical profiles need an extension dimension k = 1".into()));
    }
    if ctx.spec.d != 1 {
        return Err(Error::Unsupported("vertical profiles are implemented for d = 1".into()));
    }
    let field = |x: &[f64]| -> Result<Vec<f64>> {
        let mut out = vec![0.0; 2];
        // above every truncation sphere E_η = E
        ctx.field_into(x, ctx.eta.min(0.5 * x[1].abs()), &mut out)?;
        Ok(out)
    };
    vertical_profile_with(&field, ctx.spec.gamma, k, t_values)
}

/// [`vertical_profile`] for an arbitrary field `(x, y) ↦ E` that is even
/// in `y` in energy.
pub fn vertical_profile_with(
    field: &(dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync),
    gamma: f64,
    k: &Hyperrectangle,
    t_values: &[f64],
) -> Result<Vec<f64>> {
    if k.dim() != 1 {
        return Err(Error::Unsupported("vertical profiles are implemented for d = 1".into()));
    }
    if t_values.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Invalid("heights must be positive and finite".into()));
    }
    if t_values.is_empty() {
        return Ok(Vec::new());
    }
    let mut ts: Vec<f64> = t_values.to_vec();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    let layer = |a: f64, b: f64| layer_energy(field, gamma, k, a, b);
    // energy between consecutive heights
    let mut between = Vec::with_capacity(ts.len());
    for w in ts.windows(2) {
        let mut acc = 0.0;
        let mut a = w[0];
        while a < w[1] {
            let b = (1.5 * a).min(w[1]);
            acc += layer(a, b)?;
            a = b;
        }
        between.push(acc);
    }
    // energy above the top height
    let mut top = 0.0;
    let mut a = *ts.last().unwrap();
    let mut prev = f64::NAN;
    for _ in 0..MAX_LAYERS {
        let b = 1.5 * a;
        let v = layer(a, b)?;
        top += v;
        a = b;
        if v <= 1e-12 * top {
            break;
        }
        if v < prev && prev > 0.0 && v <= 1e-9 * top {
            let q = v / prev;
            top += v * q / (1.0 - q);
            break;
        }
        prev = v;
    }
    let mut acc = vec![0.0; ts.len()];
    let n = ts.len();
    acc[n - 1] = top;
    for i in (0..n - 1).rev() {
        acc[i] = acc[i + 1] + between[i];
    }
    let vol = k.volume();
    Ok(t_values
        .iter()
        .map(|t| {
            let i = ts.iter().position(|x| x == t).unwrap();
            2.0 * acc[i] / vol
        })
        .collect())
}

fn layer_energy(
    field: &(dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync),
    gamma: f64,
    k: &Hyperrectangle,
    a: f64,
    b: f64,
) -> Result<f64> {
    let rule = gauss_legendre(ORDER);
    let cell = CELL.max(0.0).min(k.side(0));
    let n = (k.side(0) / cell).ceil() as usize;
    let h = k.side(0) / n as f64;
    let vals: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x0 = k.lo(0) + i as f64 * h;
            let mut acc = 0.0;
            for (x, wx) in rule.mapped(x0, x0 + h) {
                for (y, wy) in rule.mapped(a, b) {
                    let e = field(&[x, y])?;
                    acc += wx * wy * y.powf(gamma) * (e[0] * e[0] + e[1] * e[1]);
                }
            }
            Ok(acc)
        })
        .collect();
    vals.into_iter().sum()
}
