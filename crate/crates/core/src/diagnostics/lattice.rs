use serde::{Deserialize, Serialize};

use super::{loglog_fit, Fit};
use crate::error::{Error, Result};
use crate::field::{background_gradient, vertical_profile_with};
use crate::geometry::Hyperrectangle;
use crate::kernels::KernelSpec;
use crate::model::DensityField;

/// Truncation of the direct lattice sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeOptions {
    /// Lattice points `j a` with `|j| ≤ radius` are summed explicitly.
    pub radius: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions { radius: 400 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub constant: f64,
    pub r2: f64,
    /// `−(s − d + 2) + 0.4`.
    pub bound: f64,
    pub pass: bool,
    pub profile: Vec<(f64, f64)>,
    pub radius: usize,
}

/// Decay of `C₂(E, t, K)` for the field of a unit-density lattice with its
/// neutralizing background, `K` one period.
///
/// The field is the lattice sum over `|j| ≤ R` minus the field of the
/// background on `[−(R+½)a, (R+½)a]`, plus the Euler–Maclaurin correction
/// `(f'(z_+) − f'(z_−))/24` for the discarded cells. The fitted exponent of
/// `C₂` against `t` must not exceed `−(s − d + 2) + 0.4`.
pub fn lattice_decay_fit(
    basis: &[Vec<f64>],
    spec: &KernelSpec,
    t_values: &[f64],
    opts: LatticeOptions,
) -> Result<DecayFit> {
    if spec.k != 1 || spec.d != 1 {
        return Err(Error::Unsupported("lattice decay fits are implemented for d = 1, k = 1".into()));
    }
    if basis.len() != 1 || basis[0].len() != 1 {
        return Err(Error::Invalid("a one-dimensional lattice needs a 1x1 basis".into()));
    }
    let a = basis[0][0];
    if (a.abs() - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!(
            "lattice basis must have unit covolume (density 1), got |det| = {}",
            a.abs()
        )));
    }
    let a = a.abs();
    if opts.radius == 0 {
        return Err(Error::Invalid("summation radius must be positive".into()));
    }
    let r = opts.radius as f64;
    let edge = (r + 0.5) * a;
    let bg = DensityField::uniform_box(Hyperrectangle::from_bounds(&[-edge], &[edge])?, 1.0)?;
    let point_field = |x: f64, y: f64, z: f64| {
        let u = x - z;
        let f = spec.grad_factor(u * u + y * y);
        [f * u, f * y]
    };
    let field = |p: &[f64]| -> Result<Vec<f64>> {
        let (x, y) = (p[0], p[1]);
        let mut e = [0.0, 0.0];
        for j in -(opts.radius as i64)..=(opts.radius as i64) {
            let v = point_field(x, y, j as f64 * a);
            e[0] += v[0];
            e[1] += v[1];
        }
        let b = background_gradient(spec, &bg, p)?;
        let h = 1e-3;
        let deriv = |z: f64, c: usize| (point_field(x, y, z + h)[c] - point_field(x, y, z - h)[c]) / (2.0 * h);
        let mut out = vec![0.0; 2];
        for c in 0..2 {
            out[c] = e[c] - b[c] + (deriv(edge, c) - deriv(-edge, c)) / 24.0;
        }
        Ok(out)
    };
    let k = Hyperrectangle::from_bounds(&[-0.5 * a], &[0.5 * a])?;
    let c2 = vertical_profile_with(&field, spec.gamma, &k, t_values)?;
    let profile: Vec<(f64, f64)> = t_values.iter().copied().zip(c2).collect();
    let fit: Fit = loglog_fit(&profile)
        .ok_or_else(|| Error::Numeric("decay fit needs two positive profile values".into()))?;
    let bound = -(spec.s() - spec.d as f64 + 2.0) + 0.4;
    Ok(DecayFit {
        exponent: fit.slope,
        constant: fit.intercept.exp(),
        r2: fit.r2,
        bound,
        pass: fit.slope <= bound,
        profile,
        radius: opts.radius,
    })
}
