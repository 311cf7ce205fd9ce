//! Truncated electric fields `E_η` in the extended space and the windowed
//! renormalized energy `W_η`.

mod background;
mod scaling;
mod truncation;
mod vertical;
mod window;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Hyperrectangle, Region};
use crate::kernels::KernelSpec;
use crate::model::{Configuration, DensityField};

pub use background::background_gradient;
pub use scaling::rescale_energy;
pub use truncation::{
    calibrated_constant, extrapolate_w, truncation_difference, truncation_rate, TruncationDifference,
    WEstimate,
};
pub use vertical::{vertical_profile, vertical_profile_with};
pub use window::window_energy;

/// Charges `Λ` on `ℝ^d × {0}`, a neutralizing background and a truncation
/// radius. Immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct FieldContext {
    pub spec: KernelSpec,
    pub charges: Configuration,
    pub background: Option<DensityField>,
    pub eta: f64,
}

impl FieldContext {
    pub fn new(
        spec: KernelSpec,
        charges: Configuration,
        background: Option<DensityField>,
        eta: f64,
    ) -> Result<Self> {
        if charges.dim() != spec.d {
            return Err(Error::Invalid("charges must live in R^d".into()));
        }
        if let Some(b) = &background {
            if b.dim() != spec.d {
                return Err(Error::Invalid("background must live in R^d".into()));
            }
        }
        check_eta(eta)?;
        Ok(FieldContext {
            spec,
            charges,
            background,
            eta,
        })
    }

    /// Same context at another truncation radius.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(FieldContext { eta, ..self.clone() })
    }

    /// `max m` of the background (0 without one).
    pub fn max_density(&self) -> f64 {
        self.background.as_ref().map_or(0.0, DensityField::max_density)
    }

    /// Writes `E_η(X)` for truncation `eta` into `out`.
    pub(crate) fn field_into(&self, x: &[f64], eta: f64, out: &mut [f64]) -> Result<()> {
        let d = self.spec.d;
        let eta2 = eta * eta;
        out.fill(0.0);
        let mut rel = [0.0f64; 4];
        for p in self.charges.points() {
            let mut r2 = 0.0;
            for i in 0..x.len() {
                rel[i] = x[i] - if i < d { p[i] } else { 0.0 };
                r2 += rel[i] * rel[i];
            }
            if r2 <= eta2 {
                continue;
            }
            let f = self.spec.grad_factor(r2);
            for i in 0..x.len() {
                out[i] += f * rel[i];
            }
        }
        if let Some(bg) = &self.background {
            let b = background_gradient(&self.spec, bg, x)?;
            for (o, v) in out.iter_mut().zip(b) {
                *o -= v;
            }
        }
        Ok(())
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("truncation radius must lie in (0, 1), got {eta}")));
    }
    Ok(())
}

/// `E_η(X) = Σ_p ∇g_η(X − (p, 0)) − ∇(g * m δ_{ℝ^d})(X)`.
pub fn e_eta_at(ctx: &FieldContext, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != ctx.spec.ext_dim() {
        return Err(Error::Invalid(format!(
            "field point must have {} coordinates",
            ctx.spec.ext_dim()
        )));
    }
    let mut out = vec![0.0; x.len()];
    ctx.field_into(x, ctx.eta, &mut out)?;
    Ok(out)
}

/// Quadrature layout for [`window_energy`].
///
/// The horizontal directions use Gauss–Legendre cells of side `cell` on a
/// lattice anchored at the origin (so disjoint windows share cell edges);
/// around each nearby charge a polar patch with `radial_order` nodes per
/// radial piece and `angular_order` nodes per eighth of a turn resolves the
/// truncation sphere. Vertical layers (`k = 1`) grow geometrically up to
/// `t_max` (default: the window diameter) starting from a bottom layer
/// clustered at `y = 0` with exponent `vertical_exponent`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub window: Region,
    pub t_max: Option<f64>,
    pub cell: f64,
    pub order: usize,
    pub radial_order: usize,
    pub angular_order: usize,
    pub vertical_exponent: Option<f64>,
}

impl QuadratureGrid {
    pub fn new(window: Hyperrectangle) -> Self {
        Self::for_region(Region::from_box(window))
    }

    pub fn for_region(window: Region) -> Self {
        QuadratureGrid {
            window,
            t_max: None,
            cell: 0.25,
            order: 8,
            radial_order: 12,
            angular_order: 12,
            vertical_exponent: None,
        }
    }

    /// Twice the resolution in every direction.
    pub fn refined(&self) -> Self {
        QuadratureGrid {
            cell: 0.5 * self.cell,
            radial_order: 2 * self.radial_order,
            angular_order: 2 * self.angular_order,
            ..self.clone()
        }
    }

    /// Horizontal nodes per unit length.
    pub fn nodes_per_unit(&self) -> f64 {
        self.order as f64 / self.cell
    }
}

/// Windowed renormalized energy with its two ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEnergyReport {
    pub w_eta: f64,
    /// `∫_{K×ℝ^k} |y|^γ |E_η|²`.
    pub quad_integral: f64,
    /// Total mass of the smeared charges inside the window.
    pub smeared_mass: f64,
    pub point_count: usize,
    pub volume: f64,
    pub per_volume: f64,
    pub eta: f64,
    /// Estimated weighted energy above `t_max` (`k = 1`); not included in
    /// `quad_integral`.
    pub tail_estimate: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_context_has_zero_field() {
        let spec = KernelSpec::riesz(1.0, 3).unwrap();
        let ctx = FieldContext::new(spec, Configuration::new(3, vec![]).unwrap(), None, 0.3).unwrap();
        assert_eq!(e_eta_at(&ctx, &[0.1, 0.2, 0.3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn truncation_switches_off_inside_ball() {
        let spec = KernelSpec::riesz(1.0, 3).unwrap();
        let c = Configuration::new(3, vec![0.0; 3]).unwrap();
        let ctx = FieldContext::new(spec, c, None, 0.25).unwrap();
        assert_eq!(e_eta_at(&ctx, &[0.1, 0.0, 0.1]).unwrap(), vec![0.0; 3]);
        let x = [0.5, 0.0, 0.0];
        let e = e_eta_at(&ctx, &x).unwrap();
        assert_relative_eq!(e[0], -4.0, epsilon = 1e-14);
        assert_eq!(e[1], 0.0);
    }

    #[test]
    fn extended_point_dimension_is_checked() {
        let ctx = FieldContext::new(
            KernelSpec::log1d(),
            Configuration::new(1, vec![0.0]).unwrap(),
            None,
            0.1,
        )
        .unwrap();
        assert!(e_eta_at(&ctx, &[0.5]).is_err());
        let e = e_eta_at(&ctx, &[0.0, 0.5]).unwrap();
        assert_relative_eq!(e[1], -2.0, epsilon = 1e-14);
    }
}
