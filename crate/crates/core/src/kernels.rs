//! Interaction kernels `g`, their truncations at scale η, smeared charges
//! and the extension constant `c_{s,d}`.
//!
//! Points of the extended space ℝ^{d+k} are plain slices whose last `k`
//! coordinates are the vertical variable `y`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Hyperrectangle;
use crate::quadrature::clustered_nodes;

/// Functional form of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    /// `|x|^{-s}`.
    Riesz { s: f64 },
    /// `-log|x|` on the line.
    Log1d,
    /// `-log|x|` in the plane.
    Log2d,
}

/// A validated kernel together with its extension data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub d: usize,
    /// Extension dimension (0 for the Coulomb cases, 1 otherwise).
    pub k: usize,
    /// Weight exponent of `|y|^γ`, `γ = s - d + 2 - k`.
    pub gamma: f64,
    /// Constant with `-div(|y|^γ ∇g) = c_{s,d} δ_0` in ℝ^{d+k}.
    pub csd: f64,
}

/// Surface area of the unit sphere `S^{m-1} ⊂ ℝ^m`.
pub fn sphere_area(m: usize) -> f64 {
    match m {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 2.0) * sphere_area(m - 2),
    }
}

/// Volume of the unit ball of ℝ^m.
pub fn ball_volume(m: usize) -> f64 {
    if m == 0 {
        1.0
    } else {
        sphere_area(m) / m as f64
    }
}

impl KernelSpec {
    pub fn new(kind: KernelKind, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("dimension must be at least 1".into()));
        }
        let (s, k) = match kind {
            KernelKind::Riesz { s } => {
                let lower = (d as f64 - 2.0).max(0.0);
                if !(s.is_finite() && s >= lower && s < d as f64 && s > 0.0) {
                    return Err(Error::Invalid(format!(
                        "Riesz exponent must satisfy max(0, d-2) <= s < d with s > 0; got s = {s}, d = {d}"
                    )));
                }
                let coulomb = d >= 3 && s == d as f64 - 2.0;
                (s, if coulomb { 0 } else { 1 })
            }
            KernelKind::Log1d => {
                if d != 1 {
                    return Err(Error::Invalid("log1d requires d = 1".into()));
                }
                (0.0, 1)
            }
            KernelKind::Log2d => {
                if d != 2 {
                    return Err(Error::Invalid("log2d requires d = 2".into()));
                }
                (0.0, 0)
            }
        };
        let gamma = s - d as f64 + 2.0 - k as f64;
        if !(gamma > -1.0 && gamma < 1.0) {
            return Err(Error::Invalid(format!(
                "weight exponent gamma = {gamma} is outside (-1, 1)"
            )));
        }
        let mut spec = KernelSpec {
            kind,
            d,
            k,
            gamma,
            csd: f64::NAN,
        };
        spec.csd = csd_constant(&spec);
        Ok(spec)
    }

    pub fn riesz(s: f64, d: usize) -> Result<Self> {
        Self::new(KernelKind::Riesz { s }, d)
    }

    pub fn log1d() -> Self {
        Self::new(KernelKind::Log1d, 1).expect("log1d is valid")
    }

    pub fn log2d() -> Self {
        Self::new(KernelKind::Log2d, 2).expect("log2d is valid")
    }

    /// Exponent `s`, with `s = 0` for the logarithmic kernels.
    pub fn s(&self) -> f64 {
        match self.kind {
            KernelKind::Riesz { s } => s,
            _ => 0.0,
        }
    }

    pub fn is_log(&self) -> bool {
        !matches!(self.kind, KernelKind::Riesz { .. })
    }

    pub fn is_coulomb(&self) -> bool {
        self.k == 0
    }

    /// Dimension of the extended space.
    pub fn ext_dim(&self) -> usize {
        self.d + self.k
    }

    /// Radial profile `g(r)`.
    #[inline]
    pub fn g_radial(&self, r: f64) -> f64 {
        match self.kind {
            KernelKind::Riesz { s } => r.powf(-s),
            _ => -r.ln(),
        }
    }

    /// Radial derivative `g'(r)`.
    #[inline]
    pub fn dg_radial(&self, r: f64) -> f64 {
        match self.kind {
            KernelKind::Riesz { s } => -s * r.powf(-s - 1.0),
            _ => -1.0 / r,
        }
    }

    /// `g'(r)/r`, the factor with `∇g(X) = (g'(r)/r) X`.
    #[inline]
    pub fn grad_factor(&self, r2: f64) -> f64 {
        match self.kind {
            KernelKind::Riesz { s } => -s * r2.powf(-0.5 * s - 1.0),
            _ => -1.0 / r2,
        }
    }

    /// Radial profile as a function of `r²`.
    #[inline]
    pub fn g_of_r2(&self, r2: f64) -> f64 {
        match self.kind {
            KernelKind::Riesz { s } => r2.powf(-0.5 * s),
            _ => -0.5 * r2.ln(),
        }
    }

    /// Weight `|y|^γ` at a point of the extended space.
    #[inline]
    pub fn weight(&self, x: &[f64]) -> f64 {
        if self.k == 0 || self.gamma == 0.0 {
            1.0
        } else {
            x[self.d].abs().powf(self.gamma)
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `g(X)`; errors at the origin.
pub fn g_eval(spec: &KernelSpec, x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Domain("kernel is singular at the origin".into()));
    }
    Ok(spec.g_radial(r))
}

/// `∇g(X)`; errors at the origin.
pub fn grad_g(spec: &KernelSpec, x: &[f64]) -> Result<Vec<f64>> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::Domain("kernel gradient is singular at the origin".into()));
    }
    let f = spec.grad_factor(r2);
    Ok(x.iter().map(|v| f * v).collect())
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("eta must lie in (0, 1), got {eta}")))
    }
}

/// Truncated kernel `g_η = min(g, g(η))`, finite at the origin.
pub fn g_trunc(spec: &KernelSpec, x: &[f64], eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let r = norm(x);
    Ok(if r <= eta {
        spec.g_radial(eta)
    } else {
        spec.g_radial(r)
    })
}

/// `f_η = (g - g(η))_+`; `f64::INFINITY` at the origin.
pub fn f_eta(spec: &KernelSpec, x: &[f64], eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let r = norm(x);
    if r == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((spec.g_radial(r) - spec.g_radial(eta)).max(0.0))
}

/// Constant `c_{s,d}` of `-div(|y|^γ ∇g) = c_{s,d} δ_0`.
///
/// Coulomb kernels use the fundamental-solution constant. For `k = 1` the
/// constant is the weighted flux `-∫_{∂B_1} |y|^γ ∂_r g`, evaluated by
/// quadrature in the polar angle measured from the vertical axis.
pub fn csd_constant(spec: &KernelSpec) -> f64 {
    if spec.k == 0 {
        return match spec.kind {
            KernelKind::Log2d => 2.0 * PI,
            _ => (spec.d as f64 - 2.0) * sphere_area(spec.d),
        };
    }
    // -∂_r g at r = 1
    let flux_density = -spec.dg_radial(1.0);
    flux_density * weighted_sphere_area(spec.d + 1, spec.gamma)
}

/// `∫_{S^{m-1}} |y|^γ dσ` with `y` the last coordinate, by quadrature in
/// the angle `φ` between the point and the horizontal hyperplane:
/// `|S^{m-2}| · 2 ∫_0^{π/2} sin^γ φ cos^{m-2} φ dφ`.
pub fn weighted_sphere_area(m: usize, gamma: f64) -> f64 {
    assert!(m >= 2);
    let q = clustering_power(gamma);
    let mut prev = f64::NAN;
    let mut n = 32;
    loop {
        let v: f64 = clustered_nodes(n, 0.0, 0.5 * PI, q, (true, true))
            .into_iter()
            .map(|(phi, w)| w * phi.sin().powf(gamma) * phi.cos().powi(m as i32 - 2))
            .sum();
        let total = 2.0 * sphere_area(m - 1) * v;
        if (total - prev).abs() <= 1e-14 * total.abs() || n >= 1024 {
            return total;
        }
        prev = total;
        n *= 2;
    }
}

/// Power of the endpoint clustering map adequate for `x^β` singularities
/// with `β ≥ -|γ|`.
pub(crate) fn clustering_power(gamma: f64) -> f64 {
    (3.0 / (1.0 - gamma.abs())).clamp(3.0, 30.0)
}

/// Mass of the smeared charge `δ_p^{(η)}` inside `K × ℝ^k`.
///
/// The smeared charge is the probability measure on the sphere of radius η
/// around `(p, 0)` in ℝ^{d+k} with density proportional to `|y|^γ` (uniform
/// when `k = 0`). The window mass is computed by slicing the sphere along
/// the constrained horizontal axes down to `S^0`, with breakpoints at every
/// radius where a slice touches the window, and doubling the angular order
/// until the relative change drops below `1e-6`.
pub fn smeared_mass_in_window(
    spec: &KernelSpec,
    p: &[f64],
    eta: f64,
    window: &Hyperrectangle,
) -> Result<f64> {
    check_eta(eta)?;
    if p.len() != spec.d || window.dim() != spec.d {
        return Err(Error::Invalid("point and window must live in R^d".into()));
    }
    if window.contains(p) && window.boundary_distance(p) >= eta {
        return Ok(1.0);
    }
    if window.distance_to(p) >= eta {
        return Ok(0.0);
    }
    let cons: Vec<(f64, f64)> = (0..spec.d)
        .map(|i| (window.lo(i) - p[i], window.hi(i) - p[i]))
        .collect();
    let weight = if spec.k == 1 { Some(spec.gamma) } else { None };
    let mut order = 64;
    let mut prev = f64::NAN;
    loop {
        let total = sphere_measure(eta, &[], spec.d + spec.k, weight, order);
        let inside = sphere_measure(eta, &cons, spec.k, weight, order);
        let frac = (inside / total).clamp(0.0, 1.0);
        if (frac - prev).abs() <= 1e-6 * frac.max(1e-300) || order >= 4096 {
            return Ok(frac);
        }
        prev = frac;
        order *= 2;
    }
}

/// Measure of `{X ∈ S^{m-1}_R : lo_i ≤ X_i ≤ hi_i for the constrained axes}`
/// where `m = cons.len() + free` and the last axis carries the weight
/// `|X_last|^γ` when `weight` is set. With an empty `cons` all `free` axes
/// are unconstrained.
fn sphere_measure(
    radius: f64,
    cons: &[(f64, f64)],
    free: usize,
    weight: Option<f64>,
    order: usize,
) -> f64 {
    let m = cons.len() + free;
    if m == 1 {
        // S^0 = {±R}
        let w = weight.map_or(1.0, |g| radius.powf(g));
        return match cons.first() {
            Some(&(lo, hi)) => {
                let mut acc = 0.0;
                for x in [-radius, radius] {
                    if x >= lo && x <= hi {
                        acc += w;
                    }
                }
                acc
            }
            None => 2.0 * w,
        };
    }
    // Slice along the first axis: X_0 = R sin ψ, sub-sphere radius R cos ψ.
    let (lo, hi) = cons.first().copied().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let rest = if cons.is_empty() { &[][..] } else { &cons[1..] };
    let free_rest = if cons.is_empty() { free - 1 } else { free };
    let psi_lo = if lo <= -radius { -0.5 * PI } else if lo >= radius { return 0.0 } else { (lo / radius).asin() };
    let psi_hi = if hi >= radius { 0.5 * PI } else if hi <= -radius { return 0.0 } else { (hi / radius).asin() };
    if psi_hi <= psi_lo {
        return 0.0;
    }
    // Radii where the sub-sphere starts or stops touching the remaining
    // constraints: norms of all corner combinations.
    let mut crit = vec![0.0f64];
    for c in rest {
        let next: Vec<f64> = crit
            .iter()
            .flat_map(|&r2| [r2 + c.0 * c.0, r2 + c.1 * c.1])
            .collect();
        crit.extend(next);
    }
    let mut cuts = vec![psi_lo, psi_hi, 0.0];
    for r2 in crit {
        let r = r2.sqrt();
        if r > 0.0 && r < radius {
            let a = (r / radius).acos();
            cuts.push(a);
            cuts.push(-a);
        }
    }
    cuts.retain(|&x| x >= psi_lo && x <= psi_hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let q = weight.map_or(3.0, clustering_power);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        for (psi, wt) in clustered_nodes(order, w[0], w[1], q, (true, true)) {
            let sub_r = radius * psi.cos();
            if sub_r <= 0.0 {
                continue;
            }
            acc += wt * radius * sphere_measure(sub_r, rest, free_rest, weight, order);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_classification() {
        let k = KernelSpec::riesz(1.0, 3).unwrap();
        assert_eq!(k.k, 0);
        assert_eq!(k.gamma, 0.0);
        let k = KernelSpec::riesz(0.5, 1).unwrap();
        assert_eq!(k.k, 1);
        assert_relative_eq!(k.gamma, 0.5);
        // s = d - 1 gives the harmonic extension
        let k = KernelSpec::riesz(1.0, 2).unwrap();
        assert_eq!(k.k, 1);
        assert_eq!(k.gamma, 0.0);
        assert_eq!(KernelSpec::log2d().k, 0);
        assert_eq!(KernelSpec::log1d().k, 1);
        assert_eq!(KernelSpec::log1d().gamma, 0.0);
    }

    #[test]
    fn rejects_out_of_range_exponents() {
        assert!(KernelSpec::riesz(1.0, 1).is_err());
        assert!(KernelSpec::riesz(0.5, 3).is_err());
        assert!(KernelSpec::riesz(-0.5, 1).is_err());
        assert!(KernelSpec::new(KernelKind::Log2d, 1).is_err());
        assert!(KernelSpec::new(KernelKind::Log1d, 2).is_err());
    }

    #[test]
    fn g_eval_examples() {
        let r1 = KernelSpec::riesz(1.0, 2).unwrap();
        assert_relative_eq!(g_eval(&r1, &[2.0, 0.0, 0.0]).unwrap(), 0.5);
        let l = KernelSpec::log2d();
        assert_eq!(g_eval(&l, &[0.6, 0.8]).unwrap(), 0.0);
        let r = KernelSpec::riesz(0.5, 1).unwrap();
        assert_relative_eq!(g_eval(&r, &[4.0, 0.0]).unwrap(), 0.5);
        assert!(matches!(g_eval(&r, &[0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn g_trunc_examples() {
        let r1 = KernelSpec::riesz(1.0, 2).unwrap();
        assert_relative_eq!(g_trunc(&r1, &[0.1, 0.0, 0.0], 0.5).unwrap(), 2.0);
        assert_relative_eq!(g_trunc(&r1, &[0.0, 0.7, 0.0], 0.5).unwrap(), 1.0 / 0.7);
        let l = KernelSpec::log2d();
        assert_relative_eq!(g_trunc(&l, &[0.0, 0.0], 0.1).unwrap(), std::f64::consts::LN_10, epsilon = 1e-12);
    }

    #[test]
    fn f_eta_examples() {
        let r1 = KernelSpec::riesz(1.0, 2).unwrap();
        assert_relative_eq!(f_eta(&r1, &[0.1, 0.0, 0.0], 0.2).unwrap(), 5.0, epsilon = 1e-12);
        assert_eq!(f_eta(&r1, &[0.3, 0.0, 0.0], 0.2).unwrap(), 0.0);
        let l = KernelSpec::log1d();
        let e = std::f64::consts::E;
        assert_relative_eq!(f_eta(&l, &[e.powi(-2), 0.0], 1.0 / e).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(f_eta(&l, &[0.0, 0.0], 0.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn coulomb_constants() {
        assert_relative_eq!(KernelSpec::log2d().csd, 2.0 * PI);
        assert_relative_eq!(KernelSpec::riesz(1.0, 3).unwrap().csd, 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(KernelSpec::riesz(2.0, 4).unwrap().csd, 2.0 * 2.0 * PI * PI, max_relative = 1e-14);
        // log1d: harmonic extension, flux of -log r through the unit circle
        assert_relative_eq!(KernelSpec::log1d().csd, 2.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn smeared_mass_trivial_cases() {
        let spec = KernelSpec::riesz(0.5, 1).unwrap();
        let k = Hyperrectangle::from_bounds(&[0.0], &[4.0]).unwrap();
        assert_eq!(smeared_mass_in_window(&spec, &[2.0], 0.5, &k).unwrap(), 1.0);
        assert_eq!(smeared_mass_in_window(&spec, &[5.0], 0.5, &k).unwrap(), 0.0);
        let m = smeared_mass_in_window(&spec, &[4.0], 0.5, &k).unwrap();
        assert_relative_eq!(m, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn smeared_mass_uniform_circle_fraction() {
        // k = 0: uniform measure on a circle; the window cuts the chord x ≥ η/2
        let spec = KernelSpec::log2d();
        let eta = 0.4;
        let k = Hyperrectangle::from_bounds(&[-10.0, -10.0], &[0.2, 10.0]).unwrap();
        let m = smeared_mass_in_window(&spec, &[0.0, 0.0], eta, &k).unwrap();
        // arc with x ≤ η/2: angle 2π - 2·acos(1/2)
        let expect = 1.0 - 2.0 * (0.5f64).acos() / (2.0 * PI);
        assert_relative_eq!(m, expect, epsilon = 1e-9);
    }
}
