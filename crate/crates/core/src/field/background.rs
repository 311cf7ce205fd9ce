//! Gradient of the background potential `g * (m δ_{ℝ^d})` in the extended
//! space.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::kernels::{ball_volume, KernelKind, KernelSpec};
use crate::model::{DensityField, Profile, Support};
use crate::quadrature::{clustered_nodes, integrate_value, Tolerance};

/// `∇_X ∫ g(X − (z, 0)) m(z) dz` at `X ∈ ℝ^{d+k}`.
///
/// Closed forms cover uniform balls for Coulomb kernels (shell theorem),
/// uniform boxes and whole-space constants; one-dimensional densities fall
/// back to adaptive quadrature. An infinite uniform background in the
/// Coulomb case is gauged as `−(c_{s,d} m / d) x`.
pub fn background_gradient(spec: &KernelSpec, mu: &DensityField, x: &[f64]) -> Result<Vec<f64>> {
    let d = spec.d;
    if x.len() != d + spec.k || mu.dim() != d {
        return Err(Error::Invalid("background point has the wrong dimension".into()));
    }
    if spec.k == 0 {
        if let Some((center, radius, value)) = mu.uniform_ball_data() {
            let rel: Vec<f64> = x.iter().zip(&center).map(|(a, c)| a - c).collect();
            let r2: f64 = rel.iter().map(|v| v * v).sum();
            if r2 == 0.0 {
                return Ok(vec![0.0; d]);
            }
            let r = r2.sqrt().min(radius);
            let enclosed = value * ball_volume(d) * r.powi(d as i32);
            let f = enclosed * spec.grad_factor(r2);
            return Ok(rel.iter().map(|v| f * v).collect());
        }
        return match (mu.profile(), mu.support()) {
            (Profile::Uniform { value }, Support::Whole { .. }) => {
                let f = -spec.csd * value / d as f64;
                Ok(x.iter().map(|v| f * v).collect())
            }
            (Profile::Uniform { value }, Support::Box(b)) if spec.kind == KernelKind::Log2d => {
                let mut out = vec![0.0; 2];
                for i in 0..2 {
                    let j = 1 - i;
                    let seg = |c: f64| {
                        log_segment(x[i] - c, x[j] - b.hi(j), x[j] - b.lo(j))
                    };
                    out[i] = -value * (seg(b.hi(i)) - seg(b.lo(i)));
                }
                Ok(out)
            }
            _ => Err(Error::Unsupported(format!(
                "background field for {:?} in dimension {d}",
                spec.kind
            ))),
        };
    }
    if d != 1 {
        return Err(Error::Unsupported(
            "background field with a vertical extension is implemented for d = 1".into(),
        ));
    }
    let (px, y) = (x[0], x[1]);
    match (mu.profile(), mu.support()) {
        (Profile::Uniform { value }, Support::Whole { .. }) => {
            if y == 0.0 {
                return Ok(vec![0.0, 0.0]);
            }
            let v = match spec.kind {
                KernelKind::Riesz { s } => -s * y.signum() * y.abs().powf(-s) * 2.0 * half_cos_power(s),
                _ => -PI * y.signum(),
            };
            Ok(vec![0.0, value * v])
        }
        (Profile::Uniform { value }, Support::Box(b)) => {
            let (a, bb) = (b.lo(0), b.hi(0));
            let g = |u: f64| spec.g_of_r2(u * u + y * y);
            let horizontal = value * (g(px - a) - g(px - bb));
            let vertical = if y == 0.0 {
                0.0
            } else {
                match spec.kind {
                    KernelKind::Riesz { s } => {
                        let ay = y.abs();
                        let lo = ((px - bb) / ay).atan();
                        let hi = ((px - a) / ay).atan();
                        -s * y.signum() * ay.powf(-s) * cos_power_between(s, lo, hi)
                    }
                    _ => -(((px - a) / y).atan() - ((px - bb) / y).atan()),
                }
            };
            Ok(vec![horizontal, value * vertical])
        }
        (_, support) => {
            let bbox = support
                .bounding_box()
                .ok_or_else(|| Error::Unsupported("unbounded non-constant background".into()))?;
            let ay = y.abs();
            let breaks = [px, px - ay, px + ay];
            let tol = Tolerance::new(1e-12, 1e-9);
            let mut out = vec![0.0; 2];
            for (c, o) in out.iter_mut().enumerate() {
                *o = integrate_value(
                    |z| {
                        let u = px - z;
                        let r2 = u * u + y * y;
                        if r2 == 0.0 {
                            return 0.0;
                        }
                        let comp = if c == 0 { u } else { y };
                        mu.density(&[z]) * spec.grad_factor(r2) * comp
                    },
                    bbox.lo(0),
                    bbox.hi(0),
                    &breaks,
                    tol,
                )?;
            }
            Ok(out)
        }
    }
}

/// `∫_{u0}^{u1} −½ log(h² + u²) du`.
fn log_segment(h: f64, u0: f64, u1: f64) -> f64 {
    let f = |u: f64| {
        if h == 0.0 {
            if u == 0.0 {
                0.0
            } else {
                -(u * u.abs().ln() - u)
            }
        } else {
            -0.5 * (u * (u * u + h * h).ln() - 2.0 * u + 2.0 * h * (u / h).atan())
        }
    };
    f(u1) - f(u0)
}

/// `∫_0^{π/2} cos^s φ dφ`, cached per exponent bit pattern.
fn half_cos_power(s: f64) -> f64 {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(u64, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(Vec::new()));
    let key = s.to_bits();
    if let Some(&(_, v)) = cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
        return v;
    }
    let v = sin_power_from_zero(s, 0.5 * PI);
    cache.lock().unwrap().push((key, v));
    v
}

/// `∫_0^a sin^s ψ dψ` for `a ∈ [0, π/2]`, clustered at `ψ = 0`.
fn sin_power_from_zero(s: f64, a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    clustered_nodes(48, 0.0, a, 4.0, (true, false))
        .into_iter()
        .map(|(p, w)| w * p.sin().powf(s))
        .sum()
}

/// `∫_0^φ cos^s` for `φ ∈ [−π/2, π/2]` (odd in φ).
fn cos_power_from_zero(s: f64, phi: f64) -> f64 {
    let a = phi.abs();
    let v = half_cos_power(s) - sin_power_from_zero(s, 0.5 * PI - a);
    v * phi.signum()
}

fn cos_power_between(s: f64, lo: f64, hi: f64) -> f64 {
    cos_power_from_zero(s, hi) - cos_power_from_zero(s, lo)
}
