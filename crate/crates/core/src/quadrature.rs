//! One-dimensional quadrature rules shared by the field, model and geometry
//! modules: cached Gauss–Legendre rules, power-clustered rules for algebraic
//! endpoint singularities, and a globally adaptive Gauss–Kronrod (7/15)
//! integrator with user breakpoints.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }

    /// Nodes and weights on `[a, b]` clustered towards `a` by the map
    /// `x = a + (b - a) t^q`, which absorbs singularities like `(x - a)^β`
    /// with `β > -1` once `q (1 + β)` is moderately large.
    pub fn clustered(&self, a: f64, b: f64, q: f64) -> Vec<(f64, f64)> {
        self.mapped(0.0, 1.0)
            .map(|(t, w)| {
                let x = a + (b - a) * t.powf(q);
                (x, w * (b - a) * q * t.powf(q - 1.0))
            })
            .collect()
    }
}

/// Cached Gauss–Legendre rule with `n` points.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(GaussLegendre::compute(n));
    cache
        .write()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// Nodes and weights on `[a, b]` clustered at the ends flagged in `ends`.
/// A doubly clustered interval is split at its midpoint.
pub fn clustered_nodes(n: usize, a: f64, b: f64, q: f64, ends: (bool, bool)) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(n);
    match ends {
        (false, false) => rule.mapped(a, b).collect(),
        (true, false) => rule.clustered(a, b, q),
        (false, true) => rule
            .clustered(b, a, q)
            .into_iter()
            .map(|(x, w)| (x, -w))
            .collect(),
        (true, true) => {
            let m = 0.5 * (a + b);
            let mut v = rule.clustered(a, m, q);
            v.extend(rule.clustered(b, m, q).into_iter().map(|(x, w)| (x, -w)));
            v
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Default::default()
        }
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`, with
/// the interval pre-split at `breaks` (points outside `(a, b)` are ignored).
/// Returns the value and the error estimate.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut pts = Vec::with_capacity(cuts.len() + 2);
    pts.push(lo);
    pts.extend(cuts);
    pts.push(hi);

    let mut segs: Vec<(f64, f64, f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();

    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok((sign * total, err));
        }
        if segs.len() >= tol.max_intervals {
            return Err(Error::Numeric(format!(
                "adaptive quadrature did not converge on [{lo}, {hi}]: estimate {total:e}, error {err:e}"
            )));
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (s0, s1, _, _) = segs.swap_remove(idx);
        let m = 0.5 * (s0 + s1);
        if m <= s0 || m >= s1 {
            let total: f64 = segs.iter().map(|s| s.2).sum();
            return Err(Error::Numeric(format!(
                "interval underflow near {s0:e} (estimate {total:e})"
            )));
        }
        let (v1, e1) = gk15(&mut f, s0, m);
        let (v2, e2) = gk15(&mut f, m, s1);
        segs.push((s0, m, v1, e1));
        segs.push((m, s1, v2, e2));
    }
}

/// Convenience wrapper returning only the value.
pub fn integrate_value<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<f64> {
    integrate(f, a, b, breaks, tol).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = gauss_legendre(5);
        // exact up to degree 9
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(9) - 3.0 * x.powi(4) + 1.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        assert_relative_eq!(v, exact, max_relative = 1e-13);
        let w: f64 = rule.weights.iter().sum();
        assert_relative_eq!(w, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn clustered_rule_handles_endpoint_singularity() {
        // ∫_0^1 x^{-0.7} dx = 1/0.3
        let v: f64 = clustered_nodes(20, 0.0, 1.0, 10.0, (true, false))
            .into_iter()
            .map(|(x, w)| w * x.powf(-0.7))
            .sum();
        assert_relative_eq!(v, 1.0 / 0.3, max_relative = 1e-9);
        let v: f64 = clustered_nodes(20, 0.0, 1.0, 4.0, (false, true))
            .into_iter()
            .map(|(x, w)| w * (1.0 - x).powf(-0.5))
            .sum();
        assert_relative_eq!(v, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_log_singularity() {
        // ∫_0^1 -ln x dx = 1
        let v = integrate_value(|x| -x.ln(), 0.0, 1.0, &[], Tolerance::default()).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_with_interior_kink() {
        let v = integrate_value(|x| (x - 0.3).abs(), 0.0, 1.0, &[0.3], Tolerance::default())
            .unwrap();
        assert_relative_eq!(v, 0.5 * (0.09 + 0.49), max_relative = 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate_value(|x| x, 1.0, 0.0, &[], Tolerance::default()).unwrap();
        assert_relative_eq!(v, -0.5, max_relative = 1e-14);
    }
}
