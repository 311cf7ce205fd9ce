//! Gas models: confining potentials, point configurations, equilibrium
//! densities, the effective potential ζ, the mean-field energy and blow-up.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Hyperrectangle;
use crate::kernels::{ball_volume, sphere_area, KernelKind, KernelSpec};
use crate::quadrature::{integrate_value, Tolerance};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Confining potential `V`.
#[derive(Clone)]
pub enum Potential {
    /// `V(x) = a |x|²`.
    Quadratic { a: f64 },
    Zero,
    /// `V + c`.
    Shifted(Box<Potential>, f64),
    /// User-supplied potential; the gradient falls back to central
    /// differences when absent. Growth assumptions are the caller's
    /// responsibility.
    Custom {
        name: String,
        value: ScalarFn,
        gradient: Option<VectorFn>,
    },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Quadratic { a } => write!(f, "Quadratic {{ a: {a} }}"),
            Potential::Zero => write!(f, "Zero"),
            Potential::Shifted(p, c) => write!(f, "Shifted({p:?}, {c})"),
            Potential::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl Potential {
    pub fn quadratic(a: f64) -> Result<Self> {
        if a > 0.0 && a.is_finite() {
            Ok(Potential::Quadratic { a })
        } else {
            Err(Error::Invalid(format!("quadratic coefficient must be positive, got {a}")))
        }
    }

    pub fn shifted(self, c: f64) -> Self {
        Potential::Shifted(Box::new(self), c)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Potential::Quadratic { a } => a * x.iter().map(|v| v * v).sum::<f64>(),
            Potential::Zero => 0.0,
            Potential::Shifted(p, c) => p.value(x) + c,
            Potential::Custom { value, .. } => value(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Potential::Quadratic { a } => x.iter().map(|v| 2.0 * a * v).collect(),
            Potential::Zero => vec![0.0; x.len()],
            Potential::Shifted(p, _) => p.gradient(x),
            Potential::Custom { gradient: Some(g), .. } => g(x),
            Potential::Custom { value, .. } => {
                let mut y = x.to_vec();
                (0..x.len())
                    .map(|i| {
                        let h = 1e-6 * (1.0 + x[i].abs());
                        y[i] = x[i] + h;
                        let up = value(&y);
                        y[i] = x[i] - h;
                        let down = value(&y);
                        y[i] = x[i];
                        (up - down) / (2.0 * h)
                    })
                    .collect()
            }
        }
    }

    /// Strips shifts, returning the base potential and the total shift.
    fn base(&self) -> (&Potential, f64) {
        match self {
            Potential::Shifted(p, c) => {
                let (b, c2) = p.base();
                (b, c + c2)
            }
            other => (other, 0.0),
        }
    }
}

/// Kernel, potential and particle number.
#[derive(Debug, Clone)]
pub struct GasModel {
    pub kernel: KernelSpec,
    pub potential: Potential,
    pub n: usize,
}

impl GasModel {
    pub fn new(kernel: KernelSpec, potential: Potential, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("particle number must be at least 1".into()));
        }
        Ok(GasModel {
            kernel,
            potential,
            n,
        })
    }

    pub fn d(&self) -> usize {
        self.kernel.d
    }
}

/// Length scale of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "snake_case")]
pub enum Scale {
    Macroscopic,
    /// Points multiplied by `lambda = n^{1/d}`.
    BlownUp { lambda: f64 },
}

/// `n` labelled points in ℝ^d, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    d: usize,
    coords: Vec<f64>,
    pub scale: Scale,
}

impl Configuration {
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 || coords.len() % d != 0 {
            return Err(Error::Invalid(format!(
                "{} coordinates do not form points of dimension {d}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("coordinates must be finite".into()));
        }
        Ok(Configuration {
            d,
            coords,
            scale: Scale::Macroscopic,
        })
    }

    pub fn from_points(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::Invalid(format!("every point must have {d} coordinates")));
        }
        Self::new(d, points.concat())
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Image under `x ↦ factor · x` (scale tag unchanged).
    pub fn scaled(&self, factor: f64) -> Configuration {
        Configuration {
            d: self.d,
            coords: self.coords.iter().map(|c| c * factor).collect(),
            scale: self.scale,
        }
    }

    /// Points of the configuration lying in `K` (half-open convention).
    pub fn count_in(&self, k: &Hyperrectangle) -> usize {
        self.points().filter(|p| k.contains_half_open(p)).count()
    }

    /// Smallest pairwise distance (`+∞` for fewer than two points).
    pub fn min_distance(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let p = self.point(i);
            for j in i + 1..n {
                let q = self.point(j);
                let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.min(d2);
            }
        }
        best.sqrt()
    }

    /// Nearest-neighbour distance of every point.
    pub fn nearest_neighbour_distances(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let p = self.point(i);
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        self.point(j)
                            .iter()
                            .zip(p)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            })
            .collect()
    }
}

/// Density profile in macroscopic coordinates.
#[derive(Clone)]
pub enum Profile {
    /// `(2/(πR²)) √(R² − x²)` on `[−R, R]`.
    Semicircle { radius: f64 },
    /// Constant value on the support.
    Uniform { value: f64 },
    Custom(ScalarFn),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Semicircle { radius } => write!(f, "Semicircle {{ radius: {radius} }}"),
            Profile::Uniform { value } => write!(f, "Uniform {{ value: {value} }}"),
            Profile::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Support descriptor in macroscopic coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Support {
    Ball { center: Vec<f64>, radius: f64 },
    Box(Hyperrectangle),
    /// All of ℝ^d (synthetic infinite backgrounds).
    Whole { d: usize },
}

impl Support {
    pub fn dim(&self) -> usize {
        match self {
            Support::Ball { center, .. } => center.len(),
            Support::Box(b) => b.dim(),
            Support::Whole { d } => *d,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Support::Ball { center, radius } => dist(x, center) <= *radius,
            Support::Box(b) => b.contains(x),
            Support::Whole { .. } => true,
        }
    }

    /// Distance from an interior point to the boundary (`-dist` outside).
    pub fn interior_distance(&self, x: &[f64]) -> f64 {
        match self {
            Support::Ball { center, radius } => radius - dist(x, center),
            Support::Box(b) => {
                if b.contains(x) {
                    b.boundary_distance(x)
                } else {
                    -b.distance_to(x)
                }
            }
            Support::Whole { .. } => f64::INFINITY,
        }
    }

    pub fn contains_box(&self, k: &Hyperrectangle) -> bool {
        match self {
            Support::Ball { center, radius } => {
                // farthest corner
                let far: f64 = (0..k.dim())
                    .map(|i| {
                        let e = (k.lo(i) - center[i]).abs().max((k.hi(i) - center[i]).abs());
                        e * e
                    })
                    .sum();
                far.sqrt() <= *radius * (1.0 + 1e-12)
            }
            Support::Box(b) => b.contains_box(k),
            Support::Whole { .. } => true,
        }
    }

    pub fn scaled(&self, factor: f64) -> Support {
        match self {
            Support::Ball { center, radius } => Support::Ball {
                center: center.iter().map(|c| c * factor).collect(),
                radius: radius * factor,
            },
            Support::Box(b) => Support::Box(b.scaled(factor).expect("scaling keeps a box valid")),
            Support::Whole { d } => Support::Whole { d: *d },
        }
    }

    pub fn bounding_box(&self) -> Option<Hyperrectangle> {
        match self {
            Support::Ball { center, radius } => {
                Hyperrectangle::new(center.clone(), vec![*radius; center.len()]).ok()
            }
            Support::Box(b) => Some(b.clone()),
            Support::Whole { .. } => None,
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Equilibrium density `m_V` or its blow-up `m'_V(x') = m_V(x'/λ)`.
#[derive(Debug, Clone)]
pub struct DensityField {
    d: usize,
    profile: Profile,
    /// Support at macroscopic scale.
    support: Support,
    pub holder_alpha: f64,
    /// Hölder seminorm at the current scale.
    pub holder_norm: f64,
    /// Lower and upper bounds of the density on the support interior.
    pub bounds: (f64, f64),
    /// Blow-up factor `λ` (1 at macroscopic scale).
    pub blowup_scale: f64,
}

impl DensityField {
    /// Semicircle law on `[−R, R]`.
    pub fn semicircle(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Invalid("semicircle radius must be positive".into()));
        }
        let peak = 2.0 / (PI * radius);
        Ok(DensityField {
            d: 1,
            profile: Profile::Semicircle { radius },
            support: Support::Ball {
                center: vec![0.0],
                radius,
            },
            holder_alpha: 0.5,
            holder_norm: 2.0 / (PI * radius * radius) * (2.0 * radius).sqrt(),
            bounds: (0.0, peak),
            blowup_scale: 1.0,
        })
    }

    /// Uniform probability density on a ball.
    pub fn uniform_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || center.is_empty() {
            return Err(Error::Invalid("ball needs a positive radius and a center".into()));
        }
        let d = center.len();
        let value = 1.0 / (ball_volume(d) * radius.powi(d as i32));
        Ok(DensityField {
            d,
            profile: Profile::Uniform { value },
            support: Support::Ball { center, radius },
            holder_alpha: 1.0,
            holder_norm: 0.0,
            bounds: (value, value),
            blowup_scale: 1.0,
        })
    }

    /// Constant density on a box (not necessarily normalized).
    pub fn uniform_box(b: Hyperrectangle, value: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::Invalid("density value must be positive".into()));
        }
        Ok(DensityField {
            d: b.dim(),
            profile: Profile::Uniform { value },
            support: Support::Box(b),
            holder_alpha: 1.0,
            holder_norm: 0.0,
            bounds: (value, value),
            blowup_scale: 1.0,
        })
    }

    /// Constant density on all of ℝ^d, already at microscopic scale.
    pub fn constant(d: usize, value: f64) -> Result<Self> {
        if !(value > 0.0) || d == 0 {
            return Err(Error::Invalid("density value must be positive".into()));
        }
        Ok(DensityField {
            d,
            profile: Profile::Uniform { value },
            support: Support::Whole { d },
            holder_alpha: 1.0,
            holder_norm: 0.0,
            bounds: (value, value),
            blowup_scale: 1.0,
        })
    }

    /// User-supplied density.
    pub fn custom(
        support: Support,
        density: ScalarFn,
        bounds: (f64, f64),
        holder_alpha: f64,
        holder_norm: f64,
    ) -> Result<Self> {
        if !(holder_alpha > 0.0 && holder_alpha <= 1.0) {
            return Err(Error::Invalid("Hölder exponent must lie in (0, 1]".into()));
        }
        Ok(DensityField {
            d: support.dim(),
            profile: Profile::Custom(density),
            support,
            holder_alpha,
            holder_norm,
            bounds,
            blowup_scale: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Support at the current scale.
    pub fn support(&self) -> Support {
        self.support.scaled(self.blowup_scale)
    }

    pub fn is_macroscopic(&self) -> bool {
        self.blowup_scale == 1.0
    }

    pub fn max_density(&self) -> f64 {
        self.bounds.1
    }

    fn profile_at_macro(&self, x: &[f64]) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        match &self.profile {
            Profile::Semicircle { radius } => {
                let r2 = radius * radius;
                2.0 / (PI * r2) * (r2 - x[0] * x[0]).max(0.0).sqrt()
            }
            Profile::Uniform { value } => *value,
            Profile::Custom(f) => f(x),
        }
    }

    /// Density at a point of the current scale.
    pub fn density(&self, x: &[f64]) -> f64 {
        if self.blowup_scale == 1.0 {
            self.profile_at_macro(x)
        } else {
            let y: Vec<f64> = x.iter().map(|v| v / self.blowup_scale).collect();
            self.profile_at_macro(&y)
        }
    }

    /// Total mass at the current scale (`λ^d` times the macroscopic mass).
    pub fn total_mass(&self) -> f64 {
        let macro_mass = match (&self.profile, &self.support) {
            (_, Support::Whole { .. }) => f64::INFINITY,
            (Profile::Semicircle { .. }, _) => 1.0,
            (Profile::Uniform { value }, Support::Ball { radius, .. }) => {
                value * ball_volume(self.d) * radius.powi(self.d as i32)
            }
            (Profile::Uniform { value }, Support::Box(b)) => value * b.volume(),
            (Profile::Custom(_), s) => match s.bounding_box() {
                Some(b) => self.macro_mass_in_box(&b).unwrap_or(f64::NAN),
                None => f64::NAN,
            },
        };
        macro_mass * self.blowup_scale.powi(self.d as i32)
    }

    /// `∫_K m` at the current scale.
    pub fn mass_in_box(&self, k: &Hyperrectangle) -> Result<f64> {
        if k.dim() != self.d {
            return Err(Error::Invalid("window dimension differs from the density".into()));
        }
        let lam = self.blowup_scale;
        if lam == 1.0 {
            return self.macro_mass_in_box(k);
        }
        let kk = k.scaled(1.0 / lam)?;
        Ok(lam.powi(self.d as i32) * self.macro_mass_in_box(&kk)?)
    }

    fn macro_mass_in_box(&self, k: &Hyperrectangle) -> Result<f64> {
        match (&self.profile, &self.support) {
            (Profile::Uniform { value }, Support::Whole { .. }) => Ok(value * k.volume()),
            (Profile::Uniform { value }, Support::Box(b)) => {
                Ok(b.intersection(k).map_or(0.0, |c| value * c.volume()))
            }
            (Profile::Uniform { value }, Support::Ball { center, radius }) => {
                if self.support.contains_box(k) {
                    return Ok(value * k.volume());
                }
                let lo: Vec<f64> = (0..self.d).map(|i| k.lo(i) - center[i]).collect();
                let hi: Vec<f64> = (0..self.d).map(|i| k.hi(i) - center[i]).collect();
                Ok(value * ball_box_volume(radius * radius, &lo, &hi)?)
            }
            (Profile::Semicircle { radius }, _) => {
                let cdf = |x: f64| {
                    let x = x.clamp(-*radius, *radius);
                    let r2 = radius * radius;
                    0.5 + (x * (r2 - x * x).max(0.0).sqrt() + r2 * (x / radius).asin()) / (PI * r2)
                };
                Ok(cdf(k.hi(0)) - cdf(k.lo(0)))
            }
            (Profile::Custom(_), s) => {
                let clip = match s.bounding_box() {
                    Some(b) => match b.intersection(k) {
                        Some(c) => c,
                        None => return Ok(0.0),
                    },
                    None => k.clone(),
                };
                let f = |x: &[f64]| self.profile_at_macro(x);
                nested_box_integral(&f, &clip, &mut vec![0.0; self.d], 0)
            }
        }
    }

    /// Blow-up by `λ`: support scaled, Hölder seminorm divided by
    /// `λ^α = n^{α/d}`.
    pub fn blown_up(&self, lambda: f64) -> DensityField {
        let mut out = self.clone();
        out.blowup_scale = self.blowup_scale * lambda;
        out.holder_norm = self.holder_norm / lambda.powf(self.holder_alpha);
        out
    }

    /// Radial data `(center, radius, value)` when the density is a uniform
    /// ball.
    pub fn uniform_ball_data(&self) -> Option<(Vec<f64>, f64, f64)> {
        match (&self.profile, self.support()) {
            (Profile::Uniform { value }, Support::Ball { center, radius }) => {
                Some((center, radius, *value))
            }
            _ => None,
        }
    }

    /// Sample `n` i.i.d. points from the uniform law on the support
    /// (current scale).
    pub fn sample_support<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Configuration> {
        let support = self.support();
        let bbox = support
            .bounding_box()
            .ok_or_else(|| Error::Invalid("cannot sample an unbounded support".into()))?;
        let mut coords = Vec::with_capacity(n * self.d);
        let mut x = vec![0.0; self.d];
        let mut taken = 0;
        while taken < n {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = rng.random_range(bbox.lo(i)..bbox.hi(i));
            }
            if support.contains(&x) {
                coords.extend_from_slice(&x);
                taken += 1;
            }
        }
        Configuration::new(self.d, coords)
    }
}

/// Volume of `{|x|² ≤ r2} ∩ Π[lo_i, hi_i]`, integrating the leading axes
/// adaptively and the last one exactly.
fn ball_box_volume(r2: f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    if r2 <= 0.0 {
        return Ok(0.0);
    }
    let r = r2.sqrt();
    if lo.len() == 1 {
        return Ok((hi[0].min(r) - lo[0].max(-r)).max(0.0));
    }
    let a = lo[0].max(-r);
    let b = hi[0].min(r);
    if a >= b {
        return Ok(0.0);
    }
    // kinks where the slice radius crosses a corner distance of the rest
    let mut sq = vec![0.0f64];
    for i in 1..lo.len() {
        let next: Vec<f64> = sq
            .iter()
            .flat_map(|&t| [t + lo[i] * lo[i], t + hi[i] * hi[i]])
            .collect();
        sq.extend(next);
    }
    let mut breaks = vec![0.0];
    for t in sq {
        if t < r2 {
            let x = (r2 - t).sqrt();
            breaks.push(x);
            breaks.push(-x);
        }
    }
    let mut err = None;
    let v = integrate_value(
        |x| match ball_box_volume(r2 - x * x, &lo[1..], &hi[1..]) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        a,
        b,
        &breaks,
        Tolerance::new(1e-13, 1e-11),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

fn nested_box_integral(
    f: &dyn Fn(&[f64]) -> f64,
    k: &Hyperrectangle,
    x: &mut Vec<f64>,
    axis: usize,
) -> Result<f64> {
    let d = k.dim();
    let mut err = None;
    let v = integrate_value(
        |t| {
            x[axis] = t;
            if axis + 1 == d {
                f(x)
            } else {
                let mut inner = x.clone();
                match nested_box_integral(f, k, &mut inner, axis + 1) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        0.0
                    }
                }
            }
        },
        k.lo(axis),
        k.hi(axis),
        &[],
        Tolerance::new(1e-12, 1e-9),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Equilibrium measure of a catalogued model (`V = a|x|²` with the 1D log
/// kernel or any Coulomb kernel).
pub fn equilibrium_measure(model: &GasModel) -> Result<DensityField> {
    let (base, _) = model.potential.base();
    let a = match base {
        Potential::Quadratic { a } => *a,
        other => {
            return Err(Error::Unsupported(format!(
                "no catalogued equilibrium measure for potential {other:?}"
            )))
        }
    };
    let spec = &model.kernel;
    let d = spec.d;
    match spec.kind {
        KernelKind::Log1d => DensityField::semicircle((2.0 / a).sqrt()),
        KernelKind::Log2d => DensityField::uniform_ball(vec![0.0; 2], (1.0 / a).sqrt()),
        KernelKind::Riesz { .. } if spec.is_coulomb() => {
            let radius = ((d as f64 - 2.0) / a).powf(1.0 / d as f64);
            DensityField::uniform_ball(vec![0.0; d], radius)
        }
        _ => Err(Error::Unsupported(format!(
            "no catalogued equilibrium measure for kernel {:?} in dimension {d}",
            spec.kind
        ))),
    }
}

/// `h^μ(x) = ∫ g(x − y) dμ(y)` by quadrature, at the scale of `mu`.
pub fn potential_of(spec: &KernelSpec, mu: &DensityField, x: &[f64]) -> Result<f64> {
    let tol = Tolerance::new(1e-12, 1e-10);
    if mu.dim() != spec.d || x.len() != spec.d {
        return Err(Error::Invalid("point, kernel and density dimensions differ".into()));
    }
    if spec.d == 1 {
        let bbox = mu
            .support()
            .bounding_box()
            .ok_or_else(|| Error::Unsupported("potential of an unbounded density".into()))?;
        return integrate_value(
            |y| {
                let r = (x[0] - y).abs();
                if r == 0.0 {
                    0.0
                } else {
                    mu.density(&[y]) * spec.g_radial(r)
                }
            },
            bbox.lo(0),
            bbox.hi(0),
            &[x[0]],
            tol,
        );
    }
    let Some((center, radius, value)) = mu.uniform_ball_data() else {
        return Err(Error::Unsupported(
            "potential quadrature needs d = 1 or a uniform ball".into(),
        ));
    };
    let r = dist(x, &center);
    if spec.is_coulomb() {
        // shell theorem
        let area = sphere_area(spec.d);
        let dd = spec.d as i32;
        return integrate_value(
            |rho| value * area * rho.powi(dd - 1) * spec.g_radial(rho.max(r)),
            0.0,
            radius,
            &[r],
            tol,
        );
    }
    if spec.d == 2 {
        let inner_tol = Tolerance::new(1e-13, 1e-11);
        let mut err = None;
        let v = integrate_value(
            |rho| {
                let ang = integrate_value(
                    |th| {
                        let d2 = r * r + rho * rho - 2.0 * r * rho * th.cos();
                        if d2 <= 0.0 {
                            0.0
                        } else {
                            spec.g_of_r2(d2)
                        }
                    },
                    0.0,
                    PI,
                    &[],
                    inner_tol,
                );
                match ang {
                    Ok(a) => 2.0 * value * rho * a,
                    Err(e) => {
                        err = Some(e);
                        0.0
                    }
                }
            },
            0.0,
            radius,
            &[r],
            tol,
        )?;
        return match err {
            Some(e) => Err(e),
            None => Ok(v),
        };
    }
    Err(Error::Unsupported(format!(
        "potential quadrature not available for {:?} in dimension {}",
        spec.kind, spec.d
    )))
}

/// Closed-form `∬ g dμ dμ` for catalogued profiles.
fn interaction_closed_form(spec: &KernelSpec, mu: &DensityField) -> Option<f64> {
    if !mu.is_macroscopic() {
        return None;
    }
    match (&mu.profile, &mu.support, spec.kind) {
        (Profile::Semicircle { radius }, _, KernelKind::Log1d) => {
            Some(0.25 - (radius / 2.0).ln())
        }
        (Profile::Uniform { .. }, Support::Ball { radius, .. }, KernelKind::Log2d) => {
            Some(0.25 - radius.ln())
        }
        (Profile::Uniform { .. }, Support::Ball { radius, .. }, KernelKind::Riesz { .. })
            if spec.is_coulomb() =>
        {
            let d = spec.d as f64;
            Some(2.0 * d * radius.powf(2.0 - d) / (d + 2.0))
        }
        _ => None,
    }
}

/// `∫ V dμ`, closed form for quadratic potentials on catalogued profiles.
fn potential_moment(potential: &Potential, mu: &DensityField) -> Result<f64> {
    let (base, shift) = potential.base();
    let second_moment = match (&mu.profile, &mu.support) {
        (Profile::Semicircle { radius }, _) => Some(radius * radius / 4.0),
        (Profile::Uniform { .. }, Support::Ball { center, radius }) => {
            let d = mu.d as f64;
            Some(d * radius * radius / (d + 2.0) + center.iter().map(|c| c * c).sum::<f64>())
        }
        _ => None,
    };
    let v = match (base, second_moment) {
        (Potential::Zero, _) => 0.0,
        (Potential::Quadratic { a }, Some(m2)) => a * m2,
        _ => expectation(mu, |x| base.value(x))?,
    };
    Ok(v + shift)
}

/// `∫ f dμ` for a macroscopic density (d = 1, or radial f on a ball).
fn expectation<F: FnMut(&[f64]) -> f64>(mu: &DensityField, mut f: F) -> Result<f64> {
    let tol = Tolerance::new(1e-12, 1e-9);
    let bbox = mu
        .support()
        .bounding_box()
        .ok_or_else(|| Error::Unsupported("expectation over an unbounded density".into()))?;
    if mu.d == 1 {
        return integrate_value(|x| mu.density(&[x]) * f(&[x]), bbox.lo(0), bbox.hi(0), &[], tol);
    }
    if let Some((center, radius, value)) = mu.uniform_ball_data() {
        let d = mu.d;
        let area = sphere_area(d);
        return integrate_value(
            |rho| {
                let mut x = center.clone();
                x[0] += rho;
                value * area * rho.powi(d as i32 - 1) * f(&x)
            },
            0.0,
            radius,
            &[],
            tol,
        );
    }
    Err(Error::Unsupported("expectation needs d = 1 or a uniform ball".into()))
}

/// Mean-field energy `I(μ) = ∬ g(x−y) dμ dμ + ∫ V dμ`.
///
/// Catalogued profiles use closed forms; otherwise the potential `h^μ` is
/// integrated against `μ` by nested adaptive quadrature.
pub fn meanfield_energy(model: &GasModel, mu: &DensityField) -> Result<f64> {
    if !mu.is_macroscopic() {
        return Err(Error::Invalid("mean-field energy needs a macroscopic density".into()));
    }
    let interaction = match interaction_closed_form(&model.kernel, mu) {
        Some(v) => v,
        None => meanfield_interaction_quadrature(&model.kernel, mu)?,
    };
    Ok(interaction + potential_moment(&model.potential, mu)?)
}

/// `∬ g dμ dμ` by quadrature of `h^μ` against `μ`.
pub fn meanfield_interaction_quadrature(spec: &KernelSpec, mu: &DensityField) -> Result<f64> {
    let mut err = None;
    let v = expectation(mu, |x| match potential_of(spec, mu, x) {
        Ok(h) => h,
        Err(e) => {
            err = Some(e);
            0.0
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Robin constant `c = I(μ_V) − ∫ V/2 dμ_V`.
pub fn robin_constant(model: &GasModel, mu: &DensityField) -> Result<f64> {
    Ok(meanfield_energy(model, mu)? - 0.5 * potential_moment(&model.potential, mu)?)
}

/// Effective potential `ζ = h^{μ_V} + V/2 − c`.
pub fn zeta(model: &GasModel, mu: &DensityField, x: &[f64]) -> Result<f64> {
    let c = robin_constant(model, mu)?;
    zeta_with_constant(model, mu, x, c)
}

pub(crate) fn zeta_with_constant(
    model: &GasModel,
    mu: &DensityField,
    x: &[f64],
    c: f64,
) -> Result<f64> {
    let v = potential_of(&model.kernel, mu, x)? + 0.5 * model.potential.value(x) - c;
    Ok(if v < 0.0 && v > -1e-8 { 0.0 } else { v })
}

/// Blow-up `x' = n^{1/d} x` of a macroscopic configuration and density.
pub fn blow_up(config: &Configuration, mu: &DensityField) -> Result<(Configuration, DensityField)> {
    if config.scale != Scale::Macroscopic || !mu.is_macroscopic() {
        return Err(Error::Invalid("blow-up expects macroscopic inputs".into()));
    }
    if config.dim() != mu.dim() {
        return Err(Error::Invalid("configuration and density dimensions differ".into()));
    }
    let n = config.len() as f64;
    let lambda = n.powf(1.0 / config.dim() as f64);
    let pts = config.scaled(lambda).with_scale(Scale::BlownUp { lambda });
    Ok((pts, mu.blown_up(lambda)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn semicircle_model() -> GasModel {
        GasModel::new(KernelSpec::log1d(), Potential::quadratic(0.5).unwrap(), 10).unwrap()
    }

    fn disk_model() -> GasModel {
        GasModel::new(KernelSpec::log2d(), Potential::quadratic(1.0).unwrap(), 10).unwrap()
    }

    #[test]
    fn catalogue_radii() {
        let mu = equilibrium_measure(&semicircle_model()).unwrap();
        assert!(matches!(mu.profile, Profile::Semicircle { radius } if (radius - 2.0).abs() < 1e-15));
        assert_relative_eq!(mu.density(&[0.0]), 1.0 / PI, max_relative = 1e-14);
        let mu = equilibrium_measure(&disk_model()).unwrap();
        assert_relative_eq!(mu.density(&[0.3, 0.2]), 1.0 / PI, max_relative = 1e-14);
        assert_eq!(mu.density(&[1.1, 0.0]), 0.0);
        let riesz = GasModel::new(
            KernelSpec::riesz(0.5, 1).unwrap(),
            Potential::quadratic(1.0).unwrap(),
            4,
        )
        .unwrap();
        assert!(matches!(equilibrium_measure(&riesz), Err(Error::Unsupported(_))));
    }

    #[test]
    fn coulomb_ball_density_matches_laplacian_of_v() {
        let m = GasModel::new(KernelSpec::riesz(1.0, 3).unwrap(), Potential::quadratic(2.0).unwrap(), 5)
            .unwrap();
        let mu = equilibrium_measure(&m).unwrap();
        // c_d m = a d
        assert_relative_eq!(m.kernel.csd * mu.density(&[0.0; 3]), 6.0, max_relative = 1e-12);
        assert_relative_eq!(mu.total_mass(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn disk_log_energy_is_one_quarter() {
        let spec = KernelSpec::log2d();
        let mu = DensityField::uniform_ball(vec![0.0, 0.0], 1.0).unwrap();
        let q = meanfield_interaction_quadrature(&spec, &mu).unwrap();
        assert_relative_eq!(q, 0.25, epsilon = 1e-8);
        let m = GasModel::new(spec, Potential::Zero, 1).unwrap();
        assert_relative_eq!(meanfield_energy(&m, &mu).unwrap(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn semicircle_energy_closed_form_matches_quadrature() {
        let m = semicircle_model();
        let mu = equilibrium_measure(&m).unwrap();
        let closed = meanfield_energy(&m, &mu).unwrap();
        assert_relative_eq!(closed, 0.75, epsilon = 1e-14);
        let q = meanfield_interaction_quadrature(&m.kernel, &mu).unwrap()
            + expectation(&mu, |x| m.potential.value(x)).unwrap();
        assert_relative_eq!(q, closed, epsilon = 1e-7);
    }

    #[test]
    fn shift_adds_constant_to_energy() {
        let m = semicircle_model();
        let mu = equilibrium_measure(&m).unwrap();
        let base = meanfield_energy(&m, &mu).unwrap();
        let shifted = GasModel {
            potential: m.potential.clone().shifted(1.5),
            ..m.clone()
        };
        assert_relative_eq!(meanfield_energy(&shifted, &mu).unwrap(), base + 1.5, epsilon = 1e-14);
    }

    #[test]
    fn zeta_vanishes_on_support_and_grows_outside() {
        let m = semicircle_model();
        let mu = equilibrium_measure(&m).unwrap();
        assert!(zeta(&m, &mu, &[0.0]).unwrap().abs() < 1e-7);
        assert!(zeta(&m, &mu, &[1.5]).unwrap().abs() < 1e-7);
        // closed form outside: x²/4 − |x|√(x²−4)/4 + log((|x|+√(x²−4))/2) + ... − c
        let x: f64 = 3.0;
        let h = 0.5 - x * x / 4.0 + x * (x * x - 4.0).sqrt() / 4.0
            - ((x + (x * x - 4.0).sqrt()) / 2.0).ln();
        let c = 0.75 - 0.25;
        assert_relative_eq!(zeta(&m, &mu, &[x]).unwrap(), h + x * x / 4.0 - c, epsilon = 1e-8);
        assert!(zeta(&m, &mu, &[x]).unwrap() > 0.0);

        let m = disk_model();
        let mu = equilibrium_measure(&m).unwrap();
        for r in [0.0, 0.4, 0.99] {
            assert!(zeta(&m, &mu, &[r, 0.0]).unwrap().abs() < 1e-6);
        }
        assert!(zeta(&m, &mu, &[1.5, 0.0]).unwrap() > 0.0);
    }

    #[test]
    fn blow_up_examples() {
        let cfg = Configuration::new(2, vec![0.5, 0.0].repeat(16)).unwrap();
        let mu = equilibrium_measure(&disk_model()).unwrap();
        let (c2, m2) = blow_up(&cfg, &mu).unwrap();
        assert_relative_eq!(c2.point(0)[0], 2.0, max_relative = 1e-15);
        assert_relative_eq!(m2.density(&[2.0, 0.0]), mu.density(&[0.5, 0.0]));
        assert_relative_eq!(m2.total_mass(), 16.0 * mu.total_mass(), max_relative = 1e-12);
        let back = c2.scaled(1.0 / 4.0);
        for (a, b) in back.coords().iter().zip(cfg.coords()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn ball_box_mass_partial_overlap() {
        let mu = DensityField::uniform_ball(vec![0.0, 0.0], 1.0).unwrap();
        // quarter disk
        let k = Hyperrectangle::from_bounds(&[0.0, 0.0], &[2.0, 2.0]).unwrap();
        assert_relative_eq!(mu.mass_in_box(&k).unwrap(), 0.25, epsilon = 1e-10);
        let mu = DensityField::semicircle(2.0).unwrap();
        let k = Hyperrectangle::from_bounds(&[0.0], &[5.0]).unwrap();
        assert_relative_eq!(mu.mass_in_box(&k).unwrap(), 0.5, epsilon = 1e-14);
    }
}
