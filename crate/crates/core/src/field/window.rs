//! Window energies by a partition of unity: polar patches around nearby
//! charges resolve the truncation spheres, a tensor Gauss–Legendre grid
//! covers the rest.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{FieldContext, QuadratureGrid, WindowEnergyReport};
use crate::error::{Error, Result};
use crate::geometry::Hyperrectangle;
use crate::kernels::{clustering_power, smeared_mass_in_window};
use crate::quadrature::{clustered_nodes, gauss_legendre};

/// Axis-aligned rectangle of the integration plane.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    fn dist(&self, p: [f64; 2]) -> f64 {
        let dx = (self.lo[0] - p[0]).max(p[0] - self.hi[0]).max(0.0);
        let dy = (self.lo[1] - p[1]).max(p[1] - self.hi[1]).max(0.0);
        dx.hypot(dy)
    }
}

#[derive(Debug, Clone, Copy)]
struct Patch {
    center: [f64; 2],
    rho: f64,
    r_in: f64,
}

/// C³ step from 1 (at `r ≤ r_in`) to 0 (at `r ≥ rho`).
fn cutoff(r: f64, r_in: f64, rho: f64) -> f64 {
    if r <= r_in {
        1.0
    } else if r >= rho {
        0.0
    } else {
        let t = (r - r_in) / (rho - r_in);
        let t4 = t * t * t * t;
        1.0 - t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
    }
}

/// Planar view of the window integral: `(x0, x1)` for `d = 2, k = 0` and
/// `(x, y)` for `d = 1, k = 1`.
pub(crate) struct Planar<'a> {
    ctx: &'a FieldContext,
    eta: f64,
    weighted: bool,
    gamma: f64,
    patches: Vec<Patch>,
}

impl Planar<'_> {
    /// `|y|^γ |E_η|²` at `u`.
    fn density(&self, u: [f64; 2]) -> Result<f64> {
        let mut e = [0.0; 2];
        self.ctx.field_into(&u, self.eta, &mut e)?;
        let w = if self.weighted && self.gamma != 0.0 { u[1].abs().powf(self.gamma) } else { 1.0 };
        Ok(w * (e[0] * e[0] + e[1] * e[1]))
    }

    fn outside_weight(&self, u: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for p in &self.patches {
            let r = (u[0] - p.center[0]).hypot(u[1] - p.center[1]);
            if r < p.rho {
                s += cutoff(r, p.r_in, p.rho);
            }
        }
        1.0 - s
    }
}

/// Lattice cuts `k·h` strictly inside `(lo, hi)`, plus the ends.
fn lattice_cuts(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let mut v = vec![lo];
    let mut k = (lo / h).floor() + 1.0;
    while k * h < hi {
        if k * h - lo > 1e-12 * h && hi - k * h > 1e-12 * h {
            v.push(k * h);
        }
        k += 1.0;
    }
    v.push(hi);
    v
}

fn diameter(b: &Hyperrectangle) -> f64 {
    b.sides().iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// Vertical layers `[0, h0], [h0, 1.5 h0], …` up to `t_max`; only the
/// bottom one is clustered.
fn vertical_layers(h0: f64, t_max: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, h0.min(t_max))];
    let mut a = h0;
    while a < t_max * (1.0 - 1e-12) {
        let b = (1.5 * a).min(t_max);
        let b = if t_max - b < 0.25 * (b - a) { t_max } else { b };
        out.push((a, b));
        a = b;
    }
    out
}

/// Angular intervals of `{θ : p + r(cos θ, sin θ) ∈ rect}`.
fn arcs(p: [f64; 2], r: f64, rect: &Rect, upper_half: bool) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0, if upper_half { PI } else { 2.0 * PI }];
    let norm = |t: f64| t.rem_euclid(2.0 * PI);
    for c in [rect.lo[0], rect.hi[0]] {
        let v = (c - p[0]) / r;
        if v.abs() < 1.0 {
            let a = v.acos();
            cuts.push(norm(a));
            cuts.push(norm(-a));
        }
    }
    for c in [rect.lo[1], rect.hi[1]] {
        let v = (c - p[1]) / r;
        if v.abs() < 1.0 {
            let a = v.asin();
            cuts.push(norm(a));
            cuts.push(norm(PI - a));
        }
    }
    let top = cuts[1];
    cuts.retain(|&t| t <= top);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        let q = [p[0] + r * m.cos(), p[1] + r * m.sin()];
        let inside = q[0] >= rect.lo[0] && q[0] <= rect.hi[0] && q[1] >= rect.lo[1] && q[1] <= rect.hi[1];
        if inside {
            match out.last_mut() {
                Some(last) if (last.1 - w[0]).abs() < 1e-14 => last.1 = w[1],
                _ => out.push((w[0], w[1])),
            }
        }
    }
    out
}

/// `∫ φ_p |y|^γ |E_η|²` over the patch of `p` intersected with `rects`.
fn patch_integral(pl: &Planar, patch: &Patch, rects: &[Rect], grid: &QuadratureGrid) -> Result<f64> {
    let c = patch.center;
    let mut radii = vec![0.0, pl.eta, patch.r_in, patch.rho];
    for rect in rects {
        for x in [rect.lo[0], rect.hi[0]] {
            radii.push((x - c[0]).abs());
            for y in [rect.lo[1], rect.hi[1]] {
                radii.push((x - c[0]).hypot(y - c[1]));
            }
        }
        for y in [rect.lo[1], rect.hi[1]] {
            radii.push((y - c[1]).abs());
        }
    }
    radii.retain(|&r| r >= 0.0 && r <= patch.rho);
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * patch.rho);
    // geometric refinement above η: ratio at most 2
    let mut pieces = Vec::new();
    for w in radii.windows(2) {
        let (mut a, b) = (w[0], w[1]);
        if a > 0.0 {
            while b / a > 2.0 {
                pieces.push((a, 2.0 * a));
                a *= 2.0;
            }
        }
        pieces.push((a, b));
    }
    let q_vert = grid.vertical_exponent.unwrap_or_else(|| clustering_power(pl.gamma));
    let mut total = 0.0;
    for (a, b) in pieces {
        let nodes = if a == 0.0 && pl.weighted {
            clustered_nodes(grid.radial_order, a, b, q_vert, (true, false))
        } else {
            clustered_nodes(grid.radial_order, a, b, 2.0, (true, true))
        };
        for (r, wr) in nodes {
            let phi = cutoff(r, patch.r_in, patch.rho);
            if phi == 0.0 || r == 0.0 {
                continue;
            }
            let mut ring = 0.0;
            for rect in rects {
                for (t0, t1) in arcs(c, r, rect, pl.weighted) {
                    let n_sub = ((t1 - t0) / (0.25 * PI)).ceil().max(1.0) as usize;
                    let h = (t1 - t0) / n_sub as f64;
                    for j in 0..n_sub {
                        let (s0, s1) = (t0 + j as f64 * h, t0 + (j + 1) as f64 * h);
                        let ends = if pl.weighted {
                            (s0.abs() < 1e-14, (s1 - PI).abs() < 1e-14)
                        } else {
                            (false, false)
                        };
                        for (t, wt) in clustered_nodes(grid.angular_order, s0, s1, q_vert, ends) {
                            ring += wt * pl.density([c[0] + r * t.cos(), c[1] + r * t.sin()])?;
                        }
                    }
                }
            }
            total += wr * r * phi * ring;
        }
    }
    Ok(total)
}

/// Tensor integral of `(1 − Σφ) |y|^γ |E_η|²` over `rect`, split at the
/// horizontal lattice and at the given vertical layers. Returns the total
/// and the per-layer contributions.
fn tensor_integral(
    pl: &Planar,
    rect: &Rect,
    layers: &[(f64, f64)],
    grid: &QuadratureGrid,
) -> Result<(f64, Vec<f64>)> {
    let xs = lattice_cuts(rect.lo[0], rect.hi[0], grid.cell);
    let mut cells = Vec::new();
    for (li, &(y0, y1)) in layers.iter().enumerate() {
        let ys = if pl.weighted { vec![y0, y1] } else { lattice_cuts(y0, y1, grid.cell) };
        for xw in xs.windows(2) {
            for yw in ys.windows(2) {
                cells.push((li, xw[0], xw[1], yw[0], yw[1]));
            }
        }
    }
    let rule = gauss_legendre(grid.order);
    let q_vert = grid.vertical_exponent.unwrap_or_else(|| clustering_power(pl.gamma));
    let values: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(_, x0, x1, y0, y1)| {
            // skip cells inside a patch core
            for p in &pl.patches {
                let far_x = (x0 - p.center[0]).abs().max((x1 - p.center[0]).abs());
                let far_y = (y0 - p.center[1]).abs().max((y1 - p.center[1]).abs());
                if far_x.hypot(far_y) <= p.r_in {
                    return Ok(0.0);
                }
            }
            let ynodes: Vec<(f64, f64)> = if pl.weighted && y0 == 0.0 {
                clustered_nodes(grid.order, y0, y1, q_vert, (true, false))
            } else {
                rule.mapped(y0, y1).collect()
            };
            let mut acc = 0.0;
            for (x, wx) in rule.mapped(x0, x1) {
                for &(y, wy) in &ynodes {
                    let u = [x, y];
                    let chi = pl.outside_weight(u);
                    if chi <= 0.0 {
                        continue;
                    }
                    acc += wx * wy * chi * pl.density(u)?;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut per_layer = vec![0.0; layers.len()];
    let mut total = 0.0;
    for (v, c) in values.into_iter().zip(&cells) {
        let v = v?;
        per_layer[c.0] += v;
        total += v;
    }
    Ok((total, per_layer))
}

/// Planar pieces, patches and bookkeeping shared by the window integrals.
pub(crate) struct Setup<'a> {
    pub planar: Planar<'a>,
    pub rects: Vec<Rect>,
    pub pieces: Vec<Hyperrectangle>,
    pub layers: Vec<(f64, f64)>,
}

pub(crate) fn setup<'a>(ctx: &'a FieldContext, grid: &QuadratureGrid, eta: f64) -> Result<Setup<'a>> {
    let spec = &ctx.spec;
    if spec.d + spec.k != 2 {
        return Err(Error::Unsupported(format!(
            "window energies are implemented for d + k = 2, got d = {}, k = {}",
            spec.d, spec.k
        )));
    }
    if grid.window.dim() != spec.d {
        return Err(Error::Invalid("window dimension differs from the kernel dimension".into()));
    }
    if grid.radial_order < 4 || grid.angular_order < 4 || grid.order < 2 {
        return Err(Error::Numeric(format!(
            "grid too coarse: radial order {} and angular order {} must be at least 4 nodes per eta",
            grid.radial_order, grid.angular_order
        )));
    }
    if !(grid.cell > 0.0) {
        return Err(Error::Invalid("grid cell size must be positive".into()));
    }
    let weighted = spec.k == 1;
    let pieces = grid.window.disjoint_pieces();
    let bbox = grid.window.bounding_box();
    let t_max = if weighted { grid.t_max.unwrap_or_else(|| diameter(&bbox)) } else { 0.0 };
    let rects: Vec<Rect> = pieces
        .iter()
        .map(|b| {
            if weighted {
                Rect { lo: [b.lo(0), 0.0], hi: [b.hi(0), t_max] }
            } else {
                Rect { lo: [b.lo(0), b.lo(1)], hi: [b.hi(0), b.hi(1)] }
            }
        })
        .collect();
    let pts: Vec<[f64; 2]> = ctx
        .charges
        .points()
        .map(|p| if weighted { [p[0], 0.0] } else { [p[0], p[1]] })
        .collect();
    let dist_to_window = |p: [f64; 2]| rects.iter().map(|r| r.dist(p)).fold(f64::INFINITY, f64::min);
    // separation inside the window dilated by η
    let near: Vec<usize> = (0..pts.len()).filter(|&i| dist_to_window(pts[i]) < eta).collect();
    for (a, &i) in near.iter().enumerate() {
        for &j in &near[a + 1..] {
            let r = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
            if r <= 2.0 * eta {
                return Err(Error::Geometry(format!(
                    "charges at distance {r} inside the window: eta = {eta} must stay below half the separation"
                )));
            }
        }
    }
    let mut patches = Vec::new();
    for (i, &p) in pts.iter().enumerate() {
        let base = (3.0 * eta).max(0.5);
        if dist_to_window(p) >= base {
            continue;
        }
        let nn = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
            .fold(f64::INFINITY, f64::min);
        let rho = base.min(0.5 * nn);
        if rho <= eta || dist_to_window(p) >= rho {
            continue;
        }
        let r_in = (0.6 * rho).max(eta + 0.3 * (rho - eta));
        patches.push(Patch { center: p, rho, r_in });
    }
    if weighted {
        let rho_max = patches.iter().map(|p| p.rho).fold(0.0, f64::max);
        if t_max <= rho_max {
            return Err(Error::Invalid(format!("t_max = {t_max} must exceed the patch radius {rho_max}")));
        }
    }
    let layers = if weighted {
        vertical_layers(grid.cell.min(t_max), t_max)
    } else {
        vec![(bbox.lo(1), bbox.hi(1))]
    };
    Ok(Setup {
        planar: Planar {
            ctx,
            eta,
            weighted,
            gamma: spec.gamma,
            patches,
        },
        rects,
        pieces,
        layers,
    })
}

/// `W_η(E, K) = ∫_{K×ℝ^k} |y|^γ |E_η|² − c_{s,d} g(η) Σ_p δ_p^{(η)}(K × ℝ^k)`.
///
/// Implemented for `d + k = 2`: planar Coulomb (`d = 2`, log kernel) and
/// one-dimensional Riesz or log gases with one extension dimension. For
/// `k = 1` the integral runs over `|y| ≤ t_max` by symmetry; the energy
/// above is estimated from the decay of the top layers and reported as
/// `tail_estimate` only.
pub fn window_energy(ctx: &FieldContext, grid: &QuadratureGrid) -> Result<WindowEnergyReport> {
    let eta = ctx.eta;
    let su = setup(ctx, grid, eta)?;
    let pl = &su.planar;
    let mut quad = 0.0;
    let mut per_layer = vec![0.0; su.layers.len()];
    for rect in &su.rects {
        let layers: Vec<(f64, f64)> = if pl.weighted {
            su.layers.clone()
        } else {
            vec![(rect.lo[1], rect.hi[1])]
        };
        let (t, pls) = tensor_integral(pl, rect, &layers, grid)?;
        quad += t;
        if pl.weighted {
            for (a, b) in per_layer.iter_mut().zip(pls) {
                *a += b;
            }
        }
    }
    let patch_values: Vec<Result<f64>> = pl
        .patches
        .par_iter()
        .map(|p| {
            let near: Vec<Rect> = su.rects.iter().copied().filter(|r| r.dist(p.center) < p.rho).collect();
            patch_integral(pl, p, &near, grid)
        })
        .collect();
    for v in patch_values {
        quad += v?;
    }
    let mut tail = 0.0;
    if pl.weighted {
        quad *= 2.0;
        let n = per_layer.len();
        if n >= 3 {
            let (a, b) = (per_layer[n - 3], per_layer[n - 2]);
            let q = if a > 0.0 { b / a } else { 0.0 };
            tail = if q < 1.0 { 2.0 * b * q / (1.0 - q) } else { f64::INFINITY };
        }
    }
    let spec = &ctx.spec;
    let mut smeared = 0.0;
    let mut count = 0;
    for p in ctx.charges.points() {
        if su.pieces.iter().any(|b| b.contains_half_open(p)) {
            count += 1;
        }
        let dist = su.pieces.iter().map(|b| b.distance_to(p)).fold(f64::INFINITY, f64::min);
        if dist >= eta {
            continue;
        }
        let inside = grid.window.contains(p);
        if inside && grid.window.boundary_distance(p) >= eta {
            smeared += 1.0;
            continue;
        }
        for b in &su.pieces {
            smeared += smeared_mass_in_window(spec, p, eta, b)?;
        }
    }
    let volume = grid.window.volume();
    let w_eta = quad - spec.csd * spec.g_radial(eta) * smeared;
    Ok(WindowEnergyReport {
        w_eta,
        quad_integral: quad,
        smeared_mass: smeared,
        point_count: count,
        volume,
        per_volume: w_eta / volume,
        eta,
        tail_estimate: tail,
    })
}
