//! The discrete energy `H_n`, its gradient, seeded gradient descent, the
//! separation check and the splitting of `H_n` into mean-field, effective
//! potential and next-order parts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    meanfield_energy, robin_constant, zeta_with_constant, Configuration, DensityField, GasModel,
};

/// Squared distances below this count as a collision.
const COLLISION: f64 = 1e-24;

/// Consecutive accepted steps with a rounding-level decrease before a run
/// counts as stalled.
pub const STALL_RUN: usize = 25;

/// Options for [`local_minimize`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop when `‖∇H_n‖_∞ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Backtracking factor in `(0, 1)`.
    pub shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub initial_step: f64,
    /// Number of seeded restarts besides the first run.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 5000,
            grad_tol: 1e-6,
            shrink: 0.5,
            armijo: 1e-4,
            initial_step: 1e-3,
            restarts: 0,
            seed: 0,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::Invalid("grad_tol must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Invalid("shrink factor must lie in (0, 1)".into()));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::Invalid("Armijo constant must lie in (0, 1)".into()));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::Invalid("initial step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    /// The line search gave up after 60 halvings, or the energy stopped
    /// changing beyond rounding for [`STALL_RUN`] accepted steps.
    Stalled,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub energy: f64,
    pub grad_inf: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    pub status: Status,
    /// Index of the restart that produced the returned configuration.
    pub restart: usize,
}

impl Trace {
    pub fn final_energy(&self) -> f64 {
        self.entries.last().map_or(f64::NAN, |e| e.energy)
    }
}

fn check_dims(model: &GasModel, config: &Configuration) -> Result<()> {
    if config.dim() != model.d() {
        return Err(Error::Invalid(format!(
            "configuration has dimension {} but the model has {}",
            config.dim(),
            model.d()
        )));
    }
    Ok(())
}

/// Interaction energy `Σ_{i≠j} g(x_i − x_j)`, or `None` on a collision.
/// Row sums are computed in parallel and added in index order.
fn interaction(model: &GasModel, c: &[f64], d: usize) -> Option<f64> {
    let n = c.len() / d;
    let spec = model.kernel;
    let rows: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = &c[i * d..(i + 1) * d];
            let mut acc = 0.0;
            for j in i + 1..n {
                let q = &c[j * d..(j + 1) * d];
                let r2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                if r2 < COLLISION {
                    return None;
                }
                acc += spec.g_of_r2(r2);
            }
            Some(acc)
        })
        .collect();
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Some(2.0 * total)
}

fn energy_raw(model: &GasModel, c: &[f64], d: usize) -> Option<f64> {
    let n = c.len() / d;
    let conf: f64 = c.chunks_exact(d).map(|p| model.potential.value(p)).sum();
    Some(interaction(model, c, d)? + n as f64 * conf)
}

fn gradient_raw(model: &GasModel, c: &[f64], d: usize) -> Option<Vec<f64>> {
    let n = c.len() / d;
    let spec = model.kernel;
    let rows: Vec<Option<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = &c[i * d..(i + 1) * d];
            let mut g = vec![0.0; d];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = &c[j * d..(j + 1) * d];
                let r2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                if r2 < COLLISION {
                    return None;
                }
                let f = spec.grad_factor(r2);
                for k in 0..d {
                    g[k] += 2.0 * f * (p[k] - q[k]);
                }
            }
            let gv = model.potential.gradient(p);
            for k in 0..d {
                g[k] += n as f64 * gv[k];
            }
            Some(g)
        })
        .collect();
    let mut out = Vec::with_capacity(c.len());
    for r in rows {
        out.extend(r?);
    }
    Some(out)
}

/// `H_n = Σ_{i≠j} g(x_i − x_j) + n Σ_i V(x_i)` over ordered pairs.
pub fn hamiltonian(model: &GasModel, config: &Configuration) -> Result<f64> {
    check_dims(model, config)?;
    energy_raw(model, config.coords(), config.dim())
        .ok_or_else(|| Error::Domain("coincident points".into()))
}

/// `∂H_n/∂x_i = 2 Σ_{j≠i} ∇g(x_i − x_j) + n ∇V(x_i)`, one vector per point.
pub fn hamiltonian_gradient(model: &GasModel, config: &Configuration) -> Result<Vec<Vec<f64>>> {
    check_dims(model, config)?;
    let g = gradient_raw(model, config.coords(), config.dim())
        .ok_or_else(|| Error::Domain("coincident points".into()))?;
    Ok(g.chunks_exact(config.dim()).map(<[f64]>::to_vec).collect())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One gradient-descent run with Armijo backtracking. The trial step is the
/// Barzilai–Borwein step when available, otherwise the previous accepted
/// step grown by `1/shrink`.
fn descend(model: &GasModel, start: &Configuration, opts: &MinimizeOptions) -> Result<(Configuration, Vec<TraceEntry>, Status)> {
    let d = start.dim();
    let mut x = start.coords().to_vec();
    let mut e = energy_raw(model, &x, d).ok_or_else(|| Error::Domain("coincident points in the start configuration".into()))?;
    let mut g = gradient_raw(model, &x, d).expect("energy was finite");
    let mut step = opts.initial_step;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut trace = vec![TraceEntry {
        iter: 0,
        energy: e,
        grad_inf: inf_norm(&g),
        step: 0.0,
    }];
    let mut status = Status::MaxIters;
    let mut flat = 0;
    for iter in 1..=opts.max_iters {
        let gi = inf_norm(&g);
        if gi <= opts.grad_tol {
            status = Status::Converged;
            break;
        }
        let gg = dot(&g, &g);
        let mut trial = match &prev {
            Some((dx, dg)) => {
                let sy = dot(dx, dg);
                if sy > 0.0 {
                    dot(dx, dx) / sy
                } else {
                    step / opts.shrink
                }
            }
            None => step,
        };
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - trial * b).collect();
            if let Some(ec) = energy_raw(model, &cand, d) {
                if ec <= e - opts.armijo * trial * gg {
                    accepted = Some((cand, ec));
                    break;
                }
            }
            trial *= opts.shrink;
        }
        let Some((cand, ec)) = accepted else {
            status = Status::Stalled;
            break;
        };
        let gc = gradient_raw(model, &cand, d).expect("energy was finite");
        let dx: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = gc.iter().zip(&g).map(|(a, b)| a - b).collect();
        prev = Some((dx, dg));
        if e - ec <= 4.0 * f64::EPSILON * e.abs().max(1.0) {
            flat += 1;
        } else {
            flat = 0;
        }
        x = cand;
        e = ec;
        g = gc;
        step = trial;
        trace.push(TraceEntry {
            iter,
            energy: e,
            grad_inf: inf_norm(&g),
            step,
        });
        if flat >= STALL_RUN {
            status = Status::Stalled;
            break;
        }
    }
    if status == Status::MaxIters && inf_norm(&g) <= opts.grad_tol {
        status = Status::Converged;
    }
    let out = Configuration::new(d, x)?.with_scale(start.scale);
    Ok((out, trace, status))
}

/// Gradient descent from `config0`, plus `opts.restarts` runs from seeded
/// perturbations of it; the lowest final energy wins. Deterministic for a
/// fixed seed regardless of thread count.
pub fn local_minimize(
    model: &GasModel,
    config0: &Configuration,
    opts: &MinimizeOptions,
) -> Result<(Configuration, Trace)> {
    opts.validate()?;
    check_dims(model, config0)?;
    let mut starts = vec![config0.clone()];
    if opts.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let spacing = if config0.len() > 1 {
            config0.min_distance()
        } else {
            1.0
        };
        for _ in 0..opts.restarts {
            let mut c = config0.clone();
            for v in c.coords_mut() {
                *v += 0.25 * spacing * rand::Rng::random_range(&mut rng, -1.0..1.0);
            }
            starts.push(c);
        }
    }
    best_of(model, &starts, opts)
}

/// Descent from `restarts + 1` i.i.d. uniform samples of the support of
/// `mu`, seeded by `opts.seed`; the lowest final energy wins.
pub fn minimize_from_equilibrium(
    model: &GasModel,
    mu: &DensityField,
    opts: &MinimizeOptions,
) -> Result<(Configuration, Trace)> {
    opts.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts = (0..=opts.restarts)
        .map(|_| mu.sample_support(model.n, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    best_of(model, &starts, opts)
}

fn best_of(
    model: &GasModel,
    starts: &[Configuration],
    opts: &MinimizeOptions,
) -> Result<(Configuration, Trace)> {
    let mut best: Option<(Configuration, Trace)> = None;
    for (k, s) in starts.iter().enumerate() {
        let (c, entries, status) = descend(model, s, opts)?;
        let trace = Trace {
            entries,
            status,
            restart: k,
        };
        let better = match &best {
            None => true,
            Some((_, t)) => trace.final_energy() < t.final_energy(),
        };
        if better {
            best = Some((c, trace));
        }
    }
    Ok(best.expect("at least one start"))
}

/// Minimum pairwise distance and its normalization
/// `min_dist · (n · max m_V)^{1/d}`.
pub fn separation_check(
    model: &GasModel,
    config: &Configuration,
    mu: &DensityField,
) -> Result<(f64, f64)> {
    check_dims(model, config)?;
    if config.len() < 2 {
        return Err(Error::Invalid("separation needs at least two points".into()));
    }
    let min_dist = config.min_distance();
    let n = config.len() as f64;
    let normalized = min_dist * (n * mu.max_density()).powf(1.0 / config.dim() as f64);
    Ok((min_dist, normalized))
}

/// Decomposition `H_n = n² I + 2n Σ ζ(x_i) − (n/d) log n + scale · w_n`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitReport {
    pub h_n: f64,
    pub leading: f64,
    pub zeta_term: f64,
    /// `(n/d) log n` for logarithmic kernels, zero otherwise.
    pub log_correction: f64,
    /// `n^{1+s/d}` (Riesz) or `n` (log).
    pub scale: f64,
    pub w_n: f64,
}

impl SplitReport {
    pub fn reconstructed(&self) -> f64 {
        self.leading + self.zeta_term - self.log_correction + self.scale * self.w_n
    }
}

/// Splits `H_n` of a macroscopic configuration; `w_n` is solved for.
pub fn split_energy(
    model: &GasModel,
    config: &Configuration,
    mu: &DensityField,
) -> Result<SplitReport> {
    let h_n = hamiltonian(model, config)?;
    let n = config.len() as f64;
    let d = config.dim() as f64;
    let leading = n * n * meanfield_energy(model, mu)?;
    let c = robin_constant(model, mu)?;
    let zetas = config
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| zeta_with_constant(model, mu, p, c))
        .collect::<Result<Vec<f64>>>()?;
    let zeta_term = 2.0 * n * zetas.iter().sum::<f64>();
    let (log_correction, scale) = if model.kernel.is_log() {
        (n / d * n.ln(), n)
    } else {
        (0.0, n.powf(1.0 + model.kernel.s() / d))
    };
    let w_n = (h_n - leading - zeta_term + log_correction) / scale;
    Ok(SplitReport {
        h_n,
        leading,
        zeta_term,
        log_correction,
        scale,
        w_n,
    })
}
