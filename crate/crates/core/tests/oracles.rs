//! Values checked against independent computations: closed forms through
//! `statrs`, Monte Carlo, scalar minimization and brute-force recounts.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use riesz_gas::diagnostics::discrepancy;
use riesz_gas::geometry::{crenel_cube, crenel_r1_max};
use riesz_gas::kernels::{csd_constant, g_eval};
use riesz_gas::minimize::{hamiltonian, local_minimize, minimize_from_equilibrium, MinimizeOptions};
use riesz_gas::model::{blow_up, equilibrium_measure, meanfield_interaction_quadrature, zeta};
use riesz_gas::{Configuration, DensityField, GasModel, Hyperrectangle, KernelSpec, Potential};

/// `s ∫_{S^d} |y|^γ dσ` with `γ = s − d + 1`.
fn extension_constant(s: f64, d: usize) -> f64 {
    let g = s - d as f64 + 1.0;
    s * 2.0 * PI.powf(0.5 * d as f64) * gamma(0.5 * (g + 1.0)) / gamma(0.5 * (d as f64 + 1.0 + g))
}

#[test]
fn extension_constants_match_gamma_closed_form() {
    for s in [0.25, 0.5, 0.75] {
        let spec = KernelSpec::riesz(s, 1).unwrap();
        assert_relative_eq!(csd_constant(&spec), extension_constant(s, 1), max_relative = 1e-8);
    }
    for s in [1.5, 2.5] {
        let spec = KernelSpec::riesz(s, 3).unwrap();
        assert_relative_eq!(csd_constant(&spec), extension_constant(s, 3), max_relative = 1e-8);
    }
    assert_relative_eq!(csd_constant(&KernelSpec::log1d()), 2.0 * PI, max_relative = 1e-12);
    assert_relative_eq!(csd_constant(&KernelSpec::log2d()), 2.0 * PI, max_relative = 1e-12);
    assert_relative_eq!(csd_constant(&KernelSpec::riesz(1.0, 3).unwrap()), 4.0 * PI, max_relative = 1e-12);
}

#[test]
fn disk_log_energy_is_one_quarter() {
    let mu = DensityField::uniform_ball(vec![0.0, 0.0], 1.0).unwrap();
    let i = meanfield_interaction_quadrature(&KernelSpec::log2d(), &mu).unwrap();
    assert_relative_eq!(i, 0.25, max_relative = 1e-6);
}

#[test]
fn disk_log_energy_agrees_with_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut disk = || loop {
        let p: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if p[0] * p[0] + p[1] * p[1] < 1.0 {
            return p;
        }
    };
    let n = 400_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let (a, b) = (disk(), disk());
        let v = -((a[0] - b[0]).hypot(a[1] - b[1])).ln();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let mu = DensityField::uniform_ball(vec![0.0, 0.0], 1.0).unwrap();
    let i = meanfield_interaction_quadrature(&KernelSpec::log2d(), &mu).unwrap();
    assert!((i - mean).abs() < 4.0 * se, "quadrature {i}, monte carlo {mean} ± {se}");
}

#[test]
fn semicircle_effective_potential_outside_support() {
    let model = GasModel::new(KernelSpec::log1d(), Potential::quadratic(1.0).unwrap(), 10).unwrap();
    let mu = equilibrium_measure(&model).unwrap();
    let r = 2.0_f64.sqrt();
    // y = R sin θ turns the semicircle into (2/π) cos²θ dθ on (−π/2, π/2)
    let m = 200_000;
    let h = |x: f64| {
        let mut acc = 0.0;
        for i in 0..m {
            let t = -0.5 * PI + (i as f64 + 0.5) * PI / m as f64;
            acc += -(x - r * t.sin()).abs().ln() * 2.0 / PI * t.cos().powi(2);
        }
        acc * PI / m as f64
    };
    // ∫ −log|y| dμ for a semicircle of radius R
    let h0 = -(0.5 * r).ln() + 0.5;
    let v = |x: f64| model.potential.value(&[x]);
    let c = h0 + 0.5 * v(0.0);
    let expected = h(3.0) + 0.5 * v(3.0) - c;
    let z = zeta(&model, &mu, &[3.0]).unwrap();
    assert!(z > 0.0);
    assert_relative_eq!(z, expected, max_relative = 1e-6);
    assert!(zeta(&model, &mu, &[0.0]).unwrap().abs() < 1e-9);
}

#[test]
fn disk_effective_potential_vanishes_on_support() {
    let model = GasModel::new(KernelSpec::log2d(), Potential::quadratic(1.0).unwrap(), 10).unwrap();
    let mu = equilibrium_measure(&model).unwrap();
    for x in [[0.0, 0.0], [0.3, -0.4], [0.0, 0.99], [-0.7, 0.7]] {
        assert!(zeta(&model, &mu, &x).unwrap().abs() < 1e-6, "{x:?}");
    }
    assert!(zeta(&model, &mu, &[1.5, 0.0]).unwrap() > 0.0);
}

#[test]
fn three_point_riesz_energy() {
    let model = GasModel::new(KernelSpec::riesz(0.5, 1).unwrap(), Potential::quadratic(1.0).unwrap(), 3).unwrap();
    let c = Configuration::new(1, vec![0.0, 1.0, 4.0]).unwrap();
    let conf: f64 = [0.0, 1.0, 4.0].iter().map(|&x| model.potential.value(&[x])).sum::<f64>() * 3.0;
    let expected = 2.0 * (1.0 + 0.5 + 1.0 / 3.0_f64.sqrt());
    assert_relative_eq!(hamiltonian(&model, &c).unwrap() - conf, expected, max_relative = 1e-12);
    assert_relative_eq!(expected, 4.154701, epsilon = 1e-6);
}

#[test]
fn two_particle_log_gas_matches_scalar_minimum() {
    let model = GasModel::new(KernelSpec::log1d(), Potential::quadratic(1.0).unwrap(), 2).unwrap();
    // symmetric pair ±x: H(x) = 2 g(2x) + 2 · 2 V(x); golden-section search
    let f = |x: f64| 2.0 * g_eval(&model.kernel, &[2.0 * x]).unwrap() + 4.0 * model.potential.value(&[x]);
    let (mut a, mut b) = (1e-3, 5.0);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (c, d) = (b - phi * (b - a), a + phi * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let xstar = 0.5 * (a + b);
    let start = Configuration::new(1, vec![-0.3, 0.9]).unwrap();
    let e0 = hamiltonian(&model, &start).unwrap();
    let (c, trace) = local_minimize(&model, &start, &MinimizeOptions::default()).unwrap();
    let mut p = c.coords().to_vec();
    p.sort_by(f64::total_cmp);
    assert_relative_eq!(p[0], -xstar, epsilon = 1e-6);
    assert_relative_eq!(p[1], xstar, epsilon = 1e-6);
    assert!(trace.final_energy() < e0);
}

#[test]
fn discrepancy_matches_direct_recount() {
    let model = GasModel::new(KernelSpec::log2d(), Potential::quadratic(1.0).unwrap(), 150).unwrap();
    let mu = equilibrium_measure(&model).unwrap();
    let opts = MinimizeOptions { seed: 4, ..Default::default() };
    let (c, _) = minimize_from_equilibrium(&model, &mu, &opts).unwrap();
    let (cb, mub) = blow_up(&c, &mu).unwrap();
    let m = 150.0 / (150.0 * PI); // blown-up uniform density n·(1/π)/n
    for (center, side) in [([0.0, 0.0], 4.0), ([1.3, -2.1], 3.0), ([-3.0, 2.5], 2.5)] {
        let k = Hyperrectangle::cube(&center, side).unwrap();
        let count = cb
            .points()
            .filter(|p| (0..2).all(|i| p[i] >= center[i] - 0.5 * side && p[i] < center[i] + 0.5 * side))
            .count();
        let expected = count as f64 - m * side * side;
        assert!((discrepancy(&cb, &mub, &k).unwrap() - expected).abs() < 1e-6);
    }
}

#[test]
fn crenel_cube_on_separated_poisson_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r0 = 0.5;
    let mut pts: Vec<Vec<f64>> = Vec::new();
    // dart throwing at density about 1 on [−6, 6]²
    for _ in 0..20_000 {
        if pts.len() >= 144 {
            break;
        }
        let p = vec![rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)];
        if pts.iter().all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) >= r0) {
            pts.push(p);
        }
    }
    let k = Hyperrectangle::cube(&[0.0, 0.0], 8.0).unwrap();
    let r1 = 0.5 * crenel_r1_max(2, 8.0, r0);
    let c = crenel_cube(&pts, &k, r1, r0).unwrap();
    for p in &pts {
        // distance to the boundary of an axis-aligned cube, computed directly
        let h = 0.5 * c.cube.side(0);
        let (dx, dy) = (p[0].abs() - h, p[1].abs() - h);
        let dist = if dx <= 0.0 && dy <= 0.0 {
            (-dx).min(-dy)
        } else {
            dx.max(0.0).hypot(dy.max(0.0))
        };
        assert!(dist >= r1, "point {p:?} at {dist} < {r1}");
    }
    assert!(c.tau.abs() <= 1.0);
}
