use proptest::prelude::*;

use riesz_gas::diagnostics::{discrepancy, number_variance};
use riesz_gas::field::{rescale_energy, vertical_profile, window_energy, FieldContext, QuadratureGrid};
use riesz_gas::geometry::{
    crenel_domain, good_boundary_slice, screening_regime_check, subdivide, Face, ScreeningRegime,
};
use riesz_gas::kernels::{ball_volume, csd_constant, f_eta, g_eval, g_trunc};
use riesz_gas::minimize::{hamiltonian, hamiltonian_gradient};
use riesz_gas::{Configuration, DensityField, GasModel, Hyperrectangle, KernelSpec, Potential};

fn kernels() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        Just(KernelSpec::log1d()),
        Just(KernelSpec::log2d()),
        (0.05..0.95f64).prop_map(|s| KernelSpec::riesz(s, 1).unwrap()),
        (0.05..1.95f64).prop_map(|s| KernelSpec::riesz(s, 2).unwrap()),
        (1.0..2.9f64).prop_map(|s| KernelSpec::riesz(s, 3).unwrap()),
    ]
}

fn vector(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, d)
}

/// Points of the grid `spacing·ℤ^d` inside `[0, side)^d`, each moved by at
/// most `jitter`, so the separation is at least `spacing − 2 jitter`.
fn jittered(d: usize, side: usize, spacing: f64, jitter: f64, seed: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let total = side.pow(d as u32);
    for idx in 0..total {
        let mut p = Vec::with_capacity(d);
        let mut r = idx;
        for i in 0..d {
            let j = seed[(idx * d + i) % seed.len()];
            p.push(((r % side) as f64 + 0.5) * spacing + jitter * j);
            r /= side;
        }
        out.push(p);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_is_even_and_truncation_caps_it(spec in kernels(), x in vector(3), eta in 0.01..0.9f64) {
        let x = &x[..spec.d];
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-6);
        let minus: Vec<f64> = x.iter().map(|v| -v).collect();
        let g = g_eval(&spec, x).unwrap();
        prop_assert_eq!(g, g_eval(&spec, &minus).unwrap());
        let gt = g_trunc(&spec, x, eta).unwrap();
        prop_assert!(gt <= g + 1e-12 * g.abs());
        let f = f_eta(&spec, x, eta).unwrap();
        prop_assert!(f >= -1e-12);
        prop_assert!((g - gt - f).abs() <= 1e-9 * g.abs().max(1.0));
        prop_assert!(csd_constant(&spec) > 0.0);
    }

    #[test]
    fn kernel_is_radial(spec in kernels(), r in 0.05..5.0f64, theta in 0.0..std::f64::consts::TAU) {
        prop_assume!(spec.d >= 2);
        let mut a = vec![0.0; spec.d];
        let mut b = vec![0.0; spec.d];
        a[0] = r;
        b[0] = r * theta.cos();
        b[1] = r * theta.sin();
        let (ga, gb) = (g_eval(&spec, &a).unwrap(), g_eval(&spec, &b).unwrap());
        prop_assert!((ga - gb).abs() <= 1e-12 * ga.abs().max(1.0));
    }

    #[test]
    fn hamiltonian_ignores_labels_and_forces_balance(
        spec in kernels(),
        coords in prop::collection::vec(-2.0..2.0f64, 3..30),
        a in 0.2..3.0f64,
        shift in 1usize..7,
    ) {
        let d = spec.d;
        let n = coords.len() / d;
        prop_assume!(n >= 2);
        let coords = coords[..n * d].to_vec();
        let c = Configuration::new(d, coords).unwrap();
        prop_assume!(c.min_distance() > 1e-3);
        let model = GasModel::new(spec, Potential::quadratic(a).unwrap(), n).unwrap();
        let h = hamiltonian(&model, &c).unwrap();
        let mut pts = c.to_vecs();
        pts.rotate_left(shift % n);
        let rotated = Configuration::from_points(d, &pts).unwrap();
        prop_assert!((h - hamiltonian(&model, &rotated).unwrap()).abs() <= 1e-10 * h.abs().max(1.0));
        // pair forces cancel, leaving n Σ ∇V
        let grad = hamiltonian_gradient(&model, &c).unwrap();
        for i in 0..d {
            let total: f64 = grad.iter().map(|g| g[i]).sum();
            let conf: f64 = c.points().map(|p| n as f64 * model.potential.gradient(p)[i]).sum();
            let scale: f64 = grad.iter().map(|g| g[i].abs()).sum::<f64>().max(1.0);
            prop_assert!((total - conf).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn discrepancy_is_additive(
        seed in prop::collection::vec(-1.0..1.0f64, 64),
        lo in prop::collection::vec(0.5..3.0f64, 2),
        side in prop::collection::vec(1.0..4.0f64, 2),
        cut in 0.1..0.9f64,
    ) {
        let pts = jittered(2, 8, 1.0, 0.45, &seed);
        let c = Configuration::from_points(2, &pts).unwrap();
        let mu = DensityField::uniform_box(Hyperrectangle::from_bounds(&[0.0, 0.0], &[8.0, 8.0]).unwrap(), 1.0).unwrap();
        let hi = vec![lo[0] + side[0], lo[1] + side[1]];
        let mid = lo[0] + cut * side[0];
        let whole = Hyperrectangle::from_bounds(&lo, &hi).unwrap();
        let left = Hyperrectangle::from_bounds(&lo, &[mid, hi[1]]).unwrap();
        let right = Hyperrectangle::from_bounds(&[mid, lo[1]], &hi).unwrap();
        let sum = discrepancy(&c, &mu, &left).unwrap() + discrepancy(&c, &mu, &right).unwrap();
        prop_assert!((discrepancy(&c, &mu, &whole).unwrap() - sum).abs() < 1e-9);
    }

    #[test]
    fn number_variance_ignores_labels(
        seed in prop::collection::vec(-1.0..1.0f64, 50),
        ell in 1.0..4.0f64,
        rng_seed in any::<u64>(),
        shift in 1usize..60,
    ) {
        let pts = jittered(2, 8, 1.0, 0.4, &seed);
        let mu = DensityField::uniform_box(Hyperrectangle::from_bounds(&[0.0, 0.0], &[8.0, 8.0]).unwrap(), 1.0).unwrap();
        let a = Configuration::from_points(2, &pts).unwrap();
        let mut p2 = pts.clone();
        p2.rotate_left(shift);
        let b = Configuration::from_points(2, &p2).unwrap();
        let va = number_variance(&a, &mu, ell, 40, rng_seed).unwrap();
        let vb = number_variance(&b, &mu, ell, 40, rng_seed).unwrap();
        prop_assert_eq!(va, vb);
    }

    #[test]
    fn regime_interval_satisfies_theta_conditions(b in 0.51..0.99f64, frac in 0.0..1.0f64, pick in 0.0..1.0f64) {
        let d = 2.0;
        let dmax = 1.0 + (b * (d + 2.0) - d) / (d * (d + 2.0));
        let delta = 1.0 + frac * (dmax - 1.0);
        let base = ScreeningRegime { d: 2, b, delta, ..Default::default() };
        let (lo, hi) = screening_regime_check(&base).theta_interval.unwrap();
        prop_assume!(hi > lo);
        let theta = lo + pick * (hi - lo) * 0.999;
        prop_assert!((delta * d - b) / (d + 1.0) <= theta && theta < b + (1.0 - delta) * d);
        let r = screening_regime_check(&ScreeningRegime { theta, ..base });
        prop_assert!(r.conditions.iter().find(|c| c.name == "theta").unwrap().pass);
    }

    #[test]
    fn good_slice_never_exceeds_scan_mean(coef in prop::collection::vec(-2.0..2.0f64, 6), big in 3.0..10.0f64) {
        let profile = |t: f64| coef.iter().enumerate().map(|(i, c)| c * (t * (i as f64 + 1.0)).sin()).sum::<f64>().abs();
        let k = Hyperrectangle::cube(&[0.0, 0.0], big).unwrap();
        let (_, choice) = good_boundary_slice(&profile, &k, big / 4.0, 40).unwrap();
        prop_assert!(choice.value <= choice.mean + 1e-12);
    }

    #[test]
    fn rescaling_by_one_is_identity(spec in kernels(), w in -50.0..50.0f64, eta in 0.01..0.5f64, vol in 0.5..20.0f64) {
        prop_assert_eq!(rescale_energy(w, 1.0, eta, vol, &spec), (w, eta));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subdivide_cells_have_unit_mass(
        w in 2usize..7,
        h in 2usize..7,
        amp in 0.0..0.3f64,
        freq in 0.2..1.5f64,
        axis in 0usize..2,
        upper in any::<bool>(),
    ) {
        let hr = Hyperrectangle::from_bounds(&[0.0, 0.0], &[w as f64 * 2.0, h as f64 * 2.0]).unwrap();
        // ρ = s (1 + amp sin(freq x₀)) with s fixing an integer mass
        let raw = |x: f64| x - amp / freq * (freq * x).cos();
        let m0 = (raw(hr.hi(0)) - raw(hr.lo(0))) * hr.side(1);
        let s = m0.round() / m0;
        let rho = move |x: &[f64]| s * (1.0 + amp * (freq * x[0]).sin());
        let cells = subdivide(&hr, &rho, (s * (1.0 - amp), s * (1.0 + amp)), Face { axis, upper }).unwrap();
        prop_assert_eq!(cells.len() as f64, m0.round());
        let mut vol = 0.0;
        for c in &cells {
            let mass = s * (raw(c.hi(0)) - raw(c.lo(0))) * c.side(1);
            prop_assert!((mass - 1.0).abs() < 1e-9, "cell mass {}", mass);
            vol += c.volume();
        }
        prop_assert!((vol - hr.volume()).abs() < 1e-9 * hr.volume());
    }

    #[test]
    fn crenel_domain_keeps_charges_off_its_boundary(
        seed in prop::collection::vec(-1.0..1.0f64, 64),
        center in prop::collection::vec(2.0..6.0f64, 2),
        ell in 2.0..4.0f64,
    ) {
        let pts = jittered(2, 8, 1.0, 0.25, &seed);
        let r0 = 0.5;
        let k = Hyperrectangle::cube(&center, ell).unwrap();
        let gamma = crenel_domain(&pts, &k, r0).unwrap();
        let outer = Hyperrectangle::cube(&center, ell + 1.0).unwrap();
        prop_assert!(outer.contains_box(&gamma.bounding_box()));
        let q = r0 / 8.0;
        for p in &pts {
            let inside = gamma.contains(p);
            // a circle of radius q around the charge stays on one side of ∂Γ
            for i in 0..64 {
                let t = i as f64 * std::f64::consts::TAU / 64.0;
                let x = [p[0] + 0.999 * q * t.cos(), p[1] + 0.999 * q * t.sin()];
                prop_assert_eq!(gamma.contains(&x), inside, "charge {:?}", p);
            }
        }
        let inner = Hyperrectangle::cube(&center, ell - 1.0).unwrap();
        for i in 0..=10 {
            for j in 0..=10 {
                let x = [inner.lo(0) + inner.side(0) * i as f64 / 10.0, inner.lo(1) + inner.side(1) * j as f64 / 10.0];
                prop_assert!(gamma.contains(&x));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn window_energy_is_additive_and_bounded(seed in prop::collection::vec(-1.0..1.0f64, 32), cut in 1usize..4) {
        let spec = KernelSpec::log2d();
        // separation ≥ 2 r0 with r0 = 0.3, so disjoint r0-balls pack the window
        let pts = jittered(2, 4, 1.0, 0.2, &seed);
        let r0 = 0.3;
        let c = Configuration::from_points(2, &pts).unwrap();
        let bg = DensityField::uniform_box(Hyperrectangle::from_bounds(&[0.0, 0.0], &[4.0, 4.0]).unwrap(), 1.0).unwrap();
        let eta = 0.1;
        let ctx = FieldContext::new(spec, c, Some(bg), eta).unwrap();
        let whole = Hyperrectangle::from_bounds(&[0.0, 0.0], &[4.0, 4.0]).unwrap();
        let left = Hyperrectangle::from_bounds(&[0.0, 0.0], &[cut as f64, 4.0]).unwrap();
        let right = Hyperrectangle::from_bounds(&[cut as f64, 0.0], &[4.0, 4.0]).unwrap();
        let rw = window_energy(&ctx, &QuadratureGrid::new(whole)).unwrap();
        let rl = window_energy(&ctx, &QuadratureGrid::new(left)).unwrap();
        let rr = window_energy(&ctx, &QuadratureGrid::new(right)).unwrap();
        prop_assert!((rw.w_eta - rl.w_eta - rr.w_eta).abs() <= 1e-4 * rw.w_eta.abs());
        prop_assert_eq!(rw.point_count, 16);
        let self_term = spec.csd * spec.g_radial(eta);
        prop_assert!((rw.w_eta - (rw.quad_integral - self_term * rw.smeared_mass)).abs() <= 1e-12 * rw.quad_integral.abs());
        prop_assert!(rw.w_eta <= rw.quad_integral);
        let lower = rw.quad_integral - self_term * rw.volume / (ball_volume(2) * r0 * r0);
        prop_assert!(lower <= rw.w_eta);
    }

    #[test]
    fn vertical_profile_is_non_increasing(seed in prop::collection::vec(-1.0..1.0f64, 12), s in 0.2..0.8f64) {
        let spec = KernelSpec::riesz(s, 1).unwrap();
        let pts: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 + 0.5 + 0.3 * seed[i]]).collect();
        let bg = DensityField::uniform_box(Hyperrectangle::from_bounds(&[0.0], &[12.0]).unwrap(), 1.0).unwrap();
        let ctx = FieldContext::new(spec, Configuration::from_points(1, &pts).unwrap(), Some(bg), 0.1).unwrap();
        let k = Hyperrectangle::from_bounds(&[4.0], &[8.0]).unwrap();
        let ts = [0.25, 0.5, 1.0, 2.0, 4.0];
        let c2 = vertical_profile(&ctx, &k, &ts).unwrap();
        for w in c2.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9), "{:?}", c2);
        }
    }
}
