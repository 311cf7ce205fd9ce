//! Regenerates `fixtures/truncation_constants.json` entries. Run with
//! `cargo test --release --test calibration -- --ignored --nocapture`.

use riesz_gas::field::{truncation_rate, window_energy, FieldContext, QuadratureGrid};
use riesz_gas::{Configuration, DensityField, Hyperrectangle, KernelSpec};

fn lattice(d: usize, half: i32) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    for i in -half..half {
        if d == 1 {
            pts.push(vec![i as f64 + 0.5]);
        } else {
            for j in -half..half {
                pts.push(vec![i as f64 + 0.5, j as f64 + 0.5]);
            }
        }
    }
    pts
}

fn max_ratio(spec: KernelSpec) -> f64 {
    let d = spec.d;
    let half = if d == 1 { 6 } else { 3 };
    let pts = lattice(d, half);
    let big = Hyperrectangle::cube(&vec![0.0; d], 2.0 * half as f64).unwrap();
    let bg = DensityField::uniform_box(big, 1.0).unwrap();
    let window = Hyperrectangle::cube(&vec![0.0; d], 4.0).unwrap();
    let n_in = pts.iter().filter(|p| window.contains(p)).count() as f64;
    let ctx = FieldContext::new(spec, Configuration::from_points(d, &pts).unwrap(), Some(bg), 0.2).unwrap();
    let grid = QuadratureGrid::new(window);
    let mut worst: f64 = 0.0;
    for eta in [0.05, 0.1, 0.2] {
        let w_eta = window_energy(&ctx.with_eta(eta).unwrap(), &grid).unwrap().w_eta;
        for frac in [0.5, 0.25, 0.125] {
            let w_a = window_energy(&ctx.with_eta(eta * frac).unwrap(), &grid).unwrap().w_eta;
            let ratio = (w_a - w_eta).abs() / (n_in * truncation_rate(&spec, eta));
            worst = worst.max(ratio);
        }
    }
    worst
}

#[test]
#[ignore]
fn calibrate_truncation_constants() {
    let specs = [
        ("log2d", KernelSpec::log2d()),
        ("log1d", KernelSpec::log1d()),
        ("riesz", KernelSpec::riesz(0.25, 1).unwrap()),
        ("riesz", KernelSpec::riesz(0.5, 1).unwrap()),
        ("riesz", KernelSpec::riesz(0.75, 1).unwrap()),
    ];
    for (name, spec) in specs {
        let r = max_ratio(spec);
        println!(
            "{{\"kind\": \"{name}\", \"s\": {}, \"d\": {}, \"measured\": {r:.6}, \"C\": {:.4}}}",
            spec.s(),
            spec.d,
            1.25 * r
        );
    }
}
