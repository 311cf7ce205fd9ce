use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use riesz_gas::diagnostics::{
    discrepancy_scan, equidistribution_scan, lattice_decay_fit, number_variance, LatticeOptions,
};
use riesz_gas::field::{FieldContext, QuadratureGrid};
use riesz_gas::geometry::{box_integral, screening_regime_check, sidelength_bounds, subdivide, Face};
use riesz_gas::io;
use riesz_gas::minimize::{minimize_from_equilibrium, split_energy};
use riesz_gas::model::{blow_up, equilibrium_measure};
use riesz_gas::{Hyperrectangle, KernelSpec};

use crate::manifest::Manifest;
use crate::CliError;

fn write(out: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(out.join(name), text)?;
    log::info!("wrote {}", out.join(name).display());
    Ok(())
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    text.push('\n');
    write(out, name, &text)
}

fn comment(cmd: &str, m: &Manifest) -> String {
    format!("riesz {cmd}\nmanifest sha256 {}", m.hash())
}

pub fn minimize(m: &Manifest, out: &Path) -> Result<(), CliError> {
    let model = m.model()?;
    let mu = equilibrium_measure(&model)?;
    let (config, trace) = minimize_from_equilibrium(&model, &mu, &m.minimize_options())?;
    log::info!("final energy {} after {} iterations", trace.final_energy(), trace.entries.len());
    let split = if config.len() > 1 { split_energy(&model, &config, &mu).ok() } else { None };
    let c = comment("minimize", m);
    write(out, "points.csv", &io::points_to_csv(&config, &c))?;
    write(out, "trace.csv", &io::trace_to_csv(&trace, &c))?;
    write_json(
        out,
        "manifest.json",
        &json!({
            "manifest": m,
            "manifest_sha256": m.hash(),
            "final_energy": trace.final_energy(),
            "status": trace.status,
            "restart": trace.restart,
            "iterations": trace.entries.len(),
            "split": split,
        }),
    )
}

fn cube_grid(d: usize, per_axis: usize, spacing: f64) -> Vec<Vec<f64>> {
    let g = per_axis.max(1);
    let offs: Vec<f64> = (0..g).map(|i| (i as f64 - 0.5 * (g - 1) as f64) * spacing).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|c: Vec<f64>| {
                offs.iter().map(move |o| {
                    let mut c = c.clone();
                    c.push(*o);
                    c
                })
            })
            .collect();
    }
    out
}

pub fn scan(m: &Manifest, out: &Path) -> Result<(), CliError> {
    let path = m
        .points
        .as_ref()
        .ok_or_else(|| CliError::Validation("scan needs a points file (--points or `points`)".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read points {path}: {e}")))?;
    let config = io::points_from_csv(&text)?;
    let mut m = m.clone();
    m.n = config.len();
    let model = m.model()?;
    if config.dim() != model.d() {
        return Err(CliError::Validation("points dimension differs from the model".into()));
    }
    let mu = equilibrium_measure(&model)?;
    let (blown, mu_b) = blow_up(&config, &mu)?;
    let sep = blown.min_distance();
    let eta = m.eta_factor * sep;
    log::info!("blown-up separation {sep}, eta {eta}");
    let ctx = FieldContext::new(model.kernel, blown.clone(), Some(mu_b.clone()), eta)?;
    let d = model.d();
    let origin = vec![0.0; d];
    let mut template = QuadratureGrid::new(Hyperrectangle::cube(&origin, 1.0)?);
    template.cell = m.cell;
    template.radial_order = m.radial_order;
    let centers = cube_grid(d, m.centers_per_axis, m.ell + 1.5);
    let equi = equidistribution_scan(&ctx, &centers, m.ell, &template, eta)?;
    let disc = discrepancy_scan(&blown, &mu_b, &origin, &m.sizes, m.margin, 5)?;
    let mut variance = Vec::new();
    for (i, &ell) in m.variance_ell.iter().enumerate() {
        let (var, counts) = number_variance(&blown, &mu_b, ell, m.variance_centers, m.seed.wrapping_add(i as u64))?;
        variance.push(json!({ "ell": ell, "variance": var, "per_volume": var / ell.powi(d as i32), "counts": counts }));
    }
    let c = comment("scan", &m);
    let hash = m.hash();
    write_json(out, "scan_equidistribution.json", &json!({ "manifest_sha256": hash, "eta": eta, "result": equi }))?;
    write_json(out, "scan_discrepancy.json", &json!({ "manifest_sha256": hash, "result": disc }))?;
    write_json(out, "number_variance.json", &json!({ "manifest_sha256": hash, "rows": variance }))?;
    let mut header: Vec<String> = (0..d).map(|i| format!("center{i}")).collect();
    header.extend(["ell", "W_eta", "per_volume", "count", "discrepancy"].map(String::from));
    let rows: Vec<Vec<f64>> = equi
        .windows
        .iter()
        .map(|w| {
            let r = w.report.as_ref().expect("equidistribution rows carry reports");
            let mut row = w.center.clone();
            row.extend([w.ell, r.w_eta, r.per_volume, r.point_count as f64, w.discrepancy.unwrap_or(f64::NAN)]);
            row
        })
        .collect();
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    write(out, "windows.csv", &io::rows_to_csv(&hdr, &rows, &c))?;
    let reports: Vec<_> = equi.windows.iter().filter_map(|w| w.report.clone()).collect();
    write(out, "reports.jsonl", &io::to_json_lines(&reports)?)
}

pub fn lattice(m: &Manifest, out: &Path) -> Result<(), CliError> {
    let spec: KernelSpec = m.kernel_spec()?;
    if !(m.t_min > 0.0 && m.t_max > m.t_min && m.t_count >= 2) {
        return Err(CliError::Validation("need 0 < t_min < t_max and t_count >= 2".into()));
    }
    let ratio = (m.t_max / m.t_min).powf(1.0 / (m.t_count - 1) as f64);
    let ts: Vec<f64> = (0..m.t_count).map(|i| m.t_min * ratio.powi(i as i32)).collect();
    let basis = vec![vec![1.0]];
    let fit = lattice_decay_fit(&basis, &spec, &ts, LatticeOptions { radius: m.radius })?;
    let doubled = lattice_decay_fit(&basis, &spec, &ts, LatticeOptions { radius: 2 * m.radius })?;
    let c = comment("lattice", m);
    write(out, "profile.csv", &io::profile_to_csv(&fit.profile, &c))?;
    write_json(
        out,
        "decay.json",
        &json!({
            "manifest_sha256": m.hash(),
            "fit": fit,
            "doubled_radius_exponent": doubled.exponent,
            "exponent_change": (doubled.exponent - fit.exponent).abs(),
        }),
    )
}

pub fn partition(m: &Manifest, out: &Path) -> Result<(), CliError> {
    let h = Hyperrectangle::from_bounds(&m.box_lo, &m.box_hi)?;
    let base: Box<dyn Fn(&[f64]) -> f64 + Sync> = match m.density.as_str() {
        "uniform" => Box::new(|_| 1.0),
        "sine" => Box::new(|x: &[f64]| 1.0 + 0.3 * x[0].sin()),
        other => return Err(CliError::Validation(format!("unknown density '{other}'"))),
    };
    // rescale to an integer total mass
    let raw = box_integral(&*base, &h);
    let target = raw.round().max(1.0);
    let scale = target / raw;
    let rho = move |x: &[f64]| scale * base(x);
    let (lo, hi) = match m.density.as_str() {
        "uniform" => (scale, scale),
        _ => (0.7 * scale, 1.3 * scale),
    };
    let face = Face { axis: m.face_axis, upper: m.face_upper };
    let cells = subdivide(&h, &rho, (lo, hi), face)?;
    let (smin, smax) = sidelength_bounds(h.dim(), lo, hi);
    let c = comment("partition", m);
    write(out, "partition.csv", &io::partition_to_csv(&cells, &c))?;
    write_json(
        out,
        "partition.json",
        &json!({
            "manifest_sha256": m.hash(),
            "cells": cells.len(),
            "total_mass": target,
            "sidelength_bounds": [smin, smax],
        }),
    )
}

pub fn regime(m: &Manifest, out: &Path) -> Result<(), CliError> {
    let report = screening_regime_check(&m.regime());
    let value = json!({ "manifest_sha256": m.hash(), "regime": m.regime(), "report": report });
    let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Validation(e.to_string()))?;
    // a closed pipe on stdout is not an error; the report is also on disk
    let _ = writeln!(std::io::stdout(), "{text}");
    write_json(out, "regime.json", &value)
}
