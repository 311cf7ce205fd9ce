use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use riesz_gas::geometry::ScreeningRegime;
use riesz_gas::minimize::MinimizeOptions;
use riesz_gas::{GasModel, KernelSpec, Potential};

use crate::CliError;

/// Flat `key = value` experiment description. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Manifest {
    pub kernel: String,
    pub s: f64,
    pub d: usize,
    pub potential: String,
    pub a: f64,
    pub n: usize,
    pub seed: u64,

    pub max_iters: usize,
    pub grad_tol: f64,
    pub initial_step: f64,
    pub restarts: usize,

    pub points: Option<String>,
    pub eta_factor: f64,
    pub ell: f64,
    pub centers_per_axis: usize,
    pub sizes: Vec<f64>,
    pub margin: f64,
    pub variance_ell: Vec<f64>,
    pub variance_centers: usize,
    pub cell: f64,
    pub radial_order: usize,

    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub radius: usize,

    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub density: String,
    pub face_axis: usize,
    pub face_upper: bool,

    pub k: usize,
    pub b: f64,
    pub delta: f64,
    pub theta: f64,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub gamma: f64,
    pub c0: f64,
}

impl Default for Manifest {
    fn default() -> Self {
        let reg = ScreeningRegime::default();
        let opts = MinimizeOptions::default();
        Manifest {
            kernel: "log2d".into(),
            s: 0.0,
            d: 2,
            potential: "quadratic".into(),
            a: 1.0,
            n: 100,
            seed: 0,
            max_iters: opts.max_iters,
            grad_tol: opts.grad_tol,
            initial_step: opts.initial_step,
            restarts: 0,
            points: None,
            eta_factor: 0.25,
            ell: 4.0,
            centers_per_axis: 3,
            sizes: vec![2.0, 3.0, 4.0, 6.0, 8.0],
            margin: 1.0,
            variance_ell: vec![2.0, 4.0, 6.0],
            variance_centers: 100,
            cell: 0.25,
            radial_order: 12,
            t_min: 0.25,
            t_max: 2.0,
            t_count: 8,
            radius: 400,
            box_lo: vec![0.0, 0.0],
            box_hi: vec![10.0, 10.0],
            density: "uniform".into(),
            face_axis: 0,
            face_upper: false,
            k: reg.k,
            b: reg.b,
            delta: reg.delta,
            theta: reg.theta,
            eps1: reg.eps1,
            eps2: reg.eps2,
            big_l: reg.big_l,
            gamma: reg.gamma,
            c0: reg.c0,
        }
    }
}

impl Manifest {
    pub fn load(path: Option<&Path>) -> Result<Manifest, CliError> {
        match path {
            None => Ok(Manifest::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Validation(format!("bad config {}: {e}", p.display())))
            }
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("manifest serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec, CliError> {
        let spec = match self.kernel.as_str() {
            "log2d" => {
                if self.d != 2 {
                    return Err(CliError::Validation("log2d needs d = 2".into()));
                }
                KernelSpec::log2d()
            }
            "log1d" => {
                if self.d != 1 {
                    return Err(CliError::Validation("log1d needs d = 1".into()));
                }
                KernelSpec::log1d()
            }
            "riesz" => KernelSpec::riesz(self.s, self.d)?,
            other => return Err(CliError::Validation(format!("unknown kernel '{other}'"))),
        };
        Ok(spec)
    }

    pub fn model(&self) -> Result<GasModel, CliError> {
        let pot = match self.potential.as_str() {
            "quadratic" => Potential::quadratic(self.a)?,
            other => return Err(CliError::Validation(format!("unknown potential '{other}'"))),
        };
        Ok(GasModel::new(self.kernel_spec()?, pot, self.n)?)
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            initial_step: self.initial_step,
            restarts: self.restarts,
            seed: self.seed,
            ..MinimizeOptions::default()
        }
    }

    pub fn regime(&self) -> ScreeningRegime {
        ScreeningRegime {
            d: self.d,
            k: self.k,
            b: self.b,
            delta: self.delta,
            theta: self.theta,
            eps1: self.eps1,
            eps2: self.eps2,
            big_l: self.big_l,
            gamma: self.gamma,
            c0: self.c0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_file_parses_and_rejects_typos() {
        let m: Manifest = toml::from_str("kernel = \"log1d\"\nd = 1\nn = 7\nL = 5.0\n").unwrap();
        assert_eq!(m.n, 7);
        assert_eq!(m.big_l, 5.0);
        assert!(toml::from_str::<Manifest>("kernal = \"x\"\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = Manifest::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 9;
        assert_ne!(a.hash(), b.hash());
    }
}
