use serde::{Deserialize, Serialize};

/// Screening parameters. Only the fields relevant to `k` are read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRegime {
    pub d: usize,
    pub k: usize,
    pub b: f64,
    pub delta: f64,
    pub theta: f64,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub gamma: f64,
    /// Constant `c0` of the screening condition (`k = 1`).
    pub c0: f64,
}

impl Default for ScreeningRegime {
    fn default() -> Self {
        ScreeningRegime {
            d: 2,
            k: 0,
            b: 0.75,
            delta: 1.1,
            theta: 0.5,
            eps1: 1.0,
            eps2: 1e-4,
            big_l: 1e6,
            gamma: 0.0,
            c0: 1.0,
        }
    }
}

/// Margin used for the asymptotic inequality `ε₁ ≫ ε₂^{1/4}`.
pub const EPS_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub pass: bool,
    pub conditions: Vec<Condition>,
    /// Admissible `δ ∈ (1, δ_max)` (`k = 0`).
    pub delta_interval: Option<(f64, f64)>,
    /// Admissible `θ ∈ [θ_min, θ_max)` (`k = 0`).
    pub theta_interval: Option<(f64, f64)>,
    /// Smallest admissible `L` (`k = 1`).
    pub l_min: Option<f64>,
}

fn cond(name: &str, pass: bool, detail: String) -> Condition {
    Condition {
        name: name.to_string(),
        pass,
        detail,
    }
}

/// Checks the parameter constraints that make the screening error small.
pub fn screening_regime_check(reg: &ScreeningRegime) -> RegimeReport {
    let d = reg.d as f64;
    let mut conditions = Vec::new();
    let mut report = RegimeReport {
        pass: false,
        conditions: Vec::new(),
        delta_interval: None,
        theta_interval: None,
        l_min: None,
    };
    if reg.k == 0 {
        let b_min = d / (d + 2.0);
        conditions.push(cond(
            "b",
            reg.b > b_min && reg.b < 1.0,
            format!("need {b_min} < b < 1, got b = {}", reg.b),
        ));
        let delta_max = 1.0 + (reg.b * (d + 2.0) - d) / (d * (d + 2.0));
        report.delta_interval = Some((1.0, delta_max));
        conditions.push(cond(
            "delta",
            reg.delta > 1.0 && reg.delta < delta_max,
            format!("need 1 < delta < {delta_max}, got delta = {}", reg.delta),
        ));
        let lo = (reg.delta * d - reg.b) / (d + 1.0);
        let hi = reg.b + (1.0 - reg.delta) * d;
        report.theta_interval = Some((lo, hi));
        conditions.push(cond(
            "theta",
            reg.theta >= lo && reg.theta < hi,
            format!("need {lo} <= theta < {hi}, got theta = {}", reg.theta),
        ));
    } else {
        let floor = EPS_MARGIN * reg.eps2.powf(0.25);
        conditions.push(cond(
            "eps1",
            reg.eps1 <= 1.0 && reg.eps1 >= floor && reg.eps2 > 0.0,
            format!("need {floor} <= eps1 <= 1, got eps1 = {}", reg.eps1),
        ));
        let g = reg.gamma;
        let l_min = reg.c0.powf(-2.0 / (1.0 - g)) * reg.eps2.powf(-(d - g + 1.0) / (2.0 * (1.0 - g)));
        report.l_min = Some(l_min);
        conditions.push(cond(
            "L",
            reg.big_l >= l_min,
            format!("need L >= {l_min}, got L = {}", reg.big_l),
        ));
    }
    report.pass = conditions.iter().all(|c| c.pass);
    report.conditions = conditions;
    report
}
