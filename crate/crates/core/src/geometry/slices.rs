use serde::{Deserialize, Serialize};

use super::Hyperrectangle;
use crate::error::{Error, Result};

/// Minimum number of scan samples for slice selection.
pub const MIN_SCAN: usize = 32;

/// Outcome of a mean-value slice selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceChoice {
    /// Selected parameter (side length or height).
    pub tau: f64,
    /// Profile value at `tau`.
    pub value: f64,
    /// Mean of the scanned values.
    pub mean: f64,
    pub samples: Vec<(f64, f64)>,
}

fn scan(profile: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize, closed: bool) -> SliceChoice {
    let n = n.max(MIN_SCAN);
    let denom = if closed { (n - 1) as f64 } else { n as f64 };
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = a + (b - a) * i as f64 / denom;
            (t, profile(t))
        })
        .collect();
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / n as f64;
    // first minimum wins ties
    let (tau, value) = samples
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, s| if s.1 < best.1 { s } else { best });
    SliceChoice {
        tau,
        value,
        mean,
        samples,
    }
}

/// Concentric sub-rectangle `K'_L ⊂ K_L` whose boundary carries little
/// energy.
///
/// `energy_profile(τ)` is the shell energy on the boundary of the
/// concentric rectangle whose sides are those of `k_l` reduced by `L − τ`,
/// where `L` is the smallest side. The scan covers `τ ∈ [L − 2l, L − l)`
/// with at least 32 uniform samples and returns the minimizer, so the
/// selected value never exceeds the scan mean.
pub fn good_boundary_slice(
    energy_profile: &dyn Fn(f64) -> f64,
    k_l: &Hyperrectangle,
    l: f64,
    samples: usize,
) -> Result<(Hyperrectangle, SliceChoice)> {
    let big_l = k_l.sides().into_iter().fold(f64::INFINITY, f64::min);
    if !(l > 0.0 && l <= big_l / 3.0) {
        return Err(Error::Invalid(format!("slice width l = {l} must lie in (0, L/3] with L = {big_l}")));
    }
    let choice = scan(energy_profile, big_l - 2.0 * l, big_l - l, samples, false);
    let shrink = big_l - choice.tau;
    let rect = k_l.grown(-shrink)?;
    Ok((rect, choice))
}

/// Height `t' ∈ [t/2, t]` minimizing the horizontal-slab energy
/// `tail_profile(t')` over a uniform scan (extension dimension `k = 1`).
pub fn good_vertical_slice(
    tail_profile: &dyn Fn(f64) -> f64,
    t: f64,
    k: usize,
    samples: usize,
) -> Result<SliceChoice> {
    if k != 1 {
        return Err(Error::Unsupported("vertical slices need an extension dimension k = 1".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Invalid("height must be positive".into()));
    }
    Ok(scan(tail_profile, 0.5 * t, t, samples, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_takes_first_sample() {
        let k = Hyperrectangle::cube(&[0.0, 0.0], 9.0).unwrap();
        let (r, c) = good_boundary_slice(&|_| 2.0, &k, 1.0, 32).unwrap();
        assert_eq!(c.tau, 7.0);
        assert!((r.side(0) - 7.0).abs() < 1e-12);
        assert!(c.value <= c.mean);
    }

    #[test]
    fn spike_is_avoided() {
        let k = Hyperrectangle::cube(&[0.0], 9.0).unwrap();
        let prof = |t: f64| if (t - 7.0).abs() < 0.01 { 100.0 } else { 1.0 + 0.01 * t };
        let (_, c) = good_boundary_slice(&prof, &k, 1.0, 64).unwrap();
        assert!((c.tau - 7.0).abs() > 0.01);
    }

    #[test]
    fn vertical_slice_needs_extension() {
        assert!(matches!(good_vertical_slice(&|t| t, 2.0, 0, 32), Err(Error::Unsupported(_))));
        let c = good_vertical_slice(&|t| (t - 1.5).abs(), 2.0, 1, 33).unwrap();
        assert!((c.tau - 1.5).abs() < 1e-12);
        assert!(c.value <= 2.0 * c.mean);
    }
}
