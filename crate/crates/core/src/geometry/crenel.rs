use serde::{Deserialize, Serialize};

use super::{Hyperrectangle, Region};
use crate::error::{Error, Result};
use crate::kernels::ball_volume;

/// A cube `K_{ℓ+τ}(a)` whose boundary clears every `r1`-ball around the
/// points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrenelCube {
    pub cube: Hyperrectangle,
    pub tau: f64,
    pub r1: f64,
}

/// Packing bound `|K_{ℓ+1} \ K_{ℓ−1}| / |B_{r0/2}|` on the number of
/// separated points near `∂K_ℓ`.
pub fn boundary_packing_bound(d: usize, side: f64, r0: f64) -> f64 {
    let shell = (side + 1.0).powi(d as i32) - (side - 1.0).max(0.0).powi(d as i32);
    shell / (ball_volume(d) * (0.5 * r0).powi(d as i32))
}

/// Largest admissible `r1`: each point near the boundary rules out a set of
/// `τ` of length at most `4 d r1`, so `r1 < 1 / (2 d N)` leaves part of
/// `[−1, 1]` free.
pub fn crenel_r1_max(d: usize, side: f64, r0: f64) -> f64 {
    1.0 / (2.0 * d as f64 * boundary_packing_bound(d, side, r0))
}

fn check_cube(k: &Hyperrectangle) -> Result<f64> {
    let s = k.side(0);
    if (1..k.dim()).any(|i| (k.side(i) - s).abs() > 1e-12 * s.max(1.0)) {
        return Err(Error::Invalid("crenel constructions need a cube".into()));
    }
    Ok(s)
}

fn clears(cube: &Hyperrectangle, points: &[Vec<f64>], r1: f64) -> bool {
    points.iter().all(|p| cube.boundary_distance(p) >= r1)
}

/// Scan `τ = 0, +h, −h, +2h, …` over `[−1, 1]` with `h ≤ r1/4` and return
/// the first cube `K_{ℓ+τ}(a)` whose boundary stays at distance `≥ r1` from
/// every point.
fn scan_tau(points: &[Vec<f64>], k: &Hyperrectangle, r1: f64) -> Option<CrenelCube> {
    let side = k.side(0);
    let steps = (4.0 / r1).ceil() as usize;
    let h = 1.0 / steps as f64;
    let mut taus = vec![0.0];
    for i in 1..=steps {
        taus.push(i as f64 * h);
        taus.push(-(i as f64) * h);
    }
    taus.into_iter().find_map(|tau| {
        if side + tau <= 0.0 {
            return None;
        }
        let cube = Hyperrectangle::cube(k.center(), side + tau).ok()?;
        clears(&cube, points, r1).then_some(CrenelCube { cube, tau, r1 })
    })
}

/// Cube near `k` with boundary clearing all `r1`-balls around `points`.
///
/// Requires `r1 < crenel_r1_max(d, ℓ, r0)` where `r0` is the minimum point
/// separation.
pub fn crenel_cube(
    points: &[Vec<f64>],
    k: &Hyperrectangle,
    r1: f64,
    r0: f64,
) -> Result<CrenelCube> {
    let side = check_cube(k)?;
    if !(r1 > 0.0) {
        return Err(Error::Invalid("r1 must be positive".into()));
    }
    let max = crenel_r1_max(k.dim(), side, r0);
    if r1 >= max {
        return Err(Error::Geometry(format!(
            "r1 = {r1} violates the packing condition r1 < {max:e}; reduce r1"
        )));
    }
    scan_tau(points, k, r1).ok_or_else(|| {
        Error::Geometry(format!("no admissible crenel shift for r1 = {r1}; reduce r1"))
    })
}

/// Like [`crenel_cube`] without the packing precondition: tries `r1`, then
/// halves it (at most 30 times) until a shift is found.
pub fn find_crenel_cube(points: &[Vec<f64>], k: &Hyperrectangle, r1: f64) -> Result<CrenelCube> {
    check_cube(k)?;
    let mut r = r1;
    for _ in 0..=30 {
        if let Some(c) = scan_tau(points, k, r) {
            return Ok(c);
        }
        r *= 0.5;
    }
    Err(Error::Geometry(format!("no admissible crenel shift down to r1 = {r:e}")))
}

/// `Γ = K_ℓ ∪ ⋃_{p∈P} K_{r/2}(p)` with `P` the points whose cube `K_{r/2}(p)`
/// meets `∂K_ℓ` and `r = min(r0, 1)`.
///
/// Every point then lies at distance `≥ r/8` from `∂Γ`, and
/// `K_{ℓ−1} ⊆ Γ ⊆ K_{ℓ+1}`.
pub fn crenel_domain(points: &[Vec<f64>], k: &Hyperrectangle, r0: f64) -> Result<Region> {
    check_cube(k)?;
    if !(r0 > 0.0) {
        return Err(Error::Invalid("separation r0 must be positive".into()));
    }
    let r = r0.min(1.0);
    let q = 0.25 * r;
    let d = k.dim();
    // points near the boundary, checked for separation
    let near: Vec<&Vec<f64>> = points
        .iter()
        .filter(|p| k.boundary_distance(p) <= r0 + q * (d as f64).sqrt())
        .collect();
    for (i, p) in near.iter().enumerate() {
        for qv in &near[i + 1..] {
            let dist: f64 = p.iter().zip(qv.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if dist < r0 {
                return Err(Error::Geometry(format!(
                    "points at distance {dist} violate the separation r0 = {r0}"
                )));
            }
        }
    }
    let mut boxes = vec![k.clone()];
    for p in near {
        // L∞ distance to ∂K at most r/4
        let linf_inside = (0..d)
            .map(|i| k.half_lengths()[i] - (p[i] - k.center()[i]).abs())
            .fold(f64::INFINITY, f64::min);
        let straddles = if linf_inside >= 0.0 {
            linf_inside <= q
        } else {
            (0..d).all(|i| (p[i] - k.center()[i]).abs() - k.half_lengths()[i] <= q)
        };
        if straddles {
            boxes.push(Hyperrectangle::cube(p, 0.5 * r)?);
        }
    }
    let region = Region::new(boxes)?;
    let bound = r / 8.0;
    for p in points {
        if region.contains(p) || region.bounding_box().distance_to(p) < bound {
            let dist = region.boundary_distance(p);
            if dist < bound * (1.0 - 1e-12) {
                return Err(Error::Geometry(format!(
                    "charge at distance {dist} from the crenel boundary (bound {bound})"
                )));
            }
        }
    }
    Ok(region)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_point_set_keeps_cube() {
        let k = Hyperrectangle::cube(&[0.0, 0.0], 8.0).unwrap();
        let c = crenel_cube(&[], &k, 0.001, 0.5).unwrap();
        assert_eq!(c.tau, 0.0);
        assert_eq!(c.cube, k);
    }

    #[test]
    fn point_on_face_is_cleared() {
        let k = Hyperrectangle::cube(&[0.0, 0.0], 8.0).unwrap();
        let pts = vec![vec![4.0, 0.3]];
        let c = crenel_cube(&pts, &k, 0.001, 0.5).unwrap();
        assert!(c.cube.boundary_distance(&pts[0]) >= 0.001);
        assert!(c.tau > 0.0);
    }

    #[test]
    fn domain_with_one_bump() {
        let k = Hyperrectangle::cube(&[0.0, 0.0], 8.0).unwrap();
        let pts = vec![vec![4.0, 0.0], vec![0.0, 0.0]];
        let g = crenel_domain(&pts, &k, 0.8).unwrap();
        assert_eq!(g.boxes().len(), 2);
        assert!(g.boundary_distance(&pts[0]) >= 0.1);
        assert!((g.boundary_distance(&pts[0]) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn domain_without_straddlers_is_the_cube() {
        let k = Hyperrectangle::cube(&[0.0, 0.0], 8.0).unwrap();
        let g = crenel_domain(&[vec![1.0, 1.0]], &k, 0.5).unwrap();
        assert_eq!(g.boxes(), &[k]);
    }
}
