use serde::{Deserialize, Serialize};

use super::Hyperrectangle;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_value, Tolerance};

/// A face of a box: the side `x_axis = lo` (`upper = false`) or `x_axis = hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

/// Sidelength interval `[2^{-d} ρ̄^{-d} ρ^{d-1}, 2^d ρ^{-d} ρ̄^{d-1}]` that every
/// cell of a subdivision respects.
pub fn sidelength_bounds(d: usize, rho_lower: f64, rho_upper: f64) -> (f64, f64) {
    let d = d as i32;
    let lo = 2f64.powi(-d) * rho_upper.powi(-d) * rho_lower.powi(d - 1);
    let hi = 2f64.powi(d) * rho_lower.powi(-d) * rho_upper.powi(d - 1);
    (lo, hi)
}

/// Partition of `h` into cells of unit `ρ`-mass, driven only by the box
/// mass primitive `mass`.
///
/// The box is first cut perpendicular to `face` into strips of mass
/// `b = ⌊I/ℓ⌋` (the last strip, farthest from the face, takes the
/// remainder in `[b, 2b)`); each strip is then subdivided recursively along
/// the remaining axes. Cells touching `face` all have the thickness of the
/// first strip.
pub fn subdivide_with_mass(
    h: &Hyperrectangle,
    mass: &dyn Fn(&Hyperrectangle) -> f64,
    rho_bounds: (f64, f64),
    face: Face,
) -> Result<Vec<Hyperrectangle>> {
    let d = h.dim();
    let (rl, ru) = rho_bounds;
    if face.axis >= d {
        return Err(Error::Geometry(format!("face axis {} out of range", face.axis)));
    }
    if !(rl > 0.0 && rl <= ru && ru.is_finite()) {
        return Err(Error::Geometry(format!(
            "density bounds must satisfy 0 < lower <= upper, got ({rl}, {ru})"
        )));
    }
    if let Some(i) = (0..d).find(|&i| h.side(i) < 2.0 / rl) {
        return Err(Error::Geometry(format!(
            "sidelength {} along axis {i} is below 2/rho_lower = {}",
            h.side(i),
            2.0 / rl
        )));
    }
    let total = mass(h);
    let count = total.round();
    if !((total - count).abs() <= 1e-9 && count >= 1.0) {
        return Err(Error::Geometry(format!(
            "total density mass {total} is not a positive integer"
        )));
    }
    let mut axes = vec![face.axis];
    axes.extend((0..d).filter(|&i| i != face.axis));
    let mut out = Vec::with_capacity(count as usize);
    split(h, mass, &axes, face.upper, count as usize, &mut out)?;
    Ok(out)
}

/// [`subdivide_with_mass`] with box masses from nested adaptive quadrature
/// of `rho`.
pub fn subdivide(
    h: &Hyperrectangle,
    rho: &(dyn Fn(&[f64]) -> f64 + Sync),
    rho_bounds: (f64, f64),
    face: Face,
) -> Result<Vec<Hyperrectangle>> {
    let mass = |b: &Hyperrectangle| box_integral(rho, b);
    subdivide_with_mass(h, &mass, rho_bounds, face)
}

/// `∫_B f` by nested Gauss–Kronrod quadrature.
pub fn box_integral(f: &dyn Fn(&[f64]) -> f64, b: &Hyperrectangle) -> f64 {
    fn rec(f: &dyn Fn(&[f64]) -> f64, b: &Hyperrectangle, x: &mut [f64], axis: usize) -> f64 {
        let d = b.dim();
        // well inside the 1e-9 per-cell mass requirement
        let tol = Tolerance::new(1e-13, 1e-12);
        integrate_value(
            |t| {
                x[axis] = t;
                if axis + 1 == d {
                    f(x)
                } else {
                    rec(f, b, x, axis + 1)
                }
            },
            b.lo(axis),
            b.hi(axis),
            &[],
            tol,
        )
        .unwrap_or(f64::NAN)
    }
    let mut x = b.center().to_vec();
    rec(f, b, &mut x, 0)
}

fn with_range(b: &Hyperrectangle, axis: usize, lo: f64, hi: f64) -> Hyperrectangle {
    let mut l = b.lower();
    let mut u = b.upper();
    l[axis] = lo;
    u[axis] = hi;
    Hyperrectangle::from_bounds(&l, &u).expect("nonempty slab")
}

/// Position `p` along `axis` (measured from the chosen side) at which the
/// slab between the side and `p` carries mass `target`; `total` is the mass
/// of `b`.
fn find_cut(
    b: &Hyperrectangle,
    mass: &dyn Fn(&Hyperrectangle) -> f64,
    axis: usize,
    from_upper: bool,
    target: f64,
    total: f64,
) -> Result<f64> {
    let (lo, hi) = (b.lo(axis), b.hi(axis));
    let slab = |p: f64| {
        if from_upper {
            mass(&with_range(b, axis, p, hi))
        } else {
            mass(&with_range(b, axis, lo, p))
        }
    };
    // f(p) increasing in the distance from the starting side
    let f = |t: f64| {
        let p = if from_upper { hi - t } else { lo + t };
        slab(p) - target
    };
    let len = hi - lo;
    let (mut a, mut fa) = (0.0, -target);
    let (mut c, mut fc) = (len, total - target);
    if fc < 0.0 {
        return Err(Error::Numeric("slab mass below the requested target".into()));
    }
    let tol = 1e-12 * target.max(1.0);
    let mut side = 0i32;
    let mut t = 0.5 * len;
    for _ in 0..200 {
        t = (a * fc - c * fa) / (fc - fa);
        if !(t > a && t < c) {
            t = 0.5 * (a + c);
        }
        let ft = f(t);
        if ft.abs() <= tol || (c - a) <= 1e-15 * len {
            break;
        }
        if ft > 0.0 {
            c = t;
            fc = ft;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = t;
            fa = ft;
            if side == -1 {
                fc *= 0.5;
            }
            side = -1;
        }
    }
    Ok(if from_upper { hi - t } else { lo + t })
}

/// Cuts `b` along `axis` into pieces of the given masses, in order from the
/// chosen side; the last piece takes whatever is left.
fn cut_pieces(
    b: &Hyperrectangle,
    mass: &dyn Fn(&Hyperrectangle) -> f64,
    axis: usize,
    from_upper: bool,
    masses: &[f64],
) -> Result<Vec<Hyperrectangle>> {
    let mut rest = b.clone();
    let mut left: f64 = masses.iter().sum();
    let mut out = Vec::with_capacity(masses.len());
    for (k, &m) in masses.iter().enumerate() {
        if k + 1 == masses.len() {
            out.push(rest.clone());
            break;
        }
        let p = find_cut(&rest, mass, axis, from_upper, m, left)?;
        left -= m;
        let (piece, remaining) = if from_upper {
            (
                with_range(&rest, axis, p, rest.hi(axis)),
                with_range(&rest, axis, rest.lo(axis), p),
            )
        } else {
            (
                with_range(&rest, axis, rest.lo(axis), p),
                with_range(&rest, axis, p, rest.hi(axis)),
            )
        };
        out.push(piece);
        rest = remaining;
    }
    Ok(out)
}

fn split(
    b: &Hyperrectangle,
    mass: &dyn Fn(&Hyperrectangle) -> f64,
    axes: &[usize],
    from_upper: bool,
    count: usize,
    out: &mut Vec<Hyperrectangle>,
) -> Result<()> {
    let axis = axes[0];
    if axes.len() == 1 {
        let pieces = cut_pieces(b, mass, axis, from_upper, &vec![1.0; count])?;
        out.extend(pieces);
        return Ok(());
    }
    let strip = (count as f64 / b.side(axis)).floor() as usize;
    if strip == 0 {
        return Err(Error::Geometry(format!(
            "strip mass vanishes: mass {count} over length {} along axis {axis}",
            b.side(axis)
        )));
    }
    let n_strips = count / strip;
    let mut masses = vec![strip; n_strips];
    *masses.last_mut().expect("at least one strip") = count - strip * (n_strips - 1);
    let mf: Vec<f64> = masses.iter().map(|&m| m as f64).collect();
    let strips = cut_pieces(b, mass, axis, from_upper, &mf)?;
    for (s, m) in strips.iter().zip(masses) {
        split(s, mass, &axes[1..], false, m, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_gives_unit_cells() {
        let h = Hyperrectangle::from_bounds(&[0.0, 0.0], &[2.0, 3.0]).unwrap();
        let mass = |b: &Hyperrectangle| b.volume();
        let cells = subdivide_with_mass(&h, &mass, (1.0, 1.0), Face { axis: 1, upper: false }).unwrap();
        assert_eq!(cells.len(), 6);
        for c in &cells {
            assert!((c.volume() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn remainder_strip_is_farthest_from_face() {
        // mass 7 over height 2: b = 3, strips of mass 3 and 4
        let h = Hyperrectangle::from_bounds(&[0.0, 0.0], &[3.5, 2.0]).unwrap();
        let mass = |b: &Hyperrectangle| b.volume();
        let cells = subdivide_with_mass(&h, &mass, (1.0, 1.0), Face { axis: 1, upper: false }).unwrap();
        assert_eq!(cells.len(), 7);
        let touching: Vec<_> = cells.iter().filter(|c| c.lo(1).abs() < 1e-12).collect();
        assert_eq!(touching.len(), 3);
        let t = touching[0].side(1);
        assert!(touching.iter().all(|c| (c.side(1) - t).abs() < 1e-12));
    }

    #[test]
    fn rejects_non_integer_mass() {
        let h = Hyperrectangle::from_bounds(&[0.0, 0.0], &[2.0, 2.5]).unwrap();
        let mass = |b: &Hyperrectangle| b.volume() * 1.01;
        let r = subdivide_with_mass(&h, &mass, (1.0, 1.1), Face { axis: 0, upper: false });
        assert!(matches!(r, Err(Error::Geometry(_))));
    }
}
