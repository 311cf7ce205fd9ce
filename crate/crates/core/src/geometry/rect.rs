use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in ℝ^d given by its center and half side lengths.
///
/// Cubes follow the `K_ℓ(a) = a + [-ℓ/2, ℓ/2]^d` convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperrectangle {
    center: Vec<f64>,
    half: Vec<f64>,
}

impl Hyperrectangle {
    pub fn new(center: Vec<f64>, half_lengths: Vec<f64>) -> Result<Self> {
        if center.is_empty() || center.len() != half_lengths.len() {
            return Err(Error::Invalid(format!(
                "center has {} coordinates but {} half lengths were given",
                center.len(),
                half_lengths.len()
            )));
        }
        if half_lengths.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::Invalid(format!(
                "half lengths must be positive and finite, got {half_lengths:?}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("center must be finite".into()));
        }
        Ok(Hyperrectangle {
            center,
            half: half_lengths,
        })
    }

    /// The cube `K_side(center)`.
    pub fn cube(center: &[f64], side: f64) -> Result<Self> {
        Self::new(center.to_vec(), vec![0.5 * side; center.len()])
    }

    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Invalid("bounds differ in dimension".into()));
        }
        let center = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let half = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
        Self::new(center, half)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn half_lengths(&self) -> &[f64] {
        &self.half
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.center[i] - self.half[i]
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.center[i] + self.half[i]
    }

    pub fn lower(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.lo(i)).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.hi(i)).collect()
    }

    pub fn side(&self, i: usize) -> f64 {
        2.0 * self.half[i]
    }

    pub fn sides(&self) -> Vec<f64> {
        self.half.iter().map(|h| 2.0 * h).collect()
    }

    pub fn volume(&self) -> f64 {
        self.half.iter().map(|h| 2.0 * h).product()
    }

    /// Half-open membership `lo ≤ x < hi`, used for point counting.
    pub fn contains_half_open(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|i| x[i] >= self.lo(i) && x[i] < self.hi(i))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|i| x[i] >= self.lo(i) && x[i] <= self.hi(i))
    }

    pub fn contains_box(&self, other: &Hyperrectangle) -> bool {
        (0..self.dim()).all(|i| other.lo(i) >= self.lo(i) && other.hi(i) <= self.hi(i))
    }

    /// Euclidean distance from `x` to the closed box (zero inside).
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| {
                let e = (x[i] - self.center[i]).abs() - self.half[i];
                e.max(0.0).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distance from `x` to the boundary of the box.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            (0..self.dim())
                .map(|i| self.half[i] - (x[i] - self.center[i]).abs())
                .fold(f64::INFINITY, f64::min)
        } else {
            self.distance_to(x)
        }
    }

    pub fn intersection(&self, other: &Hyperrectangle) -> Option<Hyperrectangle> {
        let lo: Vec<f64> = (0..self.dim()).map(|i| self.lo(i).max(other.lo(i))).collect();
        let hi: Vec<f64> = (0..self.dim()).map(|i| self.hi(i).min(other.hi(i))).collect();
        if lo.iter().zip(&hi).all(|(a, b)| a < b) {
            Hyperrectangle::from_bounds(&lo, &hi).ok()
        } else {
            None
        }
    }

    /// `self \ other` as at most `2d` interior-disjoint boxes.
    pub fn subtract(&self, other: &Hyperrectangle) -> Vec<Hyperrectangle> {
        let Some(cut) = self.intersection(other) else {
            return vec![self.clone()];
        };
        let mut out = Vec::new();
        let mut lo = self.lower();
        let mut hi = self.upper();
        for i in 0..self.dim() {
            if cut.lo(i) > lo[i] {
                let mut h = hi.clone();
                h[i] = cut.lo(i);
                out.push(Hyperrectangle::from_bounds(&lo, &h).expect("valid slab"));
            }
            if cut.hi(i) < hi[i] {
                let mut l = lo.clone();
                l[i] = cut.hi(i);
                out.push(Hyperrectangle::from_bounds(&l, &hi).expect("valid slab"));
            }
            lo[i] = cut.lo(i);
            hi[i] = cut.hi(i);
        }
        out
    }

    /// Same center, every side grown by `delta` (negative shrinks).
    pub fn grown(&self, delta: f64) -> Result<Hyperrectangle> {
        Hyperrectangle::new(
            self.center.clone(),
            self.half.iter().map(|h| h + 0.5 * delta).collect(),
        )
    }

    /// Image under `x ↦ factor · x`.
    pub fn scaled(&self, factor: f64) -> Result<Hyperrectangle> {
        Hyperrectangle::new(
            self.center.iter().map(|c| c * factor).collect(),
            self.half.iter().map(|h| h * factor.abs()).collect(),
        )
    }

    pub fn translated(&self, offset: &[f64]) -> Result<Hyperrectangle> {
        Hyperrectangle::new(
            self.center.iter().zip(offset).map(|(c, o)| c + o).collect(),
            self.half.clone(),
        )
    }
}

/// A finite union of axis-aligned boxes (e.g. a crenel domain).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    boxes: Vec<Hyperrectangle>,
}

impl Region {
    pub fn new(boxes: Vec<Hyperrectangle>) -> Result<Self> {
        let Some(first) = boxes.first() else {
            return Err(Error::Invalid("a region needs at least one box".into()));
        };
        let d = first.dim();
        if boxes.iter().any(|b| b.dim() != d) {
            return Err(Error::Invalid("region boxes differ in dimension".into()));
        }
        Ok(Region { boxes })
    }

    pub fn from_box(b: Hyperrectangle) -> Self {
        Region { boxes: vec![b] }
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }

    pub fn boxes(&self) -> &[Hyperrectangle] {
        &self.boxes
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    /// Interior-disjoint boxes with the same union.
    pub fn disjoint_pieces(&self) -> Vec<Hyperrectangle> {
        let mut pieces: Vec<Hyperrectangle> = Vec::new();
        for b in &self.boxes {
            let mut fresh = vec![b.clone()];
            for p in &pieces {
                fresh = fresh.into_iter().flat_map(|f| f.subtract(p)).collect();
            }
            pieces.extend(fresh);
        }
        pieces
    }

    pub fn volume(&self) -> f64 {
        self.disjoint_pieces().iter().map(Hyperrectangle::volume).sum()
    }

    pub fn bounding_box(&self) -> Hyperrectangle {
        let d = self.dim();
        let lo: Vec<f64> = (0..d)
            .map(|i| self.boxes.iter().map(|b| b.lo(i)).fold(f64::INFINITY, f64::min))
            .collect();
        let hi: Vec<f64> = (0..d)
            .map(|i| self.boxes.iter().map(|b| b.hi(i)).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Hyperrectangle::from_bounds(&lo, &hi).expect("bounding box of valid boxes")
    }

    /// Euclidean distance from `x` to the boundary of the union.
    ///
    /// The union is resolved on the rectilinear grid spanned by all box
    /// faces; the boundary is the set of grid facets separating an inside
    /// cell from an outside one.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let cuts: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut c: Vec<f64> = self.boxes.iter().flat_map(|b| [b.lo(i), b.hi(i)]).collect();
                c.sort_by(|a, b| a.partial_cmp(b).unwrap());
                c.dedup();
                c
            })
            .collect();
        let ncell: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
        let total: usize = ncell.iter().product();
        let mut inside = vec![false; total];
        let mut idx = vec![0usize; d];
        for (flat, slot) in inside.iter_mut().enumerate() {
            let mut r = flat;
            for i in (0..d).rev() {
                idx[i] = r % ncell[i];
                r /= ncell[i];
            }
            let mid: Vec<f64> = (0..d)
                .map(|i| 0.5 * (cuts[i][idx[i]] + cuts[i][idx[i] + 1]))
                .collect();
            *slot = self.contains(&mid);
        }
        let flat_of = |idx: &[usize]| -> usize {
            let mut f = 0;
            for i in 0..d {
                f = f * ncell[i] + idx[i];
            }
            f
        };

        let mut best = f64::INFINITY;
        for axis in 0..d {
            let others: Vec<usize> = (0..d).filter(|&j| j != axis).collect();
            let n_other: usize = others.iter().map(|&j| ncell[j]).product();
            for (k, &c) in cuts[axis].iter().enumerate() {
                for o in 0..n_other {
                    let mut cell = vec![0usize; d];
                    let mut r = o;
                    for &j in others.iter().rev() {
                        cell[j] = r % ncell[j];
                        r /= ncell[j];
                    }
                    let left = if k == 0 {
                        false
                    } else {
                        cell[axis] = k - 1;
                        inside[flat_of(&cell)]
                    };
                    let right = if k == ncell[axis] {
                        false
                    } else {
                        cell[axis] = k;
                        inside[flat_of(&cell)]
                    };
                    if left == right {
                        continue;
                    }
                    let mut dist2 = (x[axis] - c).powi(2);
                    for &j in &others {
                        let (a, b) = (cuts[j][cell[j]], cuts[j][cell[j] + 1]);
                        let e = if x[j] < a {
                            a - x[j]
                        } else if x[j] > b {
                            x[j] - b
                        } else {
                            0.0
                        };
                        dist2 += e * e;
                    }
                    best = best.min(dist2);
                }
            }
        }
        best.sqrt()
    }
}
