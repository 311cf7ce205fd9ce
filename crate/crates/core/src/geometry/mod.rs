//! Boxes, regions and the constructive geometric lemmas: density-balanced
//! subdivision, mean-value slice selection, crenel boundaries and the
//! screening parameter arithmetic.

mod crenel;
mod rect;
mod regime;
mod slices;
mod subdivide;

pub use crenel::{
    boundary_packing_bound, crenel_cube, crenel_domain, crenel_r1_max, find_crenel_cube,
    CrenelCube,
};
pub use rect::{Hyperrectangle, Region};
pub use regime::{screening_regime_check, Condition, RegimeReport, ScreeningRegime, EPS_MARGIN};
pub use slices::{good_boundary_slice, good_vertical_slice, SliceChoice, MIN_SCAN};
pub use subdivide::{box_integral, sidelength_bounds, subdivide, subdivide_with_mass, Face};
