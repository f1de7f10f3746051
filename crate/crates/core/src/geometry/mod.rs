//! Upper half-plane geometry: isometries, geodesics, cross ratios and
//! pants trigonometry.

mod extended;
mod geodesic;
mod isometry;
pub mod trig;

pub use extended::{extended_precision, set_extended_precision, ExtIsometry};
pub use geodesic::{
    common_perpendicular, cross_ratio, geodesic_distance, perpendicular_length, Geodesic,
    IdealPoint, IdealQuadruple,
};
pub use isometry::{point_distance, Isometry, IsometryClass, CLASS_TOL, DET_TOL};
pub use trig::{cord_upper_bound, pants_boundary_distance, pentagon_side, tau_prime_from_tau};
