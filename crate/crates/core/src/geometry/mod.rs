//! Axis curve and Fermi chart of the tube around it.

mod chart;
mod curve;
mod verify;

pub use chart::{FermiChart, FermiCoords};
pub use verify::{analytic_band_area, sampled_l0, verify_geometry, GeometryReport};
pub use curve::{Curve, CurveKind, CurveShape, CurveSpec, Frame, Orientation, ParamDerivatives};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Counterclockwise quarter turn.
#[inline]
pub fn rot90(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}
