//! Interface curve, spline resampling, interface points and node classification.

pub mod classify;
pub mod curve;
pub mod points;
pub mod spline;

pub use classify::{
    classify_nodes, closest_point, ClosestPoint, NodeClass, NodeClassification, Side,
};
pub use curve::{knot_count, sample_knots, ParametricCurve};
pub use points::{InterfaceGeometry, InterfacePoint, InterfacePointSet};
pub use spline::{build_spline, SplineCurve};
