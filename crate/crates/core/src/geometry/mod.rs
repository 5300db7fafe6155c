//! Spatial grids, metrics, diffeomorphisms, geodesic distance, and the
//! boundary-normal (semi-geodesic) chart.
//!
//! Conventions used throughout the crate:
//! * domains are axis-aligned boxes `[0, L_1] x ... x [0, L_n]` with uniform
//!   spacing per axis, `n` in {1, 2};
//! * the *normal* axis is the last one; the measured boundary face sits at
//!   the low end of that axis (where the boundary chart has `y_n = 0`);
//! * `ginv` denotes the coefficient matrix `g^{jk}` of the operator, so the
//!   metric tensor proper is its inverse.

pub mod chart;
pub mod diffeo;
pub mod distance;
pub mod grid;
pub mod metric;

pub use chart::{semigeodesic_chart, verify_semigeodesic, SemiGeodesicChart};
pub use diffeo::Diffeomorphism;
pub use distance::{boundary_distance, DistanceField};
pub use grid::{Face, Grid};
pub use metric::{pullback_metric, MetricField, MetricSampler, SymMat};
