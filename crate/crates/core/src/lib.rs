//! dtnlab — a numerical laboratory for time-domain Dirichlet-to-Neumann maps
//! of second-order hyperbolic operators with electromagnetic potentials on a
//! Riemannian metric.
//!
//! The crate simulates
//!
//! ```text
//! (−i ∂_t + A₀)² u − Σ_jk (1/√g) (−i ∂_j + A_j) √g g^{jk} (−i ∂_k + A_k) u − V u = 0
//! ```
//!
//! with Dirichlet control on a boundary patch and zero initial data,
//! synthesizes the discrete D-to-N map, and exercises the constructive
//! machinery around it: gauge and diffeomorphism invariance, characteristic
//! (null-coordinate) boundary functionals, geometric-optics probing, and
//! local recovery of the reduced coefficients near the boundary.
//!
//! Organization:
//! * [`geometry`] — grids, metrics, diffeomorphisms, geodesic distance, the
//!   boundary-normal chart;
//! * [`fields`] — potentials, the gauge group, operator reduction to the
//!   characteristic normal form;
//! * [`forward`] — the leapfrog time-domain solver, characteristic-surface
//!   traces, energy-estimate checks;
//! * [`dtn`] — D-to-N assembly, conventions, persistence, and the boundary
//!   functionals it determines;
//! * [`probes`] — geometric-optics probe construction and remainder decay;
//! * [`reconstruct`] — the recovery pipeline from probed functionals to
//!   coefficients;
//! * [`scenario`] — experiment configuration, orchestration, reports.
//!
//! The `examples/` directory holds one runnable example per capability; the
//! `dtnlab` binary exposes the same flows as subcommands.

pub mod error;
pub mod forward;
pub mod dtn;
pub mod fields;
pub mod geometry;
pub mod util;

pub use error::{LabError, Result};
