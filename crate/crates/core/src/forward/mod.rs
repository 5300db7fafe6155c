//! Time-domain solves with Dirichlet control and zero initial data,
//! characteristic-surface traces, and energy-estimate checks.

pub mod energy;
pub mod record;
pub mod slab;
pub mod solver;
pub mod trace;

pub use energy::{energy_ratio_check, slice_energy, EnergyRatios};
pub use record::{
    BoundaryKit, BoundarySpec, IncomingSurface, OutgoingSurface, RecordSpec, SolveOutput,
    SurfaceKind, SurfaceTrace, TimeSlice, WaveField,
};
pub use slab::CharacteristicSlab;
pub use solver::{solve, zero_signal, BoundarySignal, SolveParams, WaveOperator};
pub use trace::{
    h1_sq, l2_sq, param_deriv, surface_pairing, tangential_deriv, trace_incoming,
};
