//! Potentials, the gauge group, coordinate reductions of the operator, and
//! the null-gauge normalization of the first-order slots.

pub mod operator;
pub mod potentials;
pub mod reduction;
pub mod sampler;

pub use operator::{apply_raw_operator, apply_reduced_operator};
pub use potentials::{gauge_apply, pullback_potentials, GaugeFunction, PotentialSet, C_MIN};
pub use reduction::{
    boundary_jets, null_gauge, reduce_operator, reduced_potential, sqrtg_connection,
    BoundaryJets, NullGaugeExponent, ReducedCoefficients,
};
pub use sampler::{field, AnalyticField, ConjFn, FieldRef, GriddedField, SpaceTimeFn, SumFn};
