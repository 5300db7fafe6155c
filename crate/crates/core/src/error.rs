//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Scenario/config problems: schema violations, bad presets, inconsistent parameters.
    #[error("config: {0}")]
    Config(String),

    /// Numerical failures: instability, extrapolation breakdown, singular systems.
    #[error("numerical: {0}")]
    Numerical(String),

    #[error("CFL violation: dt = {dt:.6e} exceeds stable limit; suggested dt <= {suggested:.6e}")]
    CflViolation { dt: f64, suggested: f64 },

    #[error("solver instability detected at step {step} (t = {t:.6})")]
    Instability { step: usize, t: f64 },

    #[error("caustic detected: flow Jacobian fell below {threshold:.1e} at depth {depth:.6}; maximal valid depth {max_depth:.6}")]
    Caustic {
        threshold: f64,
        depth: f64,
        max_depth: f64,
    },

    #[error("singular Jacobian at node {node:?} (|det| = {det:.3e})")]
    SingularJacobian { node: Vec<usize>, det: f64 },

    #[error("characteristic through (y_n={yn:.4}, t={t:.4}) exits the time window [0, {t_max:.4}] at its boundary foot point")]
    CharacteristicExit { yn: f64, t: f64, t_max: f64 },

    #[error("support violation: {0}")]
    Support(String),

    #[error("extrapolation failure: {0}")]
    Extrapolation(String),

    #[error("grid is disconnected from the boundary patch")]
    Disconnected,

    #[error("uncovered lattice points (masked under every probe): {0:?}")]
    Uncovered(Vec<(usize, usize)>),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed DTN file: {0}")]
    DtnFormat(String),

    #[error("provenance mismatch: {0}")]
    Provenance(String),
}

impl LabError {
    /// Process exit code per the CLI contract: 2 config, 3 numerical, 4 is
    /// reserved for `--check` threshold misses (handled by the binary).
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Provenance(_) | LabError::DtnFormat(_) => 2,
            LabError::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
