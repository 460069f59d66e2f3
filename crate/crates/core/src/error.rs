//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the design, fitting, and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set violates its own invariants (non-positive thickness,
    /// angle outside (0, π), curvature validity, ...).
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// The requested fold geometry is physically impossible (θ > π).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// An input value lies outside the operation's valid domain.
    #[error("{what} out of range: {message}")]
    OutOfRange {
        what: &'static str,
        message: String,
    },

    /// Square-root argument 1 − 2Yφ went non-positive: the requested
    /// curvature exceeds what the layer thickness admits.
    #[error("curvature validity violated: 1 - 2*Y*phi = {argument} <= 0 (Y = {y_mm} mm, phi = {phi_per_mm} 1/mm)")]
    CurvatureValidity {
        y_mm: f64,
        phi_per_mm: f64,
        argument: f64,
    },

    /// Force evaluation at (or past) the fully open configuration, where the
    /// lever arm vanishes and the tensile force diverges.
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    /// Fewer data points than the operation needs.
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// A fit cannot be performed on this data (e.g. the model force is
    /// identically zero over the supplied displacements).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// Dryden filter step with V·dt/L ≥ 1 would be unstable.
    #[error("unstable gust filter step: V*dt/L = {coefficient} >= 1 (reduce dt)")]
    UnstableStep { coefficient: f64 },

    /// Trajectory integration exceeded the step safety cap.
    #[error("step budget exceeded: more than {budget} integration steps before reaching the floor altitude")]
    StepBudget { budget: u64 },

    /// Malformed CSV input; `line` is 1-based and counts the header.
    #[error("malformed input at line {line}: {message}")]
    Csv { line: usize, message: String },

    /// Malformed or inconsistent configuration document.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
