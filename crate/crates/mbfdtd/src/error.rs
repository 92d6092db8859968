//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while constructing domain objects or running a simulation.
#[derive(Debug, Clone, Error)]
pub enum SimError {
    /// An interface trajectory was asked to move at or beyond c.
    #[error("superluminal interface velocity: |beta| = {beta} >= 1")]
    SuperluminalVelocity { beta: f64 },

    /// Two transition bands intersect; scattering at a space-time point
    /// singularity is not modeled. Refine the grid or shorten the run.
    #[error(
        "overlapping transition regions at step {step}, row {row}: \
         bands [{a_min},{a_max}] and [{b_min},{b_max}]"
    )]
    OverlappingTransitionRegions {
        step: usize,
        row: usize,
        a_min: usize,
        a_max: usize,
        b_min: usize,
        b_max: usize,
    },

    /// A transition band reached the domain edge, where only conventional
    /// cells (and the ABC) are allowed.
    #[error("transition region touches the domain boundary at step {step}, row {row}")]
    TransitionTouchesBoundary { step: usize, row: usize },

    /// Interface positions are no longer strictly ordered along z.
    #[error("interface positions out of order at step {step}, row {row}")]
    UnorderedInterfaces { step: usize, row: usize },

    /// A field sample became NaN or infinite; the run is unstable.
    #[error("non-finite field detected at step {step} (Courant limit exceeded?)")]
    NonFiniteField { step: usize },

    /// A source would inject inside a transition region.
    #[error("source injection at cell (k={k}, i={i}) lies in a transition region at step {step}")]
    SourceInTransitionRegion { k: usize, i: usize, step: usize },

    /// Luminal or grazing parameter combination in a closed-form expression.
    #[error("degenerate denominator in scattering coefficients: {what}")]
    DegenerateDenominator { what: &'static str },

    /// Transmitted wave is evanescent (negative discriminant in the
    /// deflection-angle solution).
    #[error("evanescent transmission: deflection discriminant = {disc} < 0")]
    EvanescentTransmission { disc: f64 },

    /// Rindler horizon reached: g00 <= 0 at the requested event.
    #[error("event beyond the Rindler horizon (g00 = {g00} <= 0)")]
    HorizonCrossed { g00: f64 },

    /// Scattered/incident pulses cannot be separated at a probe.
    #[error("pulse envelopes overlap at probe '{probe}': {what}")]
    PulseOverlap { probe: String, what: String },
}

/// Errors from the scenario loader.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}:{line}: parse error: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    pub fn validation(msg: impl Into<String>) -> Self {
        ScenarioError::Validation(msg.into())
    }
}
