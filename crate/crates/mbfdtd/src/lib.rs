//! 2+1-dimensional FDTD for electromagnetic scattering at moving material
//! discontinuities: interfaces between dielectric media whose position moves
//! at a (possibly time- or space-dependent) fraction of the speed of light.
//!
//! A conventional Yee scheme (Yee 1966) enforces stationary-interface field
//! continuity and therefore converges to the *wrong* scattering coefficients
//! at a moving interface. The stepper here fixes this locally: cells in a
//! narrow band around each discretized interface trajectory are advanced with
//! generalized update equations built on the hybrid fields
//!
//! ```text
//!   E* = E + v x B,    H* = H - v x D,
//! ```
//!
//! which are the quantities continuous across a charge-free moving boundary,
//! while all remaining cells use the conventional scheme. The generalized
//! cell is impedance- and velocity-matched to the conventional one, so the
//! band boundary is numerically invisible and ordinary absorbing boundary
//! conditions remain applicable at the domain edges.
//!
//! Everything is expressed in natural units: `c = 1`, `eps0 = mu0 = 1`.
//! Only s-polarization (E along x, propagation in the y-z plane) is treated;
//! `ny = 1` selects the 1+1D specialization.
//!
//! The crate also ships closed-form references used to validate the solver:
//! scattering coefficients, frequency/wavevector transitions and deflection
//! angles for uniformly moving interfaces, a bounce cascade for space-time
//! wedges, chirped waveforms for uniformly accelerated interfaces, plus a von
//! Neumann stability analyzer with the generalized Courant limit
//! `S_max = n / (1 + n|beta|)`.

pub mod array;
pub mod cli;
pub mod conventional;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod hybrid;
pub mod oracle;
pub mod scenario;
pub mod stability;
pub mod validation;

pub use array::Grid2;
pub use conventional::FieldState;
pub use error::{SimError, ScenarioError};
pub use grid::{GridSpec, InterfaceTrajectory, MaterialMap, Medium, TransitionRegion};
pub use scenario::Scenario;
