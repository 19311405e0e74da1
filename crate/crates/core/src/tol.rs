//! Tolerances used across the toolkit.
//!
//! Construction paths are consistent to roughly 1e-12; verification
//! thresholds are kept one to two orders looser so that accumulated
//! rounding in larger-dimension searches does not produce spurious
//! failures.

/// Max entry deviation allowed for a matrix to count as Hermitian.
pub const HERMITICITY: f64 = 1e-12;

/// Most negative eigenvalue allowed for a density matrix.
pub const PSD: f64 = 1e-10;

/// Allowed deviation of a state trace from 1.
pub const TRACE: f64 = 1e-10;

/// Allowed deviation of a projector from idempotency/Hermiticity.
pub const PROJECTOR: f64 = 1e-10;

/// Imaginary residue on an expectation value above which inputs are
/// considered corrupted.
pub const IMAG_RESIDUE: f64 = 1e-8;

/// Pass threshold for symmetric-extension certificates.
pub const CERTIFICATE: f64 = 1e-8;

/// Default convergence epsilon on the see-saw objective between cycles.
pub const SEESAW_EPSILON: f64 = 1e-9;

/// Minimum improvement over [`PLATEAU_WINDOW`] cycles before a restart
/// is abandoned as stuck.
pub const PLATEAU_IMPROVEMENT: f64 = 1e-7;

/// Number of consecutive cycles inspected by the plateau rule.
pub const PLATEAU_WINDOW: usize = 20;

/// Feasibility/objective tolerance for the POVM update solver.
pub const POVM_SOLVER: f64 = 1e-7;
