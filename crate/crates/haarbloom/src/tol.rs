//! Central tolerance constants.
//!
//! Every comparison threshold used by the library and its test suites lives
//! here so the acceptance gates and the runtime checks cannot drift apart.

/// Max-norm tolerance for exact operator identities (round-trips, adjoint
/// pairings, product decompositions, remainder equalities) at depth ≤ 6,
/// dimension ≤ 2.
pub const EXACT_IDENTITY: f64 = 1e-12;

/// Relaxed max-norm tolerance for the same identities at depth 8, where the
/// longer accumulation chains lose a few more digits.
pub const EXACT_IDENTITY_DEEP: f64 = 1e-9;

/// Tolerance for inequality checks whose sides involve fractional powers of
/// weights (Bloom bound, conjugate power identity, Hölder chains).
pub const POWER_CHAIN: f64 = 1e-9;

/// Tolerance for purely rational arithmetic chains (no fractional powers).
pub const RATIONAL_CHAIN: f64 = 1e-12;

/// Witness certification: a norm estimate must be reproduced by its witness
/// ratio to this precision.
pub const WITNESS_CERT: f64 = 1e-10;

/// Convergence threshold for power/Boyd iterations: stop once the Rayleigh
/// ratio improves by less than this (relative).
pub const ITERATION_STALL: f64 = 1e-10;

/// Agreement required between the nonlinear p-norm iteration and closed-form
/// or spectral references.
pub const ESTIMATOR_MATCH: f64 = 1e-6;

/// Slack granted to floating-point monotonicity assertions.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Scale below which a quantity is treated as exactly zero when checking
/// "no quantity vanishes while another does not".
pub const ZERO_SCALE: f64 = 1e-12;
