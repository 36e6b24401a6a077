//! Shared numerical thresholds.

/// Identities that hold exactly up to rounding (commutation relations,
/// shift invariance, Hermiticity checks).
pub const EXACT: f64 = 1e-12;

/// Identities that compose several floating-point steps.
pub const COMPOSED: f64 = 1e-10;

/// Coefficients with modulus below this are dropped after arithmetic.
pub const PRUNE: f64 = 1e-14;

/// Relative accuracy requested from the iterative norm solver.
pub const ITERATIVE_NORM: f64 = 1e-9;

/// Hard cap on iterative-solver matrix-vector products.
pub const ITERATION_CAP: usize = 10_000;

/// Default crossover between dense and matrix-free norms (matrix dimension).
pub const DENSE_CROSSOVER: usize = 4096;

/// Largest matrix dimension the dense path will materialize.
pub const DENSE_LIMIT: usize = 4096;

/// Largest number of factors quantized through the composition sum.
pub const MAX_WORD_FACTORS: usize = 4;

/// Numerical zero test scale used by the polynomial zero check.
pub const ZERO_NORM: f64 = 1e-9;
