//! Central table of numerical tolerances.
//!
//! Algebraic identities (Hermiticity, commutators) are held to 1e-12 relative
//! to the natural matrix-element scale `j(j+1)`; floating matrix products and
//! unitarity to 1e-10; cross-backend agreement to 1e-9. Nothing elsewhere in
//! the crate hard-codes a threshold.

/// Relative tolerance for exact operator identities (Hermiticity,
/// commutation relations), scaled by `j(j+1)` where products are involved.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// State-vector norm deviation allowed after construction.
pub const NORM_TOL: f64 = 1e-12;

/// Max-abs entry deviation of U·U† from the identity.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Max-abs disagreement between the spectral and beam-splitter-product
/// rotation backends.
pub const BACKEND_EQUIV_TOL: f64 = 1e-9;

/// Allowed deviation of an outcome distribution's total probability from 1.
pub const PROB_SUM_TOL: f64 = 1e-10;

/// Allowed deviation of the summed derivative dP/dphi from 0.
pub const DERIV_SUM_TOL: f64 = 1e-10;

/// Allowed deviation of a likelihood profile's quadrature norm from 1.
pub const QUADRATURE_NORM_TOL: f64 = 1e-8;

/// Below this probability a Fisher term switches to its analytic
/// zero-amplitude limit 4|(Jy psi)_m|^2.
pub const DEGENERATE_PROB_FLOOR: f64 = 1e-12;

/// Below this |d<Jz>/dphi| the error-propagation formula is rejected
/// as a flat signal.
pub const FLAT_SIGNAL_FLOOR: f64 = 1e-12;

/// Agreement required between sequential and batch Bayesian updates.
pub const SEQUENTIAL_BATCH_TOL: f64 = 1e-10;

/// Allowed drift between a stored annealer energy and its recomputation.
pub const ENERGY_RECOMPUTE_TOL: f64 = 1e-12;

/// The annealer stops once the hypersphere step size falls below this.
pub const STEP_UNDERFLOW: f64 = 1e-8;

/// Relative slack granted to the Cramer-Rao inequality check.
pub const CRAMER_RAO_REL_SLACK: f64 = 1e-8;

/// Natural scale for entrywise operator comparisons at particle number `n`:
/// matrix elements of the J operators and their products grow like j(j+1).
pub fn operator_scale(n: usize) -> f64 {
    let j = n as f64 / 2.0;
    (j * (j + 1.0)).max(1.0)
}
