//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, FockError>;

#[derive(Debug, Error)]
pub enum FockError {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Requested quadrature grid exceeds the node budget.
    #[error("quadrature grid with {requested} nodes exceeds the budget of {budget}")]
    NodeBudget { requested: u128, budget: u128 },

    /// The quadrature order is too low for the polynomial degree of the
    /// truncation (exactness of the rule would be violated).
    #[error("quadrature order Q={q} does not admit polynomial degree 2K with K={k} (need Q > K)")]
    QuadratureOrder { q: usize, k: usize },

    /// An integrand evaluated to a non-finite value.
    #[error("non-finite integrand value at node {node_index} ({node}) in {context}")]
    NonFiniteIntegrand {
        context: String,
        node_index: usize,
        node: String,
    },

    /// A Gaussian parameter outside the admissible half-plane
    /// Re(xi)/|xi|^2 > -1/2.
    #[error("gaussian parameter xi = {xi} is not admissible: Re(xi)/|xi|^2 = {ratio} <= -1/2")]
    InadmissibleGaussian { xi: num_complex::Complex64, ratio: f64 },

    /// Heat semigroup parameter outside (-1/2, inf) or inside the
    /// ill-conditioned guard band next to -1/2.
    #[error("heat semigroup parameter t = {t} rejected: {reason}")]
    SemigroupParameter { t: f64, reason: String },

    /// Two operators do not share a basis truncation.
    #[error("basis truncation mismatch: (n={n_left}, K={k_left}) vs (n={n_right}, K={k_right})")]
    TruncationMismatch {
        n_left: usize,
        k_left: usize,
        n_right: usize,
        k_right: usize,
    },

    /// Singular value decomposition failed to converge.
    #[error("SVD failed for operator built by {provenance}")]
    SvdFailure { provenance: String },

    /// A norm or table did not converge under refinement.
    #[error("unconverged prerequisite: {0}")]
    Unconverged(String),

    /// A convolution result exceeded the leakage threshold.
    #[error("truncation leakage {leakage:.3e} exceeds threshold {threshold:.3e} in {context}")]
    LeakageExceeded {
        context: String,
        leakage: f64,
        threshold: f64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}
