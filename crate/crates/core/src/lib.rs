//! Stable summation of exponential series `g(w) = Σ_{β∈R} a_β e^{βw}`.
//!
//! Series whose frequencies `β` cluster or accumulate are numerically brutal:
//! in the left half-plane the terms nearly cancel, and naive summation loses
//! one digit per digit of clustering. This crate sums such series through two
//! complementary constructions, both built on discrete distributions of finite
//! order:
//!
//! * **Vandermonde packages** ([`packages`], [`summation`]): the series is
//!   rewritten as `Σ_n b_n ⟨Δ_{R_n}, e^{tw}⟩` where each `Δ_{R_n}` is a
//!   normalized Vandermonde distribution over a short block of frequencies.
//!   Each package evaluates stably (its own cancellation is bounded by its
//!   diameter), and the rewritten series converges normally in an explicit
//!   half-plane-like region, with a machine-checkable certificate.
//! * **Diagonal integration by parts** ([`dipp`]): partial sums are corrected
//!   by border terms of increasing derivative order; window `n` is integrated
//!   by parts `n` times. The partial sums converge far beyond the abscissa of
//!   the raw series.
//!
//! Everything computes at configurable binary precision (default 256 bits)
//! on top of MPFR/MPC via [`rug`], with cancellation tracked and reported
//! rather than silently absorbed.

pub mod dipp;
pub mod distributions;
pub mod domains;
pub mod exponents;
pub mod numerics;
pub mod packages;
pub mod summation;

pub use dipp::{
    dipp_bound_estimate, dipp_sum, dipp_term, window_distributions, CoefficientRule, DippState,
    DippSum, DippWindow, SeriesSpec,
};
pub use distributions::{
    combinatorial_norm_lp, decompose_nested, functional_norm, merge_vandermonde, moment,
    normalized_vandermonde, order_of, primitive, undegenerate, vandermonde, Atom, CombMode,
    DiscreteDistribution, NestedDecomposition, VandermondeNodes,
};
pub use domains::{
    cle_check, log_boundary_samples, log_contains, quad_boundary_samples, quad_contains,
    quad_map, LogDomain, QuadDomain,
};
pub use exponents::{
    admissible_sequence, density_params, generate_r_alpha, AdmissibleSequence, DensityParams,
    Exponent, ExponentSet,
};
pub use numerics::{poly_exp_integral, pw_l1_norm, PiecewisePoly, Poly};
pub use packages::{
    contour_pairing, eval_package, hyperfunction_eval, package_bound, PackageMethod, PackageTerm,
};
pub use summation::{
    compare_methods, eval_decomposition, naive_sum, periodicity_check, summate_by_packages,
    CompareReport, CompareRow, PackageDecomposition,
};

use thiserror::Error;

/// Errors shared across the crate. Numeric failure modes are reported, never
/// silently absorbed: precision exhaustion carries an estimate of the digits
/// lost, structural errors carry the offending values.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("root isolation failed: {0}")]
    RootIsolation(String),
    #[error("non-compact support: {0}")]
    NonCompactSupport(String),
    #[error("order check failed: {0}")]
    OrderCheck(String),
    #[error("cut point t_{index} = {value} lies in the support set")]
    CutOnSupport { index: usize, value: String },
    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),
    #[error("degeneration spacing too large: {0}")]
    EpsTooLarge(String),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
