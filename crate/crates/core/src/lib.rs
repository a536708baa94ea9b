//! Optimal uncertainty relations and minimal lengths for modified
//! Heisenberg algebras `[x, p] = i f(p)`.
//!
//! The crate builds the momentum map `p(k)` and cut-off `k_max` of an
//! admissible modification, traces the variance trade-off curve through the
//! ground states of `H_λ = -λ ∂_k² + (1-λ) p(k)²`, and evaluates Shannon and
//! min-entropy uncertainty regions of band-limited states.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod entropy;
pub mod error;
pub mod modification;
pub mod quadrature;
pub mod sampler;
pub mod spectral;
pub mod tradeoff;
pub mod transform;

pub use error::{Error, Result};
pub use modification::{
    build_momentum_map, compute_kmax, eval_p, validate_modification, Modification, ModificationKind,
    MomentumMap, ValidationReport,
};
