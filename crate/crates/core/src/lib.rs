//! Capacity bounds for bosonic and qubit channels.
//!
//! The crate computes single-letter weak-converse bounds and two-way
//! capacities, Gaussian-state entropic quantities (relative entropy via the
//! Gibbs matrix, von Neumann entropy), teleportation-simulation error budgets,
//! finite-`n` strong-converse bounds, and CV-QKD excess-noise thresholds.
//!
//! Conventions used throughout:
//!
//! - quadratures are ordered mode-interleaved, `(q1, p1, q2, p2, ...)`;
//! - the vacuum has covariance matrix `I/2` (`[q, p] = i`);
//! - all information quantities are in bits.
//!
//! Module map:
//!
//! | module | content |
//! |---|---|
//! | [`symplectic`] | covariance matrices, symplectic spectra, reference states, `h`, `s`, `H2` |
//! | [`entropy`] | Gibbs matrix, the Σ functional, relative and von Neumann entropy, BK fidelity |
//! | [`fock`] | truncated photon-number oracle for diagonal states |
//! | [`channels`] | Gaussian canonical forms, qubit channels, quasi-Choi states |
//! | [`telesim`] | BK teleportation, finite-resource simulation, error budgets |
//! | [`bounds`] | weak/strong converse bounds and the corrected pipeline |
//! | [`qkd`] | key rates and security thresholds |
//! | [`cli`] | command-line front end and serialization |
//! | [`selftest`] | runtime verification suites |

#![forbid(unsafe_code)]
// `!(x >= a)` is used throughout so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channels;
pub mod cli;
pub mod entropy;
mod error;
pub mod fock;
pub mod qkd;
pub mod selftest;
pub mod symplectic;
pub mod telesim;

pub use error::{Error, Result};
pub use nalgebra;

pub use bounds::{BoundKind, BoundResult, BoundValue};
pub use channels::{CanonicalForm, DVChannelSpec, GaussianChannelSpec};
pub use symplectic::{CovMatrix, GaussianState, SymplecticForm};
pub use telesim::ErrorBudget;
