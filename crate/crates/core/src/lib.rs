//! Entanglement negativity of fermionic Gaussian states from covariance
//! matrices.
//!
//! The logarithmic negativity E = ln‖ρ^{T_A}‖₁ of a free-fermion state is
//! determined by the zeros of a twisted characteristic polynomial of its
//! 2N×2N covariance matrix: an O(N³) generalized eigenvalue problem instead
//! of a 2^N-dimensional diagonalization. This crate provides
//!
//! - [`gaussian`]: covariance matrices, validity checks, Gibbs states,
//!   bipartitions, and random mixed Gaussian states;
//! - [`mod@negativity`]: the twisted matrix pencil, its generalized Schur
//!   spectrum, and the negativity formula, plus the twisted-covariance route
//!   as an algebraically independent cross-check;
//! - [`oracle`]: a 2^N dense-matrix oracle (Jordan–Wigner construction and
//!   fermionic twisted partial transpose) for small-N verification;
//! - [`bounds`]: Gaussian channels and universal upper/lower bounds on E
//!   driven by the off-diagonal covariance block;
//! - [`lindblad`]: quadratic Lindblad dynamics of the covariance matrix with
//!   exact semigroup propagation and RK4 stepping;
//! - [`rate`]: the negativity change-rate formula, the P_AB superoperator by
//!   quadrature and by spectral block assembly, and rate bounds;
//! - [`models`]: tight-binding, Kitaev, and long-range chains, uniform loss,
//!   the CDW state, clustering diagnostics, and area-law certificates;
//! - [`experiments`]: temperature sweeps, static area-law scans, and
//!   dynamical rate scans with CSV-ready rows.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod linalg;
pub mod lindblad;
pub mod models;
pub mod negativity;
pub mod oracle;
pub mod rate;

pub use error::{Error, Result};
pub use gaussian::{Bipartition, CovarianceMatrix, QuadraticHamiltonian};
pub use negativity::{negativity, NegativityResult};
