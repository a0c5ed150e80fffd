//! Complexified spin Calogero-Moser systems in Lax form.
//!
//! The crate covers the three classical potentials (rational `1/q^2`,
//! trigonometric `1/sin^2 q`, elliptic Weierstrass `wp(q)`) in two charts:
//!
//! * a particle chart `(q_i, p_i, a_i, b_i)` of positions, momenta, and
//!   spin (co)vectors, with pair couplings `f_ij = <a_i, b_j>`;
//! * a quiver chart `(X, Y, u, v)` of matrix data subject to a moment-map
//!   constraint, where the rational and trigonometric systems arise by
//!   Hamiltonian reduction.
//!
//! On top of the charts sit Lax (Higgs) matrices depending on a spectral
//! parameter, residue-extracted commuting Hamiltonians, exact and RK4
//! flows with conservation monitoring, and a small CLI (`cm-lax`) that
//! runs simulations from JSON configs.
//!
//! Everything is complex-analytic: phase-space coordinates are complex,
//! flows run in real time along holomorphic Hamiltonian vector fields.

pub mod cli;
pub mod config;
pub(crate) mod dynamics;
pub mod error;
pub mod flows;
pub mod ham;
pub mod io;
pub mod lax;
pub(crate) mod linalg;
pub mod phase;
pub mod specfun;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
