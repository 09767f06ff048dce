//! `susyprop` — first-order SUSY (Darboux) engineering of inhomogeneous magnetic
//! fields for planar Dirac fermions, with the spectral data needed to assemble
//! the fermion propagator in the Ritus eigenfunction basis.
//!
//! The library starts from one of two analytically solvable seed fields,
//!
//! * a uniform field `B0(x) = B0` (shifted harmonic oscillator), or
//! * an exponentially decaying field `B0(x) = B0 exp(-alpha x)` (Morse system),
//!
//! and applies a generalized first-order intertwining transform controlled by a
//! factorization energy `epsilon1 <= 0` and a deformation parameter `nu1`. The
//! result is a new superpotential `W1`, partner potential `V1`, magnetic profile
//! `B1`, a spectrum with one added level at zero, and the transformed bound
//! states. From those, the `ritus` module builds the diagonal momentum-space
//! propagator and the per-mode charge/current density profiles.
//!
//! Modules are layered bottom-up:
//!
//! * [`specfun`] — Kummer `M`, Tricomi `U`, Hermite/Laguerre polynomials,
//!   log-Gamma, and analytic derivatives (self-contained kernel).
//! * [`numerics`] — adaptive quadrature, stencil derivatives, node counting,
//!   Gram matrices, grids.
//! * [`seeds`] — the two seed systems: `W0`, partner potentials `V0^sigma`,
//!   eigenvalues `k_n^+`, normalized eigenfunctions.
//! * [`intertwine`] — the transform: `u1`, `W1`, `V1`, `B1`, transformed
//!   spectrum and states.
//! * [`ritus`] — Dirac algebra, propagator, Ritus matrices, density profiles,
//!   and the small-alpha limit scan.
//! * [`cli`] — the `susyprop` command-line front end (CSV emitters and the
//!   verification suite).

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values;
// spelling it through `partial_cmp` would hide that intent.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tabulated quadrature weights and frozen reference values keep every digit
// of their source; rounding them to f64's printable precision by hand would
// only invite transcription errors.
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod intertwine;
pub mod numerics;
pub mod ritus;
pub mod seeds;
pub mod specfun;

use std::fmt;

/// Unified error type for the whole crate.
///
/// Variants mirror the failure modes of the individual modules; every variant
/// carries a human-readable message with the offending values.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Parameters outside a function's mathematical domain
    /// (e.g. Kummer `b` at a non-positive integer, Tricomi `z <= 0`).
    Domain(String),
    /// An internal series/asymptotic evaluation failed its own error estimate.
    Convergence(String),
    /// Level index outside the bound-state range.
    Index(String),
    /// The auxiliary solution `u1` changed sign on the sampling window, so the
    /// transform would produce singular `W1`, `V1`, `B1`.
    SingularTransform(String),
    /// Momentum-space propagator evaluated too close to its pole.
    Pole(String),
    /// An integrand had not decayed at the integration window's edge.
    Tail(String),
    /// Adaptive quadrature exhausted its subdivision budget.
    NonConvergence(String),
    /// Finite-difference step collapsed below 1e-7 without meeting the
    /// requested error estimate.
    StepUnderflow(String),
    /// Invalid physical configuration (field amplitudes, parameter ranges).
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Convergence(m) => write!(f, "convergence error: {m}"),
            Error::Index(m) => write!(f, "index error: {m}"),
            Error::SingularTransform(m) => write!(f, "singular transform: {m}"),
            Error::Pole(m) => write!(f, "pole error: {m}"),
            Error::Tail(m) => write!(f, "tail error: {m}"),
            Error::NonConvergence(m) => write!(f, "non-convergence: {m}"),
            Error::StepUnderflow(m) => write!(f, "step underflow: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
