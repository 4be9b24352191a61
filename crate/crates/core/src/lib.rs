//! Bound states of one-dimensional Schrödinger operators `-d²/dx² - U` computed
//! through the Birman–Schwinger principle, and numerical checks of the sharp
//! Lieb–Thirring inequality `Σ √E_i ≤ ½ ∫ U` together with the operator facts
//! behind it.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function
//! of its inputs; IO, configuration and report formats live in the `bslab`
//! companion crate.
//!
//! Module map:
//!
//! * [`numerics`]: composite Gauss–Legendre grids, symmetric matrices, a dense
//!   symmetric eigensolver and a tridiagonal Sturm-sequence solver.
//! * [`potentials`]: potentials `U ≥ 0`, atomic measures, κ-measures and the
//!   mollifier.
//! * [`kernels`]: Nyström matrices of the Birman–Schwinger, `L_μ` and `L^κ`
//!   operators, the atomic (measure) kernel and the toy matrix `L({a_i})`.
//! * [`bound_states`]: spectra by Birman–Schwinger root finding, exact atomic
//!   solves, a finite-difference oracle and closed forms.
//! * [`lieb_thirring`]: moments, constants and the inequality checks.
//! * [`monotonicity`]: the partial-sum monotonicity harness.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is how NaN gets rejected; quadrature tables keep all their digits
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

extern crate alloc;

pub mod bound_states;
pub mod error;
pub mod kernels;
pub mod lieb_thirring;
pub mod math;
pub mod monotonicity;
pub mod numerics;
pub mod potentials;

pub use error::{Error, Result};
