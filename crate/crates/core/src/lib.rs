//! Constructive solutions of second-order neutral difference equations with
//! quasi-differences,
//!
//! ```text
//! Δ(r_n Δ(x_n + q_n x_{n-τ})) = a_n f(x_{n-σ}) + b_n,
//! ```
//!
//! built from the fixed-point formulation
//!
//! ```text
//! x_n + q_n x_{n-τ} = Σ_{s≥n} (1/r_s) Σ_{t≥s} (a_t f(x_{t-σ}) + b_t).
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] - sequences, nonlinearities, problems and finite windows.
//! * [`series`] - rigorous enclosures of the double and triple series that
//!   appear in the existence conditions, hypothesis checks and the search for
//!   the starting index `n0`.
//! * [`operators`] - the operator splittings (`T1` contraction plus `T2`
//!   summation operator) evaluated on finite windows with explicit
//!   truncation error.
//! * [`solver`] - Picard iteration in the zero-prefix ball and backward
//!   extension to full solutions.
//! * [`verify`] - the equation residual and a forward recurrence, both
//!   independent of the fixed-point machinery.
//! * [`approx`] - the `q_n → 1` cascade of scaled auxiliary problems.
//! * [`lp`] - solutions in the unit ball of `l^p`.
//! * [`cli`] - the `qdiff` command line front end.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod error;
pub mod lp;
pub mod model;
pub mod operators;
pub mod series;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Enclosure, FunctionSpec, ProblemSpec, SequenceKind, SequenceSpec, Window};
