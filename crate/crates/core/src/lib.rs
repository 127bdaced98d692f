//! Computable models of the quantum polydisk and quantum ball function
//! algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcombinatorics`]: word and multi-index statistics, q-integers and the
//!   monomial weights of every norm family;
//! * [`qspace`]: truncated arithmetic in `O_q^reg(C^n)` with the polydisk and
//!   ball norms;
//! * [`freeseries`]: truncated free series, the free polydisk, Taylor and free
//!   ball norms, operator-tuple evaluation and the canonical quotient map;
//! * [`quotient`]: ideal slices and quotient norms by convex optimisation;
//! * [`jsr`]: joint spectral radius partials and their extrapolation;
//! * [`fock`]: the truncated Fock representation and Vaksman's norms.

// `!(x > 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod freeseries;
pub mod jsr;
pub mod qcombinatorics;
pub mod qspace;
pub mod quotient;
pub mod sparse;

pub use error::{Error, Result};
pub use fock::{FockTruncation, RepMatrix};
pub use freeseries::{FreeElement, OperatorTuple};
pub use jsr::{AlgebraTuple, JsrEstimate, JsrPartials};
pub use num_complex::Complex64;
pub use qcombinatorics::{Domain, MultiIndex, QModulus, Word};
pub use qspace::{Family, NormValue, QElement, QParameter, SeminormSpec};
pub use quotient::{IdealSlice, LiftNorm, QuotientResult, SliceSet};
