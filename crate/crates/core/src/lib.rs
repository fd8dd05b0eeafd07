//! Numerical laboratory for non-commutative Hardy-type inequalities.
//!
//! Finite-dimensional real symmetric matrices stand in for bounded
//! self-adjoint operators. The crate provides
//!
//! * [`symcore`]: Jacobi eigensolver, spectral calculus, Loewner order,
//!   seeded random PSD matrices;
//! * [`sequence`]: finitely supported operator sequences and the Hardy
//!   averaging operator;
//! * [`stepfun`]: piecewise-constant operator-valued functions on `(0, ∞)`
//!   and the weighted integrals of the continuous Hardy inequalities;
//! * [`means`]: operator power means, the tracial geometric mean and the
//!   `Φ_p` trace functional;
//! * [`verify`]: inequality checkers producing [`report::InequalityReport`]s
//!   and the seeded suite runner;
//! * [`probe`]: numerical sharpness probing of `(p/(p-1))^p` and `e`, and an
//!   exploratory Loewner-order violation search for `p > 2`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod means;
pub mod probe;
pub mod report;
pub mod seed;
pub mod sequence;
pub mod stepfun;
pub mod symcore;
pub mod verify;

mod par;

pub use error::{Error, Result};
pub use means::{PSchedule, TgMode};
pub use report::{InequalityReport, Status};
pub use sequence::OperatorSequence;
pub use stepfun::{QuadratureSpec, StepOperatorFunction, Weight};
pub use symcore::{EigenDecomposition, SymMatrix, ToleranceSpec};
