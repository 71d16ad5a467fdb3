//! Coefficient fields, sesquilinear forms, coercivity diagnostics and radial
//! finite-element solvers for the damped, rotating Galbrun equation with
//! gravity.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod background;
pub mod calculus;
pub mod diagnostics;
pub mod flow;
pub mod forms;
pub mod radial_solver;
pub mod math;
