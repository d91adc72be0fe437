#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod calibration;
pub mod channel;
pub mod circuit;
pub mod dispersive;
pub mod error;
pub mod experiments;
pub mod fidelity;
pub mod hamiltonian;
pub mod lindblad;
pub mod operator;
pub mod units;

pub use error::{Error, ErrorKind, Result};
