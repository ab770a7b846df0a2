//! Learning closed macroscopic dynamics of large microscopic systems from
//! force evaluations on a subset of the microscopic coordinates.

pub mod error;
pub mod linalg;
pub mod net;
pub mod real;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use real::Real;

/// Concrete f64 aliases; the pipeline and all file formats run at f64.
pub type Mat = linalg::Matrix<f64>;
