//! Orthogonal polynomials on the real line and the unit circle.

pub mod error;
pub mod lab;
pub mod measure;
pub mod oprl;
pub mod opuc;
pub mod poly;
pub mod potential;
pub mod spectra;
pub mod sum;

pub use error::{Error, Result};
