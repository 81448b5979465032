//! Witten Laplacian and hypoelliptic Laplacian on the circle: discretization, Grushin
//! reduction, and spectral comparison.

pub mod basis;
pub mod bismut;
pub mod error;
pub mod grushin;
pub mod linalg;
pub mod potential;
pub mod spectral;
pub mod witten;

pub use error::{Error, Result};
