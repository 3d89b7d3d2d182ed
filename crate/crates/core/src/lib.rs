//! Finite-dimensional models for quantum exchangeability and operator-valued
//! freeness.
//!
//! The crate builds magic unitaries (representations of the quantum
//! permutation group), computes operator-valued free cumulants over
//! non-crossing partitions, and checks invariance of joint distributions
//! under quantum permutations on concrete matrix models.
//!
//! Floating-point code is generic over [`Real`]; the aliases below fix the
//! common `f64` and `f32` instantiations.

pub mod algebra;
pub mod cumulants;
pub mod error;
pub mod exchangeability;
pub mod magic;
pub mod partitions;
pub mod sampling;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use partitions::Partition;
pub use scalar::{CMatrix, Field, Real};

pub type Matrix64 = CMatrix<f64>;
pub type Matrix32 = CMatrix<f32>;
pub type MagicUnitary64 = magic::MagicUnitary<f64>;
pub type MagicUnitary32 = magic::MagicUnitary<f32>;
pub type CumulantSpec64 = cumulants::CumulantSpec<f64>;
pub type CumulantFunctional64 = cumulants::CumulantFunctional<f64>;
pub type ConcreteFunctional64 = algebra::ConcreteFunctional<f64>;
