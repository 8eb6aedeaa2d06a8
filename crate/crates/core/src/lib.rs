//! Periodic Toda Jacobi matrices in the continuum limit.
//!
//! The crate builds the Jacobi matrices of a Flaschka-sampled profile pair, the two
//! limiting Hill operators, and the theta-basis Toeplitz model in which both live, and
//! measures how the lattice spectrum and discriminant converge to the Hill data.

pub mod asymptotics;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod golden;
pub mod hill;
pub mod jacobi;
pub mod jet;
pub mod linalg;
pub mod profiles;
pub mod quadrature;
pub mod quantization;
pub mod runner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
