//! Numerical laboratory for planar magnetic Schrodinger operators with
//! Dirichlet boundary conditions.
//!
//! The crate builds gauge-covariant finite-difference operators on a
//! rectangle, extracts boundary spectral data (eigenvalues with the normal
//! traces of eigenfunctions), and drives the scattering-style machinery that
//! reconstructs the magnetic field and the electric potential from that data:
//! complex-frequency probe solutions, boundary representation formulas, their
//! high-frequency limits, and Fourier inversion of the resulting targets.

pub mod ansatz;
pub mod domain;
pub mod error;
pub mod field;
pub mod frame;
pub mod gauge;
pub mod recovery;
pub mod linalg;
pub mod mollify;
pub mod operator;
pub mod preset;
pub mod representation;
pub mod resolvent;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
