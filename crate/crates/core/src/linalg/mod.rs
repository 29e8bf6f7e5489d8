//! Self-contained linear algebra kernels: a banded complex LU for the
//! resolvent solves, shift-invert Lanczos on top of it, a tridiagonal QL, and
//! a dense Hermitian Jacobi eigensolver kept deliberately independent of the
//! production path so the two can cross-check each other.

pub mod banded;
pub mod dense;
pub mod lanczos;
pub mod small;
pub mod tridiag;
