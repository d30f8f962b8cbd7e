//! PT-symmetric tridiagonal chains: characteristic polynomials, spectra, metric operators,
//! eigenvalue inclusion certificates and exceptional-point contours.

pub mod charpoly;
pub mod chebyshev;
pub mod ep;
pub mod error;
pub mod inclusion;
pub mod lattice;
pub mod metric;
pub mod oracle;
pub mod poly;
pub mod roots;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
