//! Special functions, a 6x6 symmetric eigen oracle, quadrature rules, the
//! disc pair kernel, and reproducible random streams.

pub mod bessel;
pub mod disc;
pub mod jacobi;
pub mod quadrature;
pub mod rng;

pub use bessel::{bessel_j, bessel_j_array, bessel_j_derivs};
pub use disc::{disc_overlap_kernel, pair_quadrature};
pub use jacobi::{jacobi_eigen_sym, SymEigen};
pub use quadrature::{gauss_legendre, gauss_legendre_on, gaussian_radial_moment};
