//! Shared numeric kernels: uniform grids, trapezoidal quadrature, centred
//! continuous-normalized DFTs and a complex SVD.

mod dft;
mod grid;
mod quad;
mod svd;

pub use dft::{dft1_centered, dft2_centered, idft2_centered, Dft1, Dft2};
pub use grid::{make_grid, UniformGrid};
pub use quad::{integrate_1d, integrate_2d, trapezoid_weights};
pub use svd::{svd, Svd};
