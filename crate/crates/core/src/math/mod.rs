//! Numerical substrate: special functions, grids, transforms and quadrature.

pub mod fourier;
pub mod grid;
pub mod quadrature;
pub mod special;

pub use fourier::{convolve1, convolve2, fourier1, inverse_fourier1, sympl_ft, sympl_ft_reflected};
pub use grid::{Grid1D, PhaseField, PhaseGrid};
pub use special::{erfc, gauss_2f1, pochhammer};
