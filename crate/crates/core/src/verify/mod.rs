//! Independent numerical checks of computed solutions: the Fourier-symbol
//! fractional Laplacian on periodic grids, the Parseval bound for the
//! boundary operator, far-field decay, and data-dependence estimates.

mod decay;
mod dependence;
mod grid;
mod parseval;
mod residual;

pub use grid::{apply_radial_symbol, fractional_laplacian_grid, BoxGrid, WindowSpec, IMAGINARY_TOLERANCE};
pub use residual::{pde_residual_check, Normalization, ResidualConfig, ResidualReport, DEFAULT_MOLLIFIER, MIN_GRID};
pub use parseval::{
    parseval_check, parseval_check_many, surface_fourier, ParsevalQuadrature, ParsevalReport, PARSEVAL_TOLERANCE,
};
pub use decay::{axis_directions, decay_check, DecayReport, RayFit, SLOPE_TOLERANCE};
pub use dependence::{
    approximation_check, data_dependence_check, derivative_norm_check, DependenceConfig, DependenceReport, MultiIndex,
};
