//! Riesz potentials and boundary integral methods for the fractional
//! Dirichlet problem on bounded domains in R^3, with one-dimensional
//! closed-form solvers and spectral verification tools.

pub mod boundary;
pub mod error;
pub mod kernel;
pub mod one_dim;
pub mod polar;
pub mod potential;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod special;
pub mod surface;
pub mod verify;

pub use boundary::{
    assemble, eigendecompose, h1alpha_diagnostic, BoundaryDensity, BoundarySpectrum, Cutoff,
    DiscreteBoundaryOperator, H1AlphaReport,
};
pub use error::{Error, MeshError, Result};
pub use one_dim::{
    boundary_limit_check, general_solution, riesz_potential_1d, solve_halfline, solve_interval,
    spectral_residual_1d, CompactSource, HalfLineProblem, IntervalProblem, WeightedDirichlet1d,
};
pub use kernel::{kernel_eval, riesz_constant, Dimension, FractionalOrder, RieszConstant, RieszKernel3};
pub use potential::{
    single_layer_potential, trace_single_layer, trace_volume_potential, volume_potential, Aabb,
    Side, SingleLayerPotential, SourceBounds, VolumePotential, VolumeQuadrature, VolumeSource,
};
pub use solver::{solve, DirichletProblem, DirichletSolver, SolutionField, SolveMetadata};
pub use surface::{Panel, TriangulatedSurface};

/// Point or vector in R^3.
pub type Point3 = nalgebra::Vector3<f64>;
