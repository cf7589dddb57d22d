//! Continuous collocation in time for Caputo subdiffusion problems, with
//! well-posedness certificates for the collocation matrices.

pub mod collocation;
pub mod config;
pub mod denselin;
pub mod error;
pub mod history;
pub mod report;
pub mod scan;
pub mod semilinear;
pub mod spatial;
pub mod specfun;
pub mod stepper;
pub mod wellposed;

pub use collocation::{build_matrices, make_points, CollocationMatrices, CollocationRule, PointFamily};
pub use config::ProblemConfig;
pub use denselin::{ComplexValue, DenseMatrix};
pub use error::{Error, Result};
pub use scan::{ScanReport, ScanRow};
pub use semilinear::{contraction_check, IterationReport};
pub use spatial::{EllipticCoefficients, SpaceFunction, SpatialGrid, TridiagonalMatrix};
pub use stepper::{
    collocation_residual,
    evaluate, solve, solve_with, PiecewiseSolution, SolveOptions, SubdiffusionProblem, TemporalMesh,
};
pub use wellposed::{
    CharPolyReport, Classification, LaxMilgramReport, ResolventEstimate, SpectrumReport, StepsizeReport,
};
