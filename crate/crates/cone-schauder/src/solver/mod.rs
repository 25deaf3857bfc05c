//! Poisson solvers on cones and the iteration behind the Hölder estimate.

pub mod fd;
pub mod schauder;
pub mod spectral;

pub use fd::{
    double_cover_pullback, solve_double_cover, solve_fd_polar, CartesianGrid, DoubleCoverSolution, PolarFdSolution,
    PolarGrid,
};
pub use schauder::{
    default_source, hoelder_report, model_basis, sample_points, schauder_iterate, verify_schauder, HoelderReport,
    IterationTrace, PointReport, SchauderConfig, SchauderVerification, TraceScale, VerifyConfig,
};
pub use spectral::{fischer_decompose, solve_dirichlet_apex, FischerComponent, SpectralSolution, SpectralTerm};
