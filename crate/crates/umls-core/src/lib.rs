//! Solvers and local convergence analysis for unit-modulus least squares:
//! minimize `½‖Ax − b‖²` over points whose coordinate pairs lie on the unit
//! circle.
//!
//! The crate provides the real reparametrization of the complex problem
//! ([`problem`]), the pairwise projection and its first-order expansion
//! ([`projection`]), fixed-step and adaptive projected gradient solvers
//! ([`solvers`]), the stationarity/rate machinery — multipliers, tangent
//! basis, reduced Hessian, `ρ(M_η)`, `η*`, `η_max`, region-of-convergence
//! constants ([`analysis`]) — plus seeded instance generators
//! ([`instances`]) and plain-text serialization ([`io`]).

pub mod analysis;
pub mod error;
pub mod instances;
pub mod io;
pub mod problem;
pub mod projection;
pub mod solvers;

pub use error::{Error, Result};
pub use problem::{
    assemble_from_pairs, deinterleave, gradient, membership, objective, realify_problem,
    select2, spectral_norm, ComplexProblem, ObjectiveValue, RealProblem, UnitModulusPoint,
};
pub use projection::{project, tangent_linearization, taylor_residual, TaylorResidual};
pub use solvers::{
    arnapgd_run, backtracking_pgd_run, generalized_gradient, pgd_run, pgd_step, SolverConfig,
    SolverTrace, Termination, TraceRecord,
};
pub use analysis::{
    convergence_matrix, eta_max, lagrange_multipliers, linear_error_bound, optimal_step,
    rate_report, reduced_hessian, roc_constants, spectral_radius, sublinear_bound,
    tangent_basis, RateReport, StationaryAnalysis,
};
pub use instances::{
    example_2d, generate_synthetic, initial_point_near, stationary_points_2d, Instance2D,
    StationaryKind, StationaryPoint2D, SyntheticInstance,
};
