//! Guaranteed a posteriori error majorants for nonsymmetric diffusion
//! `-div(A grad u) = f` on rectangles with homogeneous Dirichlet data.
//!
//! - [`mesh`]: structured triangulations and edge orientation.
//! - [`quadrature`]: triangle and Gauss–Legendre rules.
//! - [`spaces`]: P1/P2 Lagrange and Raviart–Thomas `RT_0..RT_2` spaces.
//! - [`problem`]: coefficients, derived matrices and the sine test problem.
//! - [`sparse`]: CSR storage, conjugate gradients and BiCGSTAB.
//! - [`assembly`]: primal system, energy error and the quadratic majorant data.
//! - [`minimizer`]: alternating flux / weight minimisation.
//! - [`pipeline`]: complete runs for the convergence studies.

pub mod assembly;
pub mod error;
pub mod mesh;
pub mod minimizer;
pub mod pipeline;
pub mod problem;
pub mod quadrature;
pub mod spaces;
pub mod sparse;

pub use assembly::{assemble_majorant, assemble_primal, energy_error, MajorantSystem, PrimalSystem};
pub use error::{Error, Result};
pub use mesh::{build_rect_mesh, Diagonal, Rect, TriMesh};
pub use minimizer::{
    efficiency_index, eval_majorant, minimize_majorant, IterationRecord, MajorantParts, MajorantResult,
    MinimizerOptions,
};
pub use pipeline::{run_case, run_cases, CaseConfig, CaseOutcome, PrimalSolution};
pub use problem::{
    compute_b, compute_lambda_low, csb_inequality_check, friedrichs_constant, sine_problem, CellCoefficient,
    CoefficientModel, ExactSolution, ProblemSpec, SineProblem,
};
pub use quadrature::{rule_for_degree, QuadRule};
pub use spaces::{FluxSpace, ScalarSpace};
pub use sparse::{cg_solve, nonsym_solve, CsrMatrix, SolverOptions};
