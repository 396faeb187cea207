//! End-to-end runs on the sine test problem: mesh, primal solve, majorant
//! minimisation and the true energy error.

use std::sync::Arc;

use crate::assembly::{assemble_majorant, assemble_primal, energy_error};
use crate::error::{Error, Result};
use crate::mesh::{build_rect_mesh, Diagonal, Rect};
use crate::minimizer::{efficiency_index, minimize_majorant, MajorantResult, MinimizerOptions};
use crate::problem::{ProblemSpec, SineProblem};
use crate::spaces::{FluxSpace, ScalarSpace};
use crate::sparse::SolverOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    /// Cells per side of the unit square.
    pub n: usize,
    pub p1: usize,
    pub k1: u32,
    pub k2: u32,
    pub a: [[f64; 2]; 2],
    /// Replaces the computed lower ellipticity bound.
    pub lambda_override: Option<f64>,
    /// Replaces the Friedrichs constant of the unit square.
    pub c_f_override: Option<f64>,
    /// Quadrature degree for the majorant assembly; the default depends on both orders.
    pub quad_degree: Option<usize>,
    pub minimizer: MinimizerOptions,
    pub primal_solver: SolverOptions,
    pub diagonal: Diagonal,
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            n: 20,
            p1: 1,
            k1: 1,
            k2: 1,
            a: [[2.0, 1.0], [0.0, 3.0]],
            lambda_override: None,
            c_f_override: None,
            quad_degree: None,
            minimizer: MinimizerOptions::default(),
            primal_solver: SolverOptions::with_tol(1e-12),
            diagonal: Diagonal::Right,
        }
    }
}

impl CaseConfig {
    pub fn sine_problem(&self) -> Result<SineProblem> {
        SineProblem::new(self.k1, self.k2, self.a)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let mut problem = self.sine_problem()?.problem()?;
        problem.coefficients = problem.coefficients.with_lambda_override(self.lambda_override)?;
        problem.with_friedrichs_constant(self.c_f_override)
    }
}

/// Discrete solution shared by all flux degrees of one case.
pub struct PrimalSolution {
    pub problem: ProblemSpec,
    pub space: ScalarSpace,
    pub v: Vec<f64>,
    pub err_sq: f64,
    pub quad_degree: Option<usize>,
}

impl PrimalSolution {
    pub fn compute(config: &CaseConfig) -> Result<Self> {
        if config.n == 0 {
            return Err(Error::InvalidArgument("mesh resolution must be positive".into()));
        }
        let problem = config.problem()?;
        let mesh = Arc::new(build_rect_mesh(Rect::unit_square(), config.n, config.n, config.diagonal)?);
        let space = ScalarSpace::new(mesh, config.p1)?;
        let v = assemble_primal(&space, &problem, None)?.solve(&config.primal_solver)?;
        let err_sq = energy_error(&space, &v, &problem, None)?;
        Ok(Self {
            problem,
            space,
            v,
            err_sq,
            quad_degree: config.quad_degree,
        })
    }

    /// Minimises the majorant over the flux space with label `p2` (`RT_{p2-1}`).
    pub fn majorant(&self, p2: usize, opts: &MinimizerOptions) -> Result<CaseOutcome> {
        let flux = Arc::new(FluxSpace::from_label(self.space.mesh().clone(), p2)?);
        let n2 = flux.dof_count();
        let system = assemble_majorant(flux, &self.space, &self.v, &self.problem, self.quad_degree)?;
        let result = minimize_majorant(&system, opts)?;
        Ok(CaseOutcome {
            n1: self.space.dof_count(),
            p2,
            n2,
            err_sq: self.err_sq,
            ieff: efficiency_index(&result, self.err_sq),
            result,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    /// Scalar DOFs including boundary nodes.
    pub n1: usize,
    pub p2: usize,
    /// Flux DOFs.
    pub n2: usize,
    /// Squared energy error of the discrete solution.
    pub err_sq: f64,
    /// `maj_sq / err_sq`.
    pub ieff: f64,
    pub result: MajorantResult,
}

/// Runs every flux label in `p2s` against one primal solve.
pub fn run_cases(config: &CaseConfig, p2s: &[usize]) -> Result<Vec<CaseOutcome>> {
    let primal = PrimalSolution::compute(config)?;
    p2s.iter().map(|&p2| primal.majorant(p2, &config.minimizer)).collect()
}

pub fn run_case(config: &CaseConfig, p2: usize) -> Result<CaseOutcome> {
    PrimalSolution::compute(config)?.majorant(p2, &config.minimizer)
}
