//! Global minimisation of the squared majorant
//!
//! ```text
//! M^2(v, y, beta) = 4 (1 + beta) Dual^2 + (1 + beta) / beta * C_F^2 / lambda * Equi^2
//! ```
//!
//! over the flux space and `beta > 0`, alternating an exact flux solve at
//! fixed `beta` with the closed-form optimal `beta` for the current flux.
//! At the optimal `beta` the bound collapses to `2 Dual + C_F / sqrt(lambda) Equi`.

use crate::assembly::MajorantSystem;
use crate::error::{Error, Result};
use crate::sparse::{cg_solve_from, SolverOptions};

/// Relative size below which a majorant part counts as zero.
const DEGENERATE_RATIO: f64 = 1e-14;
/// Weight used for the final flux solve once the equilibration part vanishes.
const BETA_CAP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerOptions {
    /// Stop once the relative change of the majorant is at most `eps`.
    pub eps: f64,
    pub imax: usize,
    pub beta0: f64,
    pub solver: SolverOptions,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            imax: 50,
            beta0: 1.0,
            solver: SolverOptions::default(),
        }
    }
}

/// Majorant parts for one flux iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// `2 dual + C_F / sqrt(lambda) equi`.
    pub maj: f64,
    pub dual: f64,
    pub equi: f64,
    /// Weight used in the flux solve of this iteration.
    pub beta_solve: f64,
    /// Optimal weight for this iterate.
    pub beta: f64,
    pub solver_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorantResult {
    pub maj: f64,
    pub maj_sq: f64,
    pub dual: f64,
    pub equi: f64,
    /// Weight at which `maj_sq` is evaluated.
    pub beta: f64,
    /// Weight of the last flux solve; `flux_coeffs` minimise `M^2(., beta_solve)`.
    pub beta_solve: f64,
    pub iterations: usize,
    pub converged: bool,
    pub flux_coeffs: Vec<f64>,
    pub history: Vec<IterationRecord>,
}

impl MajorantResult {
    /// Relative distance of `beta_solve` from the optimal weight of the final flux.
    pub fn beta_fixed_point_residual(&self) -> f64 {
        (self.beta - self.beta_solve).abs() / self.beta.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantParts {
    pub maj_sq: f64,
    pub dual: f64,
    pub equi: f64,
}

/// Squared majorant for flux coefficients `c` and weight `beta`.
pub fn eval_majorant(system: &MajorantSystem, c: &[f64], beta: f64) -> Result<MajorantParts> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    if c.len() != system.dof_count() {
        return Err(Error::Incompatible(format!(
            "{} flux coefficients for a system with {} unknowns",
            c.len(),
            system.dof_count()
        )));
    }
    let dual_sq = system.dual_sq(c);
    let equi_sq = system.equi_sq(c);
    Ok(MajorantParts {
        maj_sq: 4.0 * (1.0 + beta) * dual_sq + (1.0 + beta) / beta * system.equi_weight() * equi_sq,
        dual: dual_sq.sqrt(),
        equi: equi_sq.sqrt(),
    })
}

/// `maj_sq / true_energy_error_sq`; at least one for a guaranteed bound.
pub fn efficiency_index(result: &MajorantResult, true_energy_error_sq: f64) -> f64 {
    result.maj_sq / true_energy_error_sq
}

/// Alternating minimisation of the squared majorant.
pub fn minimize_majorant(system: &MajorantSystem, opts: &MinimizerOptions) -> Result<MajorantResult> {
    if !(opts.eps > 0.0) || opts.imax == 0 || !(opts.beta0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need eps > 0, imax >= 1 and beta0 > 0 (got {}, {}, {})",
            opts.eps, opts.imax, opts.beta0
        )));
    }
    let equi_scale = system.c_f / system.lambda.sqrt();
    let mut beta = opts.beta0;
    let mut c: Option<Vec<f64>> = None;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut converged = false;

    let solve = |beta: f64, start: Option<&[f64]>| -> Result<(Vec<f64>, usize)> {
        let k = system.flux_matrix(beta)?;
        let (x, stats) = cg_solve_from(&k, &system.flux_rhs(beta), start, &opts.solver)?;
        Ok((x, stats.iterations))
    };

    for _ in 0..opts.imax {
        let (ck, its) = solve(beta, c.as_deref())?;
        let dual = system.dual_sq(&ck).sqrt();
        let equi = system.equi_sq(&ck).sqrt();
        let maj = 2.0 * dual + equi_scale * equi;
        let beta_solve = beta;

        if dual <= DEGENERATE_RATIO * maj || maj == 0.0 {
            // The flux reproduces A grad v; only the equilibration part is left.
            history.push(IterationRecord { maj, dual, equi, beta_solve, beta, solver_iterations: its });
            let maj_sq = eval_majorant(system, &ck, beta)?.maj_sq;
            return Ok(MajorantResult {
                maj: maj_sq.sqrt(),
                maj_sq,
                dual,
                equi,
                beta,
                beta_solve,
                iterations: history.len(),
                converged: true,
                flux_coeffs: ck,
                history,
            });
        }

        if equi <= DEGENERATE_RATIO * maj {
            history.push(IterationRecord { maj, dual, equi, beta_solve, beta, solver_iterations: its });
            let (cf, its) = solve(BETA_CAP, Some(&ck))?;
            let parts = eval_majorant(system, &cf, BETA_CAP)?;
            history.push(IterationRecord {
                maj: parts.maj_sq.sqrt(),
                dual: parts.dual,
                equi: parts.equi,
                beta_solve: BETA_CAP,
                beta: BETA_CAP,
                solver_iterations: its,
            });
            return Ok(MajorantResult {
                maj: parts.maj_sq.sqrt(),
                maj_sq: parts.maj_sq,
                dual: parts.dual,
                equi: parts.equi,
                beta: BETA_CAP,
                beta_solve: BETA_CAP,
                iterations: history.len(),
                converged: true,
                flux_coeffs: cf,
                history,
            });
        }

        beta = equi_scale * equi / (2.0 * dual);
        let stop = history
            .last()
            .is_some_and(|prev| (maj - prev.maj).abs() <= opts.eps * prev.maj);
        history.push(IterationRecord { maj, dual, equi, beta_solve, beta, solver_iterations: its });
        c = Some(ck);
        if stop {
            converged = true;
            break;
        }
    }

    let last = *history.last().expect("at least one iteration");
    Ok(MajorantResult {
        maj: last.maj,
        maj_sq: last.maj * last.maj,
        dual: last.dual,
        equi: last.equi,
        beta: last.beta,
        beta_solve: last.beta_solve,
        iterations: history.len(),
        converged,
        flux_coeffs: c.expect("at least one iteration"),
        history,
    })
}
