//! Global assembly of the primal Galerkin system and of the quadratic-form
//! ingredients of the error majorant.
//!
//! With the flux `y = sum_j c_j phi_j` the two parts of the majorant are
//!
//! ```text
//! |div y + f|^2                        = c^T S c + 2 c^T b + |f|^2
//! (A^-1 B (y - A grad v), B (y - A grad v)) = 1/2 c^T M c - c^T z + g
//! ```
//!
//! where `S_ij = (div phi_j, div phi_i)`,
//! `M_ij = (A^-1 B phi_j, B phi_i) + (A^-1 B phi_i, B phi_j)`,
//! `b_i = (f, div phi_i)`,
//! `z_i = (A^-1 B phi_i, B A grad v) + (A^-1 B A grad v, B phi_i)` and
//! `g = (A^-1 B A grad v, B A grad v)`.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::problem::ProblemSpec;
use crate::quadrature::rule_for_degree;
use crate::spaces::{ElementMap, FluxSpace, ScalarSpace};
use crate::sparse::{dot, nonsym_solve, CsrMatrix, SolverOptions};

/// Quadrature degree used for majorant assembly.
pub fn default_majorant_degree(scalar_order: usize, flux_order: usize) -> usize {
    2 * scalar_order.max(flux_order + 2) + 4
}

/// Quadrature degree used for the primal system and error norms.
pub fn default_primal_degree(scalar_order: usize) -> usize {
    2 * scalar_order + 4
}

fn check_coefficients(problem: &ProblemSpec, mesh: &TriMesh) -> Result<()> {
    match problem.coefficients.cell_count() {
        Some(n) if n != mesh.num_triangles() => Err(Error::Incompatible(format!(
            "{n} cell coefficients for a mesh with {} triangles",
            mesh.num_triangles()
        ))),
        _ => Ok(()),
    }
}

/// Primal system restricted to the interior (non-Dirichlet) DOFs.
#[derive(Debug, Clone)]
pub struct PrimalSystem {
    pub k: CsrMatrix,
    pub f: Vec<f64>,
    /// Global DOF of each interior unknown.
    pub interior: Vec<usize>,
    dof_count: usize,
}

impl PrimalSystem {
    /// Embeds interior values into a full coefficient vector (zero on the boundary).
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.dof_count];
        for (&g, &v) in self.interior.iter().zip(x) {
            full[g] = v;
        }
        full
    }

    /// Solves the system and returns the full coefficient vector of `v`.
    pub fn solve(&self, opts: &SolverOptions) -> Result<Vec<f64>> {
        Ok(self.expand(&nonsym_solve(&self.k, &self.f, opts)?))
    }
}

/// `K_ij = (A grad phi_j, grad phi_i)`, `F_i = (f, phi_i)` over interior DOFs;
/// homogeneous Dirichlet DOFs are eliminated.
pub fn assemble_primal(space: &ScalarSpace, problem: &ProblemSpec, quad_degree: Option<usize>) -> Result<PrimalSystem> {
    let mesh = space.mesh();
    check_coefficients(problem, mesh)?;
    let rule = rule_for_degree(quad_degree.unwrap_or_else(|| default_primal_degree(space.order())))?;
    let table = space.tabulate(&rule.points);
    let nloc = space.n_local();

    let mut reduced: Vec<Option<usize>> = vec![Some(0); space.dof_count()];
    for &d in space.boundary_dofs() {
        reduced[d] = None;
    }
    let mut interior = Vec::new();
    for (g, slot) in reduced.iter_mut().enumerate() {
        if slot.is_some() {
            *slot = Some(interior.len());
            interior.push(g);
        }
    }

    let mut triplets = Vec::with_capacity(mesh.num_triangles() * nloc * nloc);
    let mut f = vec![0.0; interior.len()];
    let mut grads = vec![Vector2::zeros(); nloc];
    for t in 0..mesh.num_triangles() {
        let map = ElementMap::new(mesh, t);
        let a = problem.coefficients.at(t).a;
        let dofs = space.local_dofs(t);
        let mut ke = vec![0.0; nloc * nloc];
        let mut fe = vec![0.0; nloc];
        for (q, (xhat, wq)) in rule.iter().enumerate() {
            let w = wq * map.det;
            let fx = (problem.rhs)(map.to_physical(xhat));
            for (i, g) in grads.iter_mut().enumerate() {
                *g = Vector2::from(map.grad_to_physical(table.ref_grad(q, i)));
            }
            for i in 0..nloc {
                fe[i] += w * fx * table.value(q, i);
                for j in 0..nloc {
                    ke[i * nloc + j] += w * grads[i].dot(&(a * grads[j]));
                }
            }
        }
        for i in 0..nloc {
            let Some(ri) = reduced[dofs[i]] else { continue };
            f[ri] += fe[i];
            for j in 0..nloc {
                if let Some(rj) = reduced[dofs[j]] {
                    triplets.push((ri, rj, ke[i * nloc + j]));
                }
            }
        }
    }
    let n = interior.len();
    Ok(PrimalSystem {
        k: CsrMatrix::from_triplets(n, n, &triplets)?,
        f,
        interior,
        dof_count: space.dof_count(),
    })
}

/// `(A grad(u - v), grad(u - v))` against the exact gradient attached to `problem`.
pub fn energy_error(space: &ScalarSpace, v: &[f64], problem: &ProblemSpec, quad_degree: Option<usize>) -> Result<f64> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::Unsupported("energy error needs an exact solution".into()))?;
    if v.len() != space.dof_count() {
        return Err(Error::Incompatible(format!(
            "coefficient vector of length {} for a space with {} DOFs",
            v.len(),
            space.dof_count()
        )));
    }
    let mesh = space.mesh();
    check_coefficients(problem, mesh)?;
    let rule = rule_for_degree(quad_degree.unwrap_or_else(|| default_primal_degree(space.order())))?;
    let table = space.tabulate(&rule.points);
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let map = ElementMap::new(mesh, t);
        let a = problem.coefficients.at(t).a;
        let dofs = space.local_dofs(t);
        let mut acc = 0.0;
        for (q, (xhat, wq)) in rule.iter().enumerate() {
            let gv = dofs.iter().enumerate().fold(Vector2::zeros(), |s, (i, &d)| {
                s + Vector2::from(table.ref_grad(q, i)) * v[d]
            });
            let gv = Vector2::from(map.grad_to_physical([gv[0], gv[1]]));
            let e = Vector2::from((exact.grad)(map.to_physical(xhat))) - gv;
            acc += wq * e.dot(&(a * e));
        }
        total += acc * map.det;
    }
    Ok(total)
}

/// Everything the majorant minimisation needs, assembled once per
/// (mesh, flux order, approximation `v`).
#[derive(Debug, Clone)]
pub struct MajorantSystem {
    pub s: CsrMatrix,
    pub m: CsrMatrix,
    pub b: Vec<f64>,
    pub z: Vec<f64>,
    pub f_norm_sq: f64,
    pub g: f64,
    pub c_f: f64,
    pub lambda: f64,
    pub flux: Arc<FluxSpace>,
}

impl MajorantSystem {
    pub fn dof_count(&self) -> usize {
        self.b.len()
    }

    /// `C_F^2 / lambda`, the weight of the equilibration term.
    pub fn equi_weight(&self) -> f64 {
        self.c_f * self.c_f / self.lambda
    }

    /// `|div y + f|^2` for flux coefficients `c`, clamped at zero.
    pub fn equi_sq(&self, c: &[f64]) -> f64 {
        (self.s.quad_form(c) + 2.0 * dot(c, &self.b) + self.f_norm_sq).max(0.0)
    }

    /// `(A^-1 B (y - A grad v), B (y - A grad v))` for flux coefficients `c`, clamped at zero.
    pub fn dual_sq(&self, c: &[f64]) -> f64 {
        (0.5 * self.m.quad_form(c) - dot(c, &self.z) + self.g).max(0.0)
    }

    /// `C_F^2/lambda S + 2 beta M`.
    pub fn flux_matrix(&self, beta: f64) -> Result<CsrMatrix> {
        CsrMatrix::linear_combination(self.equi_weight(), &self.s, 2.0 * beta, &self.m)
    }

    /// `-C_F^2/lambda b + 2 beta z`.
    pub fn flux_rhs(&self, beta: f64) -> Vec<f64> {
        let k = self.equi_weight();
        self.b.iter().zip(&self.z).map(|(b, z)| -k * b + 2.0 * beta * z).collect()
    }
}

/// Assembles `S`, `M`, `b`, `z`, `|f|^2` and `g` for the approximation with
/// coefficients `v` in `scalar`.
pub fn assemble_majorant(
    flux: Arc<FluxSpace>,
    scalar: &ScalarSpace,
    v: &[f64],
    problem: &ProblemSpec,
    quad_degree: Option<usize>,
) -> Result<MajorantSystem> {
    let mesh = flux.mesh().clone();
    if !Arc::ptr_eq(&mesh, scalar.mesh()) && *mesh != **scalar.mesh() {
        return Err(Error::Incompatible("flux and scalar spaces live on different meshes".into()));
    }
    if v.len() != scalar.dof_count() {
        return Err(Error::Incompatible(format!(
            "coefficient vector of length {} for a space with {} DOFs",
            v.len(),
            scalar.dof_count()
        )));
    }
    check_coefficients(problem, &mesh)?;
    let degree = quad_degree.unwrap_or_else(|| default_majorant_degree(scalar.order(), flux.order()));
    let rule = rule_for_degree(degree)?;
    let ftab = flux.tabulate(&rule.points);
    let stab = scalar.tabulate(&rule.points);
    let nf = flux.n_local();
    let n = flux.dof_count();

    let mut s_trip = Vec::with_capacity(mesh.num_triangles() * nf * nf);
    let mut m_trip = Vec::with_capacity(mesh.num_triangles() * nf * nf);
    let mut b = vec![0.0; n];
    let mut z = vec![0.0; n];
    let (mut f_norm_sq, mut g) = (0.0, 0.0);

    let mut phi = vec![Vector2::zeros(); nf];
    let mut div = vec![0.0; nf];
    let mut se = vec![0.0; nf * nf];
    let mut me = vec![0.0; nf * nf];
    let mut be = vec![0.0; nf];
    let mut ze = vec![0.0; nf];
    for t in 0..mesh.num_triangles() {
        let map = ElementMap::new(&mesh, t);
        let coef = problem.coefficients.at(t);
        let h: Matrix2<f64> = coef.dual_weight + coef.dual_weight.transpose();
        let fdofs = flux.local_dofs(t);
        let sdofs = scalar.local_dofs(t);
        se.fill(0.0);
        me.fill(0.0);
        be.fill(0.0);
        ze.fill(0.0);
        let (mut fe, mut ge) = (0.0, 0.0);

        for (q, (xhat, wq)) in rule.iter().enumerate() {
            let fx = (problem.rhs)(map.to_physical(xhat));
            for (i, &(_, sign)) in fdofs.iter().enumerate() {
                phi[i] = Vector2::from(map.piola(ftab.values[q * nf + i])) * sign;
                div[i] = sign * ftab.divs[q * nf + i] / map.det;
            }
            let gv_ref = sdofs.iter().enumerate().fold([0.0; 2], |s, (i, &d)| {
                let gr = stab.ref_grad(q, i);
                [s[0] + v[d] * gr[0], s[1] + v[d] * gr[1]]
            });
            let flux_v = coef.a * Vector2::from(map.grad_to_physical(gv_ref));
            let h_flux_v = h * flux_v;

            for i in 0..nf {
                let h_phi_i = h * phi[i];
                be[i] += wq * fx * div[i];
                ze[i] += wq * phi[i].dot(&h_flux_v);
                for j in i..nf {
                    se[i * nf + j] += wq * div[i] * div[j];
                    me[i * nf + j] += wq * h_phi_i.dot(&phi[j]);
                }
            }
            fe += wq * fx * fx;
            ge += wq * flux_v.dot(&(coef.dual_weight * flux_v));
        }

        let det = map.det;
        for i in 0..nf {
            let gi = fdofs[i].0;
            b[gi] += det * be[i];
            z[gi] += det * ze[i];
            for j in i..nf {
                let gj = fdofs[j].0;
                let (sv, mv) = (det * se[i * nf + j], det * me[i * nf + j]);
                s_trip.push((gi, gj, sv));
                m_trip.push((gi, gj, mv));
                if i != j {
                    s_trip.push((gj, gi, sv));
                    m_trip.push((gj, gi, mv));
                }
            }
        }
        f_norm_sq += det * fe;
        g += det * ge;
    }

    Ok(MajorantSystem {
        s: CsrMatrix::from_triplets(n, n, &s_trip)?,
        m: CsrMatrix::from_triplets(n, n, &m_trip)?,
        b,
        z,
        f_norm_sq,
        g,
        c_f: problem.friedrichs(),
        lambda: problem.lambda_low(),
        flux,
    })
}
