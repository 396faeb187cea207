use std::sync::Arc;

use super::ElementMap;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// Continuous piecewise-polynomial space of order 1 or 2.
///
/// Global numbering: vertex DOFs first (by vertex index), then, for order 2,
/// one DOF per edge at its midpoint (`num_vertices + edge`). Local order is
/// `v0, v1, v2` followed by the midpoints of local edges `0, 1, 2`.
#[derive(Debug, Clone)]
pub struct ScalarSpace {
    mesh: Arc<TriMesh>,
    order: usize,
    dof_count: usize,
    local_dofs: Vec<Vec<usize>>,
    boundary_dofs: Vec<usize>,
}

/// Reference basis values and gradients tabulated at a point set.
/// Entry `[p * n_local + i]` belongs to point `p` and local function `i`.
#[derive(Debug, Clone)]
pub struct ScalarTable {
    pub n_local: usize,
    pub values: Vec<f64>,
    pub ref_grads: Vec<[f64; 2]>,
}

impl ScalarTable {
    pub fn value(&self, p: usize, i: usize) -> f64 {
        self.values[p * self.n_local + i]
    }

    pub fn ref_grad(&self, p: usize, i: usize) -> [f64; 2] {
        self.ref_grads[p * self.n_local + i]
    }
}

impl ScalarSpace {
    pub fn new(mesh: Arc<TriMesh>, order: usize) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidArgument(format!(
                "Lagrange order must be 1 or 2, got {order}"
            )));
        }
        let nv = mesh.num_vertices();
        let local_dofs: Vec<Vec<usize>> = mesh
            .triangles()
            .iter()
            .zip(mesh.triangle_edges())
            .map(|(t, te)| {
                let mut d = t.to_vec();
                if order == 2 {
                    d.extend(te.iter().map(|le| nv + le.edge));
                }
                d
            })
            .collect();
        let mut boundary_dofs: Vec<usize> = mesh
            .boundary_vertex_flags()
            .iter()
            .enumerate()
            .filter_map(|(v, &b)| b.then_some(v))
            .collect();
        if order == 2 {
            boundary_dofs.extend(
                mesh.boundary_edge_flags()
                    .iter()
                    .enumerate()
                    .filter_map(|(e, &b)| b.then_some(nv + e)),
            );
        }
        let dof_count = if order == 1 { nv } else { nv + mesh.num_edges() };
        Ok(Self {
            mesh,
            order,
            dof_count,
            local_dofs,
            boundary_dofs,
        })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn n_local(&self) -> usize {
        if self.order == 1 {
            3
        } else {
            6
        }
    }

    pub fn local_dofs(&self, t: usize) -> &[usize] {
        &self.local_dofs[t]
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    /// Physical coordinates of every DOF node.
    pub fn dof_coordinates(&self) -> Vec<[f64; 2]> {
        let mut coords = self.mesh.vertices().to_vec();
        if self.order == 2 {
            coords.extend(self.mesh.edges().iter().map(|&[a, b]| {
                let (pa, pb) = (self.mesh.vertices()[a], self.mesh.vertices()[b]);
                [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
            }));
        }
        coords
    }

    /// Nodal interpolant of `u`.
    pub fn interpolate(&self, u: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.dof_coordinates().into_iter().map(u).collect()
    }

    /// Reference values and reference gradients of the local basis on triangle `tri`.
    pub fn eval_basis(&self, tri: usize, ref_pts: &[[f64; 2]]) -> Result<ScalarTable> {
        if tri >= self.mesh.num_triangles() {
            return Err(Error::InvalidArgument(format!("triangle index {tri} out of range")));
        }
        Ok(self.tabulate(ref_pts))
    }

    /// Same as [`eval_basis`](Self::eval_basis); reference values do not depend on the triangle.
    pub fn tabulate(&self, ref_pts: &[[f64; 2]]) -> ScalarTable {
        let n_local = self.n_local();
        let mut values = Vec::with_capacity(ref_pts.len() * n_local);
        let mut ref_grads = Vec::with_capacity(ref_pts.len() * n_local);
        for &[x, y] in ref_pts {
            let lam = [1.0 - x - y, x, y];
            let dlam = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            if self.order == 1 {
                values.extend_from_slice(&lam);
                ref_grads.extend_from_slice(&dlam);
            } else {
                for i in 0..3 {
                    values.push(lam[i] * (2.0 * lam[i] - 1.0));
                    let s = 4.0 * lam[i] - 1.0;
                    ref_grads.push([s * dlam[i][0], s * dlam[i][1]]);
                }
                for i in 0..3 {
                    let (a, b) = ((i + 1) % 3, (i + 2) % 3);
                    values.push(4.0 * lam[a] * lam[b]);
                    ref_grads.push([
                        4.0 * (dlam[a][0] * lam[b] + lam[a] * dlam[b][0]),
                        4.0 * (dlam[a][1] * lam[b] + lam[a] * dlam[b][1]),
                    ]);
                }
            }
        }
        ScalarTable {
            n_local,
            values,
            ref_grads,
        }
    }

    /// Value and physical gradient of the field with global coefficients `coeffs`.
    pub fn evaluate(&self, coeffs: &[f64], tri: usize, ref_pt: [f64; 2]) -> (f64, [f64; 2]) {
        let map = ElementMap::new(&self.mesh, tri);
        let table = self.tabulate(&[ref_pt]);
        let (mut v, mut g) = (0.0, [0.0; 2]);
        for (i, &d) in self.local_dofs[tri].iter().enumerate() {
            v += coeffs[d] * table.value(0, i);
            let gi = table.ref_grad(0, i);
            g[0] += coeffs[d] * gi[0];
            g[1] += coeffs[d] * gi[1];
        }
        (v, map.grad_to_physical(g))
    }
}
