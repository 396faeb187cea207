//! Finite element spaces on a [`TriMesh`]: continuous Lagrange (Courant)
//! elements for the primal solution and Raviart-Thomas elements for fluxes.

mod lagrange;
mod raviart_thomas;

pub use lagrange::{ScalarSpace, ScalarTable};
pub use raviart_thomas::{reference_vandermonde_det, FluxSpace, FluxTable};

use nalgebra::{Matrix2, Vector2};

use crate::mesh::TriMesh;

/// Affine map from the reference triangle onto a mesh triangle,
/// `x = origin + jac * xhat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMap {
    pub origin: Vector2<f64>,
    pub jac: Matrix2<f64>,
    pub det: f64,
    pub inv: Matrix2<f64>,
}

impl ElementMap {
    pub fn new(mesh: &TriMesh, t: usize) -> Self {
        let [p0, p1, p2] = mesh.triangle_coords(t);
        let origin = Vector2::new(p0[0], p0[1]);
        let jac = Matrix2::new(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1]);
        let det = jac.determinant();
        let inv = Matrix2::new(jac[(1, 1)], -jac[(0, 1)], -jac[(1, 0)], jac[(0, 0)]) / det;
        Self { origin, jac, det, inv }
    }

    pub fn to_physical(&self, xhat: [f64; 2]) -> [f64; 2] {
        let x = self.origin + self.jac * Vector2::new(xhat[0], xhat[1]);
        [x[0], x[1]]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let r = self.inv * (Vector2::new(x[0], x[1]) - self.origin);
        [r[0], r[1]]
    }

    /// Maps a reference gradient to the physical one (`J^-T grad_hat`).
    pub fn grad_to_physical(&self, g: [f64; 2]) -> [f64; 2] {
        let v = self.inv.transpose() * Vector2::new(g[0], g[1]);
        [v[0], v[1]]
    }

    /// Contravariant Piola transform `J v / det J`.
    pub fn piola(&self, v: [f64; 2]) -> [f64; 2] {
        let w = self.jac * Vector2::new(v[0], v[1]) / self.det;
        [w[0], w[1]]
    }

    /// Inverse Piola transform `det J * J^-1 v`.
    pub fn piola_inverse(&self, v: [f64; 2]) -> [f64; 2] {
        let w = self.inv * Vector2::new(v[0], v[1]) * self.det;
        [w[0], w[1]]
    }
}
