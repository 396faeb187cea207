//! Raviart-Thomas spaces `RT_r`, `r = 0, 1, 2`, on triangles.
//!
//! The reference space is `P_r^2 + x P~_r` (dimension `(r+1)(r+3)`), spanned
//! by `(m, 0)`, `(0, m)` for monomials `m` of degree `<= r` and `(x m, y m)`
//! for homogeneous monomials of degree `r`. Its degrees of freedom are
//!
//! * edge moments `int_e (v . n) L_k(s) ds`, `k = 0..=r`, with `L_k` the
//!   shifted Legendre polynomials in the edge parameter `s in [0, 1]`,
//! * interior moments `int_T v_c q dx` for `c in {x, y}` and monomials `q`
//!   of degree `<= r - 1` (in reference coordinates).
//!
//! Globally the edge parameter and the normal follow the mesh's edge
//! orientation. Reversing an edge flips the normal and maps `L_k(s)` to
//! `(-1)^k L_k(s)`, so the local function for edge moment `k` enters with the
//! factor `sign^(k + 1)`. Fields are mapped with the contravariant Piola
//! transform.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::ElementMap;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::quadrature::{gauss_legendre_unit, rule_for_degree, shifted_legendre};

/// Reference edges `(start, end)` in counterclockwise order, edge `i`
/// opposite vertex `i`.
const REF_EDGES: [[[f64; 2]; 2]; 3] = [
    [[1.0, 0.0], [0.0, 1.0]],
    [[0.0, 1.0], [0.0, 0.0]],
    [[0.0, 0.0], [1.0, 0.0]],
];

/// Points per edge when computing DOFs of general fields.
const EDGE_POINTS: usize = 8;

#[derive(Debug, Clone, Copy)]
enum Prime {
    /// `(x^a y^b, 0)`
    X(i32, i32),
    /// `(0, x^a y^b)`
    Y(i32, i32),
    /// `(x^{a+1} y^b, x^a y^{b+1})`
    Radial(i32, i32),
}

impl Prime {
    fn value(self, [x, y]: [f64; 2]) -> [f64; 2] {
        let m = |a: i32, b: i32| x.powi(a) * y.powi(b);
        match self {
            Prime::X(a, b) => [m(a, b), 0.0],
            Prime::Y(a, b) => [0.0, m(a, b)],
            Prime::Radial(a, b) => [m(a + 1, b), m(a, b + 1)],
        }
    }

    fn div(self, [x, y]: [f64; 2]) -> f64 {
        let m = |a: i32, b: i32| {
            if a < 0 || b < 0 {
                0.0
            } else {
                x.powi(a) * y.powi(b)
            }
        };
        match self {
            Prime::X(a, b) => f64::from(a) * m(a - 1, b),
            Prime::Y(a, b) => f64::from(b) * m(a, b - 1),
            Prime::Radial(a, b) => f64::from(a + b + 2) * m(a, b),
        }
    }
}

fn monomials(max_degree: i32) -> impl Iterator<Item = (i32, i32)> {
    (0..=max_degree).flat_map(|d| (0..=d).map(move |b| (d - b, b)))
}

fn prime_basis(r: usize) -> Vec<Prime> {
    let r = r as i32;
    let mut p: Vec<Prime> = monomials(r).map(|(a, b)| Prime::X(a, b)).collect();
    p.extend(monomials(r).map(|(a, b)| Prime::Y(a, b)));
    p.extend((0..=r).map(|b| Prime::Radial(r - b, b)));
    p
}

/// Applies every reference DOF functional to `v` (given as value closure).
fn reference_dofs(r: usize, v: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let (sq, sw) = gauss_legendre_unit(EDGE_POINTS);
    let mut out = Vec::with_capacity((r + 1) * (r + 3));
    for [a, b] in REF_EDGES {
        let t = [b[0] - a[0], b[1] - a[1]];
        // |t| * outward unit normal
        let nt = [t[1], -t[0]];
        for k in 0..=r {
            let mut acc = 0.0;
            for (&s, &w) in sq.iter().zip(&sw) {
                let val = v([a[0] + s * t[0], a[1] + s * t[1]]);
                acc += w * (val[0] * nt[0] + val[1] * nt[1]) * shifted_legendre(k, s);
            }
            out.push(acc);
        }
    }
    if r > 0 {
        let rule = rule_for_degree(2 * r + 1).expect("supported degree");
        for c in 0..2 {
            for (a, b) in monomials(r as i32 - 1) {
                out.push(rule.integrate(|p| v(p)[c] * p[0].powi(a) * p[1].powi(b)));
            }
        }
    }
    out
}

fn vandermonde(r: usize) -> DMatrix<f64> {
    let prime = prime_basis(r);
    let n = prime.len();
    let mut v = DMatrix::zeros(n, n);
    for (j, p) in prime.iter().enumerate() {
        for (i, d) in reference_dofs(r, |x| p.value(x)).into_iter().enumerate() {
            v[(i, j)] = d;
        }
    }
    v
}

/// Determinant of the reference DOF/prime-basis matrix; nonzero iff the DOFs are unisolvent.
pub fn reference_vandermonde_det(r: usize) -> f64 {
    vandermonde(r).determinant()
}

/// Raviart-Thomas space over a mesh.
///
/// Global numbering: `edge * (r + 1) + k` for edge moments, then
/// `num_edges * (r + 1) + tri * r * (r + 1) + j` for interior moments.
#[derive(Debug, Clone)]
pub struct FluxSpace {
    mesh: Arc<TriMesh>,
    order: usize,
    dof_count: usize,
    prime: Vec<Prime>,
    /// Column `i` holds the prime-basis coefficients of local function `i`.
    coeffs: DMatrix<f64>,
}

/// Reference values and reference divergences at a point set, entry
/// `[p * n_local + i]`. Signs and the Piola map are applied per triangle.
#[derive(Debug, Clone)]
pub struct FluxTable {
    pub n_local: usize,
    pub values: Vec<[f64; 2]>,
    pub divs: Vec<f64>,
}

impl FluxSpace {
    pub fn new(mesh: Arc<TriMesh>, order: usize) -> Result<Self> {
        if order > 2 {
            return Err(Error::InvalidArgument(format!(
                "Raviart-Thomas order must be 0, 1 or 2, got {order}"
            )));
        }
        let coeffs = vandermonde(order)
            .try_inverse()
            .ok_or_else(|| Error::Assembly("singular Raviart-Thomas DOF matrix".into()))?;
        let dof_count = mesh.num_edges() * (order + 1) + mesh.num_triangles() * order * (order + 1);
        Ok(Self {
            mesh,
            order,
            dof_count,
            prime: prime_basis(order),
            coeffs,
        })
    }

    /// Builds the space from the 1-based flux order label used in result tables
    /// (`1 -> RT_0`, `2 -> RT_1`, `3 -> RT_2`).
    pub fn from_label(mesh: Arc<TriMesh>, p2: usize) -> Result<Self> {
        if !(1..=3).contains(&p2) {
            return Err(Error::InvalidArgument(format!("flux order label must be 1..=3, got {p2}")));
        }
        Self::new(mesh, p2 - 1)
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
        (self.order + 1) * (self.order + 3)
    }

    fn n_interior(&self) -> usize {
        self.order * (self.order + 1)
    }

    /// Global DOF index and sign of each local function on triangle `t`.
    pub fn local_dofs(&self, t: usize) -> Vec<(usize, f64)> {
        let r = self.order;
        let mut out = Vec::with_capacity(self.n_local());
        for le in &self.mesh.triangle_edges()[t] {
            let s = f64::from(le.sign);
            for k in 0..=r {
                let sign = if k % 2 == 0 { s } else { 1.0 };
                out.push((le.edge * (r + 1) + k, sign));
            }
        }
        let base = self.mesh.num_edges() * (r + 1) + t * self.n_interior();
        out.extend((0..self.n_interior()).map(|j| (base + j, 1.0)));
        out
    }

    /// Reference-element values and divergences of the local basis (no sign, no Piola).
    pub fn tabulate(&self, ref_pts: &[[f64; 2]]) -> FluxTable {
        let n = self.n_local();
        let mut values = Vec::with_capacity(ref_pts.len() * n);
        let mut divs = Vec::with_capacity(ref_pts.len() * n);
        for &x in ref_pts {
            let pv: Vec<[f64; 2]> = self.prime.iter().map(|p| p.value(x)).collect();
            let pd: Vec<f64> = self.prime.iter().map(|p| p.div(x)).collect();
            for i in 0..n {
                let (mut v, mut d) = ([0.0; 2], 0.0);
                for j in 0..n {
                    let c = self.coeffs[(j, i)];
                    v[0] += c * pv[j][0];
                    v[1] += c * pv[j][1];
                    d += c * pd[j];
                }
                values.push(v);
                divs.push(d);
            }
        }
        FluxTable { n_local: n, values, divs }
    }

    /// Physical values and divergences of the global basis functions supported
    /// on `tri`, in local order (see [`local_dofs`](Self::local_dofs)).
    pub fn eval_basis(&self, tri: usize, ref_pts: &[[f64; 2]]) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
        if tri >= self.mesh.num_triangles() {
            return Err(Error::InvalidArgument(format!("triangle index {tri} out of range")));
        }
        let table = self.tabulate(ref_pts);
        let map = ElementMap::new(&self.mesh, tri);
        let dofs = self.local_dofs(tri);
        let n = self.n_local();
        let mut values = Vec::with_capacity(table.values.len());
        let mut divs = Vec::with_capacity(table.divs.len());
        for p in 0..ref_pts.len() {
            for (i, &(_, s)) in dofs.iter().enumerate() {
                let v = map.piola(table.values[p * n + i]);
                values.push([s * v[0], s * v[1]]);
                divs.push(s * table.divs[p * n + i] / map.det);
            }
        }
        Ok((values, divs))
    }

    /// Value and divergence of the field with global coefficients `coeffs`.
    pub fn evaluate(&self, coeffs: &[f64], tri: usize, ref_pt: [f64; 2]) -> ([f64; 2], f64) {
        let (vals, divs) = self.eval_basis(tri, &[ref_pt]).expect("triangle index in range");
        let mut v = [0.0; 2];
        let mut d = 0.0;
        for (i, (g, _)) in self.local_dofs(tri).into_iter().enumerate() {
            v[0] += coeffs[g] * vals[i][0];
            v[1] += coeffs[g] * vals[i][1];
            d += coeffs[g] * divs[i];
        }
        (v, d)
    }

    /// Canonical interpolant: the field whose DOFs agree with those of `field`.
    /// Shared edge moments are computed from each neighbour; they agree up to rounding.
    pub fn interpolate(&self, field: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut c = vec![0.0; self.dof_count];
        for t in 0..self.mesh.num_triangles() {
            let map = ElementMap::new(&self.mesh, t);
            let local = reference_dofs(self.order, |xhat| {
                map.piola_inverse(field(map.to_physical(xhat)))
            });
            for ((g, s), val) in self.local_dofs(t).into_iter().zip(local) {
                c[g] = s * val;
            }
        }
        c
    }
}
