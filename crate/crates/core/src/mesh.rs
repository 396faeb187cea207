//! Structured triangulations of axis-aligned rectangles.
//!
//! Vertices are numbered row-major (x fastest). Edges carry a global
//! orientation from the lower to the higher vertex index and are sorted
//! lexicographically by that pair. Triangles are stored counterclockwise and
//! local edge `i` is the edge opposite local vertex `i`, traversed in the
//! counterclockwise sense; the sign stored alongside each local edge tells
//! whether that traversal agrees with the global orientation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        Self { x, y }
    }

    pub fn unit_square() -> Self {
        Self::new([0.0, 1.0], [0.0, 1.0])
    }

    pub fn width(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn height(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Direction of the diagonal splitting each rectangular cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Diagonal {
    /// Lower-left to upper-right.
    #[default]
    Right,
    /// Lower-right to upper-left.
    Left,
}

/// Reference to a global edge as seen from a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalEdge {
    pub edge: usize,
    /// `+1` if the counterclockwise traversal matches the global orientation.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[LocalEdge; 3]>,
    boundary_edges: Vec<bool>,
    boundary_vertices: Vec<bool>,
}

/// Builds an `nx` by `ny` lattice of cells on `rect`, each split into two triangles.
pub fn build_rect_mesh(rect: Rect, nx: usize, ny: usize, diagonal: Diagonal) -> Result<TriMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "cell counts must be positive (nx = {nx}, ny = {ny})"
        )));
    }
    let valid = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[1] > r[0];
    if !valid(rect.x) || !valid(rect.y) {
        return Err(Error::InvalidArgument(format!(
            "empty or non-finite rectangle {:?} x {:?}",
            rect.x, rect.y
        )));
    }

    let hx = rect.width() / nx as f64;
    let hy = rect.height() / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        // Pin the far side exactly to the rectangle bounds.
        let y = if j == ny { rect.y[1] } else { rect.y[0] + j as f64 * hy };
        for i in 0..=nx {
            let x = if i == nx { rect.x[1] } else { rect.x[0] + i as f64 * hx };
            vertices.push([x, y]);
        }
    }

    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            match diagonal {
                Diagonal::Right => {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
                Diagonal::Left => {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
            }
        }
    }

    Ok(TriMesh::from_triangles(vertices, triangles))
}

impl TriMesh {
    /// Builds edge connectivity for counterclockwise triangles.
    fn from_triangles(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Self {
        let mut edges: Vec<[usize; 2]> = triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| local_edge_vertices(t, i)))
            .map(|[p, q]| [p.min(q), p.max(q)])
            .collect();
        edges.sort_unstable();
        edges.dedup();

        let index: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();

        let mut adjacency = vec![0u8; edges.len()];
        let triangle_edges: Vec<[LocalEdge; 3]> = triangles
            .iter()
            .map(|t| {
                std::array::from_fn(|i| {
                    let [p, q] = local_edge_vertices(t, i);
                    let edge = index[&[p.min(q), p.max(q)]];
                    adjacency[edge] += 1;
                    LocalEdge {
                        edge,
                        sign: if p < q { 1 } else { -1 },
                    }
                })
            })
            .collect();

        let boundary_edges: Vec<bool> = adjacency.iter().map(|&n| n == 1).collect();
        let mut boundary_vertices = vec![false; vertices.len()];
        for (e, _) in edges.iter().zip(&boundary_edges).filter(|(_, &b)| b) {
            boundary_vertices[e[0]] = true;
            boundary_vertices[e[1]] = true;
        }

        Self {
            vertices,
            triangles,
            edges,
            triangle_edges,
            boundary_edges,
            boundary_vertices,
        }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[LocalEdge; 3]] {
        &self.triangle_edges
    }

    pub fn boundary_edge_flags(&self) -> &[bool] {
        &self.boundary_edges
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Corner coordinates of triangle `t` in counterclockwise order.
    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    /// Signed area of triangle `t` (positive for counterclockwise triangles).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_coords(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    /// Writes a plain-text dump with `vertices`, `triangles` and `edges` sections.
    pub fn write_dump<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.dump_string().as_bytes())
    }

    pub fn dump_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:.17e} {:.17e}", v[0], v[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "edges {}", self.edges.len());
        for (e, b) in self.edges.iter().zip(&self.boundary_edges) {
            let _ = writeln!(s, "{} {} {}", e[0], e[1], u8::from(*b));
        }
        s
    }
}

/// Vertex pair of local edge `i` (opposite local vertex `i`), counterclockwise.
pub(crate) fn local_edge_vertices(t: &[usize; 3], i: usize) -> [usize; 2] {
    [t[(i + 1) % 3], t[(i + 2) % 3]]
}
