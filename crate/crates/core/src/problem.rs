//! Problem data: the coefficient matrix and everything derived from it, the
//! right-hand side, the Friedrichs constant of the domain and, optionally, an
//! exact solution for measuring true errors.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::mesh::Rect;

pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// `B = (I + A^T A^-1)^-1`.
pub fn compute_b(a: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    compute_lambda_low(a)?;
    let a_inv = a
        .try_inverse()
        .ok_or_else(|| Error::InvalidCoefficient(format!("singular matrix {a:?}")))?;
    (Matrix2::identity() + a.transpose() * a_inv)
        .try_inverse()
        .ok_or_else(|| Error::InvalidCoefficient("I + A^T A^-1 is singular".into()))
}

/// Smallest eigenvalue of the symmetric part `(A + A^T) / 2`, the sharp
/// ellipticity constant `(A xi, xi) >= lambda |xi|^2`.
pub fn compute_lambda_low(a: &Matrix2<f64>) -> Result<f64> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidCoefficient(format!("non-finite entries in {a:?}")));
    }
    let (p, q, r) = (a[(0, 0)], 0.5 * (a[(0, 1)] + a[(1, 0)]), a[(1, 1)]);
    let lambda = 0.5 * (p + r) - (0.25 * (p - r) * (p - r) + q * q).sqrt();
    if lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(Error::InvalidCoefficient(format!(
            "symmetric part of {a:?} is not positive definite (lambda_min = {lambda})"
        )))
    }
}

/// Sharp Friedrichs constant of a rectangle, `1 / (pi sqrt(1/Lx^2 + 1/Ly^2))`.
pub fn friedrichs_constant(rect: &Rect) -> f64 {
    let (lx, ly) = (rect.width(), rect.height());
    1.0 / (PI * (1.0 / (lx * lx) + 1.0 / (ly * ly)).sqrt())
}

/// Ratio `(y, q) / (2 (A y, y)^1/2 (A^-1 B q, B q)^1/2)`, which never exceeds one.
/// Returns `0` when either vector vanishes.
pub fn csb_inequality_check(a: &Matrix2<f64>, y: [f64; 2], q: [f64; 2]) -> Result<f64> {
    let c = CellCoefficient::new(*a)?;
    let (y, q) = (Vector2::from(y), Vector2::from(q));
    let lhs = y.dot(&q);
    let bq = c.b * q;
    let rhs = 2.0 * (y.dot(&(c.a * y))).sqrt() * (bq.dot(&(c.a_inv * bq))).sqrt();
    if rhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// A constant coefficient matrix together with its derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCoefficient {
    pub a: Matrix2<f64>,
    pub a_inv: Matrix2<f64>,
    pub a_sym: Matrix2<f64>,
    pub b: Matrix2<f64>,
    /// `B^T A^-1 B`, so that `(A^-1 B p, B q) = q . (G p)`.
    pub dual_weight: Matrix2<f64>,
    pub lambda_min: f64,
}

impl CellCoefficient {
    pub fn new(a: Matrix2<f64>) -> Result<Self> {
        let lambda_min = compute_lambda_low(&a)?;
        let b = compute_b(&a)?;
        let a_inv = a.try_inverse().expect("checked by compute_b");
        Ok(Self {
            a,
            a_inv,
            a_sym: 0.5 * (a + a.transpose()),
            b,
            dual_weight: b.transpose() * a_inv * b,
            lambda_min,
        })
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]))
    }

    pub fn is_symmetric(&self) -> bool {
        self.a[(0, 1)] == self.a[(1, 0)]
    }
}

/// Piecewise-constant coefficient field with a possibly user-supplied
/// ellipticity constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientModel {
    cells: CoefficientCells,
    lambda_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum CoefficientCells {
    Constant(CellCoefficient),
    PerCell(Vec<CellCoefficient>),
}

impl CoefficientModel {
    pub fn constant(a: Matrix2<f64>) -> Result<Self> {
        Ok(Self {
            cells: CoefficientCells::Constant(CellCoefficient::new(a)?),
            lambda_override: None,
        })
    }

    /// One matrix per triangle, in mesh order.
    pub fn per_cell(matrices: &[Matrix2<f64>]) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidArgument("no cell coefficients given".into()));
        }
        let cells = matrices
            .iter()
            .map(|&a| CellCoefficient::new(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cells: CoefficientCells::PerCell(cells),
            lambda_override: None,
        })
    }

    /// Replaces the computed ellipticity constant, e.g. to reproduce a published value.
    /// The bound is only guaranteed if `lambda` does not exceed the true constant.
    pub fn with_lambda_override(mut self, lambda: Option<f64>) -> Result<Self> {
        if let Some(l) = lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidCoefficient(format!("lambda override must be positive, got {l}")));
            }
        }
        self.lambda_override = lambda;
        Ok(self)
    }

    pub fn lambda_override(&self) -> Option<f64> {
        self.lambda_override
    }

    pub fn at(&self, cell: usize) -> &CellCoefficient {
        match &self.cells {
            CoefficientCells::Constant(c) => c,
            CoefficientCells::PerCell(v) => &v[cell],
        }
    }

    /// Number of cells the model is defined on, `None` for a global constant.
    pub fn cell_count(&self) -> Option<usize> {
        match &self.cells {
            CoefficientCells::Constant(_) => None,
            CoefficientCells::PerCell(v) => Some(v.len()),
        }
    }

    /// Computed ellipticity constant (minimum over cells).
    pub fn lambda_computed(&self) -> f64 {
        match &self.cells {
            CoefficientCells::Constant(c) => c.lambda_min,
            CoefficientCells::PerCell(v) => v.iter().map(|c| c.lambda_min).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn lambda_low(&self) -> f64 {
        self.lambda_override.unwrap_or_else(|| self.lambda_computed())
    }

    /// Same model with every matrix replaced by its symmetric part.
    pub fn symmetrized(&self) -> Self {
        let cells = match &self.cells {
            CoefficientCells::Constant(c) => {
                CoefficientCells::Constant(CellCoefficient::new(c.a_sym).expect("symmetric part is SPD"))
            }
            CoefficientCells::PerCell(v) => CoefficientCells::PerCell(
                v.iter()
                    .map(|c| CellCoefficient::new(c.a_sym).expect("symmetric part is SPD"))
                    .collect(),
            ),
        };
        Self {
            cells,
            lambda_override: self.lambda_override,
        }
    }
}

#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub grad: VectorField,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactSolution { .. }")
    }
}

/// `-div(A grad u) = f` in `domain`, `u = 0` on its boundary.
#[derive(Clone)]
pub struct ProblemSpec {
    pub domain: Rect,
    pub coefficients: CoefficientModel,
    pub rhs: ScalarField,
    pub exact: Option<ExactSolution>,
    c_f: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("domain", &self.domain)
            .field("coefficients", &self.coefficients)
            .field("exact", &self.exact.is_some())
            .field("c_f", &self.c_f)
            .finish()
    }
}

impl ProblemSpec {
    /// The Friedrichs constant defaults to the sharp value for `domain`.
    pub fn new(domain: Rect, coefficients: CoefficientModel, rhs: ScalarField) -> Self {
        Self {
            domain,
            coefficients,
            rhs,
            exact: None,
            c_f: friedrichs_constant(&domain),
        }
    }

    pub fn with_exact(mut self, exact: ExactSolution) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn with_friedrichs_constant(mut self, c_f: Option<f64>) -> Result<Self> {
        match c_f {
            Some(c) if !(c > 0.0 && c.is_finite()) => {
                Err(Error::InvalidArgument(format!("Friedrichs constant must be positive, got {c}")))
            }
            Some(c) => {
                self.c_f = c;
                Ok(self)
            }
            None => Ok(self),
        }
    }

    pub fn friedrichs(&self) -> f64 {
        self.c_f
    }

    pub fn lambda_low(&self) -> f64 {
        self.coefficients.lambda_low()
    }

    /// The same problem with `A` replaced by its symmetric part.
    pub fn symmetrized(&self) -> Self {
        Self {
            coefficients: self.coefficients.symmetrized(),
            ..self.clone()
        }
    }
}

/// Manufactured problem on the unit square with
/// `u = sin(k1 pi x) sin(k2 pi y)` and constant `A = [[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineProblem {
    pub k1: u32,
    pub k2: u32,
    pub a: [[f64; 2]; 2],
}

impl SineProblem {
    pub fn new(k1: u32, k2: u32, a: [[f64; 2]; 2]) -> Result<Self> {
        if k1 == 0 || k2 == 0 {
            return Err(Error::InvalidArgument(format!("wave numbers must be >= 1 (k1 = {k1}, k2 = {k2})")));
        }
        Ok(Self { k1, k2, a })
    }

    pub fn u(&self, [x, y]: [f64; 2]) -> f64 {
        let (w1, w2) = self.omegas();
        (w1 * x).sin() * (w2 * y).sin()
    }

    pub fn grad_u(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        let (w1, w2) = self.omegas();
        [
            w1 * (w1 * x).cos() * (w2 * y).sin(),
            w2 * (w1 * x).sin() * (w2 * y).cos(),
        ]
    }

    /// `f = -div(A grad u)
    ///    = pi^2 [(a k1^2 + d k2^2) sin sin - (b + c) k1 k2 cos cos]`.
    pub fn rhs(&self, [x, y]: [f64; 2]) -> f64 {
        let (w1, w2) = self.omegas();
        let [[a, b], [c, d]] = self.a;
        (a * w1 * w1 + d * w2 * w2) * (w1 * x).sin() * (w2 * y).sin()
            - (b + c) * w1 * w2 * (w1 * x).cos() * (w2 * y).cos()
    }

    /// Present when `k1 != k2`: the shorthand `(a + d) k1^2` for the
    /// `sin sin` coefficient is then not `-div(A grad u)`.
    pub fn rhs_note(&self) -> Option<String> {
        (self.k1 != self.k2).then(|| {
            format!(
                "k1 = {} != k2 = {}: using f = -div(A grad u) with coefficient a k1^2 + d k2^2, not (a + d) k1^2",
                self.k1, self.k2
            )
        })
    }

    fn omegas(&self) -> (f64, f64) {
        (f64::from(self.k1) * PI, f64::from(self.k2) * PI)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let coefficients = CoefficientModel::constant(Matrix2::new(
            self.a[0][0],
            self.a[0][1],
            self.a[1][0],
            self.a[1][1],
        ))?;
        let (p1, p2, p3) = (*self, *self, *self);
        Ok(ProblemSpec::new(Rect::unit_square(), coefficients, Arc::new(move |x| p1.rhs(x))).with_exact(
            ExactSolution {
                u: Arc::new(move |x| p2.u(x)),
                grad: Arc::new(move |x| p3.grad_u(x)),
            },
        ))
    }
}

/// Manufactured problem of the convergence studies, `u = sin(k1 pi x) sin(k2 pi y)`.
pub fn sine_problem(k1: u32, k2: u32, a: [[f64; 2]; 2]) -> Result<ProblemSpec> {
    SineProblem::new(k1, k2, a)?.problem()
}
