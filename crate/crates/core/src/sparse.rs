//! Compressed sparse row matrices and the Krylov solvers used for the
//! primal problem and the flux minimisation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate triplets. Duplicates are added in ascending order of value so the
    /// result does not depend on the order of `triplets`.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= nrows || j >= ncols) {
            return Err(Error::Assembly(format!(
                "triplet ({i}, {j}) outside a {nrows}x{ncols} matrix"
            )));
        }
        let mut sorted = triplets.to_vec();
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<(usize, usize, f64)> = (0..self.nrows)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(move |(&j, &v)| (j, i, v))
            })
            .collect();
        Self::from_triplets(self.ncols, self.nrows, &triplets).expect("indices in range")
    }

    /// `max |A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Symmetric up to `tol` relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `alpha * A + beta * B` for matrices of equal shape.
    pub fn linear_combination(alpha: f64, a: &Self, beta: f64, b: &Self) -> Result<Self> {
        if (a.nrows, a.ncols) != (b.nrows, b.ncols) {
            return Err(Error::Incompatible(format!(
                "cannot add {}x{} and {}x{} matrices",
                a.nrows, a.ncols, b.nrows, b.ncols
            )));
        }
        let mut row_ptr = Vec::with_capacity(a.nrows + 1);
        let mut col_idx = Vec::with_capacity(a.nnz().max(b.nnz()));
        let mut values = Vec::with_capacity(a.nnz().max(b.nnz()));
        row_ptr.push(0);
        for i in 0..a.nrows {
            let (ca, va) = a.row(i);
            let (cb, vb) = b.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                let (j, v) = match ja.cmp(&jb) {
                    std::cmp::Ordering::Less => {
                        p += 1;
                        (ja, alpha * va[p - 1])
                    }
                    std::cmp::Ordering::Greater => {
                        q += 1;
                        (jb, beta * vb[q - 1])
                    }
                    std::cmp::Ordering::Equal => {
                        p += 1;
                        q += 1;
                        (ja, alpha * va[p - 1] + beta * vb[q - 1])
                    }
                };
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows: a.nrows,
            ncols: a.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual `|b - A x| / |b|`.
    pub tol: f64,
    /// Defaults to `10 n`.
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn max_iter(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

fn check_square(m: &CsrMatrix, rhs: &[f64]) -> Result<()> {
    if m.nrows != m.ncols || rhs.len() != m.nrows {
        return Err(Error::Incompatible(format!(
            "system {}x{} with right-hand side of length {}",
            m.nrows,
            m.ncols,
            rhs.len()
        )));
    }
    Ok(())
}

fn jacobi(m: &CsrMatrix) -> Result<Vec<f64>> {
    m.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::InvalidArgument(format!(
                    "diagonal entry {i} is {d}; Jacobi preconditioning needs a positive diagonal"
                )))
            }
        })
        .collect()
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite systems.
pub fn cg_solve(m: &CsrMatrix, rhs: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
    cg_solve_from(m, rhs, None, opts).map(|(x, _)| x)
}

/// As [`cg_solve`], optionally starting from `x0`.
pub fn cg_solve_from(
    m: &CsrMatrix,
    rhs: &[f64],
    x0: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveStats)> {
    check_square(m, rhs)?;
    if !m.is_symmetric(1e-10) {
        return Err(Error::InvalidArgument(format!(
            "conjugate gradients needs a symmetric matrix (max asymmetry {:.3e})",
            m.max_asymmetry()
        )));
    }
    let n = m.nrows;
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, residual: 0.0 }));
    }
    let dinv = jacobi(m)?;
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r: Vec<f64> = rhs.iter().zip(m.mul_vec(&x)).map(|(b, ax)| b - ax).collect();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = norm(&r) / bnorm;
    let maxit = opts.max_iter(n);
    let mut it = 0;
    while res > opts.tol {
        if it == maxit {
            return Err(Error::SolverFailure {
                method: "conjugate gradients",
                iterations: it,
                residual: res,
            });
        }
        m.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure {
                method: "conjugate gradients (matrix not positive definite)",
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = norm(&r) / bnorm;
        it += 1;
    }
    Ok((x, SolveStats { iterations: it, residual: res }))
}

/// Jacobi-preconditioned BiCGSTAB for general nonsingular systems.
pub fn nonsym_solve(k: &CsrMatrix, rhs: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
    nonsym_solve_with_stats(k, rhs, opts).map(|(x, _)| x)
}

pub fn nonsym_solve_with_stats(k: &CsrMatrix, rhs: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    const METHOD: &str = "BiCGSTAB";
    check_square(k, rhs)?;
    let n = k.nrows;
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, residual: 0.0 }));
    }
    let dinv: Vec<f64> = k
        .diagonal()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let maxit = opts.max_iter(n);
    let mut res = 1.0;
    let fail = |iterations, residual| Error::SolverFailure {
        method: METHOD,
        iterations,
        residual,
    };

    for it in 1..=maxit {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(fail(it, res));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            p_hat[i] = dinv[i] * p[i];
        }
        k.mul_vec_into(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            return Err(fail(it, res));
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        res = norm(&s) / bnorm;
        if res <= opts.tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            return Ok((x, SolveStats { iterations: it, residual: res }));
        }
        for i in 0..n {
            s_hat[i] = dinv[i] * s[i];
        }
        k.mul_vec_into(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(fail(it, res));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm(&r) / bnorm;
        if res <= opts.tol {
            return Ok((x, SolveStats { iterations: it, residual: res }));
        }
        if omega == 0.0 {
            return Err(fail(it, res));
        }
    }
    Err(fail(maxit, res))
}
