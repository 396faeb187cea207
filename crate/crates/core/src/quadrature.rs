//! Quadrature on the reference triangle `{(x, y) : x, y >= 0, x + y <= 1}`.
//!
//! Degrees 1 through 5 use classical fully symmetric rules (centroid, three
//! interior points, Dunavant's 6-point rule, Radon's 7-point rule). Higher
//! degrees use a collapsed (Duffy) product of Gauss-Legendre rules. Every
//! rule exposed here has strictly positive weights.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    /// Reference coordinates `(x, y)`.
    pub points: Vec<[f64; 2]>,
    /// Weights summing to the reference area `1/2`.
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// Integrates `g` over the reference triangle.
    pub fn integrate(&self, g: impl Fn([f64; 2]) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * g(p)).sum()
    }
}

/// Smallest available rule integrating polynomials of total degree `d` exactly.
pub fn rule_for_degree(d: usize) -> Result<QuadRule> {
    match d {
        1 => Ok(QuadRule {
            points: vec![[1.0 / 3.0; 2]],
            weights: vec![0.5],
            exactness_degree: 1,
        }),
        2 => Ok(symmetric_rule(2, &[], &[(1.0 / 6.0, 1.0 / 3.0)])),
        3 | 4 => Ok(symmetric_rule(
            4,
            &[],
            &[
                (0.445_948_490_915_964_9, 0.223_381_589_678_011_5),
                (0.091_576_213_509_770_74, 0.109_951_743_655_321_9),
            ],
        )),
        5 => {
            let s15 = 15f64.sqrt();
            Ok(symmetric_rule(
                5,
                &[0.225],
                &[
                    ((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0),
                    ((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0),
                ],
            ))
        }
        6..=MAX_DEGREE => Ok(collapsed_rule(d)),
        _ => Err(Error::UnsupportedDegree {
            requested: d,
            max: MAX_DEGREE,
        }),
    }
}

/// Builds a rule from a centroid weight and orbits `(a, a, 1 - 2a)`.
/// Weights are given relative to unit area and rescaled to the reference area.
fn symmetric_rule(degree: usize, centroid: &[f64], orbits: &[(f64, f64)]) -> QuadRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for &w in centroid {
        points.push([1.0 / 3.0; 2]);
        weights.push(0.5 * w);
    }
    for &(a, w) in orbits {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a], [b, a], [a, b]] {
            points.push(p);
            weights.push(0.5 * w);
        }
    }
    QuadRule {
        points,
        weights,
        exactness_degree: degree,
    }
}

/// Duffy map `x = u (1 - v)`, `y = v` with Gauss-Legendre in both directions.
fn collapsed_rule(d: usize) -> QuadRule {
    let (xu, wu) = gauss_legendre_unit((d + 1).div_ceil(2));
    let (xv, wv) = gauss_legendre_unit((d + 2).div_ceil(2));
    let mut points = Vec::with_capacity(xu.len() * xv.len());
    let mut weights = Vec::with_capacity(xu.len() * xv.len());
    for (&v, &bv) in xv.iter().zip(&wv) {
        for (&u, &bu) in xu.iter().zip(&wu) {
            points.push([u * (1.0 - v), v]);
            weights.push(bu * bv * (1.0 - v));
        }
    }
    QuadRule {
        points,
        weights,
        exactness_degree: d,
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.into_iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.into_iter().map(|t| 0.5 * t).collect(),
    )
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shifted Legendre polynomial `L_k(2s - 1)` on `[0, 1]`.
pub(crate) fn shifted_legendre(k: usize, s: f64) -> f64 {
    let x = 2.0 * s - 1.0;
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}
