//! Radau IIA collocation data built through the W-transform.
//!
//! With `P` the matrix of orthonormal shifted Legendre polynomials evaluated
//! at the nodes, the Runge–Kutta matrix is `A = P·X_s·P⁻¹`, where `X_s` is
//! tridiagonal except for the bottom-right entry `β_s = 1/(4s−2)`.

use thiserror::Error;

use crate::linalg::{lu_factor, LinalgError, Matrix};
use crate::splitting::SplitData;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableauError {
    #[error("stage count must be at least 2, got {0}")]
    InvalidStages(usize),
    #[error("Radau node iteration did not converge for s = {0}")]
    NoConvergence(usize),
    #[error("stage count mismatch: tableau has {tableau}, splitting has {split}")]
    DimensionMismatch { tableau: usize, split: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Orthonormal shifted Legendre polynomial `P_j` on `[0, 1]`.
///
/// Uses the Bonnet recurrence on `t = 2x − 1` and rescales by `√(2j+1)`.
pub fn legendre_eval(j: usize, x: f64) -> f64 {
    let (p, _) = legendre_with_derivative(j, 2.0 * x - 1.0);
    (2.0 * j as f64 + 1.0).sqrt() * p
}

/// Classical Legendre `L_n(t)` and `L_n'(t)` on `[-1, 1]`.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for k in 0..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        // L'_{k+1} = L'_{k-1} + (2k+1) L_k
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Right Radau points on `[0, 1]`; the last node is exactly 1.
///
/// Interior nodes are the roots of `L_s − L_{s−1}` other than `t = 1`,
/// found by Newton's method with deflation against the roots already known.
pub fn radau_nodes(s: usize) -> Result<Vec<f64>, TableauError> {
    if s < 2 {
        return Err(TableauError::InvalidStages(s));
    }
    let poly = |t: f64| {
        let (a, da) = legendre_with_derivative(s, t);
        let (b, db) = legendre_with_derivative(s - 1, t);
        (a - b, da - db)
    };
    let mut found = vec![1.0];
    for j in 1..s {
        let mut t = (2.0 * std::f64::consts::PI * j as f64 / (2 * s - 1) as f64).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = poly(t);
            let deflate: f64 = found.iter().map(|r| 1.0 / (t - r)).sum();
            let step = p / (dp - p * deflate);
            let mut next = t - step;
            if !(-1.0..1.0).contains(&next) || !next.is_finite() {
                next = 0.5 * (t + next.clamp(-1.0, 1.0));
            }
            let done = (next - t).abs() <= 1e-15 * (1.0 + t.abs());
            t = next;
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(TableauError::NoConvergence(s));
        }
        found.push(t);
    }
    let mut nodes: Vec<f64> = found[1..].iter().map(|t| 0.5 * (t + 1.0)).collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.push(1.0);
    Ok(nodes)
}

/// `ξ_i = 1 / (2√(4i² − 1))`.
pub fn xi(i: usize) -> f64 {
    let i = i as f64;
    1.0 / (2.0 * (4.0 * i * i - 1.0).sqrt())
}

/// `β_s = 1 / (4s − 2)`.
pub fn beta(s: usize) -> f64 {
    1.0 / (4.0 * s as f64 - 2.0)
}

/// The W-transformed coefficient matrix `X_s`.
pub fn x_matrix(s: usize) -> Matrix {
    let mut x = Matrix::zeros(s, s);
    x[(0, 0)] = 0.5;
    for i in 1..s {
        x[(i, i - 1)] = xi(i);
        x[(i - 1, i)] = -xi(i);
    }
    x[(s - 1, s - 1)] += beta(s);
    x
}

/// `P[i][j] = P_j(nodes[i])`.
pub fn legendre_matrix(nodes: &[f64]) -> Matrix {
    let s = nodes.len();
    Matrix::from_fn(s, s, |i, j| legendre_eval(j, nodes[i]))
}

/// An `s`-stage Radau IIA method together with its W-transform factors.
#[derive(Clone, Debug)]
pub struct CollocationTableau {
    pub s: usize,
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub a: Matrix,
    pub p: Matrix,
    pub x: Matrix,
}

pub fn build_collocation(s: usize) -> Result<CollocationTableau, TableauError> {
    let c = radau_nodes(s)?;
    let p = legendre_matrix(&c);
    let x = x_matrix(s);
    let p_inv = lu_factor(&p)?.inverse();
    let a = p.matmul(&x).matmul(&p_inv);

    // Interpolatory weights from the moment system Σ_i b_i c_i^k = 1/(k+1).
    let vandermonde = Matrix::from_fn(s, s, |k, i| c[i].powi(k as i32));
    let moments: Vec<f64> = (0..s).map(|k| 1.0 / (k as f64 + 1.0)).collect();
    let b = lu_factor(&vandermonde)?.solve(&moments);

    Ok(CollocationTableau { s, c, b, a, p, x })
}

/// The equivalent `2s`-stage tableau whose first `s` stages are the
/// auxiliary stages and carry zero weight.
#[derive(Clone, Debug)]
pub struct AugmentedTableau {
    pub stages: usize,
    pub c: Vec<f64>,
    pub a: Matrix,
    pub b: Vec<f64>,
}

pub fn augmented_tableau(
    tab: &CollocationTableau,
    split: &SplitData,
) -> Result<AugmentedTableau, TableauError> {
    let s = tab.s;
    if split.s != s {
        return Err(TableauError::DimensionMismatch {
            tableau: s,
            split: split.s,
        });
    }
    let p_inv = lu_factor(&tab.p)?.inverse();
    let upper = split.p_hat.matmul(&tab.x).matmul(&p_inv);
    let mut a = Matrix::zeros(2 * s, 2 * s);
    for i in 0..s {
        for j in 0..s {
            a[(i, s + j)] = upper[(i, j)];
            a[(s + i, s + j)] = tab.a[(i, j)];
        }
    }
    let c = split.c_hat.iter().chain(&tab.c).copied().collect();
    let b = std::iter::repeat_n(0.0, s)
        .chain(tab.b.iter().copied())
        .collect();
    Ok(AugmentedTableau {
        stages: 2 * s,
        c,
        a,
        b,
    })
}
