use crate::linalg::{lu_factor, Matrix};

use super::{IvpProblem, SolverError};

/// One step of the implicit Runge–Kutta method `(a, b)` solved by full
/// Newton iteration on the stage values, with the Jacobian re-evaluated at
/// every iterate. Independent of the stage transformations used by
/// [`RadauMethod`](super::RadauMethod), for cross-checking.
pub fn reference_rk_step(
    a: &Matrix,
    b: &[f64],
    problem: &IvpProblem,
    y0: &[f64],
    h: f64,
    tol: f64,
) -> Result<Vec<f64>, SolverError> {
    let s = b.len();
    let m = y0.len();
    if a.rows() != s || a.cols() != s {
        return Err(SolverError::DimensionMismatch {
            expected: s,
            got: a.rows(),
        });
    }
    let n = s * m;
    let mut stages: Vec<f64> = (0..s).flat_map(|_| y0.iter().copied()).collect();
    let mut f = vec![0.0; n];

    for _ in 0..100 {
        for i in 0..s {
            problem.rhs(&stages[i * m..(i + 1) * m], &mut f[i * m..(i + 1) * m]);
        }
        let jacs: Vec<Matrix> = (0..s)
            .map(|j| problem.jacobian(&stages[j * m..(j + 1) * m]))
            .collect();
        let mut g = vec![0.0; n];
        for i in 0..s {
            for k in 0..m {
                let coupled: f64 = (0..s).map(|j| a[(i, j)] * f[j * m + k]).sum();
                g[i * m + k] = -(stages[i * m + k] - y0[k] - h * coupled);
            }
        }
        let kmat = Matrix::from_fn(n, n, |row, col| {
            let (i, p) = (row / m, row % m);
            let (j, q) = (col / m, col % m);
            let ident = if row == col { 1.0 } else { 0.0 };
            ident - h * a[(i, j)] * jacs[j][(p, q)]
        });
        let delta = lu_factor(&kmat)?.solve(&g);
        let mut size = 0.0f64;
        let mut scale = 0.0f64;
        for (y, d) in stages.iter_mut().zip(&delta) {
            *y += d;
            size = size.max(d.abs());
            scale = scale.max(y.abs());
        }
        if stages.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        if size <= tol * (1.0 + scale) {
            for i in 0..s {
                problem.rhs(&stages[i * m..(i + 1) * m], &mut f[i * m..(i + 1) * m]);
            }
            return Ok((0..m)
                .map(|k| y0[k] + h * (0..s).map(|j| b[j] * f[j * m + k]).sum::<f64>())
                .collect());
        }
    }
    Err(SolverError::NewtonDiverged { t: problem.t0, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicit_euler_on_linear_problem() {
        let p = IvpProblem::new(
            "lin",
            0.0,
            1.0,
            vec![1.0],
            |y, dy| dy[0] = -4.0 * y[0],
            |_| Matrix::from_rows(&[[-4.0]]),
        );
        let a = Matrix::from_rows(&[[1.0]]);
        let y = reference_rk_step(&a, &[1.0], &p, &[1.0], 0.5, 1e-15).unwrap();
        assert!((y[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn implicit_midpoint_on_quadratic_problem() {
        // y' = −y²: the midpoint stage solves k = y0 − (h/2)k²
        let p = IvpProblem::new(
            "quad",
            0.0,
            1.0,
            vec![1.0],
            |y, dy| dy[0] = -y[0] * y[0],
            |y| Matrix::from_rows(&[[-2.0 * y[0]]]),
        );
        let a = Matrix::from_rows(&[[0.5]]);
        let h = 0.4;
        let y = reference_rk_step(&a, &[1.0], &p, &[1.0], h, 1e-15).unwrap();
        let k = (-1.0 + (1.0f64 + 2.0 * h).sqrt()) / h;
        assert!((y[0] - (1.0 - h * k * k)).abs() < 1e-14);
    }
}
