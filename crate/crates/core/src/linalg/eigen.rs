//! Eigenvalues of small matrices through the characteristic polynomial.
//!
//! The coefficients come from the Faddeev–LeVerrier recurrence and the roots
//! from Aberth's simultaneous iteration. Exactly vanishing trailing
//! coefficients (nilpotent parts, strictly triangular inputs) are deflated as
//! exact zero roots before the iteration starts.

use num_complex::Complex64;

use super::{LinalgError, Matrix, Scalar};

/// Largest dimension accepted by [`eigenvalues`].
pub const MAX_EIGEN_DIM: usize = 8;

const MAX_ITER: usize = 500;
const RESIDUAL_TOL: f64 = 1e-12;

/// Multiset of eigenvalues of a square matrix of dimension ≤ [`MAX_EIGEN_DIM`].
pub fn eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.ensure_square()?;
    if n > MAX_EIGEN_DIM {
        return Err(LinalgError::TooLarge(n));
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![a[(0, 0)].to_complex()]),
        _ => {}
    }
    let coeffs = characteristic_polynomial(&a.to_complex());
    polynomial_roots(&coeffs)
}

pub fn spectral_radius<T: Scalar>(a: &Matrix<T>) -> Result<f64, LinalgError> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Coefficients `c[0..=n]` of `det(xI − A) = Σ c[k] x^k`, with `c[n] = 1`.
fn characteristic_polynomial(a: &Matrix<Complex64>) -> Vec<Complex64> {
    let n = a.rows();
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut m = Matrix::<Complex64>::zeros(n, n);
    for k in 1..=n {
        // M_k = A·M_{k-1} + c_{n-k+1} I
        m = a.matmul(&m);
        for i in 0..n {
            m[(i, i)] += c[n - k + 1];
        }
        let am = a.matmul(&m);
        c[n - k] = -am.trace() / k as f64;
    }
    c
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Backward-error style residual `|p(z)| / Σ |c_k| |z|^k`.
fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let (p, _) = horner(coeffs, z);
    let r = z.norm();
    let scale = coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    let zero = Complex64::new(0.0, 0.0);
    let leading_zeros = coeffs.iter().take_while(|c| **c == zero).count();
    let mut roots = vec![zero; leading_zeros];
    let reduced = &coeffs[leading_zeros..];
    let degree = reduced.len() - 1;
    if degree == 0 {
        return Ok(roots);
    }
    if degree == 1 {
        roots.push(-reduced[0] / reduced[1]);
        return Ok(roots);
    }

    let lead = reduced[degree];
    // Fujiwara-type bound to place the starting circle.
    let radius = (0..degree)
        .map(|k| (reduced[k] / lead).norm().powf(1.0 / (degree - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step = 0.0f64;
        for k in 0..degree {
            let (p, dp) = horner(reduced, z[k]);
            if p == zero {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d == zero {
                        zero
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(radius * 1e-3));
            }
        }
        if max_step <= 4.0 * f64::EPSILON {
            converged = true;
            break;
        }
    }

    let worst = z
        .iter()
        .map(|&r| relative_residual(reduced, r))
        .fold(0.0, f64::max);
    if !converged && worst > RESIDUAL_TOL {
        return Err(LinalgError::NoConvergence { residual: worst });
    }
    roots.extend(z);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted_by_re_im(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    #[test]
    fn diagonal_matrix() {
        let a = Matrix::from_diag(&[1.0, 2.0, 3.0]);
        let ev = sorted_by_re_im(eigenvalues(&a).unwrap());
        for (z, want) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let a = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        let ev = sorted_by_re_im(eigenvalues(&a).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn strictly_upper_is_all_zero() {
        let a = Matrix::from_rows(&[
            [0.0, 0.3, -1.2, 0.4],
            [0.0, 0.0, 2.0, 0.1],
            [0.0, 0.0, 0.0, 5.0],
            [0.0, 0.0, 0.0, 0.0],
        ]);
        let ev = eigenvalues(&a).unwrap();
        assert_eq!(ev.len(), 4);
        assert!(ev.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn radius_examples() {
        assert!((spectral_radius(&Matrix::from_diag(&[-3.0, 2.0])).unwrap() - 3.0).abs() < 1e-13);
        assert!(matches!(
            eigenvalues(&Matrix::<f64>::identity(9)),
            Err(LinalgError::TooLarge(9))
        ));
    }

    #[test]
    fn complex_upper_triangular() {
        let i = Complex64::new(0.0, 1.0);
        let a = Matrix::from_rows(&[
            [1.0 + i, Complex64::new(2.0, 0.0), 3.0 * i],
            [Complex64::new(0.0, 0.0), -2.0 * i, Complex64::new(1.0, 0.0)],
            [
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        ]);
        let mut ev = eigenvalues(&a).unwrap();
        for want in [1.0 + i, -2.0 * i, Complex64::new(0.5, 0.0)] {
            let k = ev
                .iter()
                .enumerate()
                .min_by(|x, y| {
                    (x.1 - want)
                        .norm()
                        .partial_cmp(&(y.1 - want).norm())
                        .unwrap()
                })
                .unwrap()
                .0;
            assert!((ev[k] - want).norm() < 1e-12);
            ev.remove(k);
        }
    }

    proptest! {
        #[test]
        fn real_spectrum_is_conjugate_closed(v in prop::collection::vec(-2.0f64..2.0, 25)) {
            let a = Matrix::from_vec(5, 5, v).unwrap();
            let ev = eigenvalues(&a).unwrap();
            for z in &ev {
                let best = ev.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(best <= 1e-10 * (1.0 + z.norm()));
            }
            let rho = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(rho <= a.inf_norm() * (1.0 + 1e-12));
            // trace and determinant consistency
            let sum: Complex64 = ev.iter().sum();
            prop_assert!((sum.re - a.trace()).abs() <= 1e-9 * (1.0 + a.inf_norm()));
            prop_assert!(sum.im.abs() <= 1e-9 * (1.0 + a.inf_norm()));
        }
    }
}
