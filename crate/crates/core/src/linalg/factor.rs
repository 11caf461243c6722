use super::{LinalgError, Matrix, Scalar};

/// Relative pivot magnitude (against `max |A|`) below which a factorization
/// reports singularity.
pub const SINGULARITY_THRESHOLD: f64 = 1e-14;

/// LU factorization with partial pivoting, `P·A = L·U`, stored compactly.
///
/// `L` is unit lower triangular and lives strictly below the diagonal of
/// `lu`; `U` occupies the diagonal and above. `perm[i]` is the row of `A`
/// that ended up in row `i`.
#[derive(Clone, Debug)]
pub struct LuFactors<T: Scalar = f64> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

pub fn lu_factor<T: Scalar>(a: &Matrix<T>) -> Result<LuFactors<T>, LinalgError> {
    let n = a.ensure_square()?;
    let tiny = SINGULARITY_THRESHOLD * a.max_abs();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].modulus()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pmax <= tiny || pmax == 0.0 {
            return Err(LinalgError::SingularMatrix {
                column: k,
                pivot: pmax,
            });
        }
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            if factor == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                lu[(i, j)] -= factor * ukj;
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl<T: Scalar> LuFactors<T> {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Unit lower triangular factor.
    pub fn l(&self) -> Matrix<T> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu[(i, j)],
            std::cmp::Ordering::Equal => T::one(),
            std::cmp::Ordering::Less => T::zero(),
        })
    }

    pub fn u(&self) -> Matrix<T> {
        let n = self.dim();
        Matrix::from_fn(
            n,
            n,
            |i, j| if j >= i { self.lu[(i, j)] } else { T::zero() },
        )
    }

    /// Solves `A·x = b`, overwriting `b` with `x`.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for (j, xj) in x.iter().enumerate().take(i) {
                acc -= self.lu[(i, j)] * *xj;
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                acc -= self.lu[(i, j)] * *xj;
            }
            x[i] = acc / self.lu[(i, i)];
        }
        b.copy_from_slice(&x);
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            self.solve_in_place(&mut e);
            for i in 0..n {
                inv[(i, j)] = e[i];
            }
        }
        inv
    }
}

/// Crout factorization `A = L·U`: `L` lower triangular, `U` unit upper
/// triangular. No pivoting.
#[derive(Clone, Debug, PartialEq)]
pub struct CroutFactors<T: Scalar = f64> {
    pub l: Matrix<T>,
    pub u: Matrix<T>,
}

impl<T: Scalar> CroutFactors<T> {
    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn pivots(&self) -> Vec<T> {
        self.l.diag()
    }

    /// `U − I`, strictly upper triangular.
    pub fn u_minus_identity(&self) -> Matrix<T> {
        let mut c = self.u.clone();
        for i in 0..self.dim() {
            c[(i, i)] = T::zero();
        }
        c
    }

    pub fn product(&self) -> Matrix<T> {
        self.l.matmul(&self.u)
    }
}

pub fn crout_factor<T: Scalar>(a: &Matrix<T>) -> Result<CroutFactors<T>, LinalgError> {
    let n = a.ensure_square()?;
    let tiny = SINGULARITY_THRESHOLD * a.max_abs();
    let mut l = Matrix::zeros(n, n);
    let mut u = Matrix::identity(n);
    for j in 0..n {
        for i in j..n {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * u[(k, j)];
            }
            l[(i, j)] = acc;
        }
        let pivot = l[(j, j)];
        if pivot.modulus() <= tiny || pivot == T::zero() {
            return Err(LinalgError::ZeroPivot {
                column: j,
                pivot: pivot.modulus(),
            });
        }
        for k in j + 1..n {
            let mut acc = a[(j, k)];
            for p in 0..j {
                acc -= l[(j, p)] * u[(p, k)];
            }
            u[(j, k)] = acc / pivot;
        }
    }
    Ok(CroutFactors { l, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_residual(a: &Matrix, f: &LuFactors) -> f64 {
        let n = a.rows();
        let pa = Matrix::from_fn(n, n, |i, j| a[(f.permutation()[i], j)]);
        pa.sub(&f.l().matmul(&f.u())).inf_norm() / a.inf_norm()
    }

    #[test]
    fn lu_identity_is_trivial() {
        let f = lu_factor(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(f.l(), Matrix::identity(3));
        assert_eq!(f.u(), Matrix::identity(3));
        assert_eq!(f.permutation(), &[0, 1, 2]);
    }

    #[test]
    fn lu_swaps_rows_of_antidiagonal() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.permutation(), &[1, 0]);
        assert_eq!(f.l(), Matrix::identity(2));
        assert_eq!(f.u(), Matrix::identity(2));
        assert_eq!(f.solve(&[2.0, 3.0]), vec![3.0, 2.0]);
    }

    #[test]
    fn lu_flags_singular() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(
            lu_factor(&a),
            Err(LinalgError::SingularMatrix { column: 1, .. })
        ));
    }

    #[test]
    fn lu_random_8x8_residual() {
        // xorshift, fixed seed
        let mut state = 0x9E37_79B9_7F4A_7C15_u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = Matrix::from_fn(8, 8, |i, j| next() + if i == j { 2.0 } else { 0.0 });
        let f = lu_factor(&a).unwrap();
        assert!(rel_residual(&a, &f) <= 1e-12);
        let inv = f.inverse();
        assert!(a.matmul(&inv).sub(&Matrix::identity(8)).inf_norm() < 1e-12);
    }

    #[test]
    fn crout_hand_example() {
        let a = Matrix::from_rows(&[[4.0, 3.0], [6.0, 3.0]]);
        let c = crout_factor(&a).unwrap();
        assert_eq!(c.l, Matrix::from_rows(&[[4.0, 0.0], [6.0, -1.5]]));
        assert_eq!(c.u, Matrix::from_rows(&[[1.0, 0.75], [0.0, 1.0]]));
        assert_eq!(
            crout_factor(&Matrix::<f64>::identity(4)).unwrap().l,
            Matrix::identity(4)
        );
    }

    #[test]
    fn crout_zero_leading_minor() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert!(matches!(
            crout_factor(&a),
            Err(LinalgError::ZeroPivot { column: 0, .. })
        ));
    }

    fn well_conditioned(n: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            let mut a = Matrix::from_vec(n, n, v).unwrap();
            for i in 0..n {
                a[(i, i)] += n as f64;
            }
            a
        })
    }

    proptest! {
        #[test]
        fn lu_solve_residual(a in well_conditioned(6), b in prop::collection::vec(-1.0f64..1.0, 6)) {
            let f = lu_factor(&a).unwrap();
            let x = f.solve(&b);
            let ax = a.mul_vec(&x);
            let num: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let den: f64 = b.iter().map(|q| q * q).sum::<f64>().sqrt().max(1e-300);
            prop_assert!(num / den <= 1e-11);
            prop_assert!(rel_residual(&a, &f) <= 1e-12);
        }

        #[test]
        fn crout_reconstructs(a in well_conditioned(5)) {
            let c = crout_factor(&a).unwrap();
            prop_assert!(c.product().sub(&a).inf_norm() <= 1e-13 * a.inf_norm());
            for i in 0..5 {
                prop_assert_eq!(c.u[(i, i)], 1.0);
                for j in i + 1..5 {
                    prop_assert_eq!(c.l[(i, j)], 0.0);
                    prop_assert_eq!(c.u[(j, i)], 0.0);
                }
            }
        }
    }
}
