//! Auxiliary abscissae and the equal-pivot Crout splitting.
//!
//! For auxiliary nodes `ĉ` with `ĉ_s = 1`, let `P̂` be the Legendre matrix at
//! `ĉ` and `Â = P̂·X_s·P̂⁻¹ = L̂·Û` its Crout factorization. The nodes are
//! chosen so that every diagonal entry of `L̂` equals `d_s = det(X_s)^{1/s}`;
//! the inner iteration then needs a single `m×m` factorization.

use thiserror::Error;

use crate::linalg::{crout_factor, lu_factor, CroutFactors, LinalgError, Matrix};
use crate::tableau::{legendre_matrix, x_matrix, CollocationTableau};

/// Diagonal spread of `L̂` above which the abscissae are considered wrong.
pub const PIVOT_MISMATCH_THRESHOLD: f64 = 1e-8;

const AUX_RESIDUAL_TOL: f64 = 1e-13;
const AUX_FD_STEP: f64 = 1e-7;
const AUX_MAX_ITER: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("no tabulated auxiliary abscissae for s = {0} (use solve_aux)")]
    Unsupported(usize),
    #[error("invalid auxiliary abscissae: {0}")]
    InvalidAbscissae(String),
    #[error("auxiliary abscissae iteration did not converge (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },
    #[error("auxiliary abscissae iterate left the ordered simplex")]
    NonMonotonic,
    #[error("Crout pivots are not equal (spread {spread:e})")]
    PivotMismatch { spread: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `det(X_s) = 2^{1−s} / ∏ (4i² − 1)`, the product running over
/// `i = 2−η, 4−η, …, 2⌊s/2⌋−η` with `η = 1` for even `s`, `0` for odd `s`.
pub fn det_x(s: usize) -> f64 {
    let eta = if s.is_multiple_of(2) { 1 } else { 0 };
    let upper = 2 * (s / 2) - eta;
    let product: f64 = (2 - eta..=upper)
        .step_by(2)
        .map(|i| {
            let i = i as f64;
            4.0 * i * i - 1.0
        })
        .product();
    2f64.powi(1 - s as i32) / product
}

/// The common Crout pivot `d_s = det(X_s)^{1/s}`.
pub fn target_pivot(s: usize) -> f64 {
    det_x(s).powf(1.0 / s as f64)
}

const AUX_TABLE: [&[&str]; 3] = [
    &[
        "0.18589230221764097222357873465176",
        "0.50022434784008286059148415923632",
    ],
    &[
        "0.12661575733255931078112184952036",
        "0.34154548143311325099490740728171",
        "0.56937072098419698874387077046544",
    ],
    &[
        "0.09527975140867214336447374571157",
        "0.28143874673988994521203045137949",
        "0.38152142820340929736570124768463",
        "0.60680555490108389442461323421422",
    ],
];

/// Tabulated auxiliary abscissae for `s = 2..=5`, last entry 1.
pub fn aux_abscissae(s: usize) -> Result<Vec<f64>, SplitError> {
    let mut nodes = match s {
        2 => {
            let r6 = 6f64.sqrt();
            vec![(6.0 - r6) / (6.0 + 2.0 * r6)]
        }
        3..=5 => AUX_TABLE[s - 3]
            .iter()
            .map(|lit| lit.parse::<f64>().expect("literal parses"))
            .collect(),
        _ => return Err(SplitError::Unsupported(s)),
    };
    nodes.push(1.0);
    Ok(nodes)
}

fn check_abscissae(s: usize, c_hat: &[f64]) -> Result<(), SplitError> {
    if s < 2 || c_hat.len() != s {
        return Err(SplitError::InvalidAbscissae(format!(
            "expected {s} nodes, got {}",
            c_hat.len()
        )));
    }
    if c_hat[s - 1] != 1.0 {
        return Err(SplitError::InvalidAbscissae("last node must be 1".into()));
    }
    if !is_ordered(c_hat) {
        return Err(SplitError::InvalidAbscissae(
            "nodes must satisfy 0 < c_1 < ... < c_s = 1".into(),
        ));
    }
    Ok(())
}

fn is_ordered(c: &[f64]) -> bool {
    c.first().is_some_and(|&c0| c0 > 0.0)
        && c.windows(2).all(|w| w[0] < w[1])
        && c.iter().all(|x| x.is_finite() && *x <= 1.0)
}

/// `P̂·X_s·P̂⁻¹` for the given nodes.
fn transformed_x(c_hat: &[f64]) -> Result<Matrix, SplitError> {
    let p_hat = legendre_matrix(c_hat);
    let p_inv = lu_factor(&p_hat)?.inverse();
    Ok(p_hat.matmul(&x_matrix(c_hat.len())).matmul(&p_inv))
}

/// Leading `s−1` Crout pivots minus `d_s`.
fn pivot_residual(free: &[f64], d: f64) -> Result<Vec<f64>, SplitError> {
    let mut c_hat = free.to_vec();
    c_hat.push(1.0);
    if !is_ordered(&c_hat) {
        return Err(SplitError::NonMonotonic);
    }
    let crout = crout_factor(&transformed_x(&c_hat)?)?;
    Ok(crout.pivots()[..free.len()].iter().map(|l| l - d).collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `diag(L̂)_j(ĉ) = d_s`, `j < s`, for the free nodes by damped Newton
/// with a central-difference Jacobian.
pub fn solve_aux(s: usize, initial_guess: &[f64]) -> Result<Vec<f64>, SplitError> {
    check_abscissae(s, initial_guess)?;
    let d = target_pivot(s);
    let n = s - 1;
    let mut x = initial_guess[..n].to_vec();
    let mut r = pivot_residual(&x, d)?;
    let mut best = max_abs(&r);

    for _ in 0..AUX_MAX_ITER {
        if best <= AUX_RESIDUAL_TOL {
            break;
        }
        let mut jac = Matrix::zeros(n, n);
        for k in 0..n {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[k] += AUX_FD_STEP;
            minus[k] -= AUX_FD_STEP;
            let rp = pivot_residual(&plus, d)?;
            let rm = pivot_residual(&minus, d)?;
            for i in 0..n {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * AUX_FD_STEP);
            }
        }
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = lu_factor(&jac)?.solve(&neg_r);

        let mut lambda = 1.0;
        let mut accepted = None;
        let mut left_simplex = false;
        while lambda >= 1.0 / 1024.0 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + lambda * b).collect();
            match pivot_residual(&trial, d) {
                Ok(rt) if max_abs(&rt) < best => {
                    accepted = Some((trial, rt));
                    break;
                }
                Ok(_) => {}
                Err(SplitError::NonMonotonic) => left_simplex = true,
                Err(e) => return Err(e),
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, rt)) => {
                x = xt;
                best = max_abs(&rt);
                r = rt;
            }
            None if left_simplex => return Err(SplitError::NonMonotonic),
            None => break,
        }
    }
    if best > AUX_RESIDUAL_TOL {
        return Err(SplitError::NoConvergence {
            best_residual: best,
        });
    }
    x.push(1.0);

    // det(L̂) = det(X_s) forces the last pivot once the others equal d_s.
    let last = crout_factor(&transformed_x(&x)?)?.pivots()[s - 1];
    debug_assert!((last - d).abs() <= 1e-10, "last pivot {last} vs {d}");
    Ok(x)
}

/// Splitting data for the single-factorization inner iteration.
#[derive(Clone, Debug)]
pub struct SplitData {
    pub s: usize,
    pub c_hat: Vec<f64>,
    pub p_hat: Matrix,
    /// `P̂·X_s·P̂⁻¹`.
    pub a_hat: Matrix,
    pub crout: CroutFactors,
    /// Common diagonal entry of `L̂`.
    pub d: f64,
    /// Strictly lower `S` with `L̂⁻¹ = d⁻¹I − S`.
    pub strict_lower: Matrix,
    /// Strictly upper `C = Û − I`.
    pub strict_upper: Matrix,
}

impl SplitData {
    pub fn l_hat(&self) -> &Matrix {
        &self.crout.l
    }

    pub fn u_hat(&self) -> &Matrix {
        &self.crout.u
    }

    /// Largest minus smallest diagonal entry of `L̂`.
    pub fn pivot_spread(&self) -> f64 {
        spread(&self.crout.pivots())
    }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// `D⁻¹ − L⁻¹` with exact zeros on and above the diagonal.
fn strict_lower_of_inverse(l: &Matrix) -> Result<Matrix, SplitError> {
    let s = l.rows();
    let l_inv = lu_factor(l)?.inverse();
    Ok(Matrix::from_fn(s, s, |i, j| {
        if i > j {
            -l_inv[(i, j)]
        } else {
            0.0
        }
    }))
}

pub fn build_split(s: usize, c_hat: &[f64]) -> Result<SplitData, SplitError> {
    check_abscissae(s, c_hat)?;
    let p_hat = legendre_matrix(c_hat);
    let p_inv = lu_factor(&p_hat)?.inverse();
    let a_hat = p_hat.matmul(&x_matrix(s)).matmul(&p_inv);
    let crout = crout_factor(&a_hat)?;
    let pivots = crout.pivots();
    let spread = spread(&pivots);
    if spread > PIVOT_MISMATCH_THRESHOLD {
        return Err(SplitError::PivotMismatch { spread });
    }
    let d = pivots.iter().sum::<f64>() / s as f64;
    let strict_lower = strict_lower_of_inverse(&crout.l)?;
    let strict_upper = crout.u_minus_identity();
    Ok(SplitData {
        s,
        c_hat: c_hat.to_vec(),
        p_hat,
        a_hat,
        crout,
        d,
        strict_lower,
        strict_upper,
    })
}

/// Crout splitting of the Runge–Kutta matrix itself, `A = L·U`, with `s`
/// distinct pivots.
#[derive(Clone, Debug)]
pub struct CroutOfA {
    pub crout: CroutFactors,
    pub pivots: Vec<f64>,
    /// `D⁻¹ − L⁻¹`, `D = diag(L)`.
    pub strict_lower: Matrix,
    /// `U − I`.
    pub strict_upper: Matrix,
}

pub fn crout_of_a(tab: &CollocationTableau) -> Result<CroutOfA, SplitError> {
    let crout = crout_factor(&tab.a)?;
    let pivots = crout.pivots();
    let strict_lower = strict_lower_of_inverse(&crout.l)?;
    let strict_upper = crout.u_minus_identity();
    Ok(CroutOfA {
        crout,
        pivots,
        strict_lower,
        strict_upper,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::linalg::mat_power;
    use crate::tableau::{build_collocation, radau_nodes};

    /// Determinant by cofactor expansion, independent of the factorizations.
    fn det_cofactor(a: &Matrix) -> f64 {
        let n = a.rows();
        if n == 1 {
            return a[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let minor = Matrix::from_fn(n - 1, n - 1, |r, c| {
                    a[(r + 1, if c < j { c } else { c + 1 })]
                });
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[(0, j)] * det_cofactor(&minor)
            })
            .sum()
    }

    #[test]
    fn det_formula_matches_direct_determinant() {
        for s in 2..=8 {
            let direct = det_cofactor(&x_matrix(s));
            assert!((det_x(s) - direct).abs() <= 1e-14 * direct.abs(), "s={s}");
        }
        assert!((det_x(2) - 1.0 / 6.0).abs() < 1e-16);
        assert!((det_x(3) - 1.0 / 60.0).abs() < 1e-17);
    }

    #[test]
    fn pivots_match_printed_values() {
        let printed = [
            "0.40824829046386301636621401245098",
            "0.25543647746451770219954184281099",
            "0.18575057999133599176307088298897",
            "0.14591154019899779261811749554182",
        ];
        for (k, lit) in printed.iter().enumerate() {
            let want: f64 = lit.parse().unwrap();
            assert!((target_pivot(k + 2) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn tabulated_abscissae() {
        let c2 = aux_abscissae(2).unwrap();
        assert!((c2[0] - 0.325_765_385_825_232_9).abs() < 1e-15);
        assert_eq!(aux_abscissae(4).unwrap()[2], 0.569_370_720_984_196_99);
        assert_eq!(aux_abscissae(6), Err(SplitError::Unsupported(6)));
        for s in 2..=5 {
            assert_eq!(*aux_abscissae(s).unwrap().last().unwrap(), 1.0);
        }
    }

    #[test]
    fn table_point_is_a_fixed_point() {
        let c = aux_abscissae(2).unwrap();
        let r = pivot_residual(&c[..1], target_pivot(2)).unwrap();
        assert!(r[0].abs() <= 1e-14);
    }

    #[test]
    fn solve_aux_from_radau_seeds() {
        for s in 2..=5 {
            let seed = radau_nodes(s).unwrap();
            let got = solve_aux(s, &seed).unwrap();
            let want = aux_abscissae(s).unwrap();
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12, "s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn solve_aux_basin() {
        let want = aux_abscissae(3).unwrap();
        let guess = [want[0] + 1e-3, want[1] - 1e-3, 1.0];
        let got = solve_aux(3, &guess).unwrap();
        assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn solve_aux_rejects_bad_guess() {
        assert!(matches!(
            solve_aux(3, &[0.5, 0.2, 1.0]),
            Err(SplitError::InvalidAbscissae(_))
        ));
        assert!(matches!(
            solve_aux(3, &[0.2, 0.5, 0.9]),
            Err(SplitError::InvalidAbscissae(_))
        ));
    }

    #[test]
    fn split_structure() {
        for s in 2..=5 {
            let c_hat = aux_abscissae(s).unwrap();
            let sp = build_split(s, &c_hat).unwrap();
            let d = target_pivot(s);
            for l in sp.crout.pivots() {
                assert!((l - d).abs() <= 1e-12);
            }
            assert!((sp.d - d).abs() <= 1e-12);
            let det: f64 = sp.crout.pivots().iter().product();
            assert!((det - det_x(s)).abs() <= 1e-12);
            assert!(sp.crout.product().sub(&sp.a_hat).inf_norm() <= 1e-13);
            assert_eq!(sp.strict_upper[(0, 0)], 0.0);
            for i in 0..s {
                for j in i..s {
                    assert_eq!(sp.strict_lower[(i, j)], 0.0);
                    assert_eq!(sp.strict_upper[(j, i)], 0.0);
                }
            }
            // L̂·(d⁻¹I − S) = I
            let l_inv = Matrix::identity(s).scale(1.0 / sp.d).sub(&sp.strict_lower);
            assert!(
                sp.l_hat()
                    .matmul(&l_inv)
                    .sub(&Matrix::identity(s))
                    .max_abs()
                    <= 1e-12
            );
            assert!(mat_power(&sp.strict_upper, s).unwrap().max_abs() <= 1e-13);
        }
    }

    #[test]
    fn interpolation_consistency() {
        for s in 2..=5 {
            let tab = build_collocation(s).unwrap();
            let sp = build_split(s, &aux_abscissae(s).unwrap()).unwrap();
            let map = sp.p_hat.matmul(&lu_factor(&tab.p).unwrap().inverse());
            for k in 0..s {
                let vals: Vec<f64> = tab.c.iter().map(|c| c.powi(k as i32)).collect();
                let mapped = map.mul_vec(&vals);
                for (m, ch) in mapped.iter().zip(&sp.c_hat) {
                    assert!((m - ch.powi(k as i32)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn wrong_abscissae_are_rejected() {
        let r = build_split(3, &radau_nodes(3).unwrap());
        assert!(matches!(r, Err(SplitError::PivotMismatch { .. })));
    }

    #[test]
    fn crout_of_a_reconstructs() {
        for s in 2..=5 {
            let tab = build_collocation(s).unwrap();
            let ca = crout_of_a(&tab).unwrap();
            assert!(ca.crout.product().sub(&tab.a).inf_norm() <= 1e-14);
        }
    }
}
