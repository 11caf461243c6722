use crate::linalg::{lu_factor, LuFactors, Matrix};
use crate::splitting::SplitData;

use super::{Backend, InnerSweeps, IvpProblem, RadauMethod, SolverError, StageSystem, StepStats};

/// `s` stacked blocks of length `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct StageVector {
    s: usize,
    m: usize,
    data: Vec<f64>,
}

impl StageVector {
    pub fn zeros(s: usize, m: usize) -> Self {
        Self {
            s,
            m,
            data: vec![0.0; s * m],
        }
    }

    /// `e ⊗ y`.
    pub fn repeat(s: usize, y: &[f64]) -> Self {
        let mut data = Vec::with_capacity(s * y.len());
        for _ in 0..s {
            data.extend_from_slice(y);
        }
        Self {
            s,
            m: y.len(),
            data,
        }
    }

    pub fn from_vec(s: usize, m: usize, data: Vec<f64>) -> Result<Self, SolverError> {
        if data.len() != s * m {
            return Err(SolverError::DimensionMismatch {
                expected: s * m,
                got: data.len(),
            });
        }
        Ok(Self { s, m, data })
    }

    pub fn blocks(&self) -> usize {
        self.s
    }

    pub fn block_dim(&self) -> usize {
        self.m
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// `(T ⊗ I_m)·self` for an `s×s` matrix `T`.
    pub fn kron_apply(&self, t: &Matrix) -> StageVector {
        let mut out = StageVector::zeros(self.s, self.m);
        for i in 0..self.s {
            for j in 0..self.s {
                let tij = t[(i, j)];
                if tij == 0.0 {
                    continue;
                }
                let src = self.block(j);
                for (o, x) in out.block_mut(i).iter_mut().zip(src) {
                    *o += tij * x;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub(crate) fn add_assign(&mut self, other: &StageVector) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// Stage residual `ŷ − e⊗y0 − h·(T⊗I)·f((V⊗I)·ŷ)` of a formulation.
pub(crate) fn system_residual(
    sys: &StageSystem,
    problem: &IvpProblem,
    y0: &[f64],
    h: f64,
    unknowns: &StageVector,
    stats: &mut StepStats,
) -> Result<StageVector, SolverError> {
    let (s, m) = (sys.s, y0.len());
    let stages = unknowns.kron_apply(&sys.to_original);
    let mut f = StageVector::zeros(s, m);
    for j in 0..s {
        problem.rhs(stages.block(j), f.block_mut(j));
    }
    stats.f_evals += s;
    if f.data.iter().any(|x| !x.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let coupled = f.kron_apply(&sys.coupling);
    let mut g = unknowns.clone();
    for i in 0..s {
        let gi = g.block_mut(i);
        for ((gk, y0k), ck) in gi.iter_mut().zip(y0).zip(coupled.block(i)) {
            *gk -= y0k + h * ck;
        }
    }
    Ok(g)
}

/// `Ĝ(ŷ)` for the auxiliary-stage formulation.
pub fn residual(
    method: &RadauMethod,
    problem: &IvpProblem,
    y0: &[f64],
    h: f64,
    y_hat: &StageVector,
) -> Result<StageVector, SolverError> {
    let mut stats = StepStats::default();
    system_residual(
        method.system(Backend::SplitLowRank),
        problem,
        y0,
        h,
        y_hat,
        &mut stats,
    )
}

/// Runs the triangular sweep for `(I − h·L⊗J)Δ_{ν+1} = h((LU − L)⊗J)Δ_ν + r̃`
/// in its premultiplied form. `rhs_r` is `R = −h⁻¹(L⁻¹⊗I)Ĝ`; `lu_for(i)` is
/// the factorization of `(h·pivots[i])⁻¹I − J`. No products with `J` are
/// formed: `(I⊗J)Δ` is recovered from the right-hand sides just solved.
fn sweep_core<'a>(
    pivots: &[f64],
    strict_lower: &Matrix,
    strict_upper: &Matrix,
    h: f64,
    rhs_r: &StageVector,
    lu_for: impl Fn(usize) -> &'a LuFactors,
    inner: InnerSweeps,
) -> (StageVector, usize) {
    let (s, m) = (rhs_r.s, rhs_r.m);
    let (limit, until_converged) = match inner {
        InnerSweeps::Fixed(nu) => (nu, false),
        InnerSweeps::ToConvergence { cap } => (cap, true),
    };
    let mut w = rhs_r.clone();
    let mut delta = StageVector::zeros(s, m);
    let mut v = StageVector::zeros(s, m);
    let mut sweeps = 0;
    let mut rhs = vec![0.0; m];

    while sweeps < limit {
        let previous = until_converged.then(|| delta.clone());
        for i in 0..s {
            rhs.copy_from_slice(w.block(i));
            for j in 0..i {
                let coeff = strict_lower[(i, j)] / h;
                if coeff != 0.0 {
                    for (r, d) in rhs.iter_mut().zip(delta.block(j)) {
                        *r += coeff * d;
                    }
                }
            }
            v.block_mut(i).copy_from_slice(&rhs);
            lu_for(i).solve_in_place(&mut rhs);
            delta.block_mut(i).copy_from_slice(&rhs);
        }
        sweeps += 1;

        if let Some(prev) = previous {
            let change = delta
                .data
                .iter()
                .zip(&prev.data)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            if change <= 4.0 * f64::EPSILON * delta.max_abs() {
                break;
            }
        }
        if sweeps == limit {
            break;
        }

        // w ← (C⊗I)[(h·d_j)⁻¹Δ_j − v_j] + R
        let mut jdelta = StageVector::zeros(s, m);
        for (j, pivot) in pivots.iter().enumerate().skip(1) {
            let inv = 1.0 / (h * pivot);
            for ((z, d), vv) in jdelta
                .block_mut(j)
                .iter_mut()
                .zip(delta.block(j))
                .zip(v.block(j))
            {
                *z = inv * d - vv;
            }
        }
        w = jdelta.kron_apply(strict_upper);
        w.add_assign(rhs_r);
    }
    (delta, sweeps)
}

/// `R = −h⁻¹((D⁻¹ − S)⊗I)·g`.
fn premultiplied_rhs(
    pivots: &[f64],
    strict_lower: &Matrix,
    h: f64,
    g: &StageVector,
) -> StageVector {
    let s = g.s;
    let l_inv = Matrix::from_fn(s, s, |i, j| {
        if i == j {
            1.0 / pivots[i]
        } else {
            -strict_lower[(i, j)]
        }
    });
    let mut r = g.kron_apply(&l_inv);
    r.data.iter_mut().for_each(|x| *x *= -1.0 / h);
    r
}

/// `ν` inner sweeps of the single-factorization splitting, starting from
/// `Δ̂₀ = 0`. `r` must be `−h⁻¹(L̂⁻¹⊗I)Ĝ` and `lu` a factorization of
/// `(h·d_s)⁻¹I − J`.
pub fn inner_sweep(
    split: &SplitData,
    h: f64,
    r: &StageVector,
    nu: usize,
    lu: &LuFactors,
) -> StageVector {
    let pivots = vec![split.d; split.s];
    sweep_core(
        &pivots,
        &split.strict_lower,
        &split.strict_upper,
        h,
        r,
        |_| lu,
        InnerSweeps::Fixed(nu),
    )
    .0
}

/// Factorizations for one `(h, J)` pair.
pub(crate) enum LinearSolver {
    Full(LuFactors),
    Sweep(Vec<LuFactors>),
}

impl LinearSolver {
    pub fn new(
        sys: &StageSystem,
        backend: Backend,
        h: f64,
        jac: &Matrix,
        stats: &mut StepStats,
    ) -> Result<Self, SolverError> {
        let m = jac.rows();
        let shifted = |pivot: f64| {
            let mut a = jac.scale(-1.0);
            for k in 0..m {
                a[(k, k)] += 1.0 / (h * pivot);
            }
            lu_factor(&a)
        };
        let solver = match backend {
            Backend::FullLu => {
                let s = sys.s;
                let n = s * m;
                let k = Matrix::from_fn(n, n, |row, col| {
                    let (i, a) = (row / m, row % m);
                    let (j, b) = (col / m, col % m);
                    let ident = if row == col { 1.0 } else { 0.0 };
                    ident - h * sys.newton[(i, j)] * jac[(a, b)]
                });
                stats.lu_dimension = n;
                LinearSolver::Full(lu_factor(&k)?)
            }
            Backend::SplitLowRank => {
                stats.lu_dimension = m;
                LinearSolver::Sweep(vec![shifted(sys.pivots[0])?])
            }
            Backend::CroutOfA => {
                stats.lu_dimension = m;
                LinearSolver::Sweep(
                    sys.pivots
                        .iter()
                        .map(|&p| shifted(p))
                        .collect::<Result<_, _>>()?,
                )
            }
        };
        stats.lu_factorizations += solver.factorizations();
        Ok(solver)
    }

    pub fn factorizations(&self) -> usize {
        match self {
            LinearSolver::Full(_) => 1,
            LinearSolver::Sweep(lus) => lus.len(),
        }
    }

    /// Approximates the Newton increment `Δ` with `(I − h·N⊗J)Δ = −g`.
    pub fn increment(
        &self,
        sys: &StageSystem,
        h: f64,
        g: &StageVector,
        inner: InnerSweeps,
        stats: &mut StepStats,
    ) -> StageVector {
        match self {
            LinearSolver::Full(lu) => {
                let mut x: Vec<f64> = g.data.iter().map(|v| -v).collect();
                lu.solve_in_place(&mut x);
                StageVector {
                    s: g.s,
                    m: g.m,
                    data: x,
                }
            }
            LinearSolver::Sweep(lus) => {
                let r = premultiplied_rhs(&sys.pivots, &sys.strict_lower, h, g);
                let single = lus.len() == 1;
                let (delta, sweeps) = sweep_core(
                    &sys.pivots,
                    &sys.strict_lower,
                    &sys.strict_upper,
                    h,
                    &r,
                    |i| if single { &lus[0] } else { &lus[i] },
                    inner,
                );
                stats.inner_sweeps_total += sweeps;
                delta
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::amplification_matrix;
    use crate::linalg::CMatrix;
    use num_complex::Complex64;

    fn linear(lambda: f64) -> IvpProblem {
        IvpProblem::new(
            "lin",
            0.0,
            1.0,
            vec![1.0],
            move |y, dy| dy[0] = lambda * y[0],
            move |_| Matrix::from_rows(&[[lambda]]),
        )
    }

    #[test]
    fn constant_solution_has_zero_residual() {
        let method = RadauMethod::new(3).unwrap();
        let zero = IvpProblem::new(
            "zero",
            0.0,
            1.0,
            vec![1.5, -2.0],
            |_, dy| dy.iter_mut().for_each(|d| *d = 0.0),
            |_| Matrix::zeros(2, 2),
        );
        let y0 = [1.5, -2.0];
        let g = residual(&method, &zero, &y0, 0.3, &StageVector::repeat(3, &y0)).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn exact_collocation_stages_zero_the_residual() {
        // stages of y' = λy solve (I − qA)y = e y0; map to auxiliary stages
        let method = RadauMethod::new(2).unwrap();
        let q = -1.0;
        let tab = &method.tableau;
        let k = Matrix::identity(2).sub(&tab.a.scale(q));
        let y = lu_factor(&k).unwrap().solve(&[1.0, 1.0]);
        let sys = method.system(Backend::SplitLowRank);
        let to_aux = lu_factor(&sys.to_original).unwrap().inverse();
        let y_hat = StageVector::from_vec(2, 1, y).unwrap().kron_apply(&to_aux);
        let g = residual(&method, &linear(q), &[1.0], 1.0, &y_hat).unwrap();
        assert!(g.max_abs() <= 1e-13);
    }

    #[test]
    fn residual_at_initial_guess_matches_matrix_oracle() {
        let method = RadauMethod::new(3).unwrap();
        let (lambda, h) = (-2.5, 0.2);
        let g = residual(
            &method,
            &linear(lambda),
            &[1.0],
            h,
            &StageVector::repeat(3, &[1.0]),
        )
        .unwrap();
        let coupling = &method.system(Backend::SplitLowRank).coupling;
        let want = coupling.mul_vec(&[lambda; 3]);
        for (i, w) in want.iter().enumerate() {
            assert!((g.block(i)[0] + h * w).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_sweep_error_follows_amplification_matrix() {
        let s = 3;
        let method = RadauMethod::new(s).unwrap();
        let split = &method.split;
        let (lambda, h) = (-7.0, 1.0);
        let q = lambda * h;
        let g = StageVector::from_vec(s, 1, vec![0.3, -1.0, 0.5]).unwrap();

        // exact increment from the dense stage system
        let k = Matrix::identity(s).sub(&split.a_hat.scale(q));
        let exact = lu_factor(&k)
            .unwrap()
            .solve(&g.as_slice().iter().map(|v| -v).collect::<Vec<_>>());

        let jac = Matrix::from_rows(&[[lambda]]);
        let lu = lu_factor(&Matrix::from_rows(&[[1.0 / (h * split.d) - lambda]])).unwrap();
        let r = premultiplied_rhs(&vec![split.d; s], &split.strict_lower, h, &g);
        let _ = jac;

        let m = amplification_matrix(Complex64::new(q, 0.0), &split.crout).unwrap();
        let mut e_prev: Vec<Complex64> = exact.iter().map(|x| Complex64::new(-x, 0.0)).collect();
        for nu in 1..=6 {
            let d = inner_sweep(split, h, &r, nu, &lu);
            let e: Vec<f64> = d
                .as_slice()
                .iter()
                .zip(&exact)
                .map(|(a, b)| a - b)
                .collect();
            let predicted = CMatrix::from_vec(s, 1, e_prev.clone()).unwrap();
            let predicted = m.matmul(&predicted);
            for i in 0..s {
                assert!((predicted[(i, 0)].re - e[i]).abs() < 1e-12, "nu={nu}");
            }
            e_prev = e.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        }
    }

    #[test]
    fn converged_sweep_matches_dense_newton_increment() {
        for s in 2..=5 {
            let method = RadauMethod::new(s).unwrap();
            let sys = method.system(Backend::SplitLowRank);
            let jac = Matrix::from_rows(&[[-3.0, 1.0], [0.5, -40.0]]);
            let h = 0.7;
            let data: Vec<f64> = (0..2 * s).map(|k| ((k * 7 + 3) % 5) as f64 - 2.0).collect();
            let g = StageVector::from_vec(s, 2, data).unwrap();
            let mut stats = StepStats::default();
            let full = LinearSolver::new(sys, Backend::FullLu, h, &jac, &mut stats).unwrap();
            let split = LinearSolver::new(sys, Backend::SplitLowRank, h, &jac, &mut stats).unwrap();
            let a = full.increment(sys, h, &g, InnerSweeps::Fixed(1), &mut stats);
            let b = split.increment(
                sys,
                h,
                &g,
                InnerSweeps::ToConvergence { cap: 50 },
                &mut stats,
            );
            let diff = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(diff <= 1e-11 * a.max_abs(), "s={s} diff={diff}");
        }
    }
}
