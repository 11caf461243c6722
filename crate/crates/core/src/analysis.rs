//! Linear convergence analysis of triangular-splitting inner iterations.
//!
//! On the test equation `y' = λy` with `q = hλ`, a splitting `Â = L·U` of
//! the stage matrix iterates the error as `e_{ν+1} = M(q)·e_ν` with
//!
//! ```text
//! M(q) = q (I − qL)⁻¹ L (U − I)
//! ```
//!
//! The factors reported here are the spectral radius of `M` near `q = 0`
//! (`ρ̃`), its maximum along the imaginary axis (`ρ*`), its limit as
//! `q → ∞` (`ρ∞`), and the ν-step averaged variants measured in the
//! ∞-norm.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{mat_power, spectral_radius, CMatrix, CroutFactors, LinalgError, Matrix};

/// Lower end of the imaginary-axis scan.
pub const SCAN_X_MIN: f64 = 1e-3;
/// Upper end of the imaginary-axis scan.
pub const SCAN_X_MAX: f64 = 1e6;
/// Log-spaced scan points before refinement.
pub const SCAN_POINTS: usize = 600;
/// Relative accuracy in `x` of the golden-section refinement.
pub const REFINE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("I - qL is singular at q = {re} + {im}i")]
    SingularShift { re: f64, im: f64 },
    #[error("averaging length must be at least 1")]
    ZeroSweeps,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which splitting an [`AmplificationReport`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Crout factorization of the Radau matrix `A` (s distinct pivots).
    CroutOfA,
    /// Crout factorization of `P̂X_sP̂⁻¹` at the auxiliary abscissae.
    LowRankSplit,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::CroutOfA => "crout-of-A",
            Scheme::LowRankSplit => "lowrank-split",
        }
    }
}

/// `M(q) = q (I − qL)⁻¹ L (U − I)`, by forward substitution on `I − qL`.
pub fn amplification_matrix(
    q: Complex64,
    factors: &CroutFactors,
) -> Result<CMatrix, AnalysisError> {
    let s = factors.dim();
    let l = factors.l.to_complex();
    let rhs = l.matmul(&factors.u_minus_identity().to_complex()).scale(q);
    let one = Complex64::new(1.0, 0.0);
    let mut out = CMatrix::zeros(s, s);
    for i in 0..s {
        let diag = one - q * l[(i, i)];
        if diag.norm() <= 1e-14 * (1.0 + (q * l[(i, i)]).norm()) {
            return Err(AnalysisError::SingularShift { re: q.re, im: q.im });
        }
        for col in 0..s {
            let mut acc = rhs[(i, col)];
            for k in 0..i {
                acc += q * l[(i, k)] * out[(k, col)];
            }
            out[(i, col)] = acc / diag;
        }
    }
    Ok(out)
}

/// `ρ(M(q))`.
pub fn rho(q: Complex64, factors: &CroutFactors) -> Result<f64, AnalysisError> {
    Ok(spectral_radius(&amplification_matrix(q, factors)?)?)
}

/// Nonstiff amplification factor `ρ̃ = ρ(L(U − I))`.
pub fn rho_tilde(factors: &CroutFactors) -> Result<f64, AnalysisError> {
    Ok(spectral_radius(&nonstiff_matrix(factors))?)
}

fn nonstiff_matrix(factors: &CroutFactors) -> Matrix {
    factors.l.matmul(&factors.u_minus_identity())
}

/// Stiff amplification factor `ρ∞ = ρ(U − I)`; zero by nilpotency.
pub fn rho_infinity(factors: &CroutFactors) -> Result<f64, AnalysisError> {
    Ok(spectral_radius(&factors.u_minus_identity())?)
}

/// Maximum of `objective(x)` over `x ∈ [SCAN_X_MIN, SCAN_X_MAX]`: a
/// log-spaced scan followed by golden-section refinement around the best
/// scan point. Returns `(max, argmax)`.
pub fn maximize_on_axis<F>(mut objective: F) -> Result<(f64, f64), AnalysisError>
where
    F: FnMut(f64) -> Result<f64, AnalysisError>,
{
    let (lo, hi) = (SCAN_X_MIN.ln(), SCAN_X_MAX.ln());
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|k| lo + step * k as f64).collect();

    let mut best = (f64::NEG_INFINITY, grid[0]);
    let mut best_k = 0;
    for (k, &t) in grid.iter().enumerate() {
        let v = objective(t.exp())?;
        if v > best.0 {
            best = (v, t);
            best_k = k;
        }
    }

    let mut a = grid[best_k.saturating_sub(1)];
    let mut b = grid[(best_k + 1).min(SCAN_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1.exp())?;
    let mut f2 = objective(x2.exp())?;
    // widths in log space are relative widths in x
    while b - a > REFINE_REL_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1.exp())?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2.exp())?;
        }
    }
    for (v, t) in [(f1, x1), (f2, x2)] {
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok((best.0, best.1.exp()))
}

/// Maximum amplification factor `ρ* = max_x ρ(M(ix))` and its maximizer.
pub fn rho_star(factors: &CroutFactors) -> Result<(f64, f64), AnalysisError> {
    maximize_on_axis(|x| rho(Complex64::new(0.0, x), factors))
}

fn nu_root_norm<T: crate::linalg::Scalar>(m: &Matrix<T>, nu: usize) -> Result<f64, AnalysisError> {
    Ok(mat_power(m, nu)?.inf_norm().powf(1.0 / nu as f64))
}

/// Averaged amplification factors over `ν` sweeps, in the ∞-norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AveragedFactors {
    pub nu: usize,
    pub rho_tilde: f64,
    pub rho_star: f64,
    pub rho_star_x: f64,
    pub rho_inf: f64,
}

pub fn averaged_factors(
    factors: &CroutFactors,
    nu: usize,
) -> Result<AveragedFactors, AnalysisError> {
    if nu == 0 {
        return Err(AnalysisError::ZeroSweeps);
    }
    let rho_tilde = nu_root_norm(&nonstiff_matrix(factors), nu)?;
    let rho_inf = nu_root_norm(&factors.u_minus_identity(), nu)?;
    let (rho_star, rho_star_x) = maximize_on_axis(|x| {
        nu_root_norm(&amplification_matrix(Complex64::new(0.0, x), factors)?, nu)
    })?;
    Ok(AveragedFactors {
        nu,
        rho_tilde,
        rho_star,
        rho_star_x,
        rho_inf,
    })
}

/// Summary of the convergence behaviour of one splitting.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplificationReport {
    pub s: usize,
    pub scheme: Scheme,
    pub rho_tilde: f64,
    pub rho_star: f64,
    pub x_star: f64,
    pub rho_inf: f64,
    pub averaged: Vec<AveragedFactors>,
}

impl AmplificationReport {
    pub fn new(
        scheme: Scheme,
        factors: &CroutFactors,
        nus: &[usize],
    ) -> Result<Self, AnalysisError> {
        let (rho_star, x_star) = rho_star(factors)?;
        Ok(Self {
            s: factors.dim(),
            scheme,
            rho_tilde: rho_tilde(factors)?,
            rho_star,
            x_star,
            rho_inf: rho_infinity(factors)?,
            averaged: nus
                .iter()
                .map(|&nu| averaged_factors(factors, nu))
                .collect::<Result<_, _>>()?,
        })
    }

    /// A-convergent iff `ρ* ≤ 1`.
    pub fn a_convergent(&self) -> bool {
        self.rho_star <= 1.0
    }

    /// L-convergent iff A-convergent and `ρ∞ = 0`.
    pub fn l_convergent(&self) -> bool {
        self.a_convergent() && self.rho_inf == 0.0
    }
}

/// Rectangular sampling grid in the complex `q` plane, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl RegionGrid {
    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        let axis = |lo: f64, hi: f64, n: usize, k: usize| {
            if n <= 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        (0..self.n_im).flat_map(move |j| {
            (0..self.n_re).map(move |i| {
                Complex64::new(
                    axis(self.re_min, self.re_max, self.n_re, i),
                    axis(self.im_min, self.im_max, self.n_im, j),
                )
            })
        })
    }
}

/// Quantity sampled by a region scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionMeasure {
    /// `ρ(M(q))`.
    SpectralRadius,
    /// `‖M(q)^ν‖∞^{1/ν}`.
    Averaged(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionSample {
    pub q: Complex64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionScan {
    pub samples: Vec<RegionSample>,
    /// Largest sampled value with `Re q ≤ 0`.
    pub max_left_half: f64,
}

impl RegionScan {
    /// Whether every sample in the closed left half-plane lies in the
    /// region of convergence.
    pub fn converges_on_left_half(&self) -> bool {
        self.max_left_half < 1.0
    }
}

/// Samples the chosen measure over a grid; points where `I − qL` is
/// singular are reported as `+∞`.
pub fn convergence_region_scan(
    factors: &CroutFactors,
    grid: &RegionGrid,
    measure: RegionMeasure,
) -> RegionScan {
    let mut samples = Vec::with_capacity(grid.n_re * grid.n_im);
    let mut max_left_half = 0.0f64;
    for q in grid.points() {
        let value = match measure {
            RegionMeasure::SpectralRadius => rho(q, factors),
            RegionMeasure::Averaged(nu) => {
                amplification_matrix(q, factors).and_then(|m| nu_root_norm(&m, nu.max(1)))
            }
        }
        .unwrap_or(f64::INFINITY);
        if q.re <= 0.0 {
            max_left_half = max_left_half.max(value);
        }
        samples.push(RegionSample { q, value });
    }
    RegionScan {
        samples,
        max_left_half,
    }
}
