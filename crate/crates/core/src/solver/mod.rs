//! Radau IIA integration with a choice of linear-algebra backend.
//!
//! The stage equations are solved by simplified Newton iteration in the
//! auxiliary-stage variables `ŷ`. Each outer iteration needs the solution of
//! `(I − h·Â⊗J)·Δ̂ = −Ĝ(ŷ)`, which the backends handle differently:
//!
//! * [`Backend::FullLu`] factors the `sm×sm` matrix directly,
//! * [`Backend::SplitLowRank`] runs ν inner sweeps that reuse a single
//!   `m×m` factorization of `(h·d_s)⁻¹I − J`,
//! * [`Backend::CroutOfA`] sweeps with the Crout factors of `A` itself,
//!   which needs `s` factorizations.

mod drivers;
mod newton;
mod problem;
mod reference;
mod stage;

pub use drivers::{integrate_adaptive, integrate_fixed, mescd, AdaptiveOptions, MESCD_CAP};
pub use newton::{newton_solve, NewtonOutcome};
pub use problem::IvpProblem;
pub use reference::reference_rk_step;
pub use stage::{inner_sweep, residual, StageVector};

use std::ops::AddAssign;

use thiserror::Error;

use crate::linalg::{lu_factor, LinalgError, Matrix};
use crate::splitting::{
    aux_abscissae, build_split, crout_of_a, solve_aux, CroutOfA, SplitData, SplitError,
};
use crate::tableau::{build_collocation, radau_nodes, CollocationTableau, TableauError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("Newton iteration failed at t = {t} with h = {h:e}")]
    NewtonDiverged { t: f64, h: f64 },
    #[error("right-hand side returned a non-finite value")]
    NonFinite,
    #[error("step size {h:e} fell below the minimum at t = {t}")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    FullLu,
    SplitLowRank,
    CroutOfA,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::FullLu => "full",
            Backend::SplitLowRank => "split",
            Backend::CroutOfA => "crout-a",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" | "full-lu" => Ok(Backend::FullLu),
            "split" | "split-lowrank" => Ok(Backend::SplitLowRank),
            "crout-a" | "crout-of-a" => Ok(Backend::CroutOfA),
            other => Err(format!(
                "unknown backend '{other}' (expected full, split or crout-a)"
            )),
        }
    }
}

/// How many inner sweeps approximate each Newton increment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerSweeps {
    Fixed(usize),
    /// Sweep until successive iterates agree to roundoff, at most `cap` times.
    ToConvergence {
        cap: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub max_outer: usize,
    pub inner: InnerSweeps,
    /// Outer iteration stops once the scaled increment norm is below `kappa`.
    pub kappa: f64,
    pub backend: Backend,
    /// Tolerances defining the increment scaling `atol + rtol·|y|`.
    pub rtol: f64,
    pub atol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_outer: 10,
            inner: InnerSweeps::Fixed(2),
            kappa: 1e-2,
            backend: Backend::SplitLowRank,
            rtol: 1e-8,
            atol: 1e-8,
        }
    }
}

impl NewtonConfig {
    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_inner(mut self, inner: InnerSweeps) -> Self {
        self.inner = inner;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let nu_ok = match self.inner {
            InnerSweeps::Fixed(nu) => nu >= 1,
            InnerSweeps::ToConvergence { cap } => cap >= 1,
        };
        if !nu_ok {
            return Err(SolverError::InvalidInput(
                "inner sweep count must be >= 1".into(),
            ));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(SolverError::InvalidInput("kappa must lie in (0, 1)".into()));
        }
        if self.max_outer == 0 || !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(SolverError::InvalidInput(
                "max_outer, rtol and atol must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Work counters for one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub steps: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub f_evals: usize,
    pub jac_evals: usize,
    pub lu_factorizations: usize,
    pub inner_sweeps_total: usize,
    pub newton_iterations: usize,
    /// Order of the matrices factored (`m` or `s·m`); 0 before the first.
    pub lu_dimension: usize,
}

impl AddAssign for StepStats {
    fn add_assign(&mut self, rhs: Self) {
        self.steps += rhs.steps;
        self.accepted += rhs.accepted;
        self.rejected += rhs.rejected;
        self.f_evals += rhs.f_evals;
        self.jac_evals += rhs.jac_evals;
        self.lu_factorizations += rhs.lu_factorizations;
        self.inner_sweeps_total += rhs.inner_sweeps_total;
        self.newton_iterations += rhs.newton_iterations;
        if rhs.lu_dimension != 0 {
            self.lu_dimension = rhs.lu_dimension;
        }
    }
}

/// Stage-space data of one formulation of the stage equations.
#[derive(Clone, Debug)]
pub(crate) struct StageSystem {
    pub s: usize,
    /// Multiplies the stacked `f(y_j)` in the residual.
    pub coupling: Matrix,
    /// Maps the unknowns back to the collocation stages.
    pub to_original: Matrix,
    /// Stage matrix of the Newton operator `I − h·newton⊗J`.
    pub newton: Matrix,
    /// Crout pivots used by the sweep (all equal for the low-rank split).
    pub pivots: Vec<f64>,
    pub strict_lower: Matrix,
    pub strict_upper: Matrix,
}

/// Everything needed to integrate with an `s`-stage Radau IIA method.
#[derive(Clone, Debug)]
pub struct RadauMethod {
    pub tableau: CollocationTableau,
    pub split: SplitData,
    pub crout_a: CroutOfA,
    lowrank: StageSystem,
    standard: StageSystem,
}

impl RadauMethod {
    /// Uses the tabulated auxiliary abscissae for `s ≤ 5` and solves for
    /// them (seeded with the Radau nodes) otherwise.
    pub fn new(s: usize) -> Result<Self, SolverError> {
        let c_hat = match aux_abscissae(s) {
            Ok(c) => c,
            Err(SplitError::Unsupported(_)) if s > 5 => solve_aux(s, &radau_nodes(s)?)?,
            Err(e) => return Err(e.into()),
        };
        Self::with_abscissae(s, &c_hat)
    }

    pub fn with_abscissae(s: usize, c_hat: &[f64]) -> Result<Self, SolverError> {
        let tableau = build_collocation(s)?;
        let split = build_split(s, c_hat)?;
        let crout_a = crout_of_a(&tableau)?;

        let p_inv = lu_factor(&tableau.p)?.inverse();
        let p_hat_inv = lu_factor(&split.p_hat)?.inverse();
        let lowrank = StageSystem {
            s,
            coupling: split.p_hat.matmul(&tableau.x).matmul(&p_inv),
            to_original: tableau.p.matmul(&p_hat_inv),
            newton: split.a_hat.clone(),
            pivots: vec![split.d; s],
            strict_lower: split.strict_lower.clone(),
            strict_upper: split.strict_upper.clone(),
        };
        let standard = StageSystem {
            s,
            coupling: tableau.a.clone(),
            to_original: Matrix::identity(s),
            newton: tableau.a.clone(),
            pivots: crout_a.pivots.clone(),
            strict_lower: crout_a.strict_lower.clone(),
            strict_upper: crout_a.strict_upper.clone(),
        };
        Ok(Self {
            tableau,
            split,
            crout_a,
            lowrank,
            standard,
        })
    }

    pub fn stages(&self) -> usize {
        self.tableau.s
    }

    /// Classical order `2s − 1`.
    pub fn order(&self) -> usize {
        2 * self.stages() - 1
    }

    /// Formulation used by a backend: the Crout-of-A sweep works on the
    /// original stages, the other two on the auxiliary stages.
    pub(crate) fn system(&self, backend: Backend) -> &StageSystem {
        match backend {
            Backend::CroutOfA => &self.standard,
            Backend::FullLu | Backend::SplitLowRank => &self.lowrank,
        }
    }
}
