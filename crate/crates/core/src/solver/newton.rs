use super::stage::{system_residual, LinearSolver, StageVector};
use super::{IvpProblem, NewtonConfig, RadauMethod, SolverError, StageSystem, StepStats};

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    /// Final iterate in the unknowns of the chosen backend. Its last block
    /// is the step result `y_1` for every backend.
    pub stages: StageVector,
    pub converged: bool,
    pub iterations: usize,
    pub stats: StepStats,
}

impl NewtonOutcome {
    pub fn endpoint(&self) -> &[f64] {
        self.stages.block(self.stages.blocks() - 1)
    }
}

/// RMS norm of `delta` with per-component scale `atol + rtol·|y0|`.
fn scaled_norm(delta: &StageVector, y0: &[f64], cfg: &NewtonConfig) -> f64 {
    let mut sum = 0.0;
    for i in 0..delta.blocks() {
        for (d, y) in delta.block(i).iter().zip(y0) {
            let sc = cfg.atol + cfg.rtol * y.abs();
            sum += (d / sc).powi(2);
        }
    }
    (sum / delta.as_slice().len() as f64).sqrt()
}

/// Simplified Newton iteration with a prepared linear solver. `t` is only
/// used for error reporting.
#[allow(clippy::too_many_arguments)]
pub(crate) fn iterate(
    sys: &StageSystem,
    solver: &LinearSolver,
    problem: &IvpProblem,
    y0: &[f64],
    h: f64,
    t: f64,
    cfg: &NewtonConfig,
    stats: &mut StepStats,
) -> Result<(StageVector, bool, usize), SolverError> {
    let s = sys.s;
    let mut y_hat = StageVector::repeat(s, y0);
    let mut prev_norm: Option<f64> = None;
    let mut growth_streak = 0;

    for k in 1..=cfg.max_outer {
        let g = system_residual(sys, problem, y0, h, &y_hat, stats)?;
        let delta = solver.increment(sys, h, &g, cfg.inner, stats);
        stats.newton_iterations += 1;
        if delta.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(SolverError::NewtonDiverged { t, h });
        }
        y_hat.add_assign(&delta);

        let norm = scaled_norm(&delta, y0, cfg);
        let at_roundoff = delta.max_abs() <= 10.0 * f64::EPSILON * y_hat.max_abs();
        if at_roundoff {
            return Ok((y_hat, true, k));
        }
        let estimate = match prev_norm {
            Some(p) if p > 0.0 => {
                let theta = norm / p;
                if theta > 1.0 {
                    growth_streak += 1;
                    if growth_streak >= 2 {
                        return Err(SolverError::NewtonDiverged { t, h });
                    }
                    norm
                } else {
                    growth_streak = 0;
                    if theta < 1.0 {
                        norm * theta / (1.0 - theta)
                    } else {
                        norm
                    }
                }
            }
            _ => norm,
        };
        if estimate <= cfg.kappa {
            return Ok((y_hat, true, k));
        }
        prev_norm = Some(norm);
    }
    Ok((y_hat, false, cfg.max_outer))
}

/// Solves the stage equations of one step of size `h` from `y0` with the
/// Jacobian frozen at `y0`.
pub fn newton_solve(
    method: &RadauMethod,
    problem: &IvpProblem,
    y0: &[f64],
    h: f64,
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome, SolverError> {
    cfg.validate()?;
    if y0.len() != problem.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: problem.dim(),
            got: y0.len(),
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(SolverError::InvalidInput(format!(
            "step size must be positive, got {h}"
        )));
    }
    let mut stats = StepStats::default();
    let jac = problem.jacobian(y0);
    stats.jac_evals += 1;
    let sys = method.system(cfg.backend);
    let solver = LinearSolver::new(sys, cfg.backend, h, &jac, &mut stats)?;
    let (stages, converged, iterations) =
        iterate(sys, &solver, problem, y0, h, problem.t0, cfg, &mut stats)?;
    Ok(NewtonOutcome {
        stages,
        converged,
        iterations,
        stats,
    })
}
