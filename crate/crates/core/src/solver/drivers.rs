use super::newton::iterate;
use super::stage::LinearSolver;
use super::{IvpProblem, NewtonConfig, RadauMethod, SolverError, StepStats};

/// Cap applied by [`mescd`] when the error vanishes.
pub const MESCD_CAP: f64 = 16.0;

/// Results of the full step and of the two half steps.
type StepPair = (Vec<f64>, Vec<f64>);

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MAX_SHRINK: f64 = 0.2;
const MIN_STEP_FRACTION: f64 = 1e-14;

/// Mixed error significant correct digits,
/// `−log10 max_k |y_k − ref_k| / (1 + |ref_k|)`.
pub fn mescd(y: &[f64], reference: &[f64]) -> f64 {
    let err = y
        .iter()
        .zip(reference)
        .map(|(a, r)| (a - r).abs() / (1.0 + r.abs()))
        .fold(0.0f64, f64::max);
    if err == 0.0 {
        MESCD_CAP
    } else {
        (-err.log10()).min(MESCD_CAP)
    }
}

fn check_problem(problem: &IvpProblem) -> Result<(), SolverError> {
    if !(problem.t0.is_finite() && problem.t_end.is_finite() && problem.t_end > problem.t0) {
        return Err(SolverError::InvalidInput(format!(
            "invalid interval [{}, {}]",
            problem.t0, problem.t_end
        )));
    }
    if problem.y0.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    Ok(())
}

/// One step with a fresh Jacobian at `y`; `None` when Newton gave up.
fn attempt(
    method: &RadauMethod,
    problem: &IvpProblem,
    y: &[f64],
    t: f64,
    h: f64,
    cfg: &NewtonConfig,
    stats: &mut StepStats,
) -> Result<Option<Vec<f64>>, SolverError> {
    let sys = method.system(cfg.backend);
    let jac = problem.jacobian(y);
    stats.jac_evals += 1;
    let solver = LinearSolver::new(sys, cfg.backend, h, &jac, stats)?;
    let (stages, converged, _) = iterate(sys, &solver, problem, y, h, t, cfg, stats)?;
    Ok(converged.then(|| stages.block(sys.s - 1).to_vec()))
}

/// `n_steps` steps of constant size `h` from `problem.t0`.
pub fn integrate_fixed(
    problem: &IvpProblem,
    method: &RadauMethod,
    h: f64,
    n_steps: usize,
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, StepStats), SolverError> {
    cfg.validate()?;
    if !(h.is_finite() && h > 0.0) {
        return Err(SolverError::InvalidInput(format!(
            "step size must be positive, got {h}"
        )));
    }
    let mut stats = StepStats::default();
    let mut y = problem.y0.clone();
    for n in 0..n_steps {
        let t = problem.t0 + n as f64 * h;
        stats.steps += 1;
        match attempt(method, problem, &y, t, h, cfg, &mut stats)? {
            Some(next) => {
                y = next;
                stats.accepted += 1;
            }
            None => return Err(SolverError::NewtonDiverged { t, h }),
        }
    }
    Ok((y, stats))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; defaults to `1e-4·(t_end − t0)`.
    pub h0: Option<f64>,
}

impl AdaptiveOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h0: None,
        }
    }

    pub fn with_h0(mut self, h0: f64) -> Self {
        self.h0 = Some(h0);
        self
    }
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self::new(1e-6, 1e-6)
    }
}

/// Integrates to `problem.t_end` with step-doubling error control.
///
/// Each attempt takes one step of size `h` and two of size `h/2` from the
/// same Jacobian, which costs two factorizations (one per step size). The
/// difference of the two results, divided by `2^p − 1` with `p = 2s − 1`,
/// estimates the local error of the half-step solution, which is the one
/// propagated.
pub fn integrate_adaptive(
    problem: &IvpProblem,
    method: &RadauMethod,
    opts: AdaptiveOptions,
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, StepStats), SolverError> {
    check_problem(problem)?;
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(SolverError::InvalidInput(
            "rtol and atol must be positive".into(),
        ));
    }
    let cfg = cfg.with_tolerances(opts.rtol, opts.atol);
    cfg.validate()?;

    let span = problem.t_end - problem.t0;
    let h_min = MIN_STEP_FRACTION * span;
    let mut h = opts.h0.unwrap_or(1e-4 * span);
    if !(h.is_finite() && h > 0.0) {
        return Err(SolverError::InvalidInput(format!(
            "initial step must be positive, got {h}"
        )));
    }
    let sys = method.system(cfg.backend);
    let s = sys.s;
    let p = (2 * s - 1) as i32;
    let richardson = 2f64.powi(p) - 1.0;
    let exponent = -1.0 / (p + 1) as f64;

    let mut stats = StepStats::default();
    let mut t = problem.t0;
    let mut y = problem.y0.clone();

    while t < problem.t_end {
        let remaining = problem.t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h < h_min {
            return Err(SolverError::StepSizeUnderflow { t, h });
        }
        stats.steps += 1;

        let jac = problem.jacobian(&y);
        stats.jac_evals += 1;
        let big = LinearSolver::new(sys, cfg.backend, h, &jac, &mut stats)?;
        let half = LinearSolver::new(sys, cfg.backend, 0.5 * h, &jac, &mut stats)?;

        let outcome = (|| -> Result<Option<StepPair>, SolverError> {
            let (full, ok, _) = iterate(sys, &big, problem, &y, h, t, &cfg, &mut stats)?;
            if !ok {
                return Ok(None);
            }
            let (mid, ok, _) = iterate(sys, &half, problem, &y, 0.5 * h, t, &cfg, &mut stats)?;
            if !ok {
                return Ok(None);
            }
            let y_mid = mid.block(s - 1).to_vec();
            let (two, ok, _) = iterate(
                sys,
                &half,
                problem,
                &y_mid,
                0.5 * h,
                t + 0.5 * h,
                &cfg,
                &mut stats,
            )?;
            if !ok {
                return Ok(None);
            }
            Ok(Some((
                full.block(s - 1).to_vec(),
                two.block(s - 1).to_vec(),
            )))
        })();

        let (y_full, y_two) = match outcome {
            Ok(Some(pair)) => pair,
            Ok(None) | Err(SolverError::NewtonDiverged { .. }) | Err(SolverError::NonFinite) => {
                stats.rejected += 1;
                h *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };

        let mut sum = 0.0;
        for ((a, b), y0) in y_two.iter().zip(&y_full).zip(&y) {
            let sc = opts.atol + opts.rtol * a.abs().max(y0.abs());
            sum += ((a - b) / (richardson * sc)).powi(2);
        }
        let err = (sum / y.len() as f64).sqrt();
        let factor = if err == 0.0 {
            MAX_GROWTH
        } else {
            (SAFETY * err.powf(exponent)).clamp(MAX_SHRINK, MAX_GROWTH)
        };

        if err <= 1.0 {
            t = if last { problem.t_end } else { t + h };
            y = y_two;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        h *= factor;
    }
    Ok((y, stats))
}
