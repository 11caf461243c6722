//! Bundled test problems with analytic Jacobians.
//!
//! Problems are looked up by name with optional parameters, e.g.
//! `prothero_robinson:lambda=-1e4` or `diffusion_chain:m=80`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::linalg::Matrix;
use crate::solver::IvpProblem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("bad parameter '{key}' for {problem}: {reason}")]
    BadParameter {
        problem: String,
        key: String,
        reason: String,
    },
}

/// Where the reference value at `t_end` comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceSource {
    ClosedForm,
    /// High-accuracy run of this library, pinned.
    Pinned(Vec<f64>),
    None,
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: String,
    pub problem: IvpProblem,
    pub h0: f64,
    pub stiffness: &'static str,
    pub reference: ReferenceSource,
}

impl ProblemSpec {
    pub fn reference_at_end(&self) -> Option<Vec<f64>> {
        match &self.reference {
            ReferenceSource::ClosedForm => self.problem.exact(self.problem.t_end),
            ReferenceSource::Pinned(y) => Some(y.clone()),
            ReferenceSource::None => None,
        }
    }
}

/// Names accepted by [`lookup`].
pub const PROBLEM_NAMES: [&str; 5] = [
    "test_equation",
    "prothero_robinson",
    "van_der_pol",
    "robertson",
    "diffusion_chain",
];

/// Van der Pol, `ε = 1e-6`, at `t = 2`: five stages, full LU, rtol = atol = 1e-13.
pub const VAN_DER_POL_REFERENCE: [f64; 2] = [1.706_167_437_542_892_1, -0.892_810_016_551_423_1];

/// Robertson kinetics at `t = 40`, computed the same way.
pub const ROBERTSON_REFERENCE: [f64; 3] = [
    0.715_827_068_719_347_1,
    9.185_534_764_558_018e-6,
    0.284_163_745_745_888_3,
];

/// `y' = λy`, `y(0) = 1` on `[0, 1]`. A complex `λ = re + i·im` with
/// `im ≠ 0` is embedded as the real 2×2 system for `(Re y, Im y)`.
pub fn test_equation(re: f64, im: f64) -> ProblemSpec {
    let problem = if im == 0.0 {
        IvpProblem::new(
            "test_equation",
            0.0,
            1.0,
            vec![1.0],
            move |y, dy| dy[0] = re * y[0],
            move |_| Matrix::from_rows(&[[re]]),
        )
        .with_exact(move |t| vec![(re * t).exp()])
    } else {
        IvpProblem::new(
            "test_equation",
            0.0,
            1.0,
            vec![1.0, 0.0],
            move |y, dy| {
                dy[0] = re * y[0] - im * y[1];
                dy[1] = im * y[0] + re * y[1];
            },
            move |_| Matrix::from_rows(&[[re, -im], [im, re]]),
        )
        .with_exact(move |t| {
            let r = (re * t).exp();
            vec![r * (im * t).cos(), r * (im * t).sin()]
        })
    };
    ProblemSpec {
        name: "test_equation".into(),
        problem,
        h0: 1e-3,
        stiffness: "stiff when |lambda| >> 1",
        reference: ReferenceSource::ClosedForm,
    }
}

/// `y' = λ(y − cos t) − sin t`, `y(0) = 1`, with exact solution `cos t`.
/// The state is `(y, t)`.
pub fn prothero_robinson(lambda: f64, t_end: f64) -> ProblemSpec {
    let problem = IvpProblem::new(
        "prothero_robinson",
        0.0,
        t_end,
        vec![1.0, 0.0],
        move |y, dy| {
            let t = y[1];
            dy[0] = lambda * (y[0] - t.cos()) - t.sin();
            dy[1] = 1.0;
        },
        move |y| {
            let t = y[1];
            Matrix::from_rows(&[[lambda, lambda * t.sin() - t.cos()], [0.0, 0.0]])
        },
    )
    .with_exact(|t| vec![t.cos(), t]);
    ProblemSpec {
        name: "prothero_robinson".into(),
        problem,
        h0: 1e-3,
        stiffness: "stiff for lambda << -1",
        reference: ReferenceSource::ClosedForm,
    }
}

/// `y1' = y2`, `ε·y2' = (1 − y1²)y2 − y1` on `[0, 2]` from `(2, −0.66)`.
pub fn van_der_pol(eps: f64) -> ProblemSpec {
    let problem = IvpProblem::new(
        "van_der_pol",
        0.0,
        2.0,
        vec![2.0, -0.66],
        move |y, dy| {
            dy[0] = y[1];
            dy[1] = ((1.0 - y[0] * y[0]) * y[1] - y[0]) / eps;
        },
        move |y| {
            Matrix::from_rows(&[
                [0.0, 1.0],
                [(-2.0 * y[0] * y[1] - 1.0) / eps, (1.0 - y[0] * y[0]) / eps],
            ])
        },
    );
    let reference = if eps == 1e-6 {
        ReferenceSource::Pinned(VAN_DER_POL_REFERENCE.to_vec())
    } else {
        ReferenceSource::None
    };
    ProblemSpec {
        name: "van_der_pol".into(),
        problem,
        h0: 1e-6,
        stiffness: "stiff relaxation oscillator, fast scale eps",
        reference,
    }
}

/// Robertson's chemical kinetics on `[0, 40]`.
pub fn robertson() -> ProblemSpec {
    let problem = IvpProblem::new(
        "robertson",
        0.0,
        40.0,
        vec![1.0, 0.0, 0.0],
        |y, dy| {
            let a = 0.04 * y[0];
            let b = 1e4 * y[1] * y[2];
            let c = 3e7 * y[1] * y[1];
            dy[0] = -a + b;
            dy[1] = a - b - c;
            dy[2] = c;
        },
        |y| {
            Matrix::from_rows(&[
                [-0.04, 1e4 * y[2], 1e4 * y[1]],
                [0.04, -1e4 * y[2] - 6e7 * y[1], -1e4 * y[1]],
                [0.0, 6e7 * y[1], 0.0],
            ])
        },
    );
    ProblemSpec {
        name: "robertson".into(),
        problem,
        h0: 1e-6,
        stiffness: "stiff kinetics, rate constants spanning 1e-2..1e7",
        reference: ReferenceSource::Pinned(ROBERTSON_REFERENCE.to_vec()),
    }
}

/// Eigenvalue `k` (1-based) of the scaled second-difference matrix of
/// order `m`.
fn diffusion_eigenvalue(m: usize, k: usize) -> f64 {
    let n1 = (m + 1) as f64;
    let s = (k as f64 * PI / (2.0 * n1)).sin();
    -4.0 * n1 * n1 * s * s
}

/// Method-of-lines heat equation `u_t = u_xx` on `(0, 1)` with zero
/// boundary values and `m` interior points. The initial profile mixes the
/// sine modes 1, 3 and `m`, so the solution is known in closed form.
pub fn diffusion_chain(m: usize, t_end: f64) -> ProblemSpec {
    let n1 = (m + 1) as f64;
    let scale = n1 * n1;
    let modes = [(1, 1.0), (3.min(m), 0.5), (m, 0.01)];
    let profile = move |t: f64| -> Vec<f64> {
        (1..=m)
            .map(|j| {
                let x = j as f64 / n1;
                modes
                    .iter()
                    .map(|&(k, a)| {
                        a * (diffusion_eigenvalue(m, k) * t).exp() * (k as f64 * PI * x).sin()
                    })
                    .sum()
            })
            .collect()
    };
    let y0 = profile(0.0);
    let problem = IvpProblem::new(
        "diffusion_chain",
        0.0,
        t_end,
        y0,
        move |y, dy| {
            for j in 0..m {
                let left = if j > 0 { y[j - 1] } else { 0.0 };
                let right = if j + 1 < m { y[j + 1] } else { 0.0 };
                dy[j] = scale * (left - 2.0 * y[j] + right);
            }
        },
        move |_| {
            Matrix::from_fn(m, m, |i, j| match i.abs_diff(j) {
                0 => -2.0 * scale,
                1 => scale,
                _ => 0.0,
            })
        },
    )
    .with_exact(profile);
    ProblemSpec {
        name: "diffusion_chain".into(),
        problem,
        h0: 1e-4,
        stiffness: "stiffness ratio grows like m^2",
        reference: ReferenceSource::ClosedForm,
    }
}

fn parse_params(name: &str, text: &str) -> Result<BTreeMap<String, f64>, ProblemError> {
    let mut map = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| ProblemError::BadParameter {
                problem: name.into(),
                key: item.into(),
                reason: "expected key=value".into(),
            })?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| ProblemError::BadParameter {
                problem: name.into(),
                key: key.into(),
                reason: format!("'{value}' is not a number"),
            })?;
        if !v.is_finite() {
            return Err(ProblemError::BadParameter {
                problem: name.into(),
                key: key.into(),
                reason: "must be finite".into(),
            });
        }
        map.insert(key.trim().to_string(), v);
    }
    Ok(map)
}

struct Params {
    problem: String,
    map: BTreeMap<String, f64>,
}

impl Params {
    fn take(&mut self, keys: &[&str], default: f64) -> f64 {
        keys.iter()
            .find_map(|k| self.map.remove(*k))
            .unwrap_or(default)
    }

    fn finish(self) -> Result<(), ProblemError> {
        match self.map.into_keys().next() {
            Some(key) => Err(ProblemError::BadParameter {
                problem: self.problem,
                key,
                reason: "unknown parameter".into(),
            }),
            None => Ok(()),
        }
    }

    fn bad(&self, key: &str, reason: &str) -> ProblemError {
        ProblemError::BadParameter {
            problem: self.problem.clone(),
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// Builds a problem from `name` or `name:key=value,...`.
pub fn lookup(spec: &str) -> Result<ProblemSpec, ProblemError> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), p),
        None => (spec.trim(), ""),
    };
    let mut p = Params {
        problem: name.to_string(),
        map: parse_params(name, params)?,
    };
    let out = match name {
        "test_equation" => {
            let re = p.take(&["re", "lambda"], -1.0);
            let im = p.take(&["im"], 0.0);
            test_equation(re, im)
        }
        "prothero_robinson" => {
            let lambda = p.take(&["lambda"], -1e4);
            let t_end = p.take(&["t_end"], 1.0);
            if t_end <= 0.0 {
                return Err(p.bad("t_end", "must be positive"));
            }
            prothero_robinson(lambda, t_end)
        }
        "van_der_pol" => {
            let eps = p.take(&["eps"], 1e-6);
            if eps <= 0.0 {
                return Err(p.bad("eps", "must be positive"));
            }
            van_der_pol(eps)
        }
        "robertson" => robertson(),
        "diffusion_chain" => {
            let m = p.take(&["m"], 80.0);
            let t_end = p.take(&["t_end"], 0.1);
            if m < 1.0 || m.fract() != 0.0 || m > 2000.0 {
                return Err(p.bad("m", "must be an integer in 1..=2000"));
            }
            if t_end <= 0.0 {
                return Err(p.bad("t_end", "must be positive"));
            }
            diffusion_chain(m as usize, t_end)
        }
        other => return Err(ProblemError::UnknownProblem(other.to_string())),
    };
    p.finish()?;
    Ok(out)
}

/// Every bundled problem with its default parameters.
pub fn registry() -> Vec<ProblemSpec> {
    PROBLEM_NAMES
        .iter()
        .map(|n| lookup(n).expect("default parameters are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jacobian_agrees(spec: &ProblemSpec, y: &[f64]) {
        let p = &spec.problem;
        let analytic = p.jacobian(y);
        let fd = p.fd_jacobian(y);
        let scale = analytic.max_abs().max(1.0);
        let diff = analytic.sub(&fd).max_abs();
        assert!(
            diff <= 1e-4 * scale,
            "{}: diff {diff} scale {scale}",
            spec.name
        );
    }

    #[test]
    fn registry_jacobians_match_finite_differences() {
        for spec in registry() {
            jacobian_agrees(&spec, &spec.problem.y0);
        }
        jacobian_agrees(&test_equation(-2.0, 10.0), &[0.3, -0.7]);
        jacobian_agrees(&robertson(), &[0.9, 3e-5, 0.1]);
        jacobian_agrees(&prothero_robinson(-50.0, 1.0), &[0.2, 0.7]);
    }

    #[test]
    fn test_equation_exact_solution() {
        let spec = test_equation(-1.0, 0.0);
        assert_eq!(spec.problem.exact(1.0).unwrap(), vec![(-1.0f64).exp()]);
        let spec = test_equation(0.0, 2.0);
        let y = spec.problem.exact(PI / 4.0).unwrap();
        assert!(y[0].abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prothero_robinson_exact_solution_satisfies_the_equation() {
        let spec = prothero_robinson(-1e4, 1.0);
        let p = &spec.problem;
        for t in [0.0, 0.3, 1.0] {
            let y = p.exact(t).unwrap();
            let mut dy = [0.0; 2];
            p.rhs(&y, &mut dy);
            assert!((dy[0] + t.sin()).abs() < 1e-12);
            assert_eq!(dy[1], 1.0);
        }
    }

    #[test]
    fn diffusion_jacobian_is_scaled_second_difference() {
        let m = 80;
        let spec = diffusion_chain(m, 0.1);
        let j = spec.problem.jacobian(&spec.problem.y0);
        let h = 1.0 / (m + 1) as f64;
        // apply to a quadratic sampled on the grid: u'' = 2 away from the ends
        let u: Vec<f64> = (1..=m).map(|k| (k as f64 * h).powi(2)).collect();
        let ju = j.mul_vec(&u);
        for v in &ju[..m - 1] {
            assert!((v - 2.0).abs() < 1e-8);
        }
        assert!((j[(0, 0)] + 2.0 / (h * h)).abs() < 1e-9);
        assert!((j[(0, 1)] - 1.0 / (h * h)).abs() < 1e-9);
        assert_eq!(j[(0, 2)], 0.0);
    }

    #[test]
    fn diffusion_exact_solution_satisfies_the_equation() {
        let spec = diffusion_chain(12, 0.1);
        let p = &spec.problem;
        let t = 0.01;
        let y = p.exact(t).unwrap();
        let mut dy = vec![0.0; 12];
        p.rhs(&y, &mut dy);
        let dt = 1e-7;
        let (a, b) = (p.exact(t + dt).unwrap(), p.exact(t - dt).unwrap());
        for k in 0..12 {
            let fd = (a[k] - b[k]) / (2.0 * dt);
            assert!((fd - dy[k]).abs() <= 1e-5 * (1.0 + dy[k].abs()), "k={k}");
        }
    }

    #[test]
    fn lookup_parses_parameters() {
        let spec = lookup("diffusion_chain:m=10,t_end=0.5").unwrap();
        assert_eq!(spec.problem.dim(), 10);
        assert_eq!(spec.problem.t_end, 0.5);
        let spec = lookup("test_equation:re=-3,im=4").unwrap();
        assert_eq!(spec.problem.dim(), 2);
        assert!(matches!(
            lookup("lorenz"),
            Err(ProblemError::UnknownProblem(_))
        ));
        assert!(matches!(
            lookup("robertson:k=1"),
            Err(ProblemError::BadParameter { .. })
        ));
        assert!(matches!(
            lookup("diffusion_chain:m=2.5"),
            Err(ProblemError::BadParameter { .. })
        ));
        assert!(matches!(
            lookup("van_der_pol:eps"),
            Err(ProblemError::BadParameter { .. })
        ));
        assert_eq!(
            lookup("van_der_pol:eps=1e-3").unwrap().reference,
            ReferenceSource::None
        );
    }

    #[test]
    fn registry_covers_every_name() {
        let names: Vec<String> = registry().into_iter().map(|s| s.name).collect();
        assert_eq!(names, PROBLEM_NAMES.to_vec());
    }
}
