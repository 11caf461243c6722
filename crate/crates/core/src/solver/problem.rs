use std::fmt;
use std::sync::Arc;

use crate::linalg::Matrix;

type RhsFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> Matrix + Send + Sync;
type ExactFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// Autonomous initial value problem `y' = f(y)`, `y(t0) = y0`, on
/// `[t0, t_end]`. Explicit time dependence is carried as an extra state
/// component with derivative 1.
#[derive(Clone)]
pub struct IvpProblem {
    pub name: String,
    pub t0: f64,
    pub t_end: f64,
    pub y0: Vec<f64>,
    rhs: Arc<RhsFn>,
    jac: Arc<JacFn>,
    exact: Option<Arc<ExactFn>>,
}

impl IvpProblem {
    pub fn new(
        name: impl Into<String>,
        t0: f64,
        t_end: f64,
        y0: Vec<f64>,
        rhs: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        jac: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            t0,
            t_end,
            y0,
            rhs: Arc::new(rhs),
            jac: Arc::new(jac),
            exact: None,
        }
    }

    pub fn with_exact(mut self, exact: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    pub fn rhs(&self, y: &[f64], out: &mut [f64]) {
        (self.rhs)(y, out)
    }

    pub fn jacobian(&self, y: &[f64]) -> Matrix {
        (self.jac)(y)
    }

    pub fn exact(&self, t: f64) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(t))
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Central-difference Jacobian, for checking the analytic one.
    pub fn fd_jacobian(&self, y: &[f64]) -> Matrix {
        let m = self.dim();
        let mut jac = Matrix::zeros(m, m);
        let mut fp = vec![0.0; m];
        let mut fm = vec![0.0; m];
        let mut yp = y.to_vec();
        for j in 0..m {
            let step = 1e-6 * (1.0 + y[j].abs());
            yp[j] = y[j] + step;
            self.rhs(&yp, &mut fp);
            yp[j] = y[j] - step;
            self.rhs(&yp, &mut fm);
            yp[j] = y[j];
            for i in 0..m {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
            }
        }
        jac
    }
}

impl fmt::Debug for IvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IvpProblem")
            .field("name", &self.name)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .field("dim", &self.dim())
            .finish()
    }
}
