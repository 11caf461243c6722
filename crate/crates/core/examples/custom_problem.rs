//! Defining a problem of your own: the Oregonator reaction with fixed and
//! adaptive steps.

use radau_core::linalg::Matrix;
use radau_core::solver::{
    integrate_adaptive, integrate_fixed, AdaptiveOptions, IvpProblem, NewtonConfig, RadauMethod,
};

fn main() {
    let (s_par, w, q) = (77.27, 0.161, 8.375e-6);
    let p = IvpProblem::new(
        "oregonator",
        0.0,
        30.0,
        vec![1.0, 2.0, 3.0],
        move |y, dy| {
            dy[0] = s_par * (y[1] - y[0] * y[1] + y[0] - q * y[0] * y[0]);
            dy[1] = (-y[1] - y[0] * y[1] + y[2]) / s_par;
            dy[2] = w * (y[0] - y[2]);
        },
        move |y| {
            Matrix::from_rows(&[
                [
                    s_par * (1.0 - y[1] - 2.0 * q * y[0]),
                    s_par * (1.0 - y[0]),
                    0.0,
                ],
                [-y[1] / s_par, (-1.0 - y[0]) / s_par, 1.0 / s_par],
                [w, 0.0, -w],
            ])
        },
    );
    let fd = p.fd_jacobian(&p.y0);
    println!(
        "Jacobian check: {:.1e}",
        p.jacobian(&p.y0).sub(&fd).max_abs()
    );

    let method = RadauMethod::new(3).unwrap();
    let cfg = NewtonConfig::default();
    let (y, stats) = integrate_adaptive(
        &p,
        &method,
        AdaptiveOptions::new(1e-7, 1e-7).with_h0(1e-4),
        &cfg,
    )
    .unwrap();
    println!(
        "adaptive: y(30) = {y:?}, {} steps, {} rejected",
        stats.steps, stats.rejected
    );

    match integrate_fixed(&p, &method, 1e-3, 30_000, &cfg.with_tolerances(1e-7, 1e-7)) {
        Ok((y, _)) => println!("fixed h = 1e-3: y(30) = {y:?}"),
        Err(e) => println!("fixed h = 1e-3 failed: {e}"),
    }
}
