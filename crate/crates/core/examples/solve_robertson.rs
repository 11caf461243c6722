//! Adaptive integration of Robertson's kinetics with each backend.

use radau_core::problems::lookup;
use radau_core::solver::{
    integrate_adaptive, mescd, AdaptiveOptions, Backend, InnerSweeps, NewtonConfig, RadauMethod,
};

fn main() {
    let spec = lookup("robertson").unwrap();
    let reference = spec.reference_at_end().unwrap();
    let method = RadauMethod::new(3).unwrap();
    let opts = AdaptiveOptions::new(1e-8, 1e-12).with_h0(spec.h0);

    for (backend, nu) in [
        (Backend::FullLu, 1),
        (Backend::SplitLowRank, 1),
        (Backend::SplitLowRank, 3),
        (Backend::CroutOfA, 2),
    ] {
        let cfg = NewtonConfig::default()
            .with_backend(backend)
            .with_inner(InnerSweeps::Fixed(nu));
        let (y, stats) = integrate_adaptive(&spec.problem, &method, opts, &cfg).unwrap();
        println!(
            "{:<8} nu={nu}  y(40) = [{:.10}, {:.6e}, {:.10}]  mescd {:.2}",
            backend.name(),
            y[0],
            y[1],
            y[2],
            mescd(&y, &reference)
        );
        println!(
            "          steps {} rejected {} f {} J {} LU {} of order {}",
            stats.steps,
            stats.rejected,
            stats.f_evals,
            stats.jac_evals,
            stats.lu_factorizations,
            stats.lu_dimension
        );
    }
}
