//! Accuracy against cost on the heat-equation chain for a short tolerance
//! ladder. Pass the number of grid points as an argument (default 80).

use std::time::Instant;

use radau_core::problems::diffusion_chain;
use radau_core::solver::{
    integrate_adaptive, mescd, AdaptiveOptions, Backend, InnerSweeps, NewtonConfig, RadauMethod,
};

fn main() {
    let m: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(80);
    let spec = diffusion_chain(m, 0.1);
    let reference = spec.reference_at_end().unwrap();
    let method = RadauMethod::new(3).unwrap();
    let runs = [
        (
            "full",
            NewtonConfig::default().with_backend(Backend::FullLu),
        ),
        (
            "split ν=1",
            NewtonConfig::default().with_inner(InnerSweeps::Fixed(1)),
        ),
        (
            "split ν=2",
            NewtonConfig::default().with_inner(InnerSweeps::Fixed(2)),
        ),
        (
            "split ν=3",
            NewtonConfig::default().with_inner(InnerSweeps::Fixed(3)),
        ),
    ];
    println!("m = {m}");
    println!(
        "{:<10} {:>8} {:>7} {:>9} {:>6} {:>6}",
        "run", "tol", "mescd", "ms", "steps", "LU"
    );
    for (label, cfg) in runs {
        for i in 0..5 {
            let tol = 10f64.powf(-4.0 - i as f64);
            let start = Instant::now();
            let (y, stats) = integrate_adaptive(
                &spec.problem,
                &method,
                AdaptiveOptions::new(tol, tol).with_h0(tol),
                &cfg,
            )
            .unwrap();
            println!(
                "{label:<10} {tol:>8.0e} {:>7.2} {:>9.2} {:>6} {:>6}",
                mescd(&y, &reference),
                start.elapsed().as_secs_f64() * 1e3,
                stats.steps,
                stats.lu_factorizations
            );
        }
    }
}
