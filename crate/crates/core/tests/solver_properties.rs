use radau_core::linalg::Matrix;
use radau_core::problems::{self, lookup, registry, ReferenceSource};
use radau_core::solver::{
    integrate_adaptive, integrate_fixed, mescd, newton_solve, AdaptiveOptions, Backend,
    InnerSweeps, IvpProblem, NewtonConfig, RadauMethod,
};

fn tight(backend: Backend, inner: InnerSweeps) -> NewtonConfig {
    NewtonConfig {
        max_outer: 100,
        ..NewtonConfig::default()
            .with_backend(backend)
            .with_inner(inner)
            .with_tolerances(1e-14, 1e-14)
    }
}

/// `y' = Λy` with `Λ` block diagonal: real entries or 2×2 rotation-scaling
/// blocks for complex eigenvalues.
fn linear_system(eigs: &[(f64, f64)]) -> IvpProblem {
    let mut blocks = Vec::new();
    for &(re, im) in eigs {
        if im == 0.0 {
            blocks.push(vec![vec![re]]);
        } else {
            blocks.push(vec![vec![re, -im], vec![im, re]]);
        }
    }
    let m: usize = blocks.iter().map(Vec::len).sum();
    let mut lambda = Matrix::zeros(m, m);
    let mut off = 0;
    for b in &blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                lambda[(off + i, off + j)] = *v;
            }
        }
        off += b.len();
    }
    let y0: Vec<f64> = (0..m).map(|k| 1.0 + 0.25 * k as f64).collect();
    let jac = lambda.clone();
    IvpProblem::new(
        "linear",
        0.0,
        1.0,
        y0,
        move |y, dy| dy.copy_from_slice(&lambda.mul_vec(y)),
        move |_| jac.clone(),
    )
}

#[test]
fn split_stage_values_match_full_newton() {
    let method = RadauMethod::new(3).unwrap();
    let p = linear_system(&[(-1.0, 0.0)]);
    let full = newton_solve(
        &method,
        &p,
        &p.y0,
        1.0,
        &tight(Backend::FullLu, InnerSweeps::Fixed(1)),
    )
    .unwrap();
    let split = newton_solve(
        &method,
        &p,
        &p.y0,
        1.0,
        &tight(Backend::SplitLowRank, InnerSweeps::Fixed(3)),
    )
    .unwrap();
    assert!(full.converged && split.converged);
    for (a, b) in full.stages.as_slice().iter().zip(split.stages.as_slice()) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn backends_agree_across_stiffness_and_stage_counts() {
    let qs = [
        (-0.1, 0.0),
        (-10.0, 0.0),
        (-1e4, 0.0),
        (0.0, 10.0),
        (0.0, 1e4),
    ];
    for s in 2..=5 {
        let method = RadauMethod::new(s).unwrap();
        for &q in &qs {
            let p = linear_system(&[q]);
            let full = newton_solve(
                &method,
                &p,
                &p.y0,
                1.0,
                &tight(Backend::FullLu, InnerSweeps::Fixed(1)),
            )
            .unwrap();
            let split = newton_solve(
                &method,
                &p,
                &p.y0,
                1.0,
                &tight(
                    Backend::SplitLowRank,
                    InnerSweeps::ToConvergence { cap: 50 },
                ),
            )
            .unwrap();
            let crout = newton_solve(
                &method,
                &p,
                &p.y0,
                1.0,
                &tight(Backend::CroutOfA, InnerSweeps::ToConvergence { cap: 50 }),
            )
            .unwrap();
            let scale = full.stages.max_abs().max(1.0);
            for (a, b) in full.stages.as_slice().iter().zip(split.stages.as_slice()) {
                assert!((a - b).abs() <= 1e-10 * scale, "s={s} q={q:?}: {a} vs {b}");
            }
            for (a, b) in full.endpoint().iter().zip(crout.endpoint()) {
                assert!((a - b).abs() <= 1e-10 * scale, "crout s={s} q={q:?}");
            }
        }
    }
}

#[test]
fn inner_sweeps_cost_no_function_evaluations() {
    let method = RadauMethod::new(4).unwrap();
    let p = lookup("robertson").unwrap().problem;
    for nu in [1, 2, 5] {
        let cfg = NewtonConfig::default().with_inner(InnerSweeps::Fixed(nu));
        let out = newton_solve(&method, &p, &p.y0, 1e-3, &cfg).unwrap();
        assert_eq!(out.stats.f_evals, 4 * out.iterations);
        assert_eq!(out.stats.jac_evals, 1);
        assert_eq!(out.stats.inner_sweeps_total, nu * out.iterations);
    }
}

#[test]
fn stiff_prothero_robinson_step_converges_quickly() {
    let spec = problems::prothero_robinson(-1e4, 1.0);
    let p = &spec.problem;
    for s in 2..=5 {
        let method = RadauMethod::new(s).unwrap();
        let cfg = NewtonConfig::default().with_inner(InnerSweeps::Fixed(2));
        let out = newton_solve(&method, p, &p.y0, 0.1, &cfg).unwrap();
        assert!(
            out.converged && out.iterations <= 10,
            "s={s}: {}",
            out.iterations
        );
    }
}

fn observed_order(s: usize) -> f64 {
    let spec = problems::prothero_robinson(-1.0, 1.0);
    let p = &spec.problem;
    let exact = p.exact(1.0).unwrap();
    let method = RadauMethod::new(s).unwrap();
    let cfg = tight(Backend::FullLu, InnerSweeps::Fixed(1));
    let n0 = if s == 2 { 8 } else { 4 };
    let errs: Vec<f64> = (0..5)
        .map(|k| {
            let n = n0 << k;
            let (y, _) = integrate_fixed(p, &method, 1.0 / n as f64, n, &cfg).unwrap();
            (y[0] - exact[0]).abs()
        })
        .collect();
    // least-squares slope of log err against log h
    let xs: Vec<f64> = (0..5).map(|k| -(k as f64) * 2f64.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn fixed_step_order_is_two_s_minus_one() {
    for s in [2, 3] {
        let slope = observed_order(s);
        assert!(
            (slope - (2 * s - 1) as f64).abs() <= 0.2,
            "s={s} slope={slope}"
        );
    }
}

#[test]
fn every_backend_damps_very_stiff_decay() {
    let p = linear_system(&[(-1e6, 0.0)]);
    for s in 2..=5 {
        let method = RadauMethod::new(s).unwrap();
        for backend in [Backend::FullLu, Backend::SplitLowRank, Backend::CroutOfA] {
            let (y, _) = integrate_fixed(
                &p,
                &method,
                1.0,
                1,
                &NewtonConfig::default().with_backend(backend),
            )
            .unwrap();
            assert!(y[0].abs() <= 1e-5, "s={s} {backend:?}: {}", y[0]);
        }
    }
}

#[test]
fn adaptive_linear_problem_meets_tolerance() {
    let spec = problems::test_equation(-1.0, 0.0);
    let method = RadauMethod::new(3).unwrap();
    let (y, _) = integrate_adaptive(
        &spec.problem,
        &method,
        AdaptiveOptions::new(1e-10, 1e-10),
        &NewtonConfig::default(),
    )
    .unwrap();
    assert!((y[0] - (-1.0f64).exp()).abs() <= 1e-8);
}

#[test]
fn oversized_initial_step_is_rejected_then_recovers() {
    let spec = lookup("robertson").unwrap();
    let method = RadauMethod::new(3).unwrap();
    let opts = AdaptiveOptions::new(1e-6, 1e-10).with_h0(40.0);
    let (y, stats) =
        integrate_adaptive(&spec.problem, &method, opts, &NewtonConfig::default()).unwrap();
    assert!(stats.rejected >= 1);
    assert!(mescd(&y, &spec.reference_at_end().unwrap()) > 5.0);
}

#[test]
fn van_der_pol_accuracy_improves_with_tolerance() {
    let spec = lookup("van_der_pol").unwrap();
    let reference = spec.reference_at_end().unwrap();
    let method = RadauMethod::new(3).unwrap();
    let digits: Vec<f64> = (0..5)
        .map(|i| {
            let tol = 10f64.powi(-4 - i);
            let opts = AdaptiveOptions::new(tol, tol).with_h0(spec.h0);
            let (y, _) =
                integrate_adaptive(&spec.problem, &method, opts, &NewtonConfig::default()).unwrap();
            mescd(&y, &reference)
        })
        .collect();
    for w in digits.windows(2) {
        assert!(w[1] > w[0], "{digits:?}");
    }
}

#[test]
fn closed_form_problems_reach_ten_digits() {
    let method = RadauMethod::new(3).unwrap();
    let cfg = NewtonConfig::default().with_backend(Backend::FullLu);
    for spec in registry() {
        if spec.reference != ReferenceSource::ClosedForm {
            continue;
        }
        let opts = AdaptiveOptions::new(1e-12, 1e-12).with_h0(spec.h0);
        let (y, _) = integrate_adaptive(&spec.problem, &method, opts, &cfg).unwrap();
        let digits = mescd(&y, &spec.reference_at_end().unwrap());
        assert!(digits >= 10.0, "{}: {digits}", spec.name);
    }
}

#[test]
fn pinned_references_are_reproduced() {
    let method = RadauMethod::new(5).unwrap();
    let cfg = NewtonConfig::default().with_backend(Backend::FullLu);
    for name in ["van_der_pol", "robertson"] {
        let spec = lookup(name).unwrap();
        let opts = AdaptiveOptions::new(1e-13, 1e-13).with_h0(spec.h0);
        let (y, _) = integrate_adaptive(&spec.problem, &method, opts, &cfg).unwrap();
        assert!(
            mescd(&y, &spec.reference_at_end().unwrap()) >= 15.0,
            "{name}"
        );
    }
}
