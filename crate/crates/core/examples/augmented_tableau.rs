//! The auxiliary-stage formulation written as a 2s-stage Runge–Kutta
//! tableau, checked against the s-stage method on a logistic step.

use radau_core::linalg::Matrix;
use radau_core::solver::{reference_rk_step, IvpProblem};
use radau_core::splitting::{aux_abscissae, build_split};
use radau_core::tableau::{augmented_tableau, build_collocation};

fn main() {
    let s = 3;
    let tab = build_collocation(s).unwrap();
    let split = build_split(s, &aux_abscissae(s).unwrap()).unwrap();
    let aug = augmented_tableau(&tab, &split).unwrap();

    println!("c = {:?}", aug.c);
    for i in 0..aug.stages {
        let row: Vec<String> = (0..aug.stages)
            .map(|j| format!("{:>9.5}", aug.a[(i, j)]))
            .collect();
        println!("  {}", row.join(" "));
    }
    println!("b = {:?}", aug.b);

    let p = IvpProblem::new(
        "logistic",
        0.0,
        1.0,
        vec![0.1],
        |y, dy| dy[0] = 5.0 * y[0] * (1.0 - y[0]),
        |y| Matrix::from_rows(&[[5.0 * (1.0 - 2.0 * y[0])]]),
    );
    let a = reference_rk_step(&tab.a, &tab.b, &p, &p.y0, 0.3, 1e-15).unwrap();
    let b = reference_rk_step(&aug.a, &aug.b, &p, &p.y0, 0.3, 1e-15).unwrap();
    println!("s-stage step {:.16}, 2s-stage step {:.16}", a[0], b[0]);
}
