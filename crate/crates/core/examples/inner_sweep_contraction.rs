//! Drives the inner sweep by hand on one stiff step and prints how far each
//! sweep count is from the exact Newton increment.

use radau_core::linalg::{lu_factor, Matrix};
use radau_core::problems::prothero_robinson;
use radau_core::solver::{inner_sweep, residual, RadauMethod, StageVector};

fn main() {
    let s = 4;
    let method = RadauMethod::new(s).unwrap();
    let split = &method.split;
    let spec = prothero_robinson(-50.0, 1.0);
    let p = &spec.problem;
    let (y0, h) = (p.y0.clone(), 0.2);
    let m = y0.len();

    let jac = p.jacobian(&y0);
    let g = residual(&method, p, &y0, h, &StageVector::repeat(s, &y0)).unwrap();

    // exact increment from the full stage system
    let n = s * m;
    let k = Matrix::from_fn(n, n, |r, c| {
        let ident = if r == c { 1.0 } else { 0.0 };
        ident - h * split.a_hat[(r / m, c / m)] * jac[(r % m, c % m)]
    });
    let minus_g: Vec<f64> = g.as_slice().iter().map(|v| -v).collect();
    let exact = lu_factor(&k).unwrap().solve(&minus_g);

    // the sweep needs only the m×m factorization of (h·d)⁻¹I − J
    let mut shifted = jac.scale(-1.0);
    for i in 0..m {
        shifted[(i, i)] += 1.0 / (h * split.d);
    }
    let lu = lu_factor(&shifted).unwrap();
    let l_inv = lu_factor(split.l_hat()).unwrap().inverse();
    let scaled = g.kron_apply(&l_inv);
    let r =
        StageVector::from_vec(s, m, scaled.as_slice().iter().map(|v| -v / h).collect()).unwrap();

    println!("q = h·λ = {}", h * -50.0);
    for nu in 1..=8 {
        let delta = inner_sweep(split, h, &r, nu, &lu);
        let err = delta
            .as_slice()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("ν = {nu}: max error {err:.3e}");
    }
}
