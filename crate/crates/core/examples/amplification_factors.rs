//! Convergence factors of the two triangular splittings for s = 2..5.

use radau_core::analysis::{AmplificationReport, Scheme};
use radau_core::splitting::{aux_abscissae, build_split, crout_of_a};
use radau_core::tableau::build_collocation;

fn main() {
    println!(
        "{:>2}  {:<14} {:>8} {:>8} {:>10} {:>8} {:>8} {:>8}",
        "s", "scheme", "ρ̃", "ρ*", "x*", "ρ̃_1", "ρ*_1", "ρ∞_1"
    );
    for s in 2..=5 {
        let tab = build_collocation(s).unwrap();
        let split = build_split(s, &aux_abscissae(s).unwrap()).unwrap();
        let standard = crout_of_a(&tab).unwrap();
        for (scheme, factors) in [
            (Scheme::CroutOfA, &standard.crout),
            (Scheme::LowRankSplit, &split.crout),
        ] {
            let r = AmplificationReport::new(scheme, factors, &[1]).unwrap();
            let one = r.averaged[0];
            println!(
                "{s:>2}  {:<14} {:>8.4} {:>8.4} {:>10.4} {:>8.4} {:>8.4} {:>8.4}{}",
                scheme.tag(),
                r.rho_tilde,
                r.rho_star,
                r.x_star,
                one.rho_tilde,
                one.rho_star,
                one.rho_inf,
                if r.l_convergent() {
                    ""
                } else {
                    "  (not L-convergent)"
                }
            );
        }
    }
}
