//! Builds the collocation tableau and the single-pivot splitting for a
//! chosen stage count.
//!
//!     cargo run --example tableau_and_splitting -- 4

use radau_core::splitting::{aux_abscissae, build_split, target_pivot};
use radau_core::tableau::build_collocation;

fn main() {
    let s: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3);
    let tab = build_collocation(s).expect("stage count in range");

    println!("Radau IIA, s = {s}");
    println!("nodes   {:?}", tab.c);
    println!("weights {:?}", tab.b);
    println!("A =");
    for i in 0..s {
        let row: Vec<String> = (0..s).map(|j| format!("{:>12.8}", tab.a[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }

    let c_hat = aux_abscissae(s).expect("tabulated for s <= 5");
    let split = build_split(s, &c_hat).expect("valid abscissae");
    println!("\nauxiliary abscissae {c_hat:?}");
    println!("target pivot d_s    {:.16}", target_pivot(s));
    println!("Crout pivots of Â   {:?}", split.crout.pivots());
    println!("pivot spread        {:.1e}", split.pivot_spread());
    println!("Û − I =");
    for i in 0..s {
        let row: Vec<String> = (0..s)
            .map(|j| format!("{:>10.6}", split.strict_upper[(i, j)]))
            .collect();
        println!("  {}", row.join(" "));
    }
}
