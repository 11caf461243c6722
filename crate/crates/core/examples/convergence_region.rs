//! Character map of the convergence region of the low-rank splitting:
//! `#` where the measure is below 1, `.` elsewhere.
//!
//!     cargo run --example convergence_region -- 5 1
//!
//! The first argument is the stage count, the optional second one a sweep
//! count for the averaged measure (0 selects the spectral radius).

use radau_core::analysis::{convergence_region_scan, RegionGrid, RegionMeasure};
use radau_core::splitting::{aux_abscissae, build_split};

fn main() {
    let mut args = std::env::args().skip(1);
    let s: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let measure = match args.next().and_then(|a| a.parse().ok()) {
        Some(0) => RegionMeasure::SpectralRadius,
        Some(nu) => RegionMeasure::Averaged(nu),
        None => RegionMeasure::Averaged(1),
    };
    let split = build_split(s, &aux_abscissae(s).unwrap()).unwrap();
    let grid = RegionGrid {
        re_min: -30.0,
        re_max: 10.0,
        im_min: -20.0,
        im_max: 20.0,
        n_re: 81,
        n_im: 41,
    };
    let scan = convergence_region_scan(&split.crout, &grid, measure);

    for row in scan.samples.chunks(grid.n_re).rev() {
        let line: String = row
            .iter()
            .map(|x| {
                if x.q.re.abs() < 0.25 {
                    '|'
                } else if x.value < 1.0 {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        println!("{line}");
    }
    println!("s = {s}, {measure:?}, Re q in [-30, 10], Im q in [-20, 20]");
    println!("max over Re q <= 0: {:.4}", scan.max_left_half);
}
