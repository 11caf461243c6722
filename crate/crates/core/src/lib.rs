//! Radau IIA integration of stiff ODEs where each Newton iteration is
//! approximated by sweeps that need only one `m×m` factorization.
//!
//! * [`tableau`]: Radau nodes, the collocation tableau and its Legendre
//!   similarity form.
//! * [`splitting`]: auxiliary abscissae with equal Crout pivots and the
//!   matrices used by the sweep.
//! * [`analysis`]: amplification factors and convergence-region scans.
//! * [`solver`]: stage residual, inner sweep, Newton iteration and
//!   fixed/adaptive drivers with three linear-algebra backends.
//! * [`problems`]: bundled test problems.
//! * [`cli`]: the `radau` command-line tool.

pub mod analysis;
pub mod cli;
pub mod linalg;
pub mod problems;
pub mod reference_values;
pub mod solver;
pub mod splitting;
pub mod tableau;
