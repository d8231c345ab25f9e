//! Euler simulation of the mollified skew-fBm equation
//! `X = x + ∫ α φ_{1/n}(X_s) 1_d ds + B^H` and mollified local-time estimates.

mod drift;
mod solver;

pub use drift::{mollifier, Drift, FnDrift, LinearDrift, MollifiedDrift, ZeroDrift};
pub use solver::{
    default_eps_schedule, euler_path, euler_solve, local_time, min_resolved_eps, occupation_integral,
    solve_skew_mollified, LocalTimeEstimates, SkewConfig,
};
