//! Solves one compressed-sensing instance with the plain and the accelerated
//! iteration and compares their iteration counts.
//!
//! The solvers minimize `|x|_1 + |x|^2/(2 mu)` subject to `Ax = b`; for the
//! step length `tau = 2/(mu |A|^2)` used here the accelerated variant
//! typically converges several times faster on the same instance.

use bregman_accel::problems::{gen_bp, MatrixKind, SignalKind};
use bregman_accel::solvers::run_bp;
use bregman_accel::{SolverConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = gen_bp(MatrixKind::Gaussian, SignalKind::Gaussian, 1000, 400, 80, 3)?;
    let mu = 5.0;
    let mut config = SolverConfig::new(mu, 2.0 / (mu * problem.norm_a_sq()));
    config.residual_tol = 1e-5;
    config.max_iters = 5000;

    for variant in [Variant::Lb, Variant::Alb] {
        let trace = run_bp(&problem, &config, variant)?;
        let last = trace.last().expect("at least one iteration");
        println!(
            "{variant}: {} iterations ({}), residual {:.3e}, recovery error {:.3e}",
            trace.iterations(),
            if trace.converged() { "converged" } else { "hit the cap" },
            last.residual_rel,
            last.rel_error.expect("instance has a planted signal"),
        );
    }
    Ok(())
}
