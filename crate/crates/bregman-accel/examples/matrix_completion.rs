//! Recovers a low-rank matrix from a subset of its entries.
//!
//! The instance plants a random rank-r matrix, reveals p entries chosen
//! uniformly at random, and asks for the minimum-nuclear-norm completion.
//! Each iteration applies singular value shrinkage, so the cost is one SVD
//! per step; the accelerated variant needs visibly fewer of them.

use bregman_accel::problems::{gen_mc, ProblemInstance};
use bregman_accel::solvers::run_mc;
use bregman_accel::{ObjectiveKind, SolverConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 100;
    let rank = 10;
    let fr = 0.2; // degrees of freedom / observations
    let problem = gen_mc(n, rank, fr, 0)?;
    println!(
        "completion instance: {n}x{n}, planted rank {rank}, {} observed entries (sr {:.2})",
        problem.p(),
        problem.p() as f64 / (n * n) as f64
    );

    let mu = bregman_accel::problems::default_mu(&ProblemInstance::Mc(problem.clone()));
    let mut config = SolverConfig::new(mu, 1.0 / mu);
    config.objective = ObjectiveKind::Nuclear;
    config.residual_tol = 1e-4;
    config.max_iters = 2000;

    for variant in [Variant::Lb, Variant::Alb] {
        let trace = run_mc(&problem, &config, variant)?;
        let last = trace.last().expect("at least one iteration");
        println!(
            "{variant}: {} iterations, residual on observed entries {:.3e}, full-matrix error {:.3e}",
            trace.iterations(),
            last.residual_rel,
            last.rel_error.expect("instance has a planted matrix"),
        );
    }
    Ok(())
}
