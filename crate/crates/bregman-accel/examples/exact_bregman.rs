//! Runs the exact (non-linearized) Bregman iteration next to the augmented
//! Lagrangian method and shows they produce the same iterates.
//!
//! Each outer step solves an l1-regularized least-squares subproblem to high
//! accuracy (inner_tol). The Bregman subgradient p^k then equals A'lambda^k
//! for the augmented Lagrangian multiplier lambda^k, so the two methods are
//! one algorithm written two ways. The printed gaps shrink with inner_tol.

use bregman_accel::problems::{gen_bp, MatrixKind, SignalKind};
use bregman_accel::solvers::{auglag_step, bregman_exact_step, AuglagState, LbPrimalState};
use bregman_accel::SolverConfig;

fn rel_gap(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(1.0);
    (diff / scale).sqrt()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = gen_bp(MatrixKind::Gaussian, SignalKind::Gaussian, 50, 20, 4, 1)?;
    let mu = 5.0;
    let mut config = SolverConfig::new(mu, 2.0 / (mu * problem.norm_a_sq()));
    config.inner_tol = 1e-10;

    let mut bregman = LbPrimalState::init(&problem);
    let mut auglag = AuglagState::init(&problem);
    for outer in 1..=10 {
        bregman = bregman_exact_step(&bregman, &problem, &config)?;
        auglag = auglag_step(&auglag, &problem, &config)?;
        let x_gap = rel_gap(&bregman.x, &auglag.x);
        let p_gap = rel_gap(&bregman.p, &problem.a.matvec_t(&auglag.lambda));
        let residual: f64 = bregman.residual().iter().map(|v| v * v).sum::<f64>().sqrt();
        println!(
            "outer {outer:2}: |Ax-b| {:.3e}, x gap {:.3e}, p vs A'lambda gap {:.3e}",
            residual, x_gap, p_gap
        );
    }
    Ok(())
}
