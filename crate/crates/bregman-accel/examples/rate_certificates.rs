//! Checks the worst-case convergence guarantees against an actual run.
//!
//! For step `tau <= 1/(mu |A|^2)` the dual objective gap after k plain
//! iterations is at most `|y* - y0|^2 / (2 tau k)`, and after k accelerated
//! iterations at most `2 |y* - y0|^2 / (tau k^2)`. Both checks need a
//! high-accuracy reference optimum, which is computed first. The printed
//! ratio is (observed gap) / (guaranteed bound); values below 1 mean the
//! guarantee holds with room to spare.

use bregman_accel::diagnostics::{check_alb_rate, check_lb_rate, reference_dual_optimum};
use bregman_accel::problems::{gen_bp, MatrixKind, SignalKind};
use bregman_accel::solvers::run_bp;
use bregman_accel::{ObjectiveKind, SolverConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = gen_bp(MatrixKind::Gaussian, SignalKind::Gaussian, 100, 40, 8, 12)?;
    let mu = 5.0;
    let mut config = SolverConfig::new(mu, 1.0 / (mu * problem.norm_a_sq()));
    config.max_iters = 500;
    config.residual_tol = 1e-300; // run all 500 iterations

    let reference = reference_dual_optimum(&problem, mu, ObjectiveKind::L1);
    println!(
        "reference dual optimum: gradient norm {:.3e} after {} iterations",
        reference.grad_norm, reference.iters
    );

    let lb = run_bp(&problem, &config, Variant::LbDual)?;
    let report = check_lb_rate(&lb, &problem, &reference)?;
    println!(
        "plain bound:       {} checkpoints, {} violations, worst gap/bound {:.3}",
        report.checked, report.violations, report.max_ratio
    );
    if let Some(monotone) = report.monotone {
        println!("dual objective non-increasing along the plain run: {monotone}");
    }

    let alb = run_bp(&problem, &config, Variant::AlbDual)?;
    let report = check_alb_rate(&alb, &problem, &reference)?;
    println!(
        "accelerated bound: {} checkpoints, {} violations, worst gap/bound {:.3}",
        report.checked, report.violations, report.max_ratio
    );
    Ok(())
}
