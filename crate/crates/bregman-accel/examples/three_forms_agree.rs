//! Runs the three algebraic forms of each iteration in lockstep and reports
//! how far apart their primal sequences drift.
//!
//! The primal form keeps `(x, p)` pairs, the dual form keeps the multiplier
//! `y`, and the v form keeps `v = A'y`. All three produce the same primal
//! sequence in exact arithmetic; the printed divergence is pure floating
//! point noise (around 1e-15 relative).

use bregman_accel::problems::{gen_bp, MatrixKind, SignalKind};
use bregman_accel::solvers::{
    accel_dual_step, accel_primal_step, accel_v_step, dual_gd_step, lb_primal_step, lb_v_step,
    AlbDualState, AlbPrimalState, AlbVState, DualState, LbPrimalState, VState,
};
use bregman_accel::SolverConfig;

fn rel_gap(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(1.0);
    (diff / scale).sqrt()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = gen_bp(MatrixKind::Gaussian, SignalKind::Gaussian, 300, 120, 24, 5)?;
    let mu = 5.0;
    let config = SolverConfig::new(mu, 2.0 / (mu * problem.norm_a_sq()));
    let iters = 200;

    // Plain iteration: x from the primal form vs w from the dual and v forms.
    let mut primal = LbPrimalState::init(&problem);
    let mut dual = DualState::init(&problem, config.tau);
    let mut vform = VState::init(&problem, config.tau);
    let mut worst = 0.0f64;
    for _ in 0..iters {
        primal = lb_primal_step(&primal, &problem, &config);
        let (next_dual, w_dual) = dual_gd_step(&dual, &problem, &config);
        let (next_v, w_v) = lb_v_step(&vform, &problem, &config);
        worst = worst.max(rel_gap(&primal.x, &w_dual)).max(rel_gap(&primal.x, &w_v));
        dual = next_dual;
        vform = next_v;
    }
    println!("plain forms, {iters} iterations: max relative gap {worst:.3e}");

    // Accelerated iteration, same comparison.
    let mut primal = AlbPrimalState::init(&problem);
    let mut dual = AlbDualState::init(&problem, config.tau);
    let mut vform = AlbVState::init(&problem, config.tau);
    let mut worst = 0.0f64;
    for _ in 0..iters {
        primal = accel_primal_step(&primal, &problem, &config);
        let (next_dual, w_dual) = accel_dual_step(&dual, &problem, &config);
        let (next_v, w_v) = accel_v_step(&vform, &problem, &config);
        worst = worst.max(rel_gap(&primal.x, &w_dual)).max(rel_gap(&primal.x, &w_v));
        dual = next_dual;
        vform = next_v;
    }
    println!("accelerated forms, {iters} iterations: max relative gap {worst:.3e}");
    Ok(())
}
