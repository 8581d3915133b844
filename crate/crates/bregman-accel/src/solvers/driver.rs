//! Runs a configured solver to completion and records a trace.

use std::time::Instant;

use crate::diagnostics::{RunInfo, RunStatus, Trace, TraceRecord};
use crate::error::Error;
use crate::linalg::norm2;
use crate::problems::{
    dual_objective, lagrangian, rng_algorithm, BasisPursuitProblem, MatrixCompletionProblem,
    ProblemInstance,
};
use crate::prox::ObjectiveKind;
use crate::solvers::{
    accel_dual_step, accel_primal_step, accel_v_step, auglag_step, bregman_exact_step,
    dual_gd_step, lb_primal_step, lb_v_step, mc_alb_step, mc_lb_step, AlbDualState,
    AlbPrimalState, AlbVState, AuglagState, DualState, LbPrimalState, McState, SolverConfig,
    VState,
};
use serde::{Deserialize, Serialize};

/// Which iteration to run.
///
/// `Lb` and `Alb` are the memory-lean defaults: the product form for vector
/// problems, the matrix solvers for completion. The explicit primal and dual
/// forms exist for verification; `Bregman` and `Auglag` are the exact
/// (subproblem-solving) iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Lb,
    Alb,
    LbPrimal,
    LbDual,
    AlbPrimal,
    AlbDual,
    Bregman,
    Auglag,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Lb,
        Variant::Alb,
        Variant::LbPrimal,
        Variant::LbDual,
        Variant::AlbPrimal,
        Variant::AlbDual,
        Variant::Bregman,
        Variant::Auglag,
    ];

    pub fn is_accelerated(&self) -> bool {
        matches!(self, Variant::Alb | Variant::AlbPrimal | Variant::AlbDual)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Lb => "lb",
            Variant::Alb => "alb",
            Variant::LbPrimal => "lb-primal",
            Variant::LbDual => "lb-dual",
            Variant::AlbPrimal => "alb-primal",
            Variant::AlbDual => "alb-dual",
            Variant::Bregman => "bregman",
            Variant::Auglag => "auglag",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "lb" => Variant::Lb,
            "alb" => Variant::Alb,
            "lb-primal" => Variant::LbPrimal,
            "lb-dual" => Variant::LbDual,
            "alb-primal" => Variant::AlbPrimal,
            "alb-dual" => Variant::AlbDual,
            "bregman" => Variant::Bregman,
            "auglag" => Variant::Auglag,
            other => {
                return Err(Error::invalid(format!(
                    "unknown variant {other:?}; expected one of lb, alb, lb-primal, lb-dual, \
                     alb-primal, alb-dual, bregman, auglag"
                )))
            }
        })
    }
}

fn run_info(config: &SolverConfig, variant: Variant) -> RunInfo {
    RunInfo {
        variant: variant.to_string(),
        objective: config.objective.to_string(),
        schedule: config.schedule.to_string(),
        mu: config.mu,
        tau: config.tau,
        max_iters: config.max_iters,
        residual_tol: config.residual_tol,
        inner_tol: config.inner_tol,
        mc_shrink_arg: config.mc_shrink_arg.to_string(),
    }
}

fn bp_meta(problem: &BasisPursuitProblem) -> serde_json::Value {
    match &problem.gen_meta {
        Some(meta) => serde_json::json!({
            "kind": "bp",
            "n": meta.n,
            "m": meta.m,
            "s": meta.s,
            "matrix_kind": meta.matrix_kind,
            "signal_kind": meta.signal_kind,
            "seed": meta.seed,
            "rng": rng_algorithm(),
        }),
        None => serde_json::json!({
            "kind": "bp",
            "n": problem.n(),
            "m": problem.m(),
        }),
    }
}

fn mc_meta(problem: &MatrixCompletionProblem) -> serde_json::Value {
    match &problem.gen_meta {
        Some(meta) => serde_json::json!({
            "kind": "mc",
            "n": meta.n,
            "r": meta.r,
            "p": meta.p,
            "fr": meta.fr,
            "sr": meta.sr,
            "seed": meta.seed,
            "rng": rng_algorithm(),
        }),
        None => serde_json::json!({
            "kind": "mc",
            "n": problem.n,
            "r": problem.r,
            "p": problem.p(),
        }),
    }
}

enum BpState {
    V(VState),
    Dual(DualState),
    Primal(LbPrimalState),
    AlbV(AlbVState),
    AlbDual(AlbDualState),
    AlbPrimal(AlbPrimalState),
    Bregman(LbPrimalState),
    Auglag(AuglagState),
}

/// Runs `variant` on a vector problem until the relative residual drops below
/// `config.residual_tol` or the iteration cap is reached.
///
/// When `b = 0` the relative metric is undefined and the same tolerance is
/// applied to the absolute residual instead. Dual-form runs additionally
/// record the dual objective `G_mu(y^k)` and the augmented Lagrangian at the
/// pair the step evaluated; for the plain dual form the latter satisfies
/// `lagrangian[k] = -g_mu[k-1]`.
pub fn run_bp(
    problem: &BasisPursuitProblem,
    config: &SolverConfig,
    variant: Variant,
) -> Result<Trace, Error> {
    config.validate()?;
    if config.objective == ObjectiveKind::Nuclear {
        return Err(Error::invalid("vector solvers need an l1-family objective"));
    }
    let primal_form = matches!(
        variant,
        Variant::LbPrimal | Variant::AlbPrimal | Variant::Bregman | Variant::Auglag
    );
    if primal_form && config.objective != ObjectiveKind::L1 {
        return Err(Error::invalid(format!(
            "variant {variant} supports only the plain l1 objective; \
             the nonnegative variant exists in the lb, alb, lb-dual and alb-dual forms"
        )));
    }

    let mut state = match variant {
        Variant::Lb => BpState::V(VState::init(problem, config.tau)),
        Variant::Alb => BpState::AlbV(AlbVState::init(problem, config.tau)),
        Variant::LbDual => BpState::Dual(DualState::init(problem, config.tau)),
        Variant::AlbDual => BpState::AlbDual(AlbDualState::init(problem, config.tau)),
        Variant::LbPrimal => BpState::Primal(LbPrimalState::init(problem)),
        Variant::AlbPrimal => BpState::AlbPrimal(AlbPrimalState::init(problem)),
        Variant::Bregman => BpState::Bregman(LbPrimalState::init(problem)),
        Variant::Auglag => BpState::Auglag(AuglagState::init(problem)),
    };

    let denom = if problem.b_norm() > 0.0 { problem.b_norm() } else { 1.0 };
    let mut records = Vec::new();
    let mut status = RunStatus::IterCap;
    let start = Instant::now();

    for k in 1..=config.max_iters {
        let mut g_mu = None;
        let mut lagr = None;
        let x_cur: Vec<f64>;
        let resid_norm: f64;
        state = match state {
            BpState::V(s) => {
                let (next, w) = lb_v_step(&s, problem, config);
                resid_norm = norm2(next.residual());
                x_cur = w;
                BpState::V(next)
            }
            BpState::AlbV(s) => {
                let (next, w) = accel_v_step(&s, problem, config);
                resid_norm = norm2(next.residual());
                x_cur = w;
                BpState::AlbV(next)
            }
            BpState::Dual(s) => {
                let y_eval = s.y.clone();
                let (next, w) = dual_gd_step(&s, problem, config);
                resid_norm = norm2(next.residual());
                lagr = Some(lagrangian(&w, &y_eval, problem, config.mu, config.objective));
                g_mu = Some(dual_objective(&next.y, problem, config.mu, config.objective).0);
                x_cur = w;
                BpState::Dual(next)
            }
            BpState::AlbDual(s) => {
                let y_eval = s.y_tilde.clone();
                let (next, w) = accel_dual_step(&s, problem, config);
                resid_norm = norm2(next.residual());
                lagr = Some(lagrangian(&w, &y_eval, problem, config.mu, config.objective));
                g_mu = Some(dual_objective(&next.y, problem, config.mu, config.objective).0);
                x_cur = w;
                BpState::AlbDual(next)
            }
            BpState::Primal(s) => {
                let next = lb_primal_step(&s, problem, config);
                resid_norm = norm2(next.residual());
                x_cur = next.x.clone();
                BpState::Primal(next)
            }
            BpState::AlbPrimal(s) => {
                let next = accel_primal_step(&s, problem, config);
                resid_norm = norm2(next.residual());
                x_cur = next.x.clone();
                BpState::AlbPrimal(next)
            }
            BpState::Bregman(s) => {
                let next = bregman_exact_step(&s, problem, config)?;
                resid_norm = norm2(next.residual());
                x_cur = next.x.clone();
                BpState::Bregman(next)
            }
            BpState::Auglag(s) => {
                let next = auglag_step(&s, problem, config)?;
                resid_norm = norm2(next.residual());
                x_cur = next.x.clone();
                BpState::Auglag(next)
            }
        };
        let residual_rel = resid_norm / denom;
        records.push(TraceRecord {
            k,
            residual_rel,
            rel_error: problem.x_true.as_ref().map(|xt| crate::diagnostics::rel_error(&x_cur, xt)),
            g_mu,
            lagrangian: lagr,
            wall_ns: start.elapsed().as_nanos() as u64,
        });
        if residual_rel < config.residual_tol {
            status = RunStatus::Converged;
            break;
        }
    }

    Ok(Trace {
        records,
        status,
        config: run_info(config, variant),
        instance: bp_meta(problem),
    })
}

/// Matrix-completion counterpart of [`run_bp`]; only the `lb` and `alb`
/// variants have matrix forms.
pub fn run_mc(
    problem: &MatrixCompletionProblem,
    config: &SolverConfig,
    variant: Variant,
) -> Result<Trace, Error> {
    config.validate()?;
    if config.objective != ObjectiveKind::Nuclear {
        return Err(Error::invalid("matrix completion needs the nuclear objective"));
    }
    let accelerated = match variant {
        Variant::Lb => false,
        Variant::Alb => true,
        other => {
            return Err(Error::invalid(format!(
                "variant {other} has no matrix form; use lb or alb"
            )))
        }
    };
    let denom = if problem.observed_norm() > 0.0 { problem.observed_norm() } else { 1.0 };
    let mut state = McState::init(problem);
    let mut records = Vec::new();
    let mut status = RunStatus::IterCap;
    let start = Instant::now();
    for k in 1..=config.max_iters {
        state = if accelerated {
            mc_alb_step(&state, problem, config)?
        } else {
            mc_lb_step(&state, problem, config)?
        };
        let residual_rel = norm2(state.residual()) / denom;
        records.push(TraceRecord {
            k,
            residual_rel,
            rel_error: problem
                .m_true
                .as_ref()
                .map(|m| crate::diagnostics::rel_error_frob(&state.x, m)),
            g_mu: None,
            lagrangian: None,
            wall_ns: start.elapsed().as_nanos() as u64,
        });
        if residual_rel < config.residual_tol {
            status = RunStatus::Converged;
            break;
        }
    }
    Ok(Trace {
        records,
        status,
        config: run_info(config, variant),
        instance: mc_meta(problem),
    })
}

/// Dispatches on the problem kind.
pub fn run(
    instance: &ProblemInstance,
    config: &SolverConfig,
    variant: Variant,
) -> Result<Trace, Error> {
    match instance {
        ProblemInstance::Bp(p) => run_bp(p, config, variant),
        ProblemInstance::Mc(p) => run_mc(p, config, variant),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_bp, gen_mc, MatrixKind, SignalKind};

    fn bp_problem(seed: u64) -> BasisPursuitProblem {
        gen_bp(MatrixKind::Gaussian, SignalKind::Gaussian, 100, 40, 8, seed).unwrap()
    }

    fn bp_config(problem: &BasisPursuitProblem) -> SolverConfig {
        let mu = 5.0;
        SolverConfig::new(mu, 2.0 / (mu * problem.norm_a_sq()))
    }

    #[test]
    fn plain_run_converges_and_validates() {
        let problem = bp_problem(1);
        let trace = run_bp(&problem, &bp_config(&problem), Variant::Lb).unwrap();
        assert!(trace.converged(), "stopped at {:?}", trace.last());
        trace.validate().unwrap();
        let last = trace.last().unwrap();
        assert!(last.residual_rel < 1e-5);
        assert!(last.rel_error.unwrap() < 1e-3);
        assert!(last.g_mu.is_none());
    }

    #[test]
    fn accelerated_run_takes_fewer_iterations() {
        let problem = bp_problem(2);
        let config = bp_config(&problem);
        let lb = run_bp(&problem, &config, Variant::Lb).unwrap();
        let alb = run_bp(&problem, &config, Variant::Alb).unwrap();
        assert!(alb.converged());
        assert!(alb.iterations() < lb.iterations());
    }

    #[test]
    fn all_forms_report_identical_residual_histories() {
        let problem = bp_problem(3);
        let mut config = bp_config(&problem);
        config.max_iters = 40;
        config.residual_tol = 1e-12;
        let reference = run_bp(&problem, &config, Variant::Lb).unwrap();
        for variant in [Variant::LbPrimal, Variant::LbDual] {
            let other = run_bp(&problem, &config, variant).unwrap();
            for (a, b) in reference.records.iter().zip(&other.records) {
                assert!((a.residual_rel - b.residual_rel).abs() <= 1e-10, "{variant}");
            }
        }
    }

    #[test]
    fn dual_run_records_objective_and_lagrangian_identity() {
        let problem = bp_problem(4);
        let mut config = bp_config(&problem);
        config.tau = 1.0 / (config.mu * problem.norm_a_sq());
        config.max_iters = 50;
        config.residual_tol = 1e-12;
        let trace = run_bp(&problem, &config, Variant::LbDual).unwrap();
        for pair in trace.records.windows(2) {
            let g_prev = pair[0].g_mu.unwrap();
            let lagr = pair[1].lagrangian.unwrap();
            assert!(
                (g_prev + lagr).abs() <= 1e-10 * g_prev.abs().max(1.0),
                "g={g_prev} lagr={lagr}"
            );
        }
    }

    #[test]
    fn zero_cap_yields_empty_trace() {
        let problem = bp_problem(5);
        let mut config = bp_config(&problem);
        config.max_iters = 0;
        let trace = run_bp(&problem, &config, Variant::Lb).unwrap();
        assert_eq!(trace.iterations(), 0);
        assert!(!trace.converged());
        assert!(trace.last().is_none());
    }

    #[test]
    fn objective_and_variant_compatibility_is_enforced() {
        let problem = bp_problem(6);
        let mut config = bp_config(&problem);
        config.objective = crate::prox::ObjectiveKind::L1NonNeg;
        assert!(run_bp(&problem, &config, Variant::LbPrimal).is_err());
        assert!(run_bp(&problem, &config, Variant::Bregman).is_err());
        config.objective = crate::prox::ObjectiveKind::Nuclear;
        assert!(run_bp(&problem, &config, Variant::Lb).is_err());
    }

    #[test]
    fn completion_run_converges() {
        let problem = gen_mc(30, 2, 0.2, 13).unwrap();
        let mu = 150.0;
        let mut config = SolverConfig::new(mu, 1.0 / mu);
        config.objective = crate::prox::ObjectiveKind::Nuclear;
        config.residual_tol = 1e-4;
        config.max_iters = 600;
        let lb = run_mc(&problem, &config, Variant::Lb).unwrap();
        let alb = run_mc(&problem, &config, Variant::Alb).unwrap();
        assert!(lb.converged() && alb.converged());
        assert!(alb.iterations() <= lb.iterations());
        assert!(lb.last().unwrap().rel_error.unwrap() < 1e-2);
        assert!(run_mc(&problem, &config, Variant::Bregman).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("lbx".parse::<Variant>().is_err());
    }
}
