//! Named, machine-checkable property suites behind `verify`.
//!
//! Each check measures a slack (a divergence, a bound ratio, a violation
//! count) and compares it against an explicit limit, so the report shows how
//! much margin a passing property has. The three suites cover the identity
//! theorems (equivalence), the objective-gap decay certificates (rates), and
//! the closed-form operators against brute-force oracles (prox).

use crate::diagnostics::{check_alb_rate, check_lb_rate, reference_dual_optimum};
use crate::error::Error;
use crate::linalg::{norm2, DenseMatrix, RngStream};
use crate::problems::{dual_objective, gen_bp, BasisPursuitProblem, MatrixKind, SignalKind};
use crate::prox::{prox_l1_nonneg, shrink_matrix, shrink_scalar, shrink_vec, ObjectiveKind};
use crate::solvers::{
    accel_dual_step, accel_primal_step, accel_v_step, auglag_step, bregman_exact_step,
    dual_gd_step, lb_primal_step, lb_v_step, run_bp, AlbDualState, AlbPrimalState, AlbVState,
    AuglagState, DualState, LbPrimalState, ScheduleKind, SolverConfig, Variant, VState,
};

/// One verified property: a measured slack against an explicit limit.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: String,
    pub metric: &'static str,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn measured(
        suite: &'static str,
        name: impl Into<String>,
        metric: &'static str,
        value: f64,
        limit: f64,
    ) -> Self {
        CheckOutcome {
            suite,
            name: name.into(),
            metric,
            value,
            limit,
            passed: value <= limit,
        }
    }

    /// `PASS suite/name metric=value limit=limit`, one token per field.
    pub fn line(&self) -> String {
        format!(
            "{} {}/{} {}={:.6e} limit={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.metric,
            self.value,
            self.limit
        )
    }
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn matrix_kind_for(idx: u64) -> MatrixKind {
    match idx % 3 {
        0 => MatrixKind::Gaussian,
        1 => MatrixKind::NormalizedGaussian,
        _ => MatrixKind::BernoulliPm1,
    }
}

/// Worst relative divergence of the primal sequences produced by the three
/// plain formulations over `iters` lockstep iterations.
fn lb_forms_divergence(problem: &BasisPursuitProblem, config: &SolverConfig, iters: usize) -> f64 {
    let mut prim = LbPrimalState::init(problem);
    let mut dual = DualState::init(problem, config.tau);
    let mut v = VState::init(problem, config.tau);
    let mut worst = 0.0f64;
    for _ in 0..iters {
        let next_p = lb_primal_step(&prim, problem, config);
        let (next_d, w_d) = dual_gd_step(&dual, problem, config);
        let (next_v, w_v) = lb_v_step(&v, problem, config);
        let scale = norm2(&next_p.x).max(1.0);
        worst = worst
            .max(diff_norm(&next_p.x, &w_d) / scale)
            .max(diff_norm(&next_p.x, &w_v) / scale);
        prim = next_p;
        dual = next_d;
        v = next_v;
    }
    worst
}

/// Accelerated counterpart of [`lb_forms_divergence`].
fn alb_forms_divergence(problem: &BasisPursuitProblem, config: &SolverConfig, iters: usize) -> f64 {
    let mut prim = AlbPrimalState::init(problem);
    let mut dual = AlbDualState::init(problem, config.tau);
    let mut v = AlbVState::init(problem, config.tau);
    let mut worst = 0.0f64;
    for _ in 0..iters {
        let next_p = accel_primal_step(&prim, problem, config);
        let (next_d, w_d) = accel_dual_step(&dual, problem, config);
        let (next_v, w_v) = accel_v_step(&v, problem, config);
        let scale = norm2(&next_p.x).max(1.0);
        worst = worst
            .max(diff_norm(&next_p.x, &w_d) / scale)
            .max(diff_norm(&next_p.x, &w_v) / scale);
        prim = next_p;
        dual = next_d;
        v = next_v;
    }
    worst
}

/// Lockstep run of the exact Bregman and augmented Lagrangian iterations;
/// returns the worst relative divergence of the x-sequences and of the
/// subgradient certificate `p^k` against `A' lambda^k`.
fn exact_forms_divergence(
    problem: &BasisPursuitProblem,
    config: &SolverConfig,
    outer: usize,
) -> Result<(f64, f64), Error> {
    let mut breg = LbPrimalState::init(problem);
    let mut aug = AuglagState::init(problem);
    let mut worst_x = 0.0f64;
    let mut worst_p = 0.0f64;
    for _ in 0..outer {
        breg = bregman_exact_step(&breg, problem, config)?;
        aug = auglag_step(&aug, problem, config)?;
        let scale_x = norm2(&breg.x).max(1.0);
        worst_x = worst_x.max(diff_norm(&breg.x, &aug.x) / scale_x);
        let at_lambda = problem.a.matvec_t(&aug.lambda);
        let scale_p = norm2(&breg.p).max(1.0);
        worst_p = worst_p.max(diff_norm(&breg.p, &at_lambda) / scale_p);
    }
    Ok((worst_x, worst_p))
}

/// Per-problem solver configuration used throughout the suites: the
/// experimental smoothing weight and step.
fn experiment_config(problem: &BasisPursuitProblem) -> SolverConfig {
    let mu = 5.0;
    SolverConfig::new(mu, 2.0 / (mu * problem.norm_a_sq()))
}

/// Identity theorems: the three plain forms agree, the three accelerated
/// forms agree, a unit extrapolation weight reproduces the plain trace
/// bit-for-bit, the exact Bregman and augmented Lagrangian iterations match,
/// and the constrained dual and product forms coincide with feasible
/// iterates.
pub fn equivalence_suite(base_seed: u64) -> Vec<CheckOutcome> {
    const SUITE: &str = "equivalence";
    let mut out = Vec::new();

    for idx in 0..10u64 {
        let seed = base_seed + idx;
        let n = if idx % 2 == 0 { 100 } else { 400 };
        let m = 2 * n / 5;
        let s = m / 5;
        let problem =
            gen_bp(matrix_kind_for(idx), SignalKind::Gaussian, n, m, s, seed).expect("valid dims");
        let config = experiment_config(&problem);
        let d_lb = lb_forms_divergence(&problem, &config, 200);
        out.push(CheckOutcome::measured(
            SUITE,
            format!("lb-forms-seed{seed}"),
            "max_rel_diff",
            d_lb,
            1e-8,
        ));
        let d_alb = alb_forms_divergence(&problem, &config, 200);
        out.push(CheckOutcome::measured(
            SUITE,
            format!("alb-forms-seed{seed}"),
            "max_rel_diff",
            d_alb,
            1e-8,
        ));
    }

    // A constant weight of 1 must collapse the accelerated iteration onto the
    // plain one exactly (bitwise on the recorded residuals).
    {
        let problem = gen_bp(
            MatrixKind::Gaussian,
            SignalKind::Gaussian,
            100,
            40,
            8,
            base_seed,
        )
        .expect("valid dims");
        let mut config = experiment_config(&problem);
        config.max_iters = 200;
        config.residual_tol = 1e-300;
        let lb = run_bp(&problem, &config, Variant::Lb);
        config.schedule = ScheduleKind::Constant(1.0);
        let alb = run_bp(&problem, &config, Variant::Alb);
        let value = match (lb, alb) {
            (Ok(lb), Ok(alb)) => lb
                .records
                .iter()
                .zip(&alb.records)
                .map(|(a, b)| (a.residual_rel - b.residual_rel).abs())
                .fold(0.0f64, f64::max),
            _ => f64::INFINITY,
        };
        out.push(CheckOutcome::measured(
            SUITE,
            format!("unit-weight-reduction-seed{base_seed}"),
            "max_abs_diff",
            value,
            0.0,
        ));
    }

    // Exact Bregman vs augmented Lagrangian on a 20x50 instance.
    {
        let problem = gen_bp(
            MatrixKind::Gaussian,
            SignalKind::Gaussian,
            50,
            20,
            4,
            base_seed,
        )
        .expect("valid dims");
        let mut config = experiment_config(&problem);
        config.inner_tol = 1e-10;
        let (x_div, p_div) = match exact_forms_divergence(&problem, &config, 10) {
            Ok(pair) => pair,
            Err(_) => (f64::INFINITY, f64::INFINITY),
        };
        out.push(CheckOutcome::measured(
            SUITE,
            format!("bregman-auglag-x-seed{base_seed}"),
            "max_rel_diff",
            x_div,
            1e-6,
        ));
        out.push(CheckOutcome::measured(
            SUITE,
            format!("bregman-auglag-certificate-seed{base_seed}"),
            "max_rel_diff",
            p_div,
            1e-6,
        ));
    }

    // Constrained objective: the dual and product forms stay in lockstep and
    // every iterate is feasible.
    {
        let problem = gen_bp(
            MatrixKind::Gaussian,
            SignalKind::Gaussian,
            100,
            40,
            8,
            base_seed + 1,
        )
        .expect("valid dims");
        let mut config = experiment_config(&problem);
        config.objective = ObjectiveKind::L1NonNeg;
        let mut dual = DualState::init(&problem, config.tau);
        let mut v = VState::init(&problem, config.tau);
        let mut worst = 0.0f64;
        let mut most_negative = 0.0f64;
        for _ in 0..200 {
            let (next_d, w_d) = dual_gd_step(&dual, &problem, &config);
            let (next_v, w_v) = lb_v_step(&v, &problem, &config);
            worst = worst.max(diff_norm(&w_d, &w_v) / norm2(&w_d).max(1.0));
            for &wi in &w_d {
                most_negative = most_negative.min(wi);
            }
            dual = next_d;
            v = next_v;
        }
        out.push(CheckOutcome::measured(
            SUITE,
            format!("nonneg-dual-v-seed{}", base_seed + 1),
            "max_rel_diff",
            worst,
            1e-8,
        ));
        out.push(CheckOutcome::measured(
            SUITE,
            format!("nonneg-feasible-seed{}", base_seed + 1),
            "most_negative_entry",
            -most_negative,
            0.0,
        ));
    }

    out
}

/// Analytic dual gradient against central finite differences at `points`
/// random duals; returns the worst vector-relative error.
fn gradient_divergence(
    problem: &BasisPursuitProblem,
    mu: f64,
    objective: ObjectiveKind,
    points: usize,
    rng: &mut RngStream,
) -> f64 {
    let m = problem.m();
    let mut worst = 0.0f64;
    for _ in 0..points {
        let y = rng.sample_gaussian(m);
        let (_, w) = dual_objective(&y, problem, mu, objective);
        let ax = problem.a.matvec(&w);
        let analytic: Vec<f64> = ax.iter().zip(&problem.b).map(|(a, b)| a - b).collect();
        let mut numeric = vec![0.0; m];
        let mut y_pert = y.clone();
        for j in 0..m {
            let h = 1e-6 * y[j].abs().max(1.0);
            y_pert[j] = y[j] + h;
            let (g_plus, _) = dual_objective(&y_pert, problem, mu, objective);
            y_pert[j] = y[j] - h;
            let (g_minus, _) = dual_objective(&y_pert, problem, mu, objective);
            y_pert[j] = y[j];
            numeric[j] = (g_plus - g_minus) / (2.0 * h);
        }
        worst = worst.max(diff_norm(&analytic, &numeric) / norm2(&analytic).max(1e-12));
    }
    worst
}

/// Decay certificates: a high-accuracy reference dual optimum, zero
/// violations of the `1/k` and `1/k^2` objective-gap bounds over 500
/// iterations at the safe step, monotone plain dual objective, and the
/// analytic dual gradient against finite differences.
pub fn rates_suite(base_seed: u64) -> Vec<CheckOutcome> {
    const SUITE: &str = "rates";
    let mut out = Vec::new();

    let problem = gen_bp(
        MatrixKind::Gaussian,
        SignalKind::Gaussian,
        100,
        40,
        8,
        base_seed,
    )
    .expect("valid dims");
    let mu = 5.0;
    let tau = 1.0 / (mu * problem.norm_a_sq());
    let mut config = SolverConfig::new(mu, tau);
    config.max_iters = 500;
    config.residual_tol = 1e-300;

    let reference = reference_dual_optimum(&problem, mu, ObjectiveKind::L1);
    out.push(CheckOutcome::measured(
        SUITE,
        format!("reference-gradient-seed{base_seed}"),
        "rel_grad_norm",
        reference.grad_norm / problem.b_norm().max(1e-300),
        1e-12,
    ));

    let lb_trace = run_bp(&problem, &config, Variant::LbDual);
    let alb_trace = run_bp(&problem, &config, Variant::AlbDual);

    match lb_trace.and_then(|t| check_lb_rate(&t, &problem, &reference)) {
        Ok(report) => {
            out.push(CheckOutcome::measured(
                SUITE,
                format!("lb-gap-violations-seed{base_seed}"),
                "count",
                report.violations as f64,
                0.0,
            ));
            out.push(CheckOutcome::measured(
                SUITE,
                format!("lb-gap-ratio-seed{base_seed}"),
                "max_gap_to_bound",
                report.max_ratio,
                report.slack,
            ));
            let increases = if report.monotone == Some(true) { 0.0 } else { 1.0 };
            out.push(CheckOutcome::measured(
                SUITE,
                format!("lb-objective-monotone-seed{base_seed}"),
                "increases_seen",
                increases,
                0.0,
            ));
        }
        Err(_) => out.push(CheckOutcome::measured(
            SUITE,
            format!("lb-gap-violations-seed{base_seed}"),
            "count",
            f64::INFINITY,
            0.0,
        )),
    }

    match alb_trace.and_then(|t| check_alb_rate(&t, &problem, &reference)) {
        Ok(report) => {
            out.push(CheckOutcome::measured(
                SUITE,
                format!("alb-gap-violations-seed{base_seed}"),
                "count",
                report.violations as f64,
                0.0,
            ));
            out.push(CheckOutcome::measured(
                SUITE,
                format!("alb-gap-ratio-seed{base_seed}"),
                "max_gap_to_bound",
                report.max_ratio,
                report.slack,
            ));
        }
        Err(_) => out.push(CheckOutcome::measured(
            SUITE,
            format!("alb-gap-violations-seed{base_seed}"),
            "count",
            f64::INFINITY,
            0.0,
        )),
    }

    // Gradient checks on five small instances: three plain, one with a
    // different smoothing weight, one constrained.
    let shapes = [(25usize, 10usize), (30, 12), (50, 20), (60, 25), (80, 30)];
    for (i, &(n, m)) in shapes.iter().enumerate() {
        let seed = base_seed + 100 + i as u64;
        let s = (m / 5).max(1);
        let problem =
            gen_bp(matrix_kind_for(i as u64), SignalKind::Gaussian, n, m, s, seed).expect("dims");
        let (mu, objective, tag) = match i {
            3 => (20.0, ObjectiveKind::L1, "mu20"),
            4 => (5.0, ObjectiveKind::L1NonNeg, "nonneg"),
            _ => (5.0, ObjectiveKind::L1, "plain"),
        };
        let mut rng = RngStream::new(seed ^ 0x9e37_79b9);
        let worst = gradient_divergence(&problem, mu, objective, 20, &mut rng);
        out.push(CheckOutcome::measured(
            SUITE,
            format!("grad-check-{tag}-seed{seed}"),
            "max_rel_err",
            worst,
            1e-5,
        ));
    }

    out
}

/// Smallest grid point of `f` over `lo..=hi` at spacing `res`.
fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, res: f64) -> f64 {
    let steps = ((hi - lo) / res).round() as usize;
    let mut best_w = lo;
    let mut best_f = f(lo);
    for i in 1..=steps {
        let w = lo + res * i as f64;
        let fw = f(w);
        if fw < best_f {
            best_f = fw;
            best_w = w;
        }
    }
    best_w
}

/// Closed-form operators against brute force: scalar shrinkage vs grid
/// search, the constrained step minimizer vs grid search, matrix shrinkage of
/// diagonal input vs vector shrinkage (exact), and non-expansiveness on
/// random pairs.
pub fn prox_suite(base_seed: u64) -> Vec<CheckOutcome> {
    const SUITE: &str = "prox";
    let mut out = Vec::new();
    let mut rng = RngStream::new(base_seed);

    // shrink(z, alpha) = argmin alpha|w| + (w - z)^2 / 2, on a 1e-4 grid.
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = 3.0 * rng.sample_uniform_pm1();
        let alpha = 0.01 + 1.99 * rng.sample_uniform_pm1().abs();
        let got = shrink_scalar(z, alpha);
        let oracle = grid_argmin(|w| alpha * w.abs() + 0.5 * (w - z) * (w - z), -4.0, 4.0, 1e-4);
        worst = worst.max((got - oracle).abs());
    }
    out.push(CheckOutcome::measured(
        SUITE,
        format!("shrink-grid-seed{base_seed}"),
        "max_abs_diff",
        worst,
        1e-4,
    ));

    // The constrained minimizer mu*max(v - 1, 0) of w + w^2/(2 mu) - v w
    // over w >= 0, on a 1e-4 grid.
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v = -2.0 + 5.0 * (0.5 * rng.sample_uniform_pm1() + 0.5);
        let mu = 0.5 + 2.5 * (0.5 * rng.sample_uniform_pm1() + 0.5);
        let got = prox_l1_nonneg(&[v], mu)[0];
        let oracle = grid_argmin(|w| w + w * w / (2.0 * mu) - v * w, 0.0, 8.0, 1e-4);
        worst = worst.max((got - oracle).abs());
    }
    out.push(CheckOutcome::measured(
        SUITE,
        format!("nonneg-grid-seed{base_seed}"),
        "max_abs_diff",
        worst,
        1e-4,
    ));

    // Matrix shrinkage of a diagonal matrix must equal vector shrinkage of
    // the diagonal with zero rounding.
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let n = 2 + trial % 6;
        let d: Vec<f64> = (0..n).map(|_| 4.0 * rng.gaussian()).collect();
        let gamma = 0.05 + 2.0 * rng.sample_uniform_pm1().abs();
        match shrink_matrix(&DenseMatrix::from_diag(&d), gamma) {
            Ok(shrunk) => {
                let want = shrink_vec(&d, gamma);
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i == j { want[i] } else { 0.0 };
                        worst = worst.max((shrunk.get(i, j) - expect).abs());
                    }
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    out.push(CheckOutcome::measured(
        SUITE,
        format!("matrix-diagonal-seed{base_seed}"),
        "max_abs_diff",
        worst,
        0.0,
    ));

    // |shrink(z1) - shrink(z2)| <= |z1 - z2| on 10^4 random pairs; the limit
    // allows one part in 1e12 for the rounding of the two subtractions.
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let z1 = 5.0 * rng.sample_uniform_pm1();
        let z2 = 5.0 * rng.sample_uniform_pm1();
        let alpha = 0.01 + 1.99 * rng.sample_uniform_pm1().abs();
        let lhs = (shrink_scalar(z1, alpha) - shrink_scalar(z2, alpha)).abs();
        let rhs = (z1 - z2).abs();
        worst = worst.max((lhs - rhs) / rhs.max(1.0));
    }
    out.push(CheckOutcome::measured(
        SUITE,
        format!("shrink-nonexpansive-seed{base_seed}"),
        "max_rel_excess",
        worst,
        1e-12,
    ));

    out
}

/// Runs the named suite with the given base seed.
pub fn run_suite(suite: &str, base_seed: u64) -> Result<Vec<CheckOutcome>, Error> {
    match suite {
        "equivalence" => Ok(equivalence_suite(base_seed)),
        "rates" => Ok(rates_suite(base_seed)),
        "prox" => Ok(prox_suite(base_seed)),
        other => Err(Error::invalid(format!(
            "unknown suite {other:?}; expected equivalence, rates, or prox"
        ))),
    }
}

/// All suite names, in report order.
pub const SUITES: [&str; 3] = ["equivalence", "rates", "prox"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equivalence_suite_passes_and_names_are_unique() {
        let outcomes = equivalence_suite(0);
        assert_eq!(outcomes.len(), 25);
        let mut names: Vec<&str> = outcomes.iter().map(|o| o.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 25, "duplicate check names");
        for o in &outcomes {
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn rates_suite_passes() {
        for o in rates_suite(0) {
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn prox_suite_passes() {
        for o in prox_suite(0) {
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn outcome_lines_are_machine_readable() {
        let o = CheckOutcome::measured("prox", "shrink-grid-seed0", "max_abs_diff", 3e-5, 1e-4);
        let line = o.line();
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[0], "PASS");
        assert_eq!(fields[1], "prox/shrink-grid-seed0");
        assert!(fields[2].starts_with("max_abs_diff="));
        assert!(fields[3].starts_with("limit="));
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("spectral", 0).is_err());
    }
}
