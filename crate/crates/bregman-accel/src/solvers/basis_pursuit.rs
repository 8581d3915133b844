//! Vector solvers: three equivalent formulations, plain and accelerated.
//!
//! All six step functions advance the same underlying dual gradient descent
//! and agree in exact arithmetic. The primal form carries `(x, p)` with `p` a
//! running subgradient certificate; the dual form carries the multiplier `y`;
//! the product form carries `v = A^T y` and never touches an m-vector. Each
//! state caches the constraint residual of its newest iterate, so a step costs
//! exactly one `matvec` and one `matvec_t`.
//!
//! States are immutable snapshots: steps allocate and return the successor.

use crate::linalg::{lin_comb, DenseMatrix};
use crate::problems::BasisPursuitProblem;
use crate::prox::{prox_l1_nonneg, shrink_scalar, ObjectiveKind};
use crate::solvers::SolverConfig;

/// `argmin_w J(w) + (1/2 mu) |w|^2 - <z, w>` for the vector objectives.
pub(crate) fn w_update(z: &[f64], mu: f64, objective: ObjectiveKind) -> Vec<f64> {
    match objective {
        ObjectiveKind::L1 => z.iter().map(|&zi| mu * shrink_scalar(zi, 1.0)).collect(),
        ObjectiveKind::L1NonNeg => prox_l1_nonneg(z, mu),
        ObjectiveKind::Nuclear => {
            panic!("w_update: nuclear norm has no vector form; use the matrix solvers")
        }
    }
}

fn residual(a: &DenseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    ax.iter().zip(b).map(|(axi, bi)| axi - bi).collect()
}

/// Shared primal update. Given the point `(x, p)` the shrinkage acts at and
/// its cached residual, returns `(x_new, p_new)`.
fn primal_core(
    problem: &BasisPursuitProblem,
    x: &[f64],
    p: &[f64],
    resid: &[f64],
    mu: f64,
    tau: f64,
) -> (Vec<f64>, Vec<f64>) {
    let g = problem.a.matvec_t(resid);
    let n = x.len();
    let mut x_new = vec![0.0; n];
    let mut p_new = vec![0.0; n];
    for i in 0..n {
        let drift = p[i] - tau * g[i];
        x_new[i] = mu * shrink_scalar(drift + x[i] / mu, 1.0);
        // Keeps p_new a subgradient of the l1 norm at x_new by construction.
        p_new[i] = drift - (x_new[i] - x[i]) / mu;
    }
    (x_new, p_new)
}

/// Primal-form state: iterate, subgradient certificate, cached `A x - b`.
#[derive(Debug, Clone)]
pub struct LbPrimalState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub k: usize,
    resid: Vec<f64>,
}

impl LbPrimalState {
    pub fn init(problem: &BasisPursuitProblem) -> Self {
        LbPrimalState {
            x: vec![0.0; problem.n()],
            p: vec![0.0; problem.n()],
            k: 0,
            resid: problem.b.iter().map(|bi| -bi).collect(),
        }
    }

    /// `A x^k - b`.
    pub fn residual(&self) -> &[f64] {
        &self.resid
    }

    /// For sibling solvers that compute the residual themselves.
    pub(crate) fn assemble(x: Vec<f64>, p: Vec<f64>, k: usize, resid: Vec<f64>) -> Self {
        LbPrimalState { x, p, k, resid }
    }
}

/// One plain primal step.
///
/// # Panics
/// Panics unless the configured objective is the plain l1 norm; the
/// nonnegative variant only exists in the dual and product forms.
pub fn lb_primal_step(
    state: &LbPrimalState,
    problem: &BasisPursuitProblem,
    config: &SolverConfig,
) -> LbPrimalState {
    assert_eq!(
        config.objective,
        ObjectiveKind::L1,
        "primal form supports only the plain l1 objective"
    );
    let (x, p) = primal_core(problem, &state.x, &state.p, &state.resid, config.mu, config.tau);
    let resid = residual(&problem.a, &x, &problem.b);
    LbPrimalState { x, p, k: state.k + 1, resid }
}

/// Accelerated primal state: plain and extrapolated pairs, both residuals.
#[derive(Debug, Clone)]
pub struct AlbPrimalState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub p_tilde: Vec<f64>,
    pub k: usize,
    resid_x: Vec<f64>,
    resid_tilde: Vec<f64>,
}

impl AlbPrimalState {
    pub fn init(problem: &BasisPursuitProblem) -> Self {
        let zero = vec![0.0; problem.n()];
        let resid: Vec<f64> = problem.b.iter().map(|bi| -bi).collect();
        AlbPrimalState {
            x: zero.clone(),
            p: zero.clone(),
            x_tilde: zero.clone(),
            p_tilde: zero,
            k: 0,
            resid_x: resid.clone(),
            resid_tilde: resid,
        }
    }

    /// `A x^k - b`.
    pub fn residual(&self) -> &[f64] {
        &self.resid_x
    }
}

/// One accelerated primal step; the shrinkage acts at the extrapolated pair.
///
/// `A x_tilde - b` is affine in `x_tilde`, so the cached extrapolated residual
/// is the same linear combination as the iterates and costs no extra matvec.
pub fn accel_primal_step(
    state: &AlbPrimalState,
    problem: &BasisPursuitProblem,
    config: &SolverConfig,
) -> AlbPrimalState {
    assert_eq!(
        config.objective,
        ObjectiveKind::L1,
        "primal form supports only the plain l1 objective"
    );
    let (x_new, p_new) = primal_core(
        problem,
        &state.x_tilde,
        &state.p_tilde,
        &state.resid_tilde,
        config.mu,
        config.tau,
    );
    let resid_new = residual(&problem.a, &x_new, &problem.b);
    let a = config.schedule.alpha_at(state.k);
    AlbPrimalState {
        x_tilde: lin_comb(a, &x_new, 1.0 - a, &state.x),
        p_tilde: lin_comb(a, &p_new, 1.0 - a, &state.p),
        resid_tilde: lin_comb(a, &resid_new, 1.0 - a, &state.resid_x),
        x: x_new,
        p: p_new,
        k: state.k + 1,
        resid_x: resid_new,
    }
}

/// Dual-form state. `resid` is `A w^k - b` for the newest shrinkage output
/// (`-b` before the first step, matching `w^0 = 0`).
#[derive(Debug, Clone)]
pub struct DualState {
    pub y: Vec<f64>,
    pub k: usize,
    resid: Vec<f64>,
}

impl DualState {
    /// `y^0 = tau b`.
    pub fn init(problem: &BasisPursuitProblem, tau: f64) -> Self {
        DualState {
            y: problem.b.iter().map(|bi| tau * bi).collect(),
            k: 0,
            resid: problem.b.iter().map(|bi| -bi).collect(),
        }
    }

    /// `A w^k - b`; this is the dual gradient at the point the last step
    /// shrank at.
    pub fn residual(&self) -> &[f64] {
        &self.resid
    }
}

/// One dual gradient step; returns the successor and the shrinkage output
/// `w^{k+1}`, which is the primal iterate this form recovers.
pub fn dual_gd_step(
    state: &DualState,
    problem: &BasisPursuitProblem,
    config: &SolverConfig,
) -> (DualState, Vec<f64>) {
    let aty = problem.a.matvec_t(&state.y);
    let w = w_update(&aty, config.mu, config.objective);
    let resid = residual(&problem.a, &w, &problem.b);
    let y = state
        .y
        .iter()
        .zip(&resid)
        .map(|(yi, ri)| yi - config.tau * ri)
        .collect();
    (DualState { y, k: state.k + 1, resid }, w)
}

/// Accelerated dual state; the gradient is evaluated at `y_tilde`.
#[derive(Debug, Clone)]
pub struct AlbDualState {
    pub y: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub k: usize,
    resid: Vec<f64>,
}

impl AlbDualState {
    pub fn init(problem: &BasisPursuitProblem, tau: f64) -> Self {
        let y0: Vec<f64> = problem.b.iter().map(|bi| tau * bi).collect();
        AlbDualState {
            y: y0.clone(),
            y_tilde: y0,
            k: 0,
            resid: problem.b.iter().map(|bi| -bi).collect(),
        }
    }

    /// `A w^k - b` where `w^k` came from shrinking at the previous `y_tilde`.
    pub fn residual(&self) -> &[f64] {
        &self.resid
    }
}

/// One accelerated dual step.
pub fn accel_dual_step(
    state: &AlbDualState,
    problem: &BasisPursuitProblem,
    config: &SolverConfig,
) -> (AlbDualState, Vec<f64>) {
    let aty = problem.a.matvec_t(&state.y_tilde);
    let w = w_update(&aty, config.mu, config.objective);
    let resid = residual(&problem.a, &w, &problem.b);
    let y_new: Vec<f64> = state
        .y_tilde
        .iter()
        .zip(&resid)
        .map(|(yi, ri)| yi - config.tau * ri)
        .collect();
    let a = config.schedule.alpha_at(state.k);
    let next = AlbDualState {
        y_tilde: lin_comb(a, &y_new, 1.0 - a, &state.y),
        y: y_new,
        k: state.k + 1,
        resid,
    };
    (next, w)
}

/// Product-form state: `v^k = A^T y^k`, all storage n-dimensional.
#[derive(Debug, Clone)]
pub struct VState {
    pub v: Vec<f64>,
    pub k: usize,
    resid: Vec<f64>,
}

impl VState {
    /// `v^0 = tau A^T b`.
    pub fn init(problem: &BasisPursuitProblem, tau: f64) -> Self {
        let mut v = problem.a.matvec_t(&problem.b);
        for vi in &mut v {
            *vi *= tau;
        }
        VState { v, k: 0, resid: problem.b.iter().map(|bi| -bi).collect() }
    }

    /// `A w^k - b` for the newest shrinkage output.
    pub fn residual(&self) -> &[f64] {
        &self.resid
    }
}

/// One product-form step; returns the successor and `w^{k+1}`.
pub fn lb_v_step(
    state: &VState,
    problem: &BasisPursuitProblem,
    config: &SolverConfig,
) -> (VState, Vec<f64>) {
    let w = w_update(&state.v, config.mu, config.objective);
    let resid = residual(&problem.a, &w, &problem.b);
    let at_resid = problem.a.matvec_t(&resid);
    let v = state
        .v
        .iter()
        .zip(&at_resid)
        .map(|(vi, gi)| vi - config.tau * gi)
        .collect();
    (VState { v, k: state.k + 1, resid }, w)
}

/// Accelerated product-form state.
#[derive(Debug, Clone)]
pub struct AlbVState {
    pub v: Vec<f64>,
    pub v_tilde: Vec<f64>,
    pub k: usize,
    resid: Vec<f64>,
}

impl AlbVState {
    pub fn init(problem: &BasisPursuitProblem, tau: f64) -> Self {
        let mut v = problem.a.matvec_t(&problem.b);
        for vi in &mut v {
            *vi *= tau;
        }
        AlbVState {
            v_tilde: v.clone(),
            v,
            k: 0,
            resid: problem.b.iter().map(|bi| -bi).collect(),
        }
    }

    pub fn residual(&self) -> &[f64] {
        &self.resid
    }
}

/// One accelerated product-form step.
pub fn accel_v_step(
    state: &AlbVState,
    problem: &BasisPursuitProblem,
    config: &SolverConfig,
) -> (AlbVState, Vec<f64>) {
    let w = w_update(&state.v_tilde, config.mu, config.objective);
    let resid = residual(&problem.a, &w, &problem.b);
    let at_resid = problem.a.matvec_t(&resid);
    let v_new: Vec<f64> = state
        .v_tilde
        .iter()
        .zip(&at_resid)
        .map(|(vi, gi)| vi - config.tau * gi)
        .collect();
    let a = config.schedule.alpha_at(state.k);
    let next = AlbVState {
        v_tilde: lin_comb(a, &v_new, 1.0 - a, &state.v),
        v: v_new,
        k: state.k + 1,
        resid,
    };
    (next, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::problems::{gen_bp, MatrixKind, SignalKind};
    use crate::solvers::ScheduleKind;

    fn small_problem(seed: u64) -> BasisPursuitProblem {
        gen_bp(MatrixKind::Gaussian, SignalKind::Gaussian, 20, 8, 3, seed).unwrap()
    }

    fn config_for(problem: &BasisPursuitProblem) -> SolverConfig {
        let mu = 5.0;
        let mut c = SolverConfig::new(mu, 1.0 / (mu * problem.norm_a_sq()));
        c.schedule = ScheduleKind::TsengTheta;
        c
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_rhs_is_a_fixed_point() {
        let a = DenseMatrix::from_vec(2, 3, vec![1.0, 2.0, 0.0, -1.0, 0.5, 3.0]);
        let problem = BasisPursuitProblem::new(a, vec![0.0, 0.0], None);
        let config = SolverConfig::new(5.0, 0.01);
        let mut st = LbPrimalState::init(&problem);
        let mut dual = DualState::init(&problem, config.tau);
        for _ in 0..5 {
            st = lb_primal_step(&st, &problem, &config);
            let (d, w) = dual_gd_step(&dual, &problem, &config);
            dual = d;
            assert!(st.x.iter().all(|&v| v == 0.0));
            assert!(w.iter().all(|&v| v == 0.0));
            assert!(dual.y.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn first_iterate_is_shrink_of_scaled_gradient() {
        // From the zero start, x^1 = mu shrink(tau A^T b, 1).
        let problem = small_problem(3);
        let config = config_for(&problem);
        let st = lb_primal_step(&LbPrimalState::init(&problem), &problem, &config);
        let atb = problem.a.matvec_t(&problem.b);
        for i in 0..problem.n() {
            let expect = config.mu * shrink_scalar(config.tau * atb[i], 1.0);
            assert!((st.x[i] - expect).abs() <= 1e-14);
        }
    }

    #[test]
    fn three_plain_forms_stay_in_lockstep() {
        let problem = small_problem(11);
        let config = config_for(&problem);
        let mut primal = LbPrimalState::init(&problem);
        let mut dual = DualState::init(&problem, config.tau);
        let mut vform = VState::init(&problem, config.tau);
        let scale = 1.0 + norm2(&problem.b);
        for k in 1..=60 {
            primal = lb_primal_step(&primal, &problem, &config);
            let (d, w_dual) = dual_gd_step(&dual, &problem, &config);
            let (v, w_v) = lb_v_step(&vform, &problem, &config);
            dual = d;
            vform = v;
            assert!(max_abs_diff(&primal.x, &w_dual) <= 1e-12 * scale, "k={k}");
            assert!(max_abs_diff(&w_dual, &w_v) <= 1e-12 * scale, "k={k}");
            // v^k tracks A^T y^k exactly.
            let aty = problem.a.matvec_t(&dual.y);
            assert!(max_abs_diff(&vform.v, &aty) <= 1e-12 * scale, "k={k}");
        }
    }

    #[test]
    fn dual_variable_reproduces_primal_shrink_argument() {
        // A^T y^k = p^k - tau A^T (A x^k - b) + x^k / mu links the two forms.
        let problem = small_problem(5);
        let config = config_for(&problem);
        let mut primal = LbPrimalState::init(&problem);
        let mut dual = DualState::init(&problem, config.tau);
        for _ in 0..40 {
            let aty = problem.a.matvec_t(&dual.y);
            let g = problem.a.matvec_t(primal.residual());
            for i in 0..problem.n() {
                let rhs = primal.p[i] - config.tau * g[i] + primal.x[i] / config.mu;
                assert!((aty[i] - rhs).abs() <= 1e-12);
            }
            primal = lb_primal_step(&primal, &problem, &config);
            dual = dual_gd_step(&dual, &problem, &config).0;
        }
    }

    #[test]
    fn accelerated_forms_stay_in_lockstep() {
        let problem = small_problem(17);
        let config = config_for(&problem);
        let mut primal = AlbPrimalState::init(&problem);
        let mut dual = AlbDualState::init(&problem, config.tau);
        let mut vform = AlbVState::init(&problem, config.tau);
        let scale = 1.0 + norm2(&problem.b);
        for k in 1..=60 {
            primal = accel_primal_step(&primal, &problem, &config);
            let (d, w_dual) = accel_dual_step(&dual, &problem, &config);
            let (v, w_v) = accel_v_step(&vform, &problem, &config);
            dual = d;
            vform = v;
            assert!(max_abs_diff(&primal.x, &w_dual) <= 1e-11 * scale, "k={k}");
            assert!(max_abs_diff(&w_dual, &w_v) <= 1e-11 * scale, "k={k}");
            let aty = problem.a.matvec_t(&dual.y_tilde);
            assert!(max_abs_diff(&vform.v_tilde, &aty) <= 1e-11 * scale, "k={k}");
        }
    }

    #[test]
    fn unit_weight_reduces_acceleration_to_plain_exactly() {
        let problem = small_problem(23);
        let mut config = config_for(&problem);
        config.schedule = ScheduleKind::Constant(1.0);
        let mut plain = LbPrimalState::init(&problem);
        let mut accel = AlbPrimalState::init(&problem);
        let mut plain_d = DualState::init(&problem, config.tau);
        let mut accel_d = AlbDualState::init(&problem, config.tau);
        for _ in 0..30 {
            plain = lb_primal_step(&plain, &problem, &config);
            accel = accel_primal_step(&accel, &problem, &config);
            plain_d = dual_gd_step(&plain_d, &problem, &config).0;
            accel_d = accel_dual_step(&accel_d, &problem, &config).0;
            assert_eq!(plain.x, accel.x);
            assert_eq!(plain.p, accel.p);
            assert_eq!(accel.x, accel.x_tilde);
            assert_eq!(plain_d.y, accel_d.y);
            assert_eq!(accel_d.y, accel_d.y_tilde);
        }
    }

    #[test]
    fn nonneg_objective_keeps_iterates_nonnegative() {
        let base = gen_bp(MatrixKind::Gaussian, SignalKind::Uniform, 30, 12, 4, 41).unwrap();
        // Rebuild with a nonnegative signal so the constraint set is feasible.
        let x_true: Vec<f64> = base.x_true.as_ref().unwrap().iter().map(|v| v.abs()).collect();
        let b = base.a.matvec(&x_true);
        let problem = BasisPursuitProblem::new(base.a.clone(), b, Some(x_true));
        let mu = 5.0;
        let mut config = SolverConfig::new(mu, 1.0 / (mu * problem.norm_a_sq()));
        config.objective = ObjectiveKind::L1NonNeg;
        let mut dual = DualState::init(&problem, config.tau);
        let mut vform = VState::init(&problem, config.tau);
        for _ in 0..50 {
            let (d, w) = dual_gd_step(&dual, &problem, &config);
            let (v, wv) = lb_v_step(&vform, &problem, &config);
            dual = d;
            vform = v;
            assert!(w.iter().all(|&wi| wi >= 0.0));
            assert!(max_abs_diff(&w, &wv) <= 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "plain l1 objective")]
    fn primal_form_rejects_nonneg_objective() {
        let problem = small_problem(2);
        let mut config = config_for(&problem);
        config.objective = ObjectiveKind::L1NonNeg;
        lb_primal_step(&LbPrimalState::init(&problem), &problem, &config);
    }
}
