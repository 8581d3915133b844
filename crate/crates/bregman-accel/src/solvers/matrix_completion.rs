//! Nuclear-norm solvers for matrix completion.
//!
//! Same dual gradient structure as the vector solvers, with the shrinkage
//! acting on singular values and the constraint acting through the sampling
//! operator `P_omega`. The state keeps the running subgradient certificate `P`
//! alongside the iterate, plus the omega-restricted residuals, so one step
//! costs one SVD and `O(n^2)` bookkeeping.

use crate::error::Error;
use crate::linalg::{lin_comb, DenseMatrix};
use crate::problems::MatrixCompletionProblem;
use crate::prox::shrink_matrix;
use crate::solvers::{McShrinkArg, SolverConfig};

/// Plain and extrapolated iterate/certificate pairs. The plain solver keeps
/// the tilde copies equal to the plain ones, so a run can switch to the
/// accelerated step at any iterate.
#[derive(Debug, Clone)]
pub struct McState {
    pub x: DenseMatrix,
    pub p: DenseMatrix,
    pub x_tilde: DenseMatrix,
    pub p_tilde: DenseMatrix,
    pub k: usize,
    resid_x: Vec<f64>,
    resid_tilde: Vec<f64>,
}

impl McState {
    pub fn init(problem: &MatrixCompletionProblem) -> Self {
        let n = problem.n;
        let zero = DenseMatrix::zeros(n, n);
        let resid: Vec<f64> = problem.observed.iter().map(|v| -v).collect();
        McState {
            x: zero.clone(),
            p: zero.clone(),
            x_tilde: zero.clone(),
            p_tilde: zero,
            k: 0,
            resid_x: resid.clone(),
            resid_tilde: resid,
        }
    }

    /// `P_omega X^k - P_omega M`, in the order of `problem.omega`.
    pub fn residual(&self) -> &[f64] {
        &self.resid_x
    }
}

/// `a x + b y` elementwise.
fn mat_comb(a: f64, x: &DenseMatrix, b: f64, y: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_vec(x.rows(), x.cols(), lin_comb(a, x.data(), b, y.data()))
}

/// `x + mu p - mu tau * scatter(resid)`: the matrix the shrinkage acts on.
fn shrink_argument(
    x: &DenseMatrix,
    p: &DenseMatrix,
    resid: &[f64],
    problem: &MatrixCompletionProblem,
    mu: f64,
    tau: f64,
) -> DenseMatrix {
    let mut y = mat_comb(1.0, x, mu, p);
    let n = problem.n;
    let data = y.data_mut();
    for (val, &(i, j)) in resid.iter().zip(&problem.omega) {
        data[i * n + j] -= mu * tau * val;
    }
    y
}

/// `p - tau * scatter(resid) - (x_new - x_base) / mu`.
fn certificate_update(
    p: &DenseMatrix,
    resid: &[f64],
    x_new: &DenseMatrix,
    x_base: &DenseMatrix,
    problem: &MatrixCompletionProblem,
    mu: f64,
    tau: f64,
) -> DenseMatrix {
    let mut out = p.clone();
    let n = problem.n;
    let data = out.data_mut();
    for (val, &(i, j)) in resid.iter().zip(&problem.omega) {
        data[i * n + j] -= tau * val;
    }
    for (o, (xn, xb)) in data.iter_mut().zip(x_new.data().iter().zip(x_base.data())) {
        *o -= (xn - xb) / mu;
    }
    out
}

/// One plain step. Errors only if the SVD fails to converge.
pub fn mc_lb_step(
    state: &McState,
    problem: &MatrixCompletionProblem,
    config: &SolverConfig,
) -> Result<McState, Error> {
    let (mu, tau) = (config.mu, config.tau);
    let y = shrink_argument(&state.x, &state.p, &state.resid_x, problem, mu, tau);
    let x_new = shrink_matrix(&y, mu)?;
    let p_new = certificate_update(&state.p, &state.resid_x, &x_new, &state.x, problem, mu, tau);
    let resid = problem.residual_on_omega(&x_new);
    Ok(McState {
        x_tilde: x_new.clone(),
        p_tilde: p_new.clone(),
        x: x_new,
        p: p_new,
        k: state.k + 1,
        resid_x: resid.clone(),
        resid_tilde: resid,
    })
}

/// One accelerated step.
///
/// The certificate update always uses the extrapolated pair; the shrinkage
/// argument uses the pair selected by `config.mc_shrink_arg`. With a unit
/// extrapolation weight both choices reduce to the plain step exactly.
pub fn mc_alb_step(
    state: &McState,
    problem: &MatrixCompletionProblem,
    config: &SolverConfig,
) -> Result<McState, Error> {
    let (mu, tau) = (config.mu, config.tau);
    let y = match config.mc_shrink_arg {
        McShrinkArg::Tilde => {
            shrink_argument(&state.x_tilde, &state.p_tilde, &state.resid_tilde, problem, mu, tau)
        }
        McShrinkArg::AsPrinted => {
            shrink_argument(&state.x, &state.p, &state.resid_x, problem, mu, tau)
        }
    };
    let x_new = shrink_matrix(&y, mu)?;
    let p_new = certificate_update(
        &state.p_tilde,
        &state.resid_tilde,
        &x_new,
        &state.x_tilde,
        problem,
        mu,
        tau,
    );
    let resid = problem.residual_on_omega(&x_new);
    let a = config.schedule.alpha_at(state.k);
    Ok(McState {
        x_tilde: mat_comb(a, &x_new, 1.0 - a, &state.x),
        p_tilde: mat_comb(a, &p_new, 1.0 - a, &state.p),
        resid_tilde: lin_comb(a, &resid, 1.0 - a, &state.resid_x),
        x: x_new,
        p: p_new,
        k: state.k + 1,
        resid_x: resid,
    })
}
