//! Problem instances: seeded generators for sparse-recovery and low-rank
//! completion test problems, plus the dual-objective and Lagrangian
//! evaluators the diagnostics are built on.
//!
//! Generators draw everything from one `RngStream` per instance in a fixed
//! documented order, so an (instance kind, seed) pair fully determines the
//! data on every platform.

mod io;

pub use io::{load_instance, save_instance, write_atomic};

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{dot, norm2, spectral_norm_sq, DenseMatrix, RngStream, RNG_ALGORITHM};
use crate::prox::{prox_l1_nonneg, shrink_vec, ObjectiveKind};

/// Measurement-matrix ensembles for sparse recovery instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    /// iid standard Gaussian entries.
    Gaussian,
    /// Gaussian entries with every column rescaled to unit norm.
    NormalizedGaussian,
    /// iid entries, `+1` or `-1` with equal probability.
    BernoulliPm1,
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MatrixKind::Gaussian => "gaussian",
            MatrixKind::NormalizedGaussian => "normalized-gaussian",
            MatrixKind::BernoulliPm1 => "bernoulli-pm1",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "gaussian" => MatrixKind::Gaussian,
            "normalized-gaussian" => MatrixKind::NormalizedGaussian,
            "bernoulli-pm1" => MatrixKind::BernoulliPm1,
            other => {
                return Err(Error::invalid(format!(
                    "unknown matrix kind {other:?}; expected gaussian, normalized-gaussian \
                     or bernoulli-pm1"
                )))
            }
        })
    }
}

/// Distribution of the nonzero entries of the planted signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    /// Standard Gaussian values.
    Gaussian,
    /// Uniform on `[-1, 1]` via `2u - 1`.
    Uniform,
}

impl std::fmt::Display for SignalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SignalKind::Gaussian => "gaussian",
            SignalKind::Uniform => "uniform",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "gaussian" => SignalKind::Gaussian,
            "uniform" => SignalKind::Uniform,
            other => {
                return Err(Error::invalid(format!(
                    "unknown signal kind {other:?}; expected gaussian or uniform"
                )))
            }
        })
    }
}

/// Generation parameters recorded with a sparse-recovery instance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BpGenMeta {
    pub matrix_kind: MatrixKind,
    pub signal_kind: SignalKind,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub seed: u64,
}

/// `min |x|_1 (+ quadratic smoothing) subject to A x = b`, with the planted
/// solution kept for error reporting.
#[derive(Debug, Clone)]
pub struct BasisPursuitProblem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x_true: Option<Vec<f64>>,
    pub gen_meta: Option<BpGenMeta>,
    norm_a_sq: OnceLock<f64>,
    b_norm: OnceLock<f64>,
}

impl BasisPursuitProblem {
    pub fn new(a: DenseMatrix, b: Vec<f64>, x_true: Option<Vec<f64>>) -> Self {
        assert_eq!(a.rows(), b.len(), "b length vs matrix rows");
        if let Some(x) = &x_true {
            assert_eq!(a.cols(), x.len(), "x_true length vs matrix cols");
        }
        BasisPursuitProblem {
            a,
            b,
            x_true,
            gen_meta: None,
            norm_a_sq: OnceLock::new(),
            b_norm: OnceLock::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// `|A|^2`, computed once by power iteration and cached.
    pub fn norm_a_sq(&self) -> f64 {
        *self
            .norm_a_sq
            .get_or_init(|| spectral_norm_sq(&self.a, 1e-12, 200_000).value)
    }

    pub fn b_norm(&self) -> f64 {
        *self.b_norm.get_or_init(|| norm2(&self.b))
    }

    /// Checks finiteness and, when a planted signal is present, that it
    /// explains the measurements exactly.
    pub fn validate(&self) -> Result<(), Error> {
        if !self.a.is_finite() || self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("instance contains non-finite entries"));
        }
        if let Some(x) = &self.x_true {
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("x_true contains non-finite entries"));
            }
            let ax = self.a.matvec(x);
            let mut err = 0.0f64;
            for (ai, bi) in ax.iter().zip(&self.b) {
                err += (ai - bi) * (ai - bi);
            }
            let scale = self.b_norm().max(1.0);
            if err.sqrt() > 1e-12 * scale {
                return Err(Error::invalid(format!(
                    "b deviates from A x_true by {:e}",
                    err.sqrt()
                )));
            }
            if let Some(meta) = &self.gen_meta {
                let nnz = x.iter().filter(|v| **v != 0.0).count();
                if nnz != meta.s {
                    return Err(Error::invalid(format!(
                        "x_true has {} nonzeros, expected {}",
                        nnz, meta.s
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Generation parameters recorded with a completion instance. `fr` and `sr`
/// are the realized ratios after rounding the sample count.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McGenMeta {
    pub n: usize,
    pub r: usize,
    pub p: usize,
    pub fr: f64,
    pub sr: f64,
    pub seed: u64,
}

/// Recover a low-rank `n x n` matrix from the entries observed on `omega`.
#[derive(Debug, Clone)]
pub struct MatrixCompletionProblem {
    pub n: usize,
    pub r: usize,
    /// Observed positions, sorted row-major.
    pub omega: Vec<(usize, usize)>,
    /// Values on `omega`, in the same order.
    pub observed: Vec<f64>,
    pub m_true: Option<DenseMatrix>,
    pub gen_meta: Option<McGenMeta>,
    observed_norm: OnceLock<f64>,
}

impl MatrixCompletionProblem {
    pub fn new(
        n: usize,
        r: usize,
        omega: Vec<(usize, usize)>,
        observed: Vec<f64>,
        m_true: Option<DenseMatrix>,
    ) -> Self {
        assert_eq!(omega.len(), observed.len(), "omega vs observed length");
        MatrixCompletionProblem {
            n,
            r,
            omega,
            observed,
            m_true,
            gen_meta: None,
            observed_norm: OnceLock::new(),
        }
    }

    pub fn p(&self) -> usize {
        self.omega.len()
    }

    /// Frobenius norm of the observed data.
    pub fn observed_norm(&self) -> f64 {
        *self.observed_norm.get_or_init(|| norm2(&self.observed))
    }

    /// `X` restricted to `omega`, minus the observations.
    pub fn residual_on_omega(&self, x: &DenseMatrix) -> Vec<f64> {
        self.omega
            .iter()
            .zip(&self.observed)
            .map(|(&(i, j), &obs)| x.get(i, j) - obs)
            .collect()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.observed.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("observed values contain non-finite entries"));
        }
        for &(i, j) in &self.omega {
            if i >= self.n || j >= self.n {
                return Err(Error::invalid(format!(
                    "omega index ({i},{j}) out of range for n={}",
                    self.n
                )));
            }
        }
        if let Some(m) = &self.m_true {
            if !m.is_finite() {
                return Err(Error::invalid("m_true contains non-finite entries"));
            }
            for (&(i, j), &obs) in self.omega.iter().zip(&self.observed) {
                if m.get(i, j) != obs {
                    return Err(Error::invalid(format!(
                        "observed value at ({i},{j}) does not match m_true"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Either problem family, as loaded from an instance file.
#[derive(Debug, Clone)]
pub enum ProblemInstance {
    Bp(BasisPursuitProblem),
    Mc(MatrixCompletionProblem),
}

impl ProblemInstance {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            ProblemInstance::Bp(p) => p.validate(),
            ProblemInstance::Mc(p) => p.validate(),
        }
    }
}

/// Draws a sparse-recovery instance: the matrix (row-major), then the
/// support (partial Fisher-Yates, then sorted), then the signal values.
///
/// A zero draw for a signal value is redrawn so the planted support size is
/// exactly `s`.
pub fn gen_bp(
    matrix_kind: MatrixKind,
    signal_kind: SignalKind,
    n: usize,
    m: usize,
    s: usize,
    seed: u64,
) -> Result<BasisPursuitProblem, Error> {
    if s == 0 || s > m || m > n {
        return Err(Error::invalid(format!(
            "need 0 < s <= m <= n, got n={n}, m={m}, s={s}"
        )));
    }
    let mut rng = RngStream::new(seed);
    let mut a = match matrix_kind {
        MatrixKind::Gaussian | MatrixKind::NormalizedGaussian => {
            DenseMatrix::from_vec(m, n, rng.sample_gaussian(m * n))
        }
        MatrixKind::BernoulliPm1 => {
            let data = (0..m * n).map(|_| rng.sample_bernoulli_pm1()).collect();
            DenseMatrix::from_vec(m, n, data)
        }
    };
    if matrix_kind == MatrixKind::NormalizedGaussian {
        for j in 0..n {
            let mut col_sq = 0.0;
            for i in 0..m {
                let v = a.get(i, j);
                col_sq += v * v;
            }
            let col_norm = col_sq.sqrt();
            for i in 0..m {
                a.set(i, j, a.get(i, j) / col_norm);
            }
        }
    }
    let support = sample_without_replacement(&mut rng, n, s);
    let mut x_true = vec![0.0; n];
    for &idx in &support {
        let mut v = 0.0;
        while v == 0.0 {
            v = match signal_kind {
                SignalKind::Gaussian => rng.gaussian(),
                SignalKind::Uniform => rng.sample_uniform_pm1(),
            };
        }
        x_true[idx] = v;
    }
    let b = a.matvec(&x_true);
    let mut problem = BasisPursuitProblem::new(a, b, Some(x_true));
    problem.gen_meta = Some(BpGenMeta {
        matrix_kind,
        signal_kind,
        n,
        m,
        s,
        seed,
    });
    Ok(problem)
}

/// Draws a rank-`r` completion instance: `M = M_L M_R'` with iid Gaussian
/// factors, then `p = round(r (2n - r) / fr)` observed positions sampled
/// without replacement.
pub fn gen_mc(n: usize, r: usize, fr: f64, seed: u64) -> Result<MatrixCompletionProblem, Error> {
    if r == 0 || r >= n {
        return Err(Error::invalid(format!("need 0 < r < n, got n={n}, r={r}")));
    }
    if !(0.0..1.0).contains(&fr) || fr <= 0.0 {
        return Err(Error::invalid(format!("need fr in (0, 1), got {fr}")));
    }
    let dof = (r * (2 * n - r)) as f64;
    let p = (dof / fr).round() as usize;
    if p > n * n {
        return Err(Error::invalid(format!(
            "fr={fr} too small for dimension: p={p} exceeds n^2={}",
            n * n
        )));
    }
    if p == 0 {
        return Err(Error::invalid("sample count rounded to zero"));
    }
    let mut rng = RngStream::new(seed);
    let ml = DenseMatrix::from_vec(n, r, rng.sample_gaussian(n * r));
    let mr = DenseMatrix::from_vec(n, r, rng.sample_gaussian(n * r));
    let mut m_true = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m_true.set(i, j, dot(ml.row(i), mr.row(j)));
        }
    }
    let mut linear = sample_without_replacement(&mut rng, n * n, p);
    linear.sort_unstable();
    let omega: Vec<(usize, usize)> = linear.iter().map(|&l| (l / n, l % n)).collect();
    let observed: Vec<f64> = omega.iter().map(|&(i, j)| m_true.get(i, j)).collect();
    let mut problem = MatrixCompletionProblem::new(n, r, omega, observed, Some(m_true));
    problem.gen_meta = Some(McGenMeta {
        n,
        r,
        p,
        fr: dof / p as f64,
        sr: p as f64 / (n * n) as f64,
        seed,
    });
    Ok(problem)
}

/// `count` distinct indices from `0..pool`, via partial Fisher-Yates.
fn sample_without_replacement(rng: &mut RngStream, pool: usize, count: usize) -> Vec<usize> {
    assert!(count <= pool);
    let mut idx: Vec<usize> = (0..pool).collect();
    for i in 0..count {
        let j = i + rng.below(pool - i);
        idx.swap(i, j);
    }
    let mut out = idx[..count].to_vec();
    out.sort_unstable();
    out
}

/// `J(w)` for the vector objectives; both are the l1 norm on their domain.
fn j_value(w: &[f64]) -> f64 {
    w.iter().map(|v| v.abs()).sum()
}

/// Dual objective `G_mu(y) = -min_w { J(w) + (1/2mu)|w|^2 - <y, Aw - b> }`,
/// returned together with the minimizing `w`.
///
/// # Panics
/// Panics for the nuclear objective; the matrix solvers do not trace it.
pub fn dual_objective(
    y: &[f64],
    problem: &BasisPursuitProblem,
    mu: f64,
    objective: ObjectiveKind,
) -> (f64, Vec<f64>) {
    let aty = problem.a.matvec_t(y);
    let w = match objective {
        ObjectiveKind::L1 => shrink_vec(&aty, 1.0).iter().map(|v| mu * v).collect(),
        ObjectiveKind::L1NonNeg => prox_l1_nonneg(&aty, mu),
        ObjectiveKind::Nuclear => panic!("dual_objective: vector objectives only"),
    };
    let aw = problem.a.matvec(&w);
    let resid: Vec<f64> = aw.iter().zip(&problem.b).map(|(a, b)| a - b).collect();
    let inner = j_value(&w) + dot(&w, &w) / (2.0 * mu) - dot(y, &resid);
    (-inner, w)
}

/// `L_mu(x, y) = J(x) + (1/2mu)|x|^2 - <y, Ax - b>`.
pub fn lagrangian(
    x: &[f64],
    y: &[f64],
    problem: &BasisPursuitProblem,
    mu: f64,
    objective: ObjectiveKind,
) -> f64 {
    assert!(
        matches!(objective, ObjectiveKind::L1 | ObjectiveKind::L1NonNeg),
        "lagrangian: vector objectives only"
    );
    let ax = problem.a.matvec(x);
    let resid: Vec<f64> = ax.iter().zip(&problem.b).map(|(a, b)| a - b).collect();
    j_value(x) + dot(x, x) / (2.0 * mu) - dot(y, &resid)
}

/// A primal/multiplier pair with its Lagrangian value.
#[derive(Debug, Clone)]
pub struct LagrangianPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
}

impl LagrangianPoint {
    pub fn evaluate(
        x: Vec<f64>,
        y: Vec<f64>,
        problem: &BasisPursuitProblem,
        mu: f64,
        objective: ObjectiveKind,
    ) -> Self {
        let value = lagrangian(&x, &y, problem, mu, objective);
        LagrangianPoint { x, y, value }
    }
}

/// Lipschitz bound for the dual gradient: `mu |A|^2` for sparse recovery,
/// `mu` for completion (the sampling projection has operator norm 1).
pub fn lipschitz_bound(problem: &ProblemInstance, mu: f64) -> f64 {
    match problem {
        ProblemInstance::Bp(p) => mu * p.norm_a_sq(),
        ProblemInstance::Mc(_) => mu,
    }
}

/// Default smoothing weight matching the experimental protocol: `5` for
/// sparse recovery, `5n` for completion.
pub fn default_mu(problem: &ProblemInstance) -> f64 {
    match problem {
        ProblemInstance::Bp(_) => 5.0,
        ProblemInstance::Mc(p) => 5.0 * p.n as f64,
    }
}

/// RNG identifier recorded in instance headers.
pub fn rng_algorithm() -> &'static str {
    RNG_ALGORITHM
}
