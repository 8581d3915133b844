//! Dense linear algebra used by the solvers: row-major matrices, the few
//! vector kernels the iterations need, a power-iteration spectral-norm
//! estimate, a full SVD, and a seeded RNG stream for instance generation.
//!
//! Everything is 64-bit and deterministic. Matrix-vector products are the
//! hot path (two per solver iteration), so they are written as plain loops
//! over the row-major layout and nothing else shares their inner loops.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Error;

/// Dense matrix with entries stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// # Panics
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "matrix data length {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Square matrix with `d` on the diagonal.
    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = d[i];
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row-major entries; length is always `rows * cols`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `A x`.
    ///
    /// # Panics
    /// Panics if `x.len() != self.cols()`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(
            x.len(),
            self.cols,
            "matvec: vector length {} vs {} columns",
            x.len(),
            self.cols
        );
        let mut out = vec![0.0; self.rows];
        for (i, row) in self.data.chunks_exact(self.cols).enumerate() {
            let mut acc = 0.0;
            for (a, xi) in row.iter().zip(x) {
                acc += a * xi;
            }
            out[i] = acc;
        }
        out
    }

    /// `A' y` without materializing the transpose.
    ///
    /// # Panics
    /// Panics if `y.len() != self.rows()`.
    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(
            y.len(),
            self.rows,
            "matvec_t: vector length {} vs {} rows",
            y.len(),
            self.rows
        );
        let mut out = vec![0.0; self.cols];
        for (row, yi) in self.data.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }
}

/// `<a, b>`.
///
/// # Panics
/// Panics on length mismatch.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: {} vs {}", a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `a x + b y` elementwise.
pub fn lin_comb(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len(), "lin_comb: {} vs {}", x.len(), y.len());
    x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect()
}

/// Result of the power-iteration estimate of `|A|^2`.
///
/// Rayleigh quotients approach the top eigenvalue from below, so `value`
/// never overshoots; `converged` is false when the relative change was
/// still above the requested tolerance at the iteration cap, in which case
/// `value` is the best estimate seen.
#[derive(Debug, Clone, Copy)]
pub struct SpectralEstimate {
    pub value: f64,
    pub converged: bool,
    pub iters: usize,
}

/// Squared spectral norm `|A|^2` by power iteration on `A'A`.
///
/// The start vector is the normalized all-ones vector; if that lands in the
/// null space of `A'A` the iteration restarts from standard basis vectors in
/// order, which keeps the whole procedure deterministic.
///
/// # Panics
/// Panics if `a` is empty or `tol <= 0`.
pub fn spectral_norm_sq(a: &DenseMatrix, tol: f64, max_iters: usize) -> SpectralEstimate {
    assert!(a.rows() > 0 && a.cols() > 0, "spectral_norm_sq: empty matrix");
    assert!(tol > 0.0, "spectral_norm_sq: tol must be positive");
    let n = a.cols();
    let mut q = vec![1.0 / (n as f64).sqrt(); n];
    let mut restart = 0usize;
    let mut lambda = 0.0;
    for it in 1..=max_iters {
        let z = a.matvec_t(&a.matvec(&q));
        let zn = norm2(&z);
        if zn == 0.0 {
            // q is in the null space; deterministic restart.
            if restart >= n {
                return SpectralEstimate {
                    value: 0.0,
                    converged: true,
                    iters: it,
                };
            }
            q = vec![0.0; n];
            q[restart] = 1.0;
            restart += 1;
            continue;
        }
        let new_lambda = dot(&q, &z);
        for (qi, zi) in q.iter_mut().zip(&z) {
            *qi = zi / zn;
        }
        if it > 1 && (new_lambda - lambda).abs() <= tol * new_lambda.abs() {
            return SpectralEstimate {
                value: new_lambda,
                converged: true,
                iters: it,
            };
        }
        lambda = new_lambda;
    }
    SpectralEstimate {
        value: lambda,
        converged: false,
        iters: max_iters,
    }
}

/// Thin SVD `Y = U diag(sigma) V'` with `sigma` sorted nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub vt: DenseMatrix,
}

impl SvdFactors {
    /// `U diag(s) V'` for a replacement spectrum `s` (same length as
    /// `sigma`). Terms with `s[i] == 0` are skipped, so the cost is
    /// proportional to the number of surviving singular values.
    pub fn reconstruct_scaled(&self, s: &[f64]) -> DenseMatrix {
        assert_eq!(s.len(), self.sigma.len(), "spectrum length mismatch");
        let m = self.u.rows();
        let n = self.vt.cols();
        let mut out = DenseMatrix::zeros(m, n);
        for (idx, &si) in s.iter().enumerate() {
            if si == 0.0 {
                continue;
            }
            let vrow = self.vt.row(idx);
            for i in 0..m {
                let ui = si * self.u.get(i, idx);
                let orow = &mut out.data_mut()[i * n..(i + 1) * n];
                for (o, vj) in orow.iter_mut().zip(vrow) {
                    *o += ui * vj;
                }
            }
        }
        out
    }

    /// `U diag(sigma) V'`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.reconstruct_scaled(&self.sigma)
    }
}

/// Closed-form factors for an exactly diagonal square matrix: the singular
/// values are `|d_i|` and `u`, `vt` are signed permutations, so shrinking the
/// spectrum and reconstructing reproduces per-entry scalar shrinkage without
/// rounding. Returns `None` when the matrix has any nonzero off-diagonal
/// entry (checked with early exit, so dense inputs pay one comparison).
fn diagonal_svd(y: &DenseMatrix) -> Option<SvdFactors> {
    if y.rows() != y.cols() || !y.is_finite() {
        return None;
    }
    let n = y.rows();
    for i in 0..n {
        for j in 0..n {
            if i != j && y.get(i, j) != 0.0 {
                return None;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        y.get(b, b)
            .abs()
            .partial_cmp(&y.get(a, a).abs())
            .expect("diagonal entries are finite")
    });
    let mut sigma = Vec::with_capacity(n);
    let mut u = DenseMatrix::zeros(n, n);
    let mut vt = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let d = y.get(src, src);
        sigma.push(d.abs());
        u.set(src, dst, if d < 0.0 { -1.0 } else { 1.0 });
        vt.set(dst, src, 1.0);
    }
    Some(SvdFactors { u, sigma, vt })
}

/// Full (thin) SVD of a dense matrix.
///
/// Factors are permuted so the singular values come out nonincreasing.
pub fn svd(y: &DenseMatrix) -> Result<SvdFactors, Error> {
    if let Some(f) = diagonal_svd(y) {
        return Ok(f);
    }
    let m = y.rows();
    let n = y.cols();
    let mat = DMatrix::from_row_slice(m, n, y.data());
    let svd = nalgebra::linalg::SVD::try_new(mat, true, true, f64::EPSILON, 0).ok_or(
        Error::SvdFailed {
            rows: m,
            cols: n,
            frob_norm: y.frob_norm(),
        },
    )?;
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("singular values are finite")
    });
    let u_na = svd.u.as_ref().expect("u requested");
    let vt_na = svd.v_t.as_ref().expect("v_t requested");
    let mut sigma = Vec::with_capacity(k);
    let mut u = DenseMatrix::zeros(m, k);
    let mut vt = DenseMatrix::zeros(k, n);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(svd.singular_values[src]);
        for i in 0..m {
            u.set(i, dst, u_na[(i, src)]);
        }
        for j in 0..n {
            vt.set(dst, j, vt_na[(src, j)]);
        }
    }
    Ok(SvdFactors { u, sigma, vt })
}

/// Seeded random stream; the generator is fixed to ChaCha8 so identical
/// seeds give identical sequences on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

/// Generator identifier recorded alongside seeds in instance metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    /// One standard Gaussian sample.
    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// `n` iid standard Gaussian samples.
    pub fn sample_gaussian(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.gaussian()).collect()
    }

    /// Uniform on `[-1, 1]` via `2u - 1` with `u` uniform on `[0, 1)`.
    pub fn sample_uniform_pm1(&mut self) -> f64 {
        2.0 * self.inner.gen::<f64>() - 1.0
    }

    /// `+1` or `-1` with equal probability.
    pub fn sample_bernoulli_pm1(&mut self) -> f64 {
        if self.inner.next_u64() & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform index in `0..bound`, for shuffles.
    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.gen_range(0..bound)
    }
}
