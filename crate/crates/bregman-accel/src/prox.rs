//! Closed-form shrinkage operators and the l1 Bregman distance.
//!
//! `shrink_vec` is the prox of `alpha * |.|_1`, `shrink_matrix` the prox of
//! `gamma * |.|_*` (soft-thresholding of singular values), and
//! `prox_l1_nonneg` the nonnegativity-constrained variant used by the
//! constrained dual step.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{svd, DenseMatrix};

/// Which objective `J` a solver minimizes the Bregman distance of.
///
/// `L1NonNeg` applies only to vector problems (it adds the constraint
/// `x >= 0`), `Nuclear` only to matrix problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    L1,
    L1NonNeg,
    Nuclear,
}

impl std::fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ObjectiveKind::L1 => "l1",
            ObjectiveKind::L1NonNeg => "l1-nonneg",
            ObjectiveKind::Nuclear => "nuclear",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "l1" => ObjectiveKind::L1,
            "l1-nonneg" => ObjectiveKind::L1NonNeg,
            "nuclear" => ObjectiveKind::Nuclear,
            other => {
                return Err(Error::invalid(format!(
                    "unknown objective {other:?}; expected l1, l1-nonneg, or nuclear"
                )))
            }
        })
    }
}

/// Scalar soft-threshold `sgn(z) max(|z| - alpha, 0)`.
#[inline]
pub fn shrink_scalar(z: f64, alpha: f64) -> f64 {
    // Ties |z| == alpha land exactly on 0 through the max.
    z.signum() * (z.abs() - alpha).max(0.0)
}

/// Soft-thresholding `sgn(z) .* max(|z| - alpha, 0)`, the prox of
/// `alpha * |.|_1`.
///
/// # Panics
/// Panics if `alpha <= 0`.
pub fn shrink_vec(z: &[f64], alpha: f64) -> Vec<f64> {
    assert!(alpha > 0.0, "shrink_vec: alpha must be positive");
    z.iter().map(|&zi| shrink_scalar(zi, alpha)).collect()
}

/// Matrix shrinkage `U diag(max(sigma - gamma, 0)) V'`, the prox of
/// `gamma * |.|_*` at `y`.
///
/// # Panics
/// Panics if `gamma <= 0`.
pub fn shrink_matrix(y: &DenseMatrix, gamma: f64) -> Result<DenseMatrix, Error> {
    assert!(gamma > 0.0, "shrink_matrix: gamma must be positive");
    let f = svd(y)?;
    let shrunk: Vec<f64> = f.sigma.iter().map(|&s| (s - gamma).max(0.0)).collect();
    Ok(f.reconstruct_scaled(&shrunk))
}

/// Componentwise minimizer of `|w|_1 + (1/2mu) |w - mu v|^2` over `w >= 0`:
/// `w_i = mu * max(v_i - 1, 0)`.
///
/// # Panics
/// Panics if `mu <= 0`.
pub fn prox_l1_nonneg(v: &[f64], mu: f64) -> Vec<f64> {
    assert!(mu > 0.0, "prox_l1_nonneg: mu must be positive");
    v.iter().map(|&vi| mu * (vi - 1.0).max(0.0)).collect()
}

/// Bregman distance `|u|_1 - |v|_1 - <p, u - v>` for `p` a subgradient of
/// the l1 norm at `v`.
///
/// The subgradient condition (`|p_i| <= 1`, and `p_i = sgn(v_i)` where
/// `v_i != 0`) is checked to within `1e-9`; iterates only ever produce
/// subgradients up to rounding.
pub fn bregman_distance_l1(u: &[f64], v: &[f64], p: &[f64]) -> Result<f64, Error> {
    assert_eq!(u.len(), v.len(), "bregman_distance_l1: u vs v length");
    assert_eq!(v.len(), p.len(), "bregman_distance_l1: v vs p length");
    const TOL: f64 = 1e-9;
    for (i, (&vi, &pi)) in v.iter().zip(p).enumerate() {
        let bad_magnitude = pi.abs() > 1.0 + TOL;
        let bad_sign = vi != 0.0 && (pi - vi.signum()).abs() > TOL;
        if bad_magnitude || bad_sign {
            return Err(Error::NotASubgradient {
                index: i,
                p_value: pi,
                v_value: vi,
                tol: TOL,
            });
        }
    }
    let ju: f64 = u.iter().map(|x| x.abs()).sum();
    let jv: f64 = v.iter().map(|x| x.abs()).sum();
    let cross: f64 = p
        .iter()
        .zip(u.iter().zip(v))
        .map(|(pi, (ui, vi))| pi * (ui - vi))
        .sum();
    Ok(ju - jv - cross)
}
