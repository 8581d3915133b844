//! Extrapolation weights for the accelerated iterations.
//!
//! The accelerated variants combine consecutive iterates with the weights
//! `alpha_k = 1 + theta_{k+1} (1/theta_k - 1)` built from the Tseng-style
//! sequence `theta_{-1} = 1`, `theta_k = 2/(k+2)`. `alpha_0 = 1`, so the
//! first accelerated step coincides with the plain one, and `alpha_k` climbs
//! monotonically from 1 toward 2.

use serde::{Deserialize, Serialize};

/// `theta(-1) = 1`, `theta(k) = 2/(k+2)` for `k >= 0`.
///
/// # Panics
/// Panics for `k < -1`.
pub fn theta(k: i64) -> f64 {
    assert!(k >= -1, "theta: k must be >= -1, got {k}");
    if k == -1 {
        1.0
    } else {
        2.0 / (k as f64 + 2.0)
    }
}

/// `alpha_k = 1 + theta_{k+1} (1/theta_k - 1)`; in closed form
/// `(2k + 3)/(k + 3)`.
pub fn alpha(k: usize) -> f64 {
    let k = k as i64;
    1.0 + theta(k + 1) * (1.0 / theta(k) - 1.0)
}

/// Extrapolation schedule: the standard sequence, or a fixed weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// Fixed weight in `(0, 2]`; `Constant(1.0)` disables extrapolation.
    Constant(f64),
    /// `alpha_k` from the theta sequence.
    TsengTheta,
}

impl ScheduleKind {
    /// Weight used by the step taken from iterate `k` to `k + 1`.
    pub fn alpha_at(&self, k: usize) -> f64 {
        match self {
            ScheduleKind::Constant(a) => *a,
            ScheduleKind::TsengTheta => alpha(k),
        }
    }

    pub fn validate(&self) -> Result<(), crate::error::Error> {
        if let ScheduleKind::Constant(a) = self {
            if !(*a > 0.0 && *a <= 2.0) {
                return Err(crate::error::Error::invalid(format!(
                    "constant schedule weight must lie in (0, 2], got {a}"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleKind::Constant(a) => write!(f, "constant:{a}"),
            ScheduleKind::TsengTheta => f.write_str("tseng"),
        }
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, crate::error::Error> {
        let kind = if s == "tseng" {
            ScheduleKind::TsengTheta
        } else if let Some(weight) = s.strip_prefix("constant:") {
            let a: f64 = weight.parse().map_err(|_| {
                crate::error::Error::invalid(format!(
                    "constant schedule weight {weight:?} is not a number"
                ))
            })?;
            ScheduleKind::Constant(a)
        } else {
            return Err(crate::error::Error::invalid(format!(
                "unknown schedule {s:?}; expected tseng or constant:<weight>"
            )));
        };
        kind.validate()?;
        Ok(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_known_values() {
        assert_eq!(theta(-1), 1.0);
        assert_eq!(theta(0), 1.0);
        assert_eq!(theta(2), 0.5);
    }

    #[test]
    #[should_panic(expected = "theta")]
    fn theta_rejects_below_minus_one() {
        theta(-2);
    }

    #[test]
    fn alpha_known_values() {
        assert_eq!(alpha(0), 1.0);
        assert_eq!(alpha(1), 1.25);
    }

    #[test]
    fn alpha_matches_closed_form_and_stays_in_range() {
        let mut prev = 0.0;
        for k in 0..1_000_000usize {
            let a = alpha(k);
            let closed = (2.0 * k as f64 + 3.0) / (k as f64 + 3.0);
            assert!((a - closed).abs() <= 1e-12, "k={k}");
            assert!((1.0..2.0).contains(&a), "k={k}: {a}");
            assert!(a >= prev, "k={k}");
            prev = a;
        }
    }

    #[test]
    fn constant_schedule_validation() {
        assert!(ScheduleKind::Constant(1.0).validate().is_ok());
        assert!(ScheduleKind::Constant(2.0).validate().is_ok());
        assert!(ScheduleKind::Constant(0.0).validate().is_err());
        assert!(ScheduleKind::Constant(2.5).validate().is_err());
    }

    #[test]
    fn schedule_parse_round_trip() {
        for kind in [ScheduleKind::TsengTheta, ScheduleKind::Constant(1.0), ScheduleKind::Constant(0.75)] {
            let back: ScheduleKind = kind.to_string().parse().unwrap();
            assert_eq!(back, kind);
        }
        assert!("constant:2.5".parse::<ScheduleKind>().is_err());
        assert!("constant:abc".parse::<ScheduleKind>().is_err());
        assert!("nesterov".parse::<ScheduleKind>().is_err());
    }
}
