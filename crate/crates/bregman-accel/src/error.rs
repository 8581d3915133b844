use thiserror::Error;

/// Errors surfaced by generators, solvers, and file I/O.
///
/// Dimension mismatches between in-memory values are programmer errors and
/// panic instead (see the `# Panics` sections on the individual operations).
#[derive(Debug, Error)]
pub enum Error {
    /// Caller-supplied parameter or file content is invalid.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `p` is not a subgradient of the l1 norm at the given point.
    #[error("not an l1 subgradient at coordinate {index}: p = {p_value}, but v = {v_value} (tolerance {tol:e})")]
    NotASubgradient {
        index: usize,
        p_value: f64,
        v_value: f64,
        tol: f64,
    },

    /// SVD failed to converge.
    #[error("SVD did not converge on a {rows}x{cols} matrix (frobenius norm {frob_norm:e})")]
    SvdFailed {
        rows: usize,
        cols: usize,
        frob_norm: f64,
    },

    /// Inner proximal-gradient loop hit its iteration cap before reaching
    /// the requested gradient-map accuracy.
    #[error(
        "inner solver stopped at gradient-map norm {achieved:e} after {iters} iterations \
         (target {target:e})"
    )]
    InnerLoopCap {
        achieved: f64,
        target: f64,
        iters: usize,
    },

    /// A rate check found the trace dipping below its reference optimum by
    /// more than rounding allows; the reference is not accurate enough.
    #[error(
        "reference optimum is worse than a trace value by {excess:e} at iteration {k}; \
         recompute the reference at higher accuracy"
    )]
    ReferenceQuality { k: usize, excess: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A data file does not match its declared layout.
    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn format(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
