use thiserror::Error;

/// Errors produced by the numerical layers and model builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecayError {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "quadrature did not converge after {panels} panels (estimate {best_estimate:e}, error {error_estimate:e})"
    )]
    NonConvergence {
        best_estimate: f64,
        best_estimate_im: f64,
        error_estimate: f64,
        panels: usize,
    },

    #[error("integrand is not finite at x = {at}")]
    NonFinite { at: f64 },

    #[error("pole {pole} is not inside ({a}, {b})")]
    PoleOutsideInterval { pole: f64, a: f64, b: f64 },

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("moment of order {order} diverges for this spectral function")]
    DivergentMoment { order: u32 },

    #[error("time grid too coarse: convolution self-check error {error:e} exceeds {tolerance:e}; refine the grid")]
    GridTooCoarse { error: f64, tolerance: f64 },

    #[error("sum rule violated: max |sum h_i + p'| = {residual:e} exceeds {tolerance:e}")]
    SumRuleViolated { residual: f64, tolerance: f64 },

    #[error("k-range [{lo}, {hi}] does not cover the form-factor support [{support_lo}, {support_hi}]")]
    RangeDoesNotCoverSupport {
        lo: f64,
        hi: f64,
        support_lo: f64,
        support_hi: f64,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<DecayError>,
    },
}

impl DecayError {
    pub fn context(self, context: impl Into<String>) -> Self {
        DecayError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any context layers.
    pub fn root(&self) -> &DecayError {
        match self {
            DecayError::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, DecayError>;

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
