use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to meet its accuracy contract.
    #[error("numeric error in {context}: {detail}")]
    Numeric {
        context: &'static str,
        detail: String,
    },

    /// Every grid point of a signal fell below the Fisher-information floor.
    #[error("degenerate signal: all {points} grid points below the detection floor")]
    DegenerateSignal { points: usize },

    /// A threshold search found no sign change of its criterion over the scan.
    #[error("threshold criterion {which} over the scanned range [{d_lo}, {d_hi}]")]
    Bracket {
        which: &'static str,
        d_lo: f64,
        d_hi: f64,
    },

    /// A sampled profile does not have the shape an operation requires.
    #[error("profile shape error: {0}")]
    Shape(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            context,
            detail: detail.into(),
        }
    }
}

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be finite, got {x}")))
    }
}
