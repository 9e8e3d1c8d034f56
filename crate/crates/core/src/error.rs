use std::fmt;

/// One violated invariant, keyed by the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every diagnostic produced by a validation pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic::new(field, message));
    }

    pub fn is_empty(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// True when some diagnostic message contains `needle`.
    pub fn mentions(&self, needle: &str) -> bool {
        self.diagnostics.iter().any(|d| d.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters:\n{0}")]
    Invalid(#[from] ValidationReport),

    #[error("cone half-angle {0} rad outside (0, pi/2)")]
    ConeAngle(f64),

    #[error("non-finite state component at t = {t} s")]
    NonFinite { t: f64 },

    #[error("state magnitude {norm:.3e} exceeded divergence bound {bound:.3e} at t = {t} s")]
    Diverged { t: f64, norm: f64, bound: f64 },

    #[error("initial state is not planar and cannot drive a 2D run")]
    NotPlanar,

    #[error("no impact velocity")]
    NoImpactVelocity,

    #[error("no critical damping below bound: delay {delay} s exceeds the maximum stabilisable delay {max_delay} s")]
    NoCriticalDamping { delay: f64, max_delay: f64 },

    #[error("channel length mismatch: {measured} measured samples vs {commanded} commanded")]
    ChannelMismatch { measured: usize, commanded: usize },

    #[error("{0}")]
    Domain(String),
}
