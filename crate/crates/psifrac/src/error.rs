use thiserror::Error;

/// Errors from generator-function construction and mesh building.
#[derive(Debug, Error)]
pub enum PsiError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("inversion failure: bisection does not bracket psi = {target} in [{lo}, {hi}]")]
    InversionFailure { target: f64, lo: f64, hi: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

/// Errors from special-function evaluation.
#[derive(Debug, Error)]
pub enum SpecFnError {
    #[error("gamma pole at x = {0}")]
    PoleError(f64),
    #[error("Mittag-Leffler series did not converge within {max_terms} terms (alpha = {alpha}, z = {z})")]
    NonConvergence { alpha: f64, z: f64, max_terms: usize },
    #[error("argument |z| = {z} outside series radius {radius}")]
    RadiusExceeded { z: f64, radius: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Errors from the discrete fractional operators.
#[derive(Debug, Error)]
pub enum FracOpsError {
    #[error("order error: {0}")]
    OrderError(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

/// Errors from the Langevin assembly and solver.
#[derive(Debug, Error)]
pub enum LangevinError {
    #[error("degenerate problem: |Delta| = {delta_abs} below tolerance (sigma products {scale})")]
    DegenerateProblem { delta_abs: f64, scale: f64 },
    /// The iteration budget ran out; the partial solution and its trace are
    /// carried along so callers can still inspect or emit them.
    #[error("no convergence after {} iterations (last update norm {})",
            bundle.iterations, bundle.final_update_norm)]
    NoConvergence { bundle: Box<crate::langevin::SolutionBundle> },
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Psi(#[from] PsiError),
    #[error(transparent)]
    Ops(#[from] FracOpsError),
}

/// Errors from certificate and stability-bound evaluation.
#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("truncation warning: last shell {last_shell} exceeds {threshold} of bound")]
    TruncationWarning { last_shell: f64, threshold: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Langevin(#[from] LangevinError),
    #[error(transparent)]
    SpecFn(#[from] SpecFnError),
    #[error(transparent)]
    Ops(#[from] FracOpsError),
}

/// Errors from config parsing and validation.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("range error: {key}: {constraint}")]
    RangeError { key: String, constraint: String },
    #[error("io error: {0}")]
    IoError(#[from] std::io::Error),
}
