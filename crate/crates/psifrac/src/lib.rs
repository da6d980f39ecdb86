//! Fractional integrals and Caputo derivatives taken with respect to an
//! increasing generator function, a fixed-point solver for a Langevin-type
//! boundary-value problem with a nonlocal terminal condition, and
//! evaluators for the contraction, existence, and stability constants that
//! certify the solve.
//!
//! The crate is organized around a mesh that is uniform in the image
//! coordinate s = psi(t): under that substitution every generator reduces
//! to the classical power kernel, one product-integration engine serves all
//! of them, and operator outputs are covariant in psi by construction.
//!
//! Modules:
//!
//! - [`psi`], [`mesh`], [`grid`]: generator functions, image-uniform
//!   meshes, sampled functions
//! - [`specfn`]: gamma, erf, Mittag-Leffler
//! - [`fracops`]: the discrete fractional operators and identity checks
//! - [`langevin`]: problem type, fixed-point operator, Picard solver
//! - [`manufactured`]: analytic ground truth for solver verification
//! - [`certify`]: uniqueness/existence certificates, Gronwall majorants,
//!   Ulam-Hyers-type bounds
//! - [`config`], [`csvio`], [`expr`]: command-line plumbing

pub mod certify;
pub mod config;
pub mod csvio;
pub mod error;
pub mod expr;
pub mod fracops;
pub mod grid;
pub mod langevin;
pub mod manufactured;
pub mod mesh;
pub mod psi;
pub mod quad;
pub mod specfn;

pub use error::{CertifyError, ConfigError, FracOpsError, LangevinError, PsiError, SpecFnError};
pub use fracops::{FracOrder, QuadOptions};
pub use grid::GridFunction;
pub use langevin::{LangevinProblem, Orders, SolutionBundle, SolverConfig};
pub use mesh::{build_mesh, Mesh};
pub use psi::{Domain, PsiFunction, PsiKind};

/// Cap on internal data parallelism, read from `PSIFRAC_THREADS`.
///
/// Returns `None` when unset or unparsable; callers decide the default.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var("PSIFRAC_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
}
