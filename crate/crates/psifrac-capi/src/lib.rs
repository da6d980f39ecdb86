//! C ABI over the psifrac library.
//!
//! Conventions: every fallible call returns a [`PsifracStatus`]; results
//! come back through out-pointers; solver state is held behind opaque
//! handles that the caller frees with the matching `_free` function. All
//! functions are thread-safe; handles must not be shared mutably.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use psifrac::config::parse_config;
use psifrac::error::LangevinError;
use psifrac::langevin::{solve_picard, SolutionBundle};
use psifrac::specfn::{erf, gamma, mittag_leffler, MlParams};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsifracStatus {
    Ok = 0,
    /// null pointer, bad UTF-8, or an argument outside its range
    InvalidArgument = 1,
    /// config file missing, malformed, or failed validation
    Config = 2,
    /// iteration budget exhausted before the tolerance was met
    NoConvergence = 3,
    /// boundary system determinant below tolerance
    Degenerate = 4,
    Io = 5,
    /// any other failure (details unavailable across the ABI)
    Internal = 6,
}

/// Opaque solver result handle.
pub struct PsifracSolution {
    bundle: SolutionBundle,
    converged: bool,
}

fn guard<F: FnOnce() -> PsifracStatus>(f: F) -> PsifracStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(PsifracStatus::Internal)
}

unsafe fn path_from(ptr: *const c_char) -> Option<&'static Path> {
    if ptr.is_null() {
        return None;
    }
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().ok()?;
    Some(Path::new(s))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn psifrac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Gamma function. Fails on the poles at 0, -1, -2, ...
#[no_mangle]
pub extern "C" fn psifrac_gamma(x: f64, out: *mut f64) -> PsifracStatus {
    if out.is_null() {
        return PsifracStatus::InvalidArgument;
    }
    guard(|| match gamma(x) {
        Ok(v) => {
            unsafe { *out = v };
            PsifracStatus::Ok
        }
        Err(_) => PsifracStatus::InvalidArgument,
    })
}

/// Error function (total; never fails).
#[no_mangle]
pub extern "C" fn psifrac_erf(x: f64) -> f64 {
    erf(x)
}

/// Mittag-Leffler E_{alpha,beta}(z) by series summation.
#[no_mangle]
pub extern "C" fn psifrac_ml_eval(alpha: f64, beta: f64, z: f64, out: *mut f64) -> PsifracStatus {
    if out.is_null() {
        return PsifracStatus::InvalidArgument;
    }
    guard(|| {
        let params = MlParams::new(alpha).with_beta(beta);
        match mittag_leffler(&params, z) {
            Ok(v) => {
                unsafe { *out = v };
                PsifracStatus::Ok
            }
            Err(_) => PsifracStatus::InvalidArgument,
        }
    })
}

/// Solve the problem described by a TOML config file.
///
/// On `Ok` and on `NoConvergence` a handle is stored in `out`; the partial
/// solution of a non-converged run is still inspectable. The caller owns
/// the handle and must release it with [`psifrac_solution_free`].
#[no_mangle]
pub extern "C" fn psifrac_solve_config(
    config_path: *const c_char,
    out: *mut *mut PsifracSolution,
) -> PsifracStatus {
    if out.is_null() {
        return PsifracStatus::InvalidArgument;
    }
    guard(|| {
        let path = match unsafe { path_from(config_path) } {
            Some(p) => p,
            None => return PsifracStatus::InvalidArgument,
        };
        let cfg = match parse_config(path) {
            Ok(c) => c,
            Err(_) => return PsifracStatus::Config,
        };
        match solve_picard(&cfg.problem, &cfg.solver) {
            Ok(bundle) => {
                let h = Box::new(PsifracSolution {
                    bundle,
                    converged: true,
                });
                unsafe { *out = Box::into_raw(h) };
                PsifracStatus::Ok
            }
            Err(LangevinError::NoConvergence { bundle }) => {
                let h = Box::new(PsifracSolution {
                    bundle: *bundle,
                    converged: false,
                });
                unsafe { *out = Box::into_raw(h) };
                PsifracStatus::NoConvergence
            }
            Err(LangevinError::DegenerateProblem { .. }) => PsifracStatus::Degenerate,
            Err(_) => PsifracStatus::Internal,
        }
    })
}

/// Number of mesh nodes in a solution.
#[no_mangle]
pub extern "C" fn psifrac_solution_len(handle: *const PsifracSolution) -> usize {
    if handle.is_null() {
        return 0;
    }
    unsafe { &*handle }.bundle.u.len()
}

/// Whether the solve met its tolerance.
#[no_mangle]
pub extern "C" fn psifrac_solution_converged(handle: *const PsifracSolution) -> bool {
    if handle.is_null() {
        return false;
    }
    unsafe { &*handle }.converged
}

/// Iterations performed.
#[no_mangle]
pub extern "C" fn psifrac_solution_iterations(handle: *const PsifracSolution) -> usize {
    if handle.is_null() {
        return 0;
    }
    unsafe { &*handle }.bundle.iterations
}

/// Read node i: time, solution value, and the derivative channel.
#[no_mangle]
pub extern "C" fn psifrac_solution_node(
    handle: *const PsifracSolution,
    i: usize,
    t: *mut f64,
    u: *mut f64,
    du: *mut f64,
) -> PsifracStatus {
    if handle.is_null() || t.is_null() || u.is_null() || du.is_null() {
        return PsifracStatus::InvalidArgument;
    }
    let sol = unsafe { &*handle };
    if i >= sol.bundle.u.len() {
        return PsifracStatus::InvalidArgument;
    }
    unsafe {
        *t = sol.bundle.u.mesh().t(i);
        *u = sol.bundle.u[i];
        *du = sol.bundle.du[i];
    }
    PsifracStatus::Ok
}

/// Max interior residual of the differential form.
#[no_mangle]
pub extern "C" fn psifrac_solution_residual(handle: *const PsifracSolution) -> f64 {
    if handle.is_null() {
        return f64::NAN;
    }
    unsafe { &*handle }.bundle.residual.interior_max
}

/// Release a solution handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn psifrac_solution_free(handle: *mut PsifracSolution) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Solve a config and write the solution CSV in one call.
#[no_mangle]
pub extern "C" fn psifrac_solve_to_csv(
    config_path: *const c_char,
    csv_path: *const c_char,
) -> PsifracStatus {
    guard(|| {
        let (config, csv) = match (unsafe { path_from(config_path) }, unsafe {
            path_from(csv_path)
        }) {
            (Some(a), Some(b)) => (a, b),
            _ => return PsifracStatus::InvalidArgument,
        };
        let cfg = match parse_config(config) {
            Ok(c) => c,
            Err(_) => return PsifracStatus::Config,
        };
        let (bundle, status) = match solve_picard(&cfg.problem, &cfg.solver) {
            Ok(b) => (b, PsifracStatus::Ok),
            Err(LangevinError::NoConvergence { bundle }) => (*bundle, PsifracStatus::NoConvergence),
            Err(LangevinError::DegenerateProblem { .. }) => return PsifracStatus::Degenerate,
            Err(_) => return PsifracStatus::Internal,
        };
        let file = match std::fs::File::create(csv) {
            Ok(f) => f,
            Err(_) => return PsifracStatus::Io,
        };
        let mut w = std::io::BufWriter::new(file);
        if psifrac::csvio::write_solution_csv(&bundle, &mut w).is_err() {
            return PsifracStatus::Io;
        }
        if std::io::Write::flush(&mut w).is_err() {
            return PsifracStatus::Io;
        }
        status
    })
}

/// Evaluate the uniqueness and existence verdicts of a config.
///
/// `uniqueness` and `existence` receive 1 for pass, 0 for fail.
#[no_mangle]
pub extern "C" fn psifrac_certify(
    config_path: *const c_char,
    uniqueness: *mut i32,
    existence: *mut i32,
) -> PsifracStatus {
    if uniqueness.is_null() || existence.is_null() {
        return PsifracStatus::InvalidArgument;
    }
    guard(|| {
        let path = match unsafe { path_from(config_path) } {
            Some(p) => p,
            None => return PsifracStatus::InvalidArgument,
        };
        let cfg = match parse_config(path) {
            Ok(c) => c,
            Err(_) => return PsifracStatus::Config,
        };
        if cfg.assumptions.lip1.is_none() || cfg.assumptions.lip2.is_none() {
            return PsifracStatus::Config;
        }
        let mesh = match psifrac::build_mesh(&cfg.problem.psi, &cfg.problem.domain, cfg.solver.n) {
            Ok(m) => m,
            Err(_) => return PsifracStatus::Config,
        };
        let uniq = match psifrac::certify::uniqueness_certificate(&cfg.problem, &cfg.assumptions, &mesh)
        {
            Ok(u) => u,
            Err(psifrac::CertifyError::Langevin(LangevinError::DegenerateProblem { .. })) => {
                return PsifracStatus::Degenerate
            }
            Err(_) => return PsifracStatus::Internal,
        };
        let exist = match psifrac::certify::existence_certificate(&cfg.problem, &cfg.assumptions, &mesh)
        {
            Ok(e) => e,
            Err(_) => return PsifracStatus::Internal,
        };
        unsafe {
            *uniqueness = uniq.holds as i32;
            *existence = exist.holds as i32;
        }
        PsifracStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::io::Write as _;

    const CONFIG: &str = r#"
[psi]
kind = "identity"

[domain]
a = 0.0
eta = 0.25
xi = 0.375
T = 0.5

[orders]
rho = 1.5
sigma = 0.9
delta = 0.3

[params]
lambda = 0.05
mu = 0.1

[rhs]
expr = "one"

[solver]
n = 64
tol = 1e-9
max_iter = 100

[assumptions]
l1 = 0.0
l2 = 0.0
"#;

    #[test]
    fn special_functions_roundtrip() {
        let mut out = 0.0;
        assert_eq!(psifrac_gamma(5.0, &mut out), PsifracStatus::Ok);
        assert!((out - 24.0).abs() < 1e-10);
        assert_eq!(psifrac_gamma(0.0, &mut out), PsifracStatus::InvalidArgument);
        assert!((psifrac_erf(0.0)).abs() == 0.0);
        assert_eq!(psifrac_ml_eval(1.0, 1.0, 1.0, &mut out), PsifracStatus::Ok);
        assert!((out - std::f64::consts::E).abs() < 1e-10);
        assert_eq!(
            psifrac_ml_eval(-1.0, 1.0, 1.0, &mut out),
            PsifracStatus::InvalidArgument
        );
        assert_eq!(
            psifrac_gamma(1.0, std::ptr::null_mut()),
            PsifracStatus::InvalidArgument
        );
    }

    #[test]
    fn solve_handle_lifecycle() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("p.toml");
        std::fs::File::create(&cfg_path)
            .unwrap()
            .write_all(CONFIG.as_bytes())
            .unwrap();
        let c_path = CString::new(cfg_path.to_str().unwrap()).unwrap();
        let mut handle: *mut PsifracSolution = std::ptr::null_mut();
        assert_eq!(
            psifrac_solve_config(c_path.as_ptr(), &mut handle),
            PsifracStatus::Ok
        );
        assert!(!handle.is_null());
        assert!(psifrac_solution_converged(handle));
        assert_eq!(psifrac_solution_len(handle), 65);
        assert!(psifrac_solution_iterations(handle) >= 1);
        let (mut t, mut u, mut du) = (0.0, 0.0, 0.0);
        assert_eq!(
            psifrac_solution_node(handle, 64, &mut t, &mut u, &mut du),
            PsifracStatus::Ok
        );
        assert!((t - 0.5).abs() < 1e-14);
        assert_eq!(
            psifrac_solution_node(handle, 65, &mut t, &mut u, &mut du),
            PsifracStatus::InvalidArgument
        );
        assert!(psifrac_solution_residual(handle).is_finite());
        psifrac_solution_free(handle);
        psifrac_solution_free(std::ptr::null_mut());
    }

    #[test]
    fn solve_to_csv_and_certify() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("p.toml");
        std::fs::File::create(&cfg_path)
            .unwrap()
            .write_all(CONFIG.as_bytes())
            .unwrap();
        let csv_path = dir.path().join("sol.csv");
        let c_cfg = CString::new(cfg_path.to_str().unwrap()).unwrap();
        let c_csv = CString::new(csv_path.to_str().unwrap()).unwrap();
        assert_eq!(
            psifrac_solve_to_csv(c_cfg.as_ptr(), c_csv.as_ptr()),
            PsifracStatus::Ok
        );
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(text.starts_with("t,u,du,residual\n"));
        assert_eq!(text.lines().count(), 66);

        let (mut uniq, mut exist) = (-1, -1);
        assert_eq!(
            psifrac_certify(c_cfg.as_ptr(), &mut uniq, &mut exist),
            PsifracStatus::Ok
        );
        assert_eq!(uniq, 1);
        assert_eq!(exist, 1);
    }

    #[test]
    fn bad_paths_reported() {
        let c = CString::new("/definitely/not/here.toml").unwrap();
        let mut handle: *mut PsifracSolution = std::ptr::null_mut();
        assert_eq!(
            psifrac_solve_config(c.as_ptr(), &mut handle),
            PsifracStatus::Config
        );
        assert_eq!(
            psifrac_solve_config(std::ptr::null(), &mut handle),
            PsifracStatus::InvalidArgument
        );
        assert!(!psifrac_version().is_null());
    }
}
