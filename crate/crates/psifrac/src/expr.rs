//! Built-in function catalogs for the command line: test profiles for the
//! operator subcommand and right-hand sides for the solver.

use std::sync::Arc;

use crate::langevin::{RhsFn, ScalarFn};

/// Test profiles g(K), K = psi(t) - psi(a), for `op-apply`.
///
/// Known ids: `one`, `k`, `k2`, `k4`, `sin-k`, `cos-k`, `exp-k`, `sqrt-k`,
/// and `pow:B` for the power K^B.
pub fn profile(id: &str) -> Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    if let Some(rest) = id.strip_prefix("pow:") {
        let b: f64 = rest.parse().ok()?;
        if !(b >= 0.0) {
            return None;
        }
        return Some(Arc::new(move |k| if b == 0.0 { 1.0 } else { k.powf(b) }));
    }
    let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match id {
        "one" => Arc::new(|_| 1.0),
        "k" => Arc::new(|k| k),
        "k2" => Arc::new(|k| k * k),
        "k4" => Arc::new(|k| k * k * k * k),
        "sin-k" => Arc::new(f64::sin),
        "cos-k" => Arc::new(f64::cos),
        "exp-k" => Arc::new(f64::exp),
        "sqrt-k" => Arc::new(f64::sqrt),
        _ => return None,
    };
    Some(f)
}

pub const PROFILE_IDS: &[&str] = &["one", "k", "k2", "k4", "sin-k", "cos-k", "exp-k", "sqrt-k", "pow:B"];

/// Right-hand sides f(t, u, d) for the solver config.
///
/// `psi_of_a` shifts the t-dependent entries so they are functions of
/// K(t; a). Lipschitz constants in (u, d): `zero`, `one`, `k`, `sin-k` have
/// (0, 0); `cos-u` has (1, 0); `mixed` has (1/2, 1/2).
pub fn rhs(id: &str, psi: crate::psi::PsiFunction, psi_of_a: f64) -> Option<RhsFn> {
    let k = move |t: f64| psi.eval(t) - psi_of_a;
    let f: RhsFn = match id {
        "zero" => Arc::new(|_, _, _| 0.0),
        "one" => Arc::new(|_, _, _| 1.0),
        "k" => Arc::new(move |t, _, _| k(t)),
        "sin-k" => Arc::new(move |t, _, _| k(t).sin()),
        "cos-u" => Arc::new(|_, u, _| u.cos()),
        "mixed" => Arc::new(|_, u, d| 1.0 + 0.5 * u.cos() + 0.5 * d.sin()),
        _ => return None,
    };
    Some(f)
}

pub const RHS_IDS: &[&str] = &["zero", "one", "k", "sin-k", "cos-u", "mixed", "manufactured"];

/// Lipschitz constants (L1, L2) of the catalog right-hand sides.
pub fn rhs_lipschitz(id: &str) -> Option<(f64, f64)> {
    match id {
        "zero" | "one" | "k" | "sin-k" => Some((0.0, 0.0)),
        "cos-u" => Some((1.0, 0.0)),
        "mixed" => Some((0.5, 0.5)),
        _ => None,
    }
}

/// Weight functions for the Rassias-type bounds: `one`, `t`, `exp-t`.
pub fn weight(id: &str) -> Option<ScalarFn> {
    let f: ScalarFn = match id {
        "one" => Arc::new(|_| 1.0),
        "t" => Arc::new(|t| t),
        "exp-t" => Arc::new(f64::exp),
        _ => return None,
    };
    Some(f)
}

pub const WEIGHT_IDS: &[&str] = &["one", "t", "exp-t"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_catalog_and_powers() {
        assert!(profile("one").is_some());
        assert!(profile("nope").is_none());
        let p = profile("pow:1.5").unwrap();
        assert_eq!(p(4.0), 8.0);
        assert!(profile("pow:x").is_none());
        assert!(profile("pow:-1").is_none());
    }

    #[test]
    fn rhs_catalog() {
        let psi = crate::psi::PsiFunction::identity();
        let f = rhs("mixed", psi.clone(), 0.0).unwrap();
        assert_eq!(f(0.0, 0.0, 0.0), 1.5);
        assert!(rhs("bogus", psi, 0.0).is_none());
        assert_eq!(rhs_lipschitz("mixed"), Some((0.5, 0.5)));
    }
}
