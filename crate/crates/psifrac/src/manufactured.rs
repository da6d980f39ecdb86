//! Manufactured ground truth for the boundary-value solver.
//!
//! The exact solution is chosen as u*(t) = K^kappa (1 + c1 K + c2 K^2) with
//! K = psi(t) - psi(a); c1 and c2 are solved from the two nontrivial
//! boundary conditions, and the forcing is the composed derivative applied
//! to u* term by term through the power-law closed forms. Everything stays
//! analytic, so the solver can be checked against exact values on any mesh.

use std::sync::Arc;

use crate::error::LangevinError;
use crate::grid::GridFunction;
use crate::langevin::{LangevinProblem, Orders, RhsFn};
use crate::mesh::Mesh;
use crate::psi::{Domain, PsiFunction};
use crate::specfn::gamma;

/// A sum of powers of K with known coefficients.
#[derive(Debug, Clone)]
struct PowerSum {
    terms: Vec<(f64, f64)>, // (coefficient, exponent)
}

impl PowerSum {
    fn eval(&self, k: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, e)| if e == 0.0 { c } else { c * k.powf(e) })
            .sum()
    }

    /// Caputo derivative of order q, term by term:
    /// K^p -> Gamma(p+1)/Gamma(p+1-q) K^{p-q}. Valid here because every
    /// exponent stays above the order's integer ceiling.
    fn caputo(&self, q: f64) -> Result<PowerSum, LangevinError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(c, p) in &self.terms {
            let factor = gamma(p + 1.0).map_err(bad)? / gamma(p + 1.0 - q).map_err(bad)?;
            terms.push((c * factor, p - q));
        }
        Ok(PowerSum { terms })
    }

    fn scaled(&self, a: f64) -> PowerSum {
        PowerSum {
            terms: self.terms.iter().map(|&(c, e)| (a * c, e)).collect(),
        }
    }

    fn plus(&self, other: &PowerSum) -> PowerSum {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        PowerSum { terms }
    }
}

fn bad(e: crate::error::SpecFnError) -> LangevinError {
    LangevinError::InvalidProblem(e.to_string())
}

/// A manufactured problem instance: the exact pair (u*, cD^delta u*), the
/// forcing, and the assembled [`LangevinProblem`].
pub struct Manufactured {
    pub problem: LangevinProblem,
    /// coupling strengths of the rhs in its u and d slots (the Lipschitz
    /// constants of the manufactured f)
    pub lip1: f64,
    pub lip2: f64,
    exact: PowerSum,
    exact_du: PowerSum,
    psi_at_a: f64,
    psi: PsiFunction,
}

impl Manufactured {
    /// Build with solution coefficients solved from the boundary
    /// conditions. `kappa >= 3` keeps the forcing finite on the closed
    /// domain for every admissible order combination.
    pub fn new(
        psi: PsiFunction,
        domain: Domain,
        orders: Orders,
        lambda: f64,
        mu: f64,
        kappa: f64,
        lip1: f64,
        lip2: f64,
    ) -> Result<Self, LangevinError> {
        if !(kappa >= 3.0) {
            return Err(LangevinError::InvalidProblem(format!(
                "manufactured exponent kappa must be >= 3, got {kappa}"
            )));
        }
        let s_a = psi.eval(domain.a);
        let k_eta = psi.eval(domain.eta) - s_a;
        let k_t = psi.eval(domain.t_end) - s_a;
        let k_xi = psi.eval(domain.xi) - s_a;
        let d = orders.delta;
        // nonlocal functional of a single power term:
        // G(p) = K_T^p - mu Gamma(p+1)/Gamma(p+1+delta) K_xi^{p+delta}
        let gfun = |p: f64| -> Result<f64, LangevinError> {
            Ok(k_t.powf(p)
                - mu * gamma(p + 1.0).map_err(bad)? / gamma(p + 1.0 + d).map_err(bad)?
                    * k_xi.powf(p + d))
        };
        let (p0, p1, p2) = (kappa, kappa + 1.0, kappa + 2.0);
        // rows: vanish at eta; satisfy the nonlocal condition at T
        let a11 = k_eta.powf(p1);
        let a12 = k_eta.powf(p2);
        let b1 = -k_eta.powf(p0);
        let a21 = gfun(p1)?;
        let a22 = gfun(p2)?;
        let b2 = -gfun(p0)?;
        let det = a11 * a22 - a12 * a21;
        if det.abs() <= 1e-14 * (a11 * a22).abs().max((a12 * a21).abs()) {
            return Err(LangevinError::InvalidProblem(
                "manufactured coefficient system is degenerate".into(),
            ));
        }
        let c1 = (b1 * a22 - a12 * b2) / det;
        let c2 = (a11 * b2 - b1 * a21) / det;
        Self::with_coefficients(psi, domain, orders, lambda, mu, kappa, &[1.0, c1, c2], lip1, lip2)
    }

    /// Build with explicit polynomial coefficients for (1, K, K^2, ...)
    /// multiplying K^kappa. The boundary conditions then hold only if the
    /// caller arranged them.
    #[allow(clippy::too_many_arguments)]
    pub fn with_coefficients(
        psi: PsiFunction,
        domain: Domain,
        orders: Orders,
        lambda: f64,
        mu: f64,
        kappa: f64,
        coeffs: &[f64],
        lip1: f64,
        lip2: f64,
    ) -> Result<Self, LangevinError> {
        if coeffs.is_empty() {
            return Err(LangevinError::InvalidProblem(
                "manufactured solution needs at least one coefficient".into(),
            ));
        }
        let exact = PowerSum {
            terms: coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| (c, kappa + j as f64))
                .collect(),
        };
        let exact_du = exact.caputo(orders.delta)?;
        // forcing = cD^rho (cD^sigma + lambda) u*
        let composed = exact
            .caputo(orders.sigma)?
            .plus(&exact.scaled(lambda))
            .caputo(orders.rho)?;
        let s_a = psi.eval(domain.a);
        let psi_for_rhs = psi.clone();
        let exact_for_rhs = exact.clone();
        let exact_du_for_rhs = exact_du.clone();
        let rhs: RhsFn = Arc::new(move |t, u, dv| {
            let k = psi_for_rhs.eval(t) - s_a;
            composed.eval(k)
                + lip1 * (u - exact_for_rhs.eval(k))
                + lip2 * (dv - exact_du_for_rhs.eval(k))
        });
        let problem = LangevinProblem::new(orders, lambda, mu, domain, psi.clone(), rhs)?;
        Ok(Self {
            problem,
            lip1: lip1.abs(),
            lip2: lip2.abs(),
            exact,
            exact_du,
            psi_at_a: s_a,
            psi,
        })
    }

    pub fn exact(&self, t: f64) -> f64 {
        self.exact.eval(self.psi.eval(t) - self.psi_at_a)
    }

    pub fn exact_derivative(&self, t: f64) -> f64 {
        self.exact_du.eval(self.psi.eval(t) - self.psi_at_a)
    }

    pub fn exact_grid(&self, mesh: &Arc<Mesh>) -> GridFunction {
        let s0 = mesh.s(0);
        let vals = mesh
            .nodes_s()
            .iter()
            .map(|&s| self.exact.eval(s - s0))
            .collect();
        GridFunction::from_raw(mesh.clone(), vals)
    }

    pub fn exact_derivative_grid(&self, mesh: &Arc<Mesh>) -> GridFunction {
        let s0 = mesh.s(0);
        let vals = mesh
            .nodes_s()
            .iter()
            .map(|&s| self.exact_du.eval(s - s0))
            .collect();
        GridFunction::from_raw(mesh.clone(), vals)
    }

    /// Forcing value F*(t) = (cD^rho (cD^sigma + lambda) u*)(t); the rhs
    /// evaluated on the exact trajectory.
    pub fn forcing(&self, t: f64) -> f64 {
        (self.problem.rhs)(t, self.exact(t), self.exact_derivative(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{frac_integral_left, FracOrder};
    use crate::mesh::build_mesh;
    use approx::assert_relative_eq;

    fn build(psi: PsiFunction, domain: Domain) -> Manufactured {
        Manufactured::new(
            psi,
            domain,
            Orders::new(1.5, 0.9, 0.3).unwrap(),
            0.05,
            0.1,
            4.0,
            0.05,
            0.05,
        )
        .unwrap()
    }

    #[test]
    fn boundary_conditions_hold_analytically() {
        let dom = Domain::new(0.0, 0.25, 0.375, 0.5).unwrap();
        let m = build(PsiFunction::identity(), dom);
        assert_eq!(m.exact(0.0), 0.0);
        assert!(m.exact(0.25).abs() <= 1e-16, "u*(eta) = {}", m.exact(0.25));
        // nonlocal condition checked against a fine quadrature of J^delta
        let mesh = build_mesh(&m.problem.psi, &m.problem.domain, 4096).unwrap();
        let ug = m.exact_grid(&mesh);
        let j = frac_integral_left(FracOrder::new(0.3).unwrap(), &ug).unwrap();
        let lhs = m.exact(0.5);
        let rhs = 0.1 * j[mesh.xi_index()];
        assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
    }

    #[test]
    fn derivative_channel_matches_discrete_caputo() {
        let dom = Domain::new(0.0, 0.25, 0.375, 0.5).unwrap();
        let m = build(PsiFunction::identity(), dom);
        let mesh = build_mesh(&m.problem.psi, &m.problem.domain, 2048).unwrap();
        let ug = m.exact_grid(&mesh);
        let d = crate::fracops::caputo_left(FracOrder::new(0.3).unwrap(), &ug).unwrap();
        for i in (64..=2048).step_by(128) {
            assert_relative_eq!(
                d[i],
                m.exact_derivative(mesh.t(i)),
                max_relative = 1e-4,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn rhs_reduces_to_forcing_on_exact_trajectory() {
        let dom = Domain::new(0.0, 0.25, 0.375, 0.5).unwrap();
        let m = build(PsiFunction::identity(), dom);
        for &t in &[0.05, 0.2, 0.4, 0.5] {
            let on_exact = (m.problem.rhs)(t, m.exact(t), m.exact_derivative(t));
            assert_relative_eq!(on_exact, m.forcing(t), max_relative = 1e-14, epsilon = 1e-300);
            // off the trajectory the coupling terms move the value
            let off = (m.problem.rhs)(t, m.exact(t) + 1.0, m.exact_derivative(t));
            assert_relative_eq!(off - on_exact, 0.05, max_relative = 1e-10);
        }
    }

    #[test]
    fn log_generator_variant_consistent() {
        let a = 1.0;
        let t_end = (0.5f64).exp();
        let eta = (0.25f64).exp();
        let xi = (0.375f64).exp();
        let dom = Domain::new(a, eta, xi, t_end).unwrap();
        let m = build(PsiFunction::logarithm(), dom);
        assert_eq!(m.exact(a), 0.0);
        assert!(m.exact(eta).abs() <= 1e-15);
        // identical K-profile to the identity variant on [0, 1/2]
        let dom_id = Domain::new(0.0, 0.25, 0.375, 0.5).unwrap();
        let mid = build(PsiFunction::identity(), dom_id);
        for i in 0..=10 {
            let k = 0.05 * i as f64;
            assert_relative_eq!(
                m.exact((k + 0.0f64).exp()),
                mid.exact(k),
                max_relative = 1e-10,
                epsilon = 1e-16
            );
        }
    }

    #[test]
    fn kappa_below_three_rejected() {
        let dom = Domain::new(0.0, 0.25, 0.375, 0.5).unwrap();
        let r = Manufactured::new(
            PsiFunction::identity(),
            dom,
            Orders::new(1.5, 0.9, 0.3).unwrap(),
            0.05,
            0.1,
            2.5,
            0.0,
            0.0,
        );
        assert!(r.is_err());
    }
}
