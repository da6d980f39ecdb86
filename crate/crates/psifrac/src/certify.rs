//! Certificate evaluators: the contraction constants behind uniqueness,
//! the compactness constants behind existence, Gronwall-type majorants,
//! and the Ulam-Hyers stability bounds.
//!
//! Every J[1] value has a power-law closed form, and the coefficient
//! functions d_ij and their delta-order Caputo derivatives are power
//! combinations, so all certificate constants are evaluated analytically;
//! the mesh only supplies the sample points for the sups.

use std::sync::Arc;

use crate::error::CertifyError;
use crate::fracops::{frac_integral_left, FracOrder};
use crate::grid::GridFunction;
use crate::langevin::{structural_constants, LangevinProblem, ScalarFn, StructuralConstants};
use crate::mesh::Mesh;
use crate::quad::Convolution;
use crate::specfn::{gamma, ln_gamma, mittag_leffler, MlParams};

/// Hypotheses supplied by the caller about the right-hand side.
#[derive(Clone, Default)]
pub struct Assumptions {
    /// Lipschitz constant of f in its second slot (u)
    pub lip1: Option<f64>,
    /// Lipschitz constant of f in its third slot (the derivative channel)
    pub lip2: Option<f64>,
    /// uniform bound on |f|
    pub bound: Option<f64>,
    /// increasing majorant of |f| in t; recorded, not consumed by the
    /// implemented bounds
    pub chi: Option<ScalarFn>,
    /// weight function for the Rassias-type bounds
    pub phi: Option<ScalarFn>,
    /// constant of the weight relation (J^rho phi)(t) <= l_phi phi(t);
    /// derived from the discrete maximum when absent
    pub l_phi: Option<f64>,
    /// perturbation amplitude
    pub epsilon: f64,
}

impl std::fmt::Debug for Assumptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Assumptions")
            .field("lip1", &self.lip1)
            .field("lip2", &self.lip2)
            .field("bound", &self.bound)
            .field("l_phi", &self.l_phi)
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

impl Assumptions {
    pub fn lipschitz(lip1: f64, lip2: f64) -> Self {
        Self {
            lip1: Some(lip1),
            lip2: Some(lip2),
            epsilon: 1.0,
            ..Default::default()
        }
    }

    pub fn with_bound(mut self, l: f64) -> Self {
        self.bound = Some(l);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_phi(mut self, phi: ScalarFn, l_phi: Option<f64>) -> Self {
        self.phi = Some(phi);
        self.l_phi = l_phi;
        self
    }

    fn require_lipschitz(&self) -> Result<(f64, f64), CertifyError> {
        match (self.lip1, self.lip2) {
            (Some(l1), Some(l2)) if l1 >= 0.0 && l2 >= 0.0 => Ok((l1, l2)),
            (Some(_), Some(_)) => Err(CertifyError::InvalidInput(
                "Lipschitz constants must be nonnegative".into(),
            )),
            _ => Err(CertifyError::InvalidInput(
                "uniqueness-type constants need lip1 and lip2".into(),
            )),
        }
    }
}

/// Contraction constants; `holds` iff 0 < max < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessCertificate {
    pub rho11: f64,
    pub rho12: f64,
    pub rho21: f64,
    pub rho22: f64,
    pub zeta11: f64,
    pub zeta12: f64,
    pub zeta13: f64,
    pub zeta21: f64,
    pub zeta22: f64,
    pub zeta23: f64,
    pub zeta_max: f64,
    pub holds: bool,
}

/// Norm constants of the fixed-point splitting; `holds` iff
/// 0 < lambda (Lambda21 + Lambda22) < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceCertificate {
    pub lambda11: f64,
    pub lambda12: f64,
    pub lambda21: f64,
    pub lambda22: f64,
    /// lambda (Lambda21 + Lambda22)
    pub product: f64,
    /// admissible ball radius (with a 1% safety factor); present when the
    /// condition holds and a uniform rhs bound was supplied
    pub radius: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVariant {
    Uh,
    GeneralizedUh,
    Uhr,
    GeneralizedUhr,
}

/// Evaluated stability bound.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub variant: StabilityVariant,
    pub kappa0: f64,
    /// epsilon * zeta13
    pub c_epsilon: f64,
    /// uniform bound epsilon zeta13 / (1 - zeta11 - zeta12 kappa0)
    pub uniform_bound: Option<f64>,
    /// pointwise bound epsilon l_phi phi(t)
    pub pointwise_bound: Option<GridFunction>,
    /// Mittag-Leffler product envelope q(t) [E_s + E_{r+s} + E_{r+s+d}]
    pub ml_envelope: Option<GridFunction>,
    /// shell magnitudes, when a truncated majorant series was evaluated
    pub gronwall_trace: Vec<f64>,
    pub l_phi: Option<f64>,
}

// analytic helpers on the snapped mesh

struct Analytic<'a> {
    mesh: &'a Arc<Mesh>,
    sc: StructuralConstants,
    sigma: f64,
    delta: f64,
}

impl<'a> Analytic<'a> {
    fn new(p: &LangevinProblem, mesh: &'a Arc<Mesh>) -> Result<Self, CertifyError> {
        let sc = structural_constants(p, mesh)?;
        Ok(Self {
            mesh,
            sc,
            sigma: p.orders.sigma,
            delta: p.orders.delta,
        })
    }

    fn j1(&self, q: f64, index: usize) -> Result<f64, CertifyError> {
        let k = self.mesh.k_from_a(index);
        Ok(k.powf(q) / gamma(1.0 + q)?)
    }

    /// cD^delta d11 and cD^delta d12 at node i, through the power closed
    /// forms of the phi components.
    fn cd_pair(&self, i: usize) -> Result<(f64, f64), CertifyError> {
        let k = self.mesh.k_from_a(i);
        let s = self.sigma;
        let d = self.delta;
        let c1 = k.powf(s - d) / gamma(s + 1.0 - d)?;
        let c2 = k.powf(s + 1.0 - d) / gamma(s + 2.0 - d)?;
        let cd11 = -(self.sc.sigma22 * c1 - self.sc.sigma21 * c2) / self.sc.delta;
        let cd12 = (self.sc.sigma12 * c1 - self.sc.sigma11 * c2) / self.sc.delta;
        Ok((cd11, cd12))
    }
}

/// Evaluate the contraction constants for a Lipschitz right-hand side.
pub fn uniqueness_certificate(
    p: &LangevinProblem,
    asm: &Assumptions,
    mesh: &Arc<Mesh>,
) -> Result<UniquenessCertificate, CertifyError> {
    let (l1, l2) = asm.require_lipschitz()?;
    let an = Analytic::new(p, mesh)?;
    let (r, s, d) = (p.orders.rho, p.orders.sigma, p.orders.delta);
    let n = mesh.n();
    let (ie, ix) = (mesh.eta_index(), mesh.xi_index());

    let js_eta = an.j1(s, ie)?;
    let js_t = an.j1(s, n)?;
    let jsd_xi = an.j1(s + d, ix)?;
    let jrs_eta = an.j1(r + s, ie)?;
    let jrs_t = an.j1(r + s, n)?;
    let jrsd_xi = an.j1(r + s + d, ix)?;

    // sups of the coefficient-bearing combinations, taken over the mesh
    // nodes of the analytic expressions
    let mut rho11_sup = 0.0f64;
    let mut rho12_sup = 0.0f64;
    let mut rho21_sup = 0.0f64;
    let mut rho22_sup = 0.0f64;
    for i in 0..=n {
        let d11 = an.sc.d11[i];
        let d12 = an.sc.d12[i];
        let (cd11, cd12) = an.cd_pair(i)?;
        rho11_sup = rho11_sup.max(d11.abs() * js_eta + d12.abs() * (js_t - p.mu * jsd_xi));
        rho12_sup = rho12_sup.max(d11.abs() * jrs_eta + d12.abs() * (jrs_t - p.mu * jrsd_xi));
        rho21_sup = rho21_sup.max(cd11.abs() * js_eta + cd12.abs() * (js_t - p.mu * jsd_xi));
        rho22_sup = rho22_sup.max(cd11.abs() * jrs_eta + cd12.abs() * (jrs_t - p.mu * jrsd_xi));
    }
    let rho11 = p.lambda * rho11_sup;
    let rho12 = rho12_sup;
    let rho21 = p.lambda * rho21_sup;
    let rho22 = rho22_sup;

    // the J-terms are increasing in psi(t) - psi(a), so their sups sit at T
    let zeta11 = p.lambda * js_t + rho11 + l1 * (jrs_t + rho12);
    let zeta13 = jrs_t + rho12;
    let zeta12 = l2 * zeta13;
    let zeta21 = p.lambda * an.j1(s - d, n)? + rho21 + l1 * (an.j1(r + s - d, n)? + rho22);
    let zeta23 = an.j1(r + s - d, n)? + rho22;
    let zeta22 = l2 * zeta23;
    let zeta_max = zeta11.max(zeta12).max(zeta21).max(zeta22);
    Ok(UniquenessCertificate {
        rho11,
        rho12,
        rho21,
        rho22,
        zeta11,
        zeta12,
        zeta13,
        zeta21,
        zeta22,
        zeta23,
        zeta_max,
        holds: zeta_max > 0.0 && zeta_max < 1.0,
    })
}

/// Evaluate the splitting constants for a uniformly bounded right-hand side.
///
/// A violated smallness condition is reported through `holds`, not as an
/// error. Coefficient values at T enter through their absolute values; they
/// bound norms.
pub fn existence_certificate(
    p: &LangevinProblem,
    asm: &Assumptions,
    mesh: &Arc<Mesh>,
) -> Result<ExistenceCertificate, CertifyError> {
    let an = Analytic::new(p, mesh)?;
    let (r, s, d) = (p.orders.rho, p.orders.sigma, p.orders.delta);
    let n = mesh.n();
    let (ie, ix) = (mesh.eta_index(), mesh.xi_index());

    let js_eta = an.j1(s, ie)?;
    let js_t = an.j1(s, n)?;
    let jsd_xi = an.j1(s + d, ix)?;
    let jrs_eta = an.j1(r + s, ie)?;
    let jrs_t = an.j1(r + s, n)?;
    let jrsd_xi = an.j1(r + s + d, ix)?;
    let d11_t = an.sc.d11[n].abs();
    let d12_t = an.sc.d12[n].abs();
    let (cd11_t, cd12_t) = an.cd_pair(n)?;
    let (cd11_t, cd12_t) = (cd11_t.abs(), cd12_t.abs());

    let lambda11 = jrs_t + an.j1(r + s - d, n)? + (d11_t + cd11_t) * jrs_eta;
    let lambda12 = (d12_t + cd12_t) * (jrs_t - p.mu * jrsd_xi);
    let lambda21 = js_t + d11_t * js_eta + d12_t * (js_t - p.mu * jsd_xi);
    let lambda22 = an.j1(s - d, n)? + cd11_t * js_eta + cd12_t * (js_t - p.mu * jsd_xi);
    let product = p.lambda * (lambda21 + lambda22);
    let holds = product > 0.0 && product < 1.0;
    let radius = match (holds, asm.bound) {
        (true, Some(l)) if l > 0.0 => Some(1.01 * (lambda11 + lambda12) * l / (1.0 - product)),
        _ => None,
    };
    Ok(ExistenceCertificate {
        lambda11,
        lambda12,
        lambda21,
        lambda22,
        product,
        radius,
        holds,
    })
}

/// kappa0 = (psi(T) - psi(a))^{1-delta} / Gamma(2 - delta)
pub fn kappa0(p: &LangevinProblem, mesh: &Arc<Mesh>) -> Result<f64, CertifyError> {
    let k_t = mesh.k_from_a(mesh.n());
    Ok(k_t.powf(1.0 - p.orders.delta) / gamma(2.0 - p.orders.delta)?)
}

/// The uniform stability bound for the unweighted variants.
pub fn uh_bound(
    p: &LangevinProblem,
    asm: &Assumptions,
    mesh: &Arc<Mesh>,
    generalized: bool,
) -> Result<StabilityReport, CertifyError> {
    let cert = uniqueness_certificate(p, asm, mesh)?;
    let k0 = kappa0(p, mesh)?;
    let denominator = 1.0 - cert.zeta11 - cert.zeta12 * k0;
    if !(denominator > 0.0 && denominator < 1.0) {
        return Err(CertifyError::ConditionViolated(format!(
            "need 0 < 1 - zeta11 - zeta12 kappa0 < 1, got {denominator}"
        )));
    }
    let epsilon = if generalized { 1.0 } else { asm.epsilon };
    if !(epsilon >= 0.0) {
        return Err(CertifyError::InvalidInput(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    let bound = epsilon * cert.zeta13 / denominator;
    let constant = GridFunction::from_raw(mesh.clone(), vec![bound; mesh.n() + 1]);
    Ok(StabilityReport {
        variant: if generalized {
            StabilityVariant::GeneralizedUh
        } else {
            StabilityVariant::Uh
        },
        kappa0: k0,
        c_epsilon: epsilon * cert.zeta13,
        uniform_bound: Some(bound),
        pointwise_bound: Some(constant),
        ml_envelope: None,
        gronwall_trace: Vec::new(),
        l_phi: None,
    })
}

/// The weighted (Rassias-type) pointwise bound plus its Mittag-Leffler
/// envelope.
pub fn uhr_bound(
    p: &LangevinProblem,
    asm: &Assumptions,
    mesh: &Arc<Mesh>,
    generalized: bool,
) -> Result<StabilityReport, CertifyError> {
    let phi_fn = asm
        .phi
        .as_ref()
        .ok_or_else(|| CertifyError::InvalidInput("Rassias-type bounds need phi".into()))?;
    let n = mesh.n();
    let phi_vals: Vec<f64> = mesh.nodes_t().iter().map(|&t| phi_fn(t)).collect();
    if let Some(i) = phi_vals.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(CertifyError::AssumptionViolated(format!(
            "phi must be finite and nonnegative; offending node {i}"
        )));
    }
    for i in 1..=n {
        if phi_vals[i] + 1e-12 * phi_vals[i].abs().max(1.0) < phi_vals[i - 1] {
            return Err(CertifyError::AssumptionViolated(format!(
                "phi must be nondecreasing; drops at node {i}"
            )));
        }
    }
    let phi = GridFunction::new(mesh.clone(), phi_vals).map_err(|e| {
        CertifyError::InvalidInput(format!("phi could not be sampled: {e}"))
    })?;

    // weight relation at order rho, spot-checked on the nodes
    let j_phi = frac_integral_left(FracOrder::new(p.orders.rho)?, &phi)
        .map_err(|e| CertifyError::InvalidInput(e.to_string()))?;
    let l_phi = match asm.l_phi {
        Some(l) => {
            if !(l > 0.0) {
                return Err(CertifyError::InvalidInput(format!(
                    "l_phi must be positive, got {l}"
                )));
            }
            for i in 0..=n {
                let slack = 1e-12 * l * phi[i].abs().max(1.0);
                if j_phi[i] > l * phi[i] + slack {
                    return Err(CertifyError::AssumptionViolated(format!(
                        "(J^rho phi)(t) <= l_phi phi(t) fails at node {i}: {} > {}",
                        j_phi[i],
                        l * phi[i]
                    )));
                }
            }
            l
        }
        None => {
            // smallest constant that passes the discrete spot check
            let mut l = 0.0f64;
            for i in 0..=n {
                if phi[i] > 0.0 {
                    l = l.max(j_phi[i] / phi[i]);
                } else if j_phi[i] > 0.0 {
                    return Err(CertifyError::AssumptionViolated(format!(
                        "phi vanishes at node {i} while (J^rho phi) does not"
                    )));
                }
            }
            l * (1.0 + 1e-9)
        }
    };

    let epsilon = if generalized { 1.0 } else { asm.epsilon };
    let pointwise: Vec<f64> = (0..=n).map(|i| epsilon * l_phi * phi[i]).collect();

    // q(t) from the weighted boundary-functional combination, for matched
    // boundary values
    let an = Analytic::new(p, mesh)?;
    let (r, s, d) = (p.orders.rho, p.orders.sigma, p.orders.delta);
    let jrs_phi = frac_integral_left(FracOrder::new(r + s)?, &phi)
        .map_err(|e| CertifyError::InvalidInput(e.to_string()))?;
    let jrsd_phi = frac_integral_left(FracOrder::new(r + s + d)?, &phi)
        .map_err(|e| CertifyError::InvalidInput(e.to_string()))?;
    let a1 = jrs_phi[mesh.eta_index()];
    let a2 = jrs_phi[n] - p.mu * jrsd_phi[mesh.xi_index()];
    let q_vals: Vec<f64> = (0..=n)
        .map(|i| epsilon * (jrs_phi[i] + an.sc.d11[i] * a1 + an.sc.d12[i] * a2).abs())
        .collect();

    // envelope arguments use psi(t) itself; meaningful when psi >= 0
    let ml_envelope = if mesh.s(0) >= 0.0 {
        let lam = p.lambda;
        let mut env = Vec::with_capacity(n + 1);
        let mut ok = true;
        for (i, q) in q_vals.iter().enumerate() {
            let pt = mesh.s(i);
            let mut acc = 0.0;
            for order in [s, r + s, r + s + d] {
                let arg = lam * gamma(order)? * pt.powf(order);
                match mittag_leffler(&MlParams::new(order), arg) {
                    Ok(v) => acc += v,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
            env.push(q * acc);
        }
        ok.then(|| GridFunction::from_raw(mesh.clone(), env))
    } else {
        None
    };

    Ok(StabilityReport {
        variant: if generalized {
            StabilityVariant::GeneralizedUhr
        } else {
            StabilityVariant::Uhr
        },
        kappa0: kappa0(p, mesh)?,
        c_epsilon: epsilon,
        uniform_bound: None,
        pointwise_bound: Some(GridFunction::from_raw(mesh.clone(), pointwise)),
        ml_envelope,
        gronwall_trace: Vec::new(),
        l_phi: Some(l_phi),
    })
}

/// Diagnostics of the truncated majorant series.
#[derive(Debug, Clone)]
pub struct GronwallDiagnostics {
    /// max-node magnitude of each shell k = 1..k_max
    pub shells: Vec<f64>,
    /// last retained shell exceeded 1e-8 of the bound
    pub truncation_warning: bool,
}

/// Truncated Gronwall-type majorant: from
/// u <= v + sum_i g_i(t) * (Gamma(q_i) J^{q_i} u), produce the explicit
/// bound v plus all composition shells up to k_max.
///
/// Shells are enumerated by multiset over the term indices; the multinomial
/// count times the power products reproduces the exhaustive tuple sum
/// exactly.
pub fn gronwall_bound(
    v: &GridFunction,
    terms: &[(GridFunction, f64)],
    k_max: usize,
) -> Result<(GridFunction, GronwallDiagnostics), CertifyError> {
    if terms.is_empty() || terms.len() > 3 {
        return Err(CertifyError::InvalidInput(format!(
            "need between 1 and 3 terms, got {}",
            terms.len()
        )));
    }
    if v.values().iter().any(|&x| x < 0.0) {
        return Err(CertifyError::InvalidInput("v must be nonnegative".into()));
    }
    let mesh = v.mesh().clone();
    let n = mesh.n();
    let h = mesh.step();
    for (idx, (gf, q)) in terms.iter().enumerate() {
        if !(*q > 0.0) {
            return Err(CertifyError::InvalidInput(format!(
                "order of term {idx} must be positive, got {q}"
            )));
        }
        if !gf.same_mesh(v) {
            return Err(CertifyError::InvalidInput(format!(
                "term {idx} lives on a different mesh"
            )));
        }
        for i in 0..=n {
            if gf[i] < 0.0 {
                return Err(CertifyError::InvalidInput(format!(
                    "g of term {idx} negative at node {i}"
                )));
            }
            if i > 0 && gf[i] + 1e-12 * gf[i].abs().max(1.0) < gf[i - 1] {
                return Err(CertifyError::InvalidInput(format!(
                    "g of term {idx} must be nondecreasing; drops at node {i}"
                )));
            }
        }
    }
    let nt = terms.len();
    let gamma_q: Vec<f64> = terms
        .iter()
        .map(|(_, q)| gamma(*q))
        .collect::<Result<_, _>>()?;

    let mut bound = v.values().to_vec();
    let mut shells = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut shell = vec![0.0f64; n + 1];
        for counts in multisets(nt, k) {
            let composite: f64 = counts
                .iter()
                .zip(terms)
                .map(|(&m, (_, q))| m as f64 * q)
                .sum();
            // beyond this the kernel normalization underflows to zero anyway
            if composite > 165.0 {
                continue;
            }
            let ln_multinomial = ln_gamma(k as f64 + 1.0)?
                - counts
                    .iter()
                    .map(|&m| ln_gamma(m as f64 + 1.0))
                    .sum::<Result<f64, _>>()?;
            let multinomial = ln_multinomial.exp();
            let jv = Convolution::new(n, h, composite)
                .map_err(|e| CertifyError::InvalidInput(e.to_string()))?
                .apply(v.values());
            for i in 0..=n {
                let mut c = multinomial;
                for (t_idx, &m) in counts.iter().enumerate() {
                    if m > 0 {
                        c *= (terms[t_idx].0[i] * gamma_q[t_idx]).powi(m as i32);
                    }
                }
                shell[i] += c * jv[i];
            }
        }
        let mut magnitude = 0.0f64;
        for i in 0..=n {
            bound[i] += shell[i];
            magnitude = magnitude.max(shell[i].abs());
        }
        shells.push(magnitude);
    }
    let bound_max = bound.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let truncation_warning = shells
        .last()
        .map(|&last| last > 1e-8 * bound_max)
        .unwrap_or(false);
    Ok((
        GridFunction::from_raw(mesh, bound),
        GronwallDiagnostics {
            shells,
            truncation_warning,
        },
    ))
}

// all count vectors of length n summing to k
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>, slots: usize, left: usize) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for m in 0..=left {
            prefix.push(m);
            rec(out, prefix, slots - 1, left - m);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut out, &mut Vec::new(), n, k);
    out
}
