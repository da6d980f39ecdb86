//! Meshes uniform in the image coordinate s = psi(t).
//!
//! A uniform-in-s mesh turns every psi-fractional kernel into a plain
//! power kernel in s, so a single quadrature engine serves all generators.

use std::sync::Arc;

use crate::error::PsiError;
use crate::psi::{Domain, PsiFunction, PsiKind};

/// Nodes t_0 = a, ..., t_N = T chosen so that psi(t_i) are equispaced.
///
/// eta and xi are snapped to their nearest nodes; the snap distances (in t)
/// are recorded. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Mesh {
    psi: PsiFunction,
    domain: Domain,
    nodes_t: Vec<f64>,
    nodes_s: Vec<f64>,
    step: f64,
    eta_index: usize,
    xi_index: usize,
    eta_snap: f64,
    xi_snap: f64,
}

impl Mesh {
    /// Number of subintervals N.
    pub fn n(&self) -> usize {
        self.nodes_t.len() - 1
    }

    pub fn psi(&self) -> &PsiFunction {
        &self.psi
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn nodes_t(&self) -> &[f64] {
        &self.nodes_t
    }

    pub fn nodes_s(&self) -> &[f64] {
        &self.nodes_s
    }

    /// Spacing of the equispaced image values s_i.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t(&self, i: usize) -> f64 {
        self.nodes_t[i]
    }

    pub fn s(&self, i: usize) -> f64 {
        self.nodes_s[i]
    }

    /// psi(t_i) - psi(a)
    pub fn k_from_a(&self, i: usize) -> f64 {
        self.nodes_s[i] - self.nodes_s[0]
    }

    pub fn eta_index(&self) -> usize {
        self.eta_index
    }

    pub fn xi_index(&self) -> usize {
        self.xi_index
    }

    /// |t_{eta_index} - eta|
    pub fn eta_snap_distance(&self) -> f64 {
        self.eta_snap
    }

    /// |t_{xi_index} - xi|
    pub fn xi_snap_distance(&self) -> f64 {
        self.xi_snap
    }
}

/// Build a mesh with N subintervals, equispaced in s = psi(t).
pub fn build_mesh(psi: &PsiFunction, dom: &Domain, n: usize) -> Result<Arc<Mesh>, PsiError> {
    if n < 4 {
        return Err(PsiError::InvalidParameter(format!(
            "mesh needs N >= 4 subintervals, got {n}"
        )));
    }
    match psi.kind() {
        PsiKind::Logarithm if dom.a <= 0.0 => {
            return Err(PsiError::InvalidDomain(format!(
                "logarithmic psi requires a > 0, got a = {}",
                dom.a
            )));
        }
        _ => {}
    }
    let s_a = psi.eval(dom.a);
    let s_t = psi.eval(dom.t_end);
    if !(s_t > s_a) || !s_a.is_finite() || !s_t.is_finite() {
        return Err(PsiError::InvalidDomain(format!(
            "psi must be finite and increasing across [a, T]; psi(a) = {s_a}, psi(T) = {s_t}"
        )));
    }
    let step = (s_t - s_a) / n as f64;
    let mut nodes_s = Vec::with_capacity(n + 1);
    let mut nodes_t = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = if i == n { s_t } else { s_a + i as f64 * step };
        nodes_s.push(s);
        let t = if i == 0 {
            dom.a
        } else if i == n {
            dom.t_end
        } else {
            psi.invert(s, dom.a, dom.t_end)?
        };
        nodes_t.push(t);
    }
    for w in nodes_t.windows(2) {
        if !(w[1] > w[0]) {
            return Err(PsiError::InvalidDomain(format!(
                "mesh nodes not strictly increasing near t = {}",
                w[0]
            )));
        }
    }
    let snap_index = |point: f64| -> usize {
        let s = psi.eval(point);
        let raw = ((s - s_a) / step).round();
        (raw.max(0.0) as usize).min(n)
    };
    let eta_index = snap_index(dom.eta).clamp(1, n - 2);
    let xi_index = snap_index(dom.xi).clamp(eta_index + 1, n - 1);
    if eta_index >= xi_index {
        return Err(PsiError::InvalidDomain(format!(
            "mesh too coarse to separate eta and xi (snapped to nodes {eta_index} and {xi_index})"
        )));
    }
    let eta_snap = (nodes_t[eta_index] - dom.eta).abs();
    let xi_snap = (nodes_t[xi_index] - dom.xi).abs();
    Ok(Arc::new(Mesh {
        psi: psi.clone(),
        domain: *dom,
        nodes_t,
        nodes_s,
        step,
        eta_index,
        xi_index,
        eta_snap,
        xi_snap,
    }))
}
