//! Functions sampled on a mesh.

use std::sync::Arc;

use crate::error::FracOpsError;
use crate::mesh::Mesh;

/// A function sampled at every mesh node.
#[derive(Debug, Clone)]
pub struct GridFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self, FracOpsError> {
        if values.len() != mesh.n() + 1 {
            return Err(FracOpsError::GridMismatch(format!(
                "expected {} values, got {}",
                mesh.n() + 1,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracOpsError::GridMismatch(format!(
                "non-finite value at node {i}"
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.n() + 1;
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    /// Sample f(t) at the mesh nodes.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(f64) -> f64) -> Result<Self, FracOpsError> {
        let values: Vec<f64> = mesh.nodes_t().iter().map(|&t| f(t)).collect();
        Self::new(mesh, values)
    }

    /// Sample g(K) with K = psi(t) - psi(a) at the mesh nodes.
    pub fn from_k_fn(mesh: Arc<Mesh>, g: impl Fn(f64) -> f64) -> Result<Self, FracOpsError> {
        let s0 = mesh.s(0);
        let values: Vec<f64> = mesh.nodes_s().iter().map(|&s| g(s - s0)).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// max_i |u_i|
    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_mesh(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
            || (self.mesh.n() == other.mesh.n() && self.mesh.nodes_s() == other.mesh.nodes_s())
    }

    /// max_i |u_i - v_i|
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn from_raw(mesh: Arc<Mesh>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.n() + 1);
        Self { mesh, values }
    }
}

impl std::ops::Index<usize> for GridFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
