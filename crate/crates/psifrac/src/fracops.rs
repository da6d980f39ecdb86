//! Discrete left/right psi-fractional integrals and psi-Caputo derivatives
//! on grid functions.
//!
//! All kernels are computed in the image coordinate s = psi(tau); the
//! psi'(tau) d tau measure cancels under that substitution, so the same
//! engine serves every generator and the outputs are covariant in psi by
//! construction.

use crate::error::FracOpsError;
use crate::grid::GridFunction;
use crate::quad::{diff1, diff2, Convolution, EndpointCorrection};
use crate::specfn::gamma;

/// A fractional order; > 0 for integrals, (0,1] or (1,2] for Caputo
/// derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(value: f64) -> Result<Self, FracOpsError> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(FracOpsError::OrderError(format!(
                "order must be positive and finite, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    fn check_caputo(&self) -> Result<usize, FracOpsError> {
        if self.0 > 2.0 {
            return Err(FracOpsError::OrderError(format!(
                "Caputo order must lie in (0,1] or (1,2], got {}",
                self.0
            )));
        }
        Ok(if self.0 <= 1.0 { 1 } else { 2 })
    }
}

/// Quadrature options shared by the operator entry points.
///
/// `endpoint_exponents` declares known K^beta behavior of the data at the
/// left endpoint; the rule is then corrected by starting weights that make
/// it exact on those powers (see [`EndpointCorrection`]). Leave empty for
/// the plain product-trapezoidal rule.
#[derive(Debug, Clone, Default)]
pub struct QuadOptions {
    pub endpoint_exponents: Vec<f64>,
}

impl QuadOptions {
    pub fn plain() -> Self {
        Self::default()
    }

    pub fn with_exponents(exponents: &[f64]) -> Self {
        Self {
            endpoint_exponents: exponents.to_vec(),
        }
    }
}

fn power_grid(n: usize, step: f64, beta: f64) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if beta == 0.0 {
                1.0
            } else {
                (i as f64 * step).powf(beta)
            }
        })
        .collect()
}

fn integral_exact(n: usize, step: f64, beta: f64, q: f64) -> Result<Vec<f64>, FracOpsError> {
    let c = gamma(beta + 1.0).map_err(|e| FracOpsError::OrderError(e.to_string()))?
        / gamma(beta + 1.0 + q).map_err(|e| FracOpsError::OrderError(e.to_string()))?;
    Ok((0..=n).map(|i| c * (i as f64 * step).powf(q + beta)).collect())
}

fn caputo_exact(n: usize, step: f64, beta: f64, q: f64, order_ceil: usize) -> Result<Vec<f64>, FracOpsError> {
    let is_int = beta.fract() == 0.0;
    if is_int && beta <= (order_ceil - 1) as f64 {
        return Ok(vec![0.0; n + 1]);
    }
    let c = gamma(beta + 1.0).map_err(|e| FracOpsError::OrderError(e.to_string()))?
        / gamma(beta + 1.0 - q).map_err(|e| FracOpsError::OrderError(e.to_string()))?;
    Ok((0..=n).map(|i| c * (i as f64 * step).powf(beta - q)).collect())
}

/// (J^{q,psi}_{a+})[u] at every mesh node; node 0 is exactly 0.
pub fn frac_integral_left(order: FracOrder, u: &GridFunction) -> Result<GridFunction, FracOpsError> {
    frac_integral_left_with(order, u, &QuadOptions::plain())
}

pub fn frac_integral_left_with(
    order: FracOrder,
    u: &GridFunction,
    opts: &QuadOptions,
) -> Result<GridFunction, FracOpsError> {
    let mesh = u.mesh().clone();
    let (n, h, q) = (mesh.n(), mesh.step(), order.value());
    let conv = Convolution::new(n, h, q)?;
    let mut out = conv.apply(u.values());
    if !opts.endpoint_exponents.is_empty() {
        let mut basis = Vec::new();
        for &beta in [0.0, 1.0].iter().chain(&opts.endpoint_exponents) {
            if beta < 0.0 || basis_has(&basis, beta) {
                continue;
            }
            basis.push((beta, power_grid(n, h, beta), integral_exact(n, h, beta, q)?));
        }
        let entries: Vec<(Vec<f64>, Vec<f64>)> =
            basis.into_iter().map(|(_, s, e)| (s, e)).collect();
        let corr = EndpointCorrection::build(n, &entries, |v| conv.apply(v))?;
        corr.apply(u.values(), &mut out);
    }
    Ok(GridFunction::from_raw(mesh, out))
}

fn basis_has(basis: &[(f64, Vec<f64>, Vec<f64>)], beta: f64) -> bool {
    basis.iter().any(|(b, _, _)| (b - beta).abs() < 1e-12)
}

/// (J^{q,psi}_{t,b-})[u] at every mesh node; node N is exactly 0.
pub fn frac_integral_right(order: FracOrder, u: &GridFunction) -> Result<GridFunction, FracOpsError> {
    let mesh = u.mesh().clone();
    let conv = Convolution::new(mesh.n(), mesh.step(), order.value())?;
    let out = conv.apply_right(u.values());
    Ok(GridFunction::from_raw(mesh, out))
}

/// Left psi-Caputo derivative: difference the data n = ceil(q) times in s,
/// then apply the left integral of order n - q. Integer orders return the
/// plain s-derivative.
pub fn caputo_left(order: FracOrder, u: &GridFunction) -> Result<GridFunction, FracOpsError> {
    caputo_left_with(order, u, &QuadOptions::plain())
}

pub fn caputo_left_with(
    order: FracOrder,
    u: &GridFunction,
    opts: &QuadOptions,
) -> Result<GridFunction, FracOpsError> {
    let n_order = order.check_caputo()?;
    let mesh = u.mesh().clone();
    let (n, h, q) = (mesh.n(), mesh.step(), order.value());
    let plain = |vals: &[f64]| -> Vec<f64> {
        let w = if n_order == 1 {
            diff1(vals, h)
        } else {
            diff2(vals, h)
        };
        let frac = n_order as f64 - q;
        if frac == 0.0 {
            w
        } else {
            // frac in (0,1): the inner Convolution order is always valid
            Convolution::new(n, h, frac).expect("0 < n - q < 1").apply(&w)
        }
    };
    let mut out = plain(u.values());
    if !opts.endpoint_exponents.is_empty() {
        let mut basis = Vec::new();
        for &beta in [0.0, 1.0].iter().chain(&opts.endpoint_exponents) {
            if basis_has(&basis, beta) {
                continue;
            }
            let is_int = beta.fract() == 0.0;
            // fractional powers below the order have singular images; they
            // cannot serve as correction basis members (beta = q is fine,
            // its image is a constant)
            if !is_int && beta < q - 1e-12 {
                continue;
            }
            if beta < 0.0 {
                continue;
            }
            basis.push((beta, power_grid(n, h, beta), caputo_exact(n, h, beta, q, n_order)?));
        }
        let entries: Vec<(Vec<f64>, Vec<f64>)> =
            basis.into_iter().map(|(_, s, e)| (s, e)).collect();
        let corr = EndpointCorrection::build(n, &entries, plain)?;
        corr.apply(u.values(), &mut out);
    }
    Ok(GridFunction::from_raw(mesh, out))
}

/// max over nodes of |J^q (cD^q u) - (u - u(a))| for q in (0,1).
pub fn inversion_residual(order: FracOrder, u: &GridFunction) -> Result<f64, FracOpsError> {
    let q = order.value();
    if !(q > 0.0 && q < 1.0) {
        return Err(FracOpsError::OrderError(format!(
            "inversion check takes q in (0,1), got {q}"
        )));
    }
    let d = caputo_left(order, u)?;
    let jd = frac_integral_left(order, &d)?;
    let u0 = u[0];
    let mut max = 0.0f64;
    for i in 0..u.len() {
        max = max.max((jd[i] - (u[i] - u0)).abs());
    }
    Ok(max)
}

/// Absolute defect of the first-order integration-by-parts identity:
/// the t-integral of v (cD^q u) against the s-integral of u times the
/// right-sided Caputo derivative of v/psi', plus the boundary term of the
/// right-sided integral of v/psi' at the endpoints.
pub fn ibp_residual(
    order: FracOrder,
    u: &GridFunction,
    v: &GridFunction,
) -> Result<f64, FracOpsError> {
    let q = order.value();
    if !(q > 0.0 && q < 1.0) {
        return Err(FracOpsError::OrderError(format!(
            "integration-by-parts check takes q in (0,1), got {q}"
        )));
    }
    if !u.same_mesh(v) {
        return Err(FracOpsError::GridMismatch(
            "u and v must live on the same mesh".into(),
        ));
    }
    let mesh = u.mesh();
    let n = mesh.n();
    let h = mesh.step();

    // left side: trapezoid in t of v * cD^q u
    let du = caputo_left(order, u)?;
    let mut left = 0.0;
    for j in 0..n {
        let f0 = v[j] * du[j];
        let f1 = v[j + 1] * du[j + 1];
        left += 0.5 * (mesh.t(j + 1) - mesh.t(j)) * (f0 + f1);
    }

    // right side: w = v / psi'; right Caputo for n = 1 is -J^{1-q}_right[dw/ds]
    let w: Vec<f64> = (0..=n)
        .map(|i| v[i] / mesh.psi().deriv(mesh.t(i)))
        .collect();
    let dw = diff1(&w, h);
    let conv = Convolution::new(n, h, 1.0 - q)?;
    let rc: Vec<f64> = conv.apply_right(&dw).iter().map(|x| -x).collect();
    // psi'(tau) d tau = ds: uniform trapezoid in s of u * rc
    let mut right = 0.0;
    for j in 0..n {
        right += 0.5 * h * (u[j] * rc[j] + u[j + 1] * rc[j + 1]);
    }
    // boundary term; the right integral vanishes at tau = b
    let jw = conv.apply_right(&w);
    let boundary = -(jw[0] * u[0]);

    Ok((left - (right + boundary)).abs())
}

/// Increment bound for the left integral between two nodes:
/// returns (lhs, rhs) with lhs = |J u(t2) - J u(t1)| and
/// rhs = 2 ||u||_inf / Gamma(q+1) (psi(t2) - psi(t1))^q.
pub fn continuity_bound_check(
    order: FracOrder,
    u: &GridFunction,
    i1: usize,
    i2: usize,
) -> Result<(f64, f64), FracOpsError> {
    let q = order.value();
    if !(q > 0.0 && q < 1.0) {
        return Err(FracOpsError::OrderError(format!(
            "continuity bound takes q in (0,1), got {q}"
        )));
    }
    if i1 >= i2 || i2 >= u.len() {
        return Err(FracOpsError::GridMismatch(format!(
            "need node indices i1 < i2 < {}, got {i1}, {i2}",
            u.len()
        )));
    }
    let j = frac_integral_left(order, u)?;
    let lhs = (j[i2] - j[i1]).abs();
    let ds = u.mesh().s(i2) - u.mesh().s(i1);
    let rhs = 2.0 * u.norm_inf() / gamma(q + 1.0).map_err(|e| FracOpsError::OrderError(e.to_string()))?
        * ds.powf(q);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use crate::psi::{Domain, PsiFunction};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn unit_mesh(n: usize) -> Arc<crate::mesh::Mesh> {
        let dom = Domain::new(0.0, 0.25, 0.5, 1.0).unwrap();
        build_mesh(&PsiFunction::identity(), &dom, n).unwrap()
    }

    #[test]
    fn integral_of_one_matches_closed_form() {
        for (psi, dom) in [
            (PsiFunction::identity(), Domain::new(0.0, 0.25, 0.5, 1.0).unwrap()),
            (
                PsiFunction::logarithm(),
                Domain::new(1.0, 1.5, 2.0, std::f64::consts::E).unwrap(),
            ),
            (PsiFunction::power_law(2.0).unwrap(), Domain::new(0.0, 0.5, 0.75, 1.0).unwrap()),
        ] {
            let mesh = build_mesh(&psi, &dom, 64).unwrap();
            let one = GridFunction::from_fn(mesh.clone(), |_| 1.0).unwrap();
            for q in [0.4, 1.3] {
                let j = frac_integral_left(FracOrder::new(q).unwrap(), &one).unwrap();
                for i in 0..=64 {
                    let k = mesh.k_from_a(i);
                    assert_relative_eq!(
                        j[i],
                        k.powf(q) / gamma(1.0 + q).unwrap(),
                        max_relative = 1e-12,
                        epsilon = 1e-14
                    );
                }
            }
        }
    }

    #[test]
    fn integral_of_zero_is_zero() {
        let mesh = unit_mesh(32);
        let zero = GridFunction::zeros(mesh);
        let j = frac_integral_left(FracOrder::new(0.7).unwrap(), &zero).unwrap();
        assert_eq!(j.norm_inf(), 0.0);
        let jr = frac_integral_right(FracOrder::new(0.7).unwrap(), &zero).unwrap();
        assert_eq!(jr.norm_inf(), 0.0);
    }

    #[test]
    fn right_integral_of_one() {
        let mesh = unit_mesh(128);
        let one = GridFunction::from_fn(mesh.clone(), |_| 1.0).unwrap();
        let q = 0.6;
        let j = frac_integral_right(FracOrder::new(q).unwrap(), &one).unwrap();
        for i in 0..=128 {
            let span = mesh.s(128) - mesh.s(i);
            assert_relative_eq!(
                j[i],
                span.powf(q) / gamma(1.0 + q).unwrap(),
                max_relative = 1e-12,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn caputo_annihilates_low_polynomials() {
        let mesh = unit_mesh(64);
        let one = GridFunction::from_fn(mesh.clone(), |_| 3.5).unwrap();
        let lin = GridFunction::from_k_fn(mesh.clone(), |k| 2.0 * k).unwrap();
        for q in [0.4, 0.9] {
            let d = caputo_left(FracOrder::new(q).unwrap(), &one).unwrap();
            assert!(d.norm_inf() <= 1e-10);
        }
        for q in [1.3, 1.8] {
            let d = caputo_left(FracOrder::new(q).unwrap(), &one).unwrap();
            assert!(d.norm_inf() <= 1e-10);
            let d = caputo_left(FracOrder::new(q).unwrap(), &lin).unwrap();
            assert!(d.norm_inf() <= 1e-9);
        }
    }

    #[test]
    fn caputo_power_identity_smooth_case() {
        // K^2 under q in (0,1): exact closed form Gamma(3)/Gamma(3-q) K^{2-q}
        let mesh = unit_mesh(512);
        let u = GridFunction::from_k_fn(mesh.clone(), |k| k * k).unwrap();
        let q = 0.5;
        let d = caputo_left(FracOrder::new(q).unwrap(), &u).unwrap();
        for i in 2..=512 {
            let k = mesh.k_from_a(i);
            let exact = gamma(3.0).unwrap() / gamma(3.0 - q).unwrap() * k.powf(2.0 - q);
            assert_relative_eq!(d[i], exact, max_relative = 2e-5, epsilon = 1e-9);
        }
    }

    #[test]
    fn caputo_integer_orders_are_plain_derivatives() {
        let mesh = unit_mesh(64);
        let u = GridFunction::from_k_fn(mesh.clone(), |k| 1.0 + 2.0 * k + 3.0 * k * k).unwrap();
        let d1 = caputo_left(FracOrder::new(1.0).unwrap(), &u).unwrap();
        let d2 = caputo_left(FracOrder::new(2.0).unwrap(), &u).unwrap();
        for i in 0..=64 {
            let k = mesh.k_from_a(i);
            assert_relative_eq!(d1[i], 2.0 + 6.0 * k, max_relative = 1e-10, epsilon = 1e-10);
            assert_relative_eq!(d2[i], 6.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn caputo_order_range_enforced() {
        let mesh = unit_mesh(16);
        let u = GridFunction::from_fn(mesh, |t| t).unwrap();
        assert!(caputo_left(FracOrder::new(2.5).unwrap(), &u).is_err());
    }

    #[test]
    fn linearity_to_rounding() {
        let mesh = unit_mesh(128);
        let u = GridFunction::from_fn(mesh.clone(), |t| (3.0 * t).sin()).unwrap();
        let v = GridFunction::from_fn(mesh.clone(), |t| t * t - 0.3).unwrap();
        let (alpha, beta) = (1.7, -0.6);
        let combo = GridFunction::new(
            mesh.clone(),
            (0..=128).map(|i| alpha * u[i] + beta * v[i]).collect(),
        )
        .unwrap();
        let q = FracOrder::new(0.8).unwrap();
        let ju = frac_integral_left(q, &u).unwrap();
        let jv = frac_integral_left(q, &v).unwrap();
        let jc = frac_integral_left(q, &combo).unwrap();
        for i in 0..=128 {
            let expect = alpha * ju[i] + beta * jv[i];
            assert!((jc[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn inversion_residual_trivial_and_smooth() {
        let mesh = unit_mesh(256);
        let one = GridFunction::from_fn(mesh.clone(), |_| 1.0).unwrap();
        let r = inversion_residual(FracOrder::new(0.5).unwrap(), &one).unwrap();
        assert!(r <= 1e-12);

        let u = GridFunction::from_k_fn(mesh, |k| k * k).unwrap();
        let r = inversion_residual(FracOrder::new(0.5).unwrap(), &u).unwrap();
        assert!(r <= 1e-5, "residual {r}");
    }

    #[test]
    fn ibp_zero_inputs() {
        let mesh = unit_mesh(64);
        let zero = GridFunction::zeros(mesh.clone());
        let v = GridFunction::from_fn(mesh.clone(), |t| 1.0 + t).unwrap();
        let q = FracOrder::new(0.6).unwrap();
        assert_eq!(ibp_residual(q, &zero, &v).unwrap(), 0.0);
        assert_eq!(ibp_residual(q, &v, &zero).unwrap(), 0.0);
    }

    #[test]
    fn continuity_bound_trivial_cases() {
        let mesh = unit_mesh(64);
        let zero = GridFunction::zeros(mesh.clone());
        let q = FracOrder::new(0.5).unwrap();
        let (lhs, rhs) = continuity_bound_check(q, &zero, 10, 30).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));

        // q -> 1, u = 1, psi = t: increment is exactly t2 - t1 = rhs / 2
        let one = GridFunction::from_fn(mesh, |_| 1.0).unwrap();
        let q = FracOrder::new(1.0 - 1e-12).unwrap();
        let (lhs, rhs) = continuity_bound_check(q, &one, 16, 48).unwrap();
        assert_relative_eq!(lhs, 0.5, max_relative = 1e-9);
        assert_relative_eq!(rhs, 1.0, max_relative = 1e-9);
        assert!(lhs <= rhs + 1e-10);
    }
}
