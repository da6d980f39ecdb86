//! Product-trapezoidal quadrature for power kernels on a uniform grid.
//!
//! The data is interpolated piecewise linearly in the image coordinate and
//! the kernel (s_i - s)^{q-1} is integrated exactly against it, so every
//! moment comes out in closed form and no singular integrand is ever
//! sampled. Because the grid is uniform the cell weights depend only on the
//! distance to the target node, which reduces an application to a
//! convolution with O(N) transcendental setup.

use rayon::prelude::*;

use crate::error::FracOpsError;
use crate::specfn::gamma;

/// Smallest grid size worth sending through the thread pool.
const PAR_THRESHOLD: usize = 256;

/// Left-sided fractional integral of order q > 0 on a uniform grid.
#[derive(Debug, Clone)]
pub struct Convolution {
    order: f64,
    /// weight of u_0 for target at distance d = i (index d)
    first: Vec<f64>,
    /// weight of u_i at the target node itself
    last: f64,
    /// weight of u_j for 0 < j < i at distance d = i - j (index d)
    inner: Vec<f64>,
}

impl Convolution {
    pub fn new(n: usize, step: f64, order: f64) -> Result<Self, FracOpsError> {
        if !(order > 0.0) || !order.is_finite() {
            return Err(FracOpsError::OrderError(format!(
                "integral order must be > 0, got {order}"
            )));
        }
        let q = order;
        let gamma_q = gamma(q).map_err(|e| FracOpsError::OrderError(e.to_string()))?;
        // (d h)^q and (d h)^{q+1} for d = 0..=n+1
        let mut p = Vec::with_capacity(n + 2);
        let mut p1 = Vec::with_capacity(n + 2);
        for d in 0..=n + 1 {
            let x = d as f64 * step;
            p.push(x.powf(q));
            p1.push(x.powf(q + 1.0));
        }
        // cell [s_{i-d}, s_{i-d+1}]: m0 = the kernel mass, m1 = its first
        // moment about the left cell edge
        let mut a = vec![0.0; n + 2];
        let mut b = vec![0.0; n + 2];
        for d in 1..=n + 1 {
            let m0 = (p[d] - p[d - 1]) / q;
            let m1 = d as f64 * step * m0 - (p1[d] - p1[d - 1]) / (q + 1.0);
            a[d] = (m0 - m1 / step) / gamma_q;
            b[d] = (m1 / step) / gamma_q;
        }
        let mut inner = vec![0.0; n + 1];
        for d in 1..=n {
            inner[d] = a[d] + b[d + 1];
        }
        let last = b[1];
        Ok(Self {
            order,
            first: a,
            last,
            inner,
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// Value at a single target node i.
    pub fn apply_at(&self, u: &[f64], i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let mut acc = u[0] * self.first[i] + u[i] * self.last;
        for j in 1..i {
            acc += u[j] * self.inner[i - j];
        }
        acc
    }

    /// Values at every node; node 0 is exactly 0.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len() - 1;
        let mut out = vec![0.0; n + 1];
        if n >= PAR_THRESHOLD {
            out[1..]
                .par_iter_mut()
                .enumerate()
                .for_each(|(k, slot)| *slot = self.apply_at(u, k + 1));
        } else {
            for i in 1..=n {
                out[i] = self.apply_at(u, i);
            }
        }
        out
    }

    /// Right-sided variant: integrate from t to b with kernel (s - s_i)^{q-1}.
    ///
    /// The kernel mirrors the left one, so this is reverse-apply-reverse.
    pub fn apply_right(&self, u: &[f64]) -> Vec<f64> {
        let mut rev: Vec<f64> = u.iter().rev().copied().collect();
        rev = self.apply(&rev);
        rev.reverse();
        rev
    }
}

/// d/ds by second-order differences: central inside, one-sided at the ends.
pub fn diff1(u: &[f64], step: f64) -> Vec<f64> {
    let n = u.len() - 1;
    let mut w = vec![0.0; n + 1];
    w[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * step);
    w[n] = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * step);
    for i in 1..n {
        w[i] = (u[i + 1] - u[i - 1]) / (2.0 * step);
    }
    w
}

/// d^2/ds^2 by second-order differences: central inside, one-sided at the ends.
pub fn diff2(u: &[f64], step: f64) -> Vec<f64> {
    let n = u.len() - 1;
    let h2 = step * step;
    let mut w = vec![0.0; n + 1];
    w[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
    w[n] = (2.0 * u[n] - 5.0 * u[n - 1] + 4.0 * u[n - 2] - u[n - 3]) / h2;
    for i in 1..n {
        w[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
    }
    w
}

/// Starting-weight correction for data with known endpoint behavior.
///
/// A local polynomial rule on a uniform grid cannot resolve data that
/// behaves like K^beta with fractional beta near the left endpoint: the
/// defect is O(h^{1+beta}) no matter the polynomial degree. When the caller
/// can declare the exponents, the classical remedy is a small set of extra
/// weights on the first few nodes, chosen per target node so that the
/// corrected rule is exact on {1, K} and on every declared power. The
/// correction is a fixed linear map, so operator linearity and determinism
/// are untouched.
#[derive(Debug, Clone)]
pub struct EndpointCorrection {
    /// per target node i, weights applied to u_1..u_m
    weights: Vec<Vec<f64>>,
}

impl EndpointCorrection {
    /// `basis` pairs each basis function's grid samples with the exact
    /// transform values the corrected rule must reproduce.
    pub fn build(
        n: usize,
        basis: &[(Vec<f64>, Vec<f64>)],
        base: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self, FracOpsError> {
        let m = basis.len();
        if m == 0 {
            return Ok(Self {
                weights: vec![Vec::new(); n + 1],
            });
        }
        if m > n {
            return Err(FracOpsError::OrderError(format!(
                "correction basis of size {m} needs a grid of more than {m} cells"
            )));
        }
        // defect of the base rule on each basis function
        let mut defects = Vec::with_capacity(m);
        let mut v = vec![vec![0.0; m]; m];
        for (k, (samples, exact)) in basis.iter().enumerate() {
            let applied = base(samples);
            let d: Vec<f64> = exact
                .iter()
                .zip(&applied)
                .map(|(e, a)| e - a)
                .collect();
            defects.push(d);
            for mm in 1..=m {
                v[k][mm - 1] = samples[mm];
            }
        }
        let lu = LuFactors::factor(v).ok_or_else(|| {
            FracOpsError::OrderError("singular correction basis (repeated exponents?)".into())
        })?;
        let mut weights = Vec::with_capacity(n + 1);
        weights.push(Vec::new());
        for i in 1..=n {
            let rhs: Vec<f64> = defects.iter().map(|d| d[i]).collect();
            weights.push(lu.solve(&rhs));
        }
        Ok(Self { weights })
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        for (i, w) in self.weights.iter().enumerate() {
            let mut c = 0.0;
            for (m, wm) in w.iter().enumerate() {
                c += wm * u[m + 1];
            }
            out[i] += c;
        }
    }
}

/// Dense LU with partial pivoting for the small correction systems.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(mut a: Vec<Vec<f64>>) -> Option<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot_val) = (col..n)
                .map(|r| (r, a[r][col].abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))?;
            if pivot_val == 0.0 {
                return None;
            }
            a.swap(col, pivot_row);
            perm.swap(col, pivot_row);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                a[r][col] = f;
                for c in col + 1..n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for r in 1..n {
            for c in 0..r {
                x[r] -= self.lu[r][c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[r][c] * x[c];
            }
            x[r] /= self.lu[r][r];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integral_exact_on_constants_and_linears() {
        let n = 64;
        let h = 1.0 / n as f64;
        for q in [0.3, 0.5, 1.0, 1.7, 2.4] {
            let conv = Convolution::new(n, h, q).unwrap();
            let ones = vec![1.0; n + 1];
            let lin: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
            let j1 = conv.apply(&ones);
            let jl = conv.apply(&lin);
            for i in 0..=n {
                let s = i as f64 * h;
                assert_relative_eq!(
                    j1[i],
                    s.powf(q) / gamma(1.0 + q).unwrap(),
                    max_relative = 1e-12,
                    epsilon = 1e-14
                );
                assert_relative_eq!(
                    jl[i],
                    s.powf(q + 1.0) / gamma(2.0 + q).unwrap(),
                    max_relative = 1e-12,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn right_is_mirror_of_left() {
        let n = 50;
        let h = 0.02;
        let conv = Convolution::new(n, h, 0.6).unwrap();
        let ones = vec![1.0; n + 1];
        let right = conv.apply_right(&ones);
        for i in 0..=n {
            let span = (n - i) as f64 * h;
            assert_relative_eq!(
                right[i],
                span.powf(0.6) / gamma(1.6).unwrap(),
                max_relative = 1e-12,
                epsilon = 1e-14
            );
        }
        assert_eq!(right[n], 0.0);
    }

    #[test]
    fn rejects_nonpositive_order() {
        assert!(Convolution::new(16, 0.1, 0.0).is_err());
        assert!(Convolution::new(16, 0.1, -1.0).is_err());
    }

    #[test]
    fn diff_exact_on_quadratics() {
        let n = 20;
        let h = 0.05;
        let u: Vec<f64> = (0..=n)
            .map(|i| {
                let s = i as f64 * h;
                3.0 + 2.0 * s + 0.5 * s * s
            })
            .collect();
        let d1 = diff1(&u, h);
        let d2 = diff2(&u, h);
        for i in 0..=n {
            let s = i as f64 * h;
            assert_relative_eq!(d1[i], 2.0 + s, max_relative = 1e-12);
            assert_relative_eq!(d2[i], 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn lu_solves_small_system() {
        let a = vec![
            vec![2.0, 1.0, -1.0],
            vec![-3.0, -1.0, 2.0],
            vec![-2.0, 1.0, 2.0],
        ];
        let lu = LuFactors::factor(a).unwrap();
        let x = lu.solve(&[8.0, -11.0, -3.0]);
        assert_relative_eq!(x[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(x[1], 3.0, max_relative = 1e-12);
        assert_relative_eq!(x[2], -1.0, max_relative = 1e-12);
    }

    #[test]
    fn correction_recovers_declared_power() {
        let n = 256;
        let h = 1.0 / n as f64;
        let q = 0.4;
        let conv = Convolution::new(n, h, q).unwrap();
        let beta = 0.3;
        let grid: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powf(beta)).collect();
        let exact: Vec<f64> = (0..=n)
            .map(|i| {
                gamma(beta + 1.0).unwrap() / gamma(beta + 1.0 + q).unwrap()
                    * (i as f64 * h).powf(q + beta)
            })
            .collect();
        let mk = |b: f64| -> (Vec<f64>, Vec<f64>) {
            let samples: Vec<f64> = (0..=n)
                .map(|i| if b == 0.0 { 1.0 } else { (i as f64 * h).powf(b) })
                .collect();
            let exact: Vec<f64> = (0..=n)
                .map(|i| {
                    gamma(b + 1.0).unwrap() / gamma(b + 1.0 + q).unwrap()
                        * (i as f64 * h).powf(q + b)
                })
                .collect();
            (samples, exact)
        };
        let basis = vec![mk(0.0), mk(1.0), mk(beta)];
        let corr = EndpointCorrection::build(n, &basis, |u| conv.apply(u)).unwrap();
        let mut out = conv.apply(&grid);
        corr.apply(&grid, &mut out);
        for i in 1..=n {
            assert_relative_eq!(out[i], exact[i], max_relative = 1e-11);
        }
    }
}
