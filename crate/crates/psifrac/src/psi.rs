//! The generator function psi, the problem domain, and their validation.
//!
//! Everything downstream works in the image coordinate s = psi(t), so the
//! only requirements on psi are strict monotonicity and a positive
//! derivative on the closed domain.

use crate::error::PsiError;

/// Built-in generator kinds plus tabulated data.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiKind {
    /// psi(t) = t (classical Riemann-Liouville operators)
    Identity,
    /// psi(t) = ln t (Hadamard-type operators; requires a > 0)
    Logarithm,
    /// psi(t) = t^rho with rho > 0 (Katugampola-type operators; requires a >= 0)
    PowerLaw { exponent: f64 },
    /// psi given by sample pairs (t_i, psi_i), interpolated by a monotone cubic
    Tabulated { samples: Vec<(f64, f64)> },
}

/// A generator function: evaluation and first derivative.
#[derive(Debug, Clone)]
pub struct PsiFunction {
    kind: PsiKind,
    /// Monotone cubic slopes at the sample points (Tabulated only).
    slopes: Vec<f64>,
}

impl PsiFunction {
    pub fn new(kind: PsiKind) -> Result<Self, PsiError> {
        match &kind {
            PsiKind::PowerLaw { exponent } => {
                if !(*exponent > 0.0) {
                    return Err(PsiError::InvalidParameter(format!(
                        "power-law exponent must be > 0, got {exponent}"
                    )));
                }
            }
            PsiKind::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(PsiError::InvalidParameter(
                        "tabulated psi needs at least 2 samples".into(),
                    ));
                }
                for w in samples.windows(2) {
                    if !(w[1].0 > w[0].0) || !(w[1].1 > w[0].1) {
                        return Err(PsiError::InvalidParameter(format!(
                            "tabulated psi samples must be strictly increasing in t and psi \
                             (violated between t = {} and t = {})",
                            w[0].0, w[1].0
                        )));
                    }
                }
            }
            _ => {}
        }
        let slopes = match &kind {
            PsiKind::Tabulated { samples } => pchip_slopes(samples),
            _ => Vec::new(),
        };
        Ok(Self { kind, slopes })
    }

    pub fn identity() -> Self {
        Self::new(PsiKind::Identity).expect("identity is always valid")
    }

    pub fn logarithm() -> Self {
        Self::new(PsiKind::Logarithm).expect("logarithm is always valid")
    }

    pub fn power_law(exponent: f64) -> Result<Self, PsiError> {
        Self::new(PsiKind::PowerLaw { exponent })
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    /// psi(t)
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => t,
            PsiKind::Logarithm => t.ln(),
            PsiKind::PowerLaw { exponent } => t.powf(*exponent),
            PsiKind::Tabulated { samples } => pchip_eval(samples, &self.slopes, t).0,
        }
    }

    /// psi'(t)
    pub fn deriv(&self, t: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => 1.0,
            PsiKind::Logarithm => 1.0 / t,
            PsiKind::PowerLaw { exponent } => exponent * t.powf(exponent - 1.0),
            PsiKind::Tabulated { samples } => pchip_eval(samples, &self.slopes, t).1,
        }
    }

    /// Solve psi(t) = s for t in [lo, hi].
    ///
    /// Uses the analytic inverse for the named kinds and monotone bisection
    /// (tolerance 1e-12 in the psi coordinate) for tabulated data.
    pub fn invert(&self, s: f64, lo: f64, hi: f64) -> Result<f64, PsiError> {
        match &self.kind {
            PsiKind::Identity => Ok(s),
            PsiKind::Logarithm => Ok(s.exp()),
            PsiKind::PowerLaw { exponent } => Ok(s.powf(1.0 / exponent)),
            PsiKind::Tabulated { .. } => {
                let (mut lo, mut hi) = (lo, hi);
                let (flo, fhi) = (self.eval(lo), self.eval(hi));
                let scale = (fhi - flo).abs().max(1.0);
                if s < flo - 1e-12 * scale || s > fhi + 1e-12 * scale {
                    return Err(PsiError::InversionFailure { target: s, lo, hi });
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = self.eval(mid);
                    if (fm - s).abs() <= 1e-12 * scale {
                        return Ok(mid);
                    }
                    if fm < s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

/// Time points of the boundary-value problem: a < eta < xi < T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub a: f64,
    pub eta: f64,
    pub xi: f64,
    pub t_end: f64,
}

impl Domain {
    pub fn new(a: f64, eta: f64, xi: f64, t_end: f64) -> Result<Self, PsiError> {
        if !(a.is_finite() && eta.is_finite() && xi.is_finite() && t_end.is_finite()) {
            return Err(PsiError::InvalidDomain("domain points must be finite".into()));
        }
        if a < 0.0 {
            return Err(PsiError::InvalidDomain(format!("a must be >= 0, got {a}")));
        }
        if !(a < eta && eta < xi && xi < t_end) {
            return Err(PsiError::InvalidDomain(format!(
                "need a < eta < xi < T, got a={a}, eta={eta}, xi={xi}, T={t_end}"
            )));
        }
        Ok(Self { a, eta, xi, t_end })
    }
}

/// One failed sample from psi validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationFailure {
    pub index: usize,
    pub t: f64,
    pub reason: String,
}

/// Outcome of sampling-based psi validation on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub valid: bool,
    pub failures: Vec<ValidationFailure>,
    pub samples: usize,
}

/// Check monotonicity and positivity of psi' on `samples` points of [a, T].
///
/// Failures are report entries, never panics or errors.
pub fn validate_psi(psi: &PsiFunction, dom: &Domain, samples: usize) -> ValidationReport {
    let samples = samples.max(2);
    let mut failures = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..samples {
        let t = dom.a + (dom.t_end - dom.a) * i as f64 / (samples - 1) as f64;
        let v = psi.eval(t);
        let d = psi.deriv(t);
        if !v.is_finite() {
            failures.push(ValidationFailure {
                index: i,
                t,
                reason: format!("psi(t) = {v} is not finite"),
            });
        } else if v <= prev {
            failures.push(ValidationFailure {
                index: i,
                t,
                reason: format!("monotonicity fails: psi(t) = {v} <= previous {prev}"),
            });
        }
        if !(d > 0.0) || !d.is_finite() {
            failures.push(ValidationFailure {
                index: i,
                t,
                reason: format!("psi'(t) = {d} is not positive and finite"),
            });
        }
        if v.is_finite() {
            prev = v;
        }
    }
    ValidationReport {
        valid: failures.is_empty(),
        samples,
        failures,
    }
}

// Fritsch-Carlson monotone cubic slopes; keeps the interpolant monotone
// whenever the data is.
fn pchip_slopes(samples: &[(f64, f64)]) -> Vec<f64> {
    let n = samples.len();
    if n == 2 {
        let d = (samples[1].1 - samples[0].1) / (samples[1].0 - samples[0].0);
        return vec![d, d];
    }
    let h: Vec<f64> = samples.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let sec: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if sec[i - 1] * sec[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
        }
    }
    d[0] = endpoint_slope(h[0], h[1], sec[0], sec[1]);
    d[n - 1] = endpoint_slope(h[n - 2], h[n - 3], sec[n - 2], sec[n - 3]);
    d
}

fn endpoint_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d.signum() != s0.signum() {
        0.0
    } else if s0.signum() != s1.signum() && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

// Hermite evaluation; returns (value, derivative). Extrapolates linearly
// outside the sample range.
fn pchip_eval(samples: &[(f64, f64)], slopes: &[f64], t: f64) -> (f64, f64) {
    let n = samples.len();
    if t <= samples[0].0 {
        return (samples[0].1 + slopes[0] * (t - samples[0].0), slopes[0]);
    }
    if t >= samples[n - 1].0 {
        return (
            samples[n - 1].1 + slopes[n - 1] * (t - samples[n - 1].0),
            slopes[n - 1],
        );
    }
    let mut i = match samples.partition_point(|&(x, _)| x <= t) {
        0 => 0,
        k => k - 1,
    };
    if i >= n - 1 {
        i = n - 2;
    }
    let h = samples[i + 1].0 - samples[i].0;
    let th = (t - samples[i].0) / h;
    let (y0, y1) = (samples[i].1, samples[i + 1].1);
    let (d0, d1) = (slopes[i], slopes[i + 1]);
    let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
    let h10 = th * (1.0 - th) * (1.0 - th);
    let h01 = th * th * (3.0 - 2.0 * th);
    let h11 = th * th * (th - 1.0);
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = 6.0 * th * th - 6.0 * th;
    let dh10 = 3.0 * th * th - 4.0 * th + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * th * th - 2.0 * th;
    let deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    (value, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn named_kinds_analytic_values() {
        let id = PsiFunction::identity();
        assert_eq!(id.eval(2.0), 2.0);
        assert_eq!(id.deriv(2.0), 1.0);

        let ln = PsiFunction::logarithm();
        assert_relative_eq!(ln.eval(std::f64::consts::E), 1.0, max_relative = 1e-15);
        assert_relative_eq!(ln.deriv(std::f64::consts::E), 1.0 / std::f64::consts::E);

        let pw = PsiFunction::power_law(2.0).unwrap();
        assert_eq!(pw.eval(3.0), 9.0);
        assert_eq!(pw.deriv(3.0), 6.0);
    }

    #[test]
    fn power_law_rejects_bad_exponent() {
        assert!(matches!(
            PsiFunction::power_law(0.0),
            Err(PsiError::InvalidParameter(_))
        ));
        assert!(PsiFunction::power_law(-1.5).is_err());
    }

    #[test]
    fn validate_named_kinds() {
        let dom = Domain::new(0.0, 0.25, 0.5, 1.0).unwrap();
        assert!(validate_psi(&PsiFunction::identity(), &dom, 100).valid);
        // power law needs a > 0 for psi' > 0 at the left endpoint
        let dom_pos = Domain::new(0.5, 0.6, 0.8, 1.0).unwrap();
        assert!(validate_psi(&PsiFunction::power_law(2.0).unwrap(), &dom_pos, 100).valid);
        assert!(!validate_psi(&PsiFunction::power_law(2.0).unwrap(), &dom, 100).valid);

        let dom_pos = Domain::new(1.0, 1.5, 2.0, std::f64::consts::E).unwrap();
        assert!(validate_psi(&PsiFunction::logarithm(), &dom_pos, 100).valid);

        // log with a = 0: psi' unbounded / psi undefined at 0
        let report = validate_psi(&PsiFunction::logarithm(), &dom, 100);
        assert!(!report.valid);
        assert!(!report.failures.is_empty());
    }

    #[test]
    fn tabulated_non_monotone_rejected() {
        let r = PsiFunction::new(PsiKind::Tabulated {
            samples: vec![(0.0, 0.0), (0.5, 0.7), (1.0, 0.6)],
        });
        assert!(r.is_err());
    }

    #[test]
    fn tabulated_tracks_smooth_generator() {
        // tabulate t^2 on [1, 2] and compare the interpolant
        let samples: Vec<(f64, f64)> = (0..=40)
            .map(|i| {
                let t = 1.0 + i as f64 / 40.0;
                (t, t * t)
            })
            .collect();
        let psi = PsiFunction::new(PsiKind::Tabulated { samples }).unwrap();
        for i in 0..=100 {
            let t = 1.0 + i as f64 / 100.0;
            assert_relative_eq!(psi.eval(t), t * t, max_relative = 1e-4);
            assert_relative_eq!(psi.deriv(t), 2.0 * t, max_relative = 1e-2);
        }
        let dom = Domain::new(1.0, 1.3, 1.6, 2.0).unwrap();
        assert!(validate_psi(&psi, &dom, 200).valid);
        // inversion by bisection, tolerance in the psi coordinate
        let t = psi.invert(2.25, 1.0, 2.0).unwrap();
        assert!((psi.eval(t) - 2.25).abs() <= 1e-11);
    }

    #[test]
    fn domain_ordering_enforced() {
        assert!(Domain::new(0.0, 0.5, 0.25, 1.0).is_err());
        assert!(Domain::new(0.5, 0.5, 0.75, 1.0).is_err());
        assert!(Domain::new(-1.0, 0.0, 0.5, 1.0).is_err());
        assert!(Domain::new(0.0, 0.25, 0.5, 1.0).is_ok());
    }
}
