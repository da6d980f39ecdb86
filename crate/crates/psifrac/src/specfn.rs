//! Special functions used by the bound evaluators and solution envelopes:
//! gamma, the error function, and the Mittag-Leffler family.

use crate::error::SpecFnError;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

// Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficient set).
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_C: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162e-6,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS_C[0];
    for (k, c) in LANCZOS_C.iter().enumerate().skip(1) {
        a += c / (x - 1.0 + k as f64);
    }
    a
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function for real arguments away from the poles at 0, -1, -2, ...
pub fn gamma(x: f64) -> Result<f64, SpecFnError> {
    if is_nonpositive_integer(x) {
        return Err(SpecFnError::PoleError(x));
    }
    if x < 0.5 {
        // reflection: gamma(x) gamma(1-x) = pi / sin(pi x)
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * gamma(1.0 - x)?));
    }
    let t = x + LANCZOS_G - 0.5;
    Ok(SQRT_2PI * t.powf(x - 0.5) * (-t).exp() * lanczos_sum(x))
}

/// Natural log of gamma(x) for x > 0; avoids overflow for large arguments.
pub fn ln_gamma(x: f64) -> Result<f64, SpecFnError> {
    if x <= 0.0 {
        return Err(SpecFnError::InvalidParameter(format!(
            "ln_gamma requires x > 0, got {x}"
        )));
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return Ok((std::f64::consts::PI / s).ln() - ln_gamma(1.0 - x)?);
    }
    let t = x + LANCZOS_G - 0.5;
    Ok(SQRT_2PI.ln() + (x - 0.5) * t.ln() - t + lanczos_sum(x).ln())
}

// Cody's rational approximations (SPECFUN "calerf", 1990 revision).
// Accurate to roughly machine precision for IEEE doubles.
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_4e3,
    1.857_777_061_846_031_5e-1,
];
const ERF_B: [f64; 4] = [
    2.360_129_095_234_412_1e1,
    2.440_246_379_344_441_7e2,
    1.282_616_526_077_372_3e3,
    2.844_236_833_439_170_6e3,
];
const ERF_C: [f64; 9] = [
    5.641_884_969_886_700_9e-1,
    8.883_149_794_388_376e0,
    6.611_919_063_714_163e1,
    2.986_351_381_974_001_3e2,
    8.819_522_212_417_69e2,
    1.712_047_612_634_070_6e3,
    2.051_078_377_826_071_5e3,
    1.230_339_354_797_997_2e3,
    2.153_115_354_744_038_5e-8,
];
const ERF_D: [f64; 8] = [
    1.574_492_611_070_983_5e1,
    1.176_939_508_913_125e2,
    5.371_811_018_620_098_5e2,
    1.621_389_574_566_690_2e3,
    3.290_799_235_733_459_7e3,
    4.362_619_090_143_247e3,
    3.439_367_674_143_721_6e3,
    1.230_339_354_803_749_4e3,
];
const ERF_P: [f64; 6] = [
    3.053_266_349_612_323_4e-1,
    3.603_448_999_498_044_4e-1,
    1.257_817_261_112_292_45e-1,
    1.608_378_514_874_227_7e-2,
    6.587_491_615_298_378e-4,
    1.631_538_713_730_209_8e-2,
];
const ERF_Q: [f64; 5] = [
    2.568_520_192_289_822_4e0,
    1.872_952_849_923_460_4e0,
    5.279_051_029_514_284e-1,
    6.051_834_131_244_132e-2,
    2.335_204_976_268_691_8e-3,
];
const ONE_OVER_SQRT_PI: f64 = 5.641_895_835_477_563e-1;

fn erfc_mid(y: f64) -> f64 {
    let mut xnum = ERF_C[8] * y;
    let mut xden = y;
    for i in 0..7 {
        xnum = (xnum + ERF_C[i]) * y;
        xden = (xden + ERF_D[i]) * y;
    }
    let r = (xnum + ERF_C[7]) / (xden + ERF_D[7]);
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * r
}

fn erfc_tail(y: f64) -> f64 {
    if y >= 26.543 {
        return 0.0;
    }
    let ysq = 1.0 / (y * y);
    let mut xnum = ERF_P[5] * ysq;
    let mut xden = ysq;
    for i in 0..4 {
        xnum = (xnum + ERF_P[i]) * ysq;
        xden = (xden + ERF_Q[i]) * ysq;
    }
    let mut r = ysq * (xnum + ERF_P[4]) / (xden + ERF_Q[4]);
    r = (ONE_OVER_SQRT_PI - r) / y;
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * r
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        let ysq = if y > 1.11e-16 { y * y } else { 0.0 };
        let mut xnum = ERF_A[4] * ysq;
        let mut xden = ysq;
        for i in 0..3 {
            xnum = (xnum + ERF_A[i]) * ysq;
            xden = (xden + ERF_B[i]) * ysq;
        }
        return x * (xnum + ERF_A[3]) / (xden + ERF_B[3]);
    }
    let r = if y <= 4.0 { erfc_mid(y) } else { erfc_tail(y) };
    let result = (0.5 - r) + 0.5;
    if x < 0.0 {
        -result
    } else {
        result
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        return 1.0 - erf(x);
    }
    let r = if y <= 4.0 { erfc_mid(y) } else { erfc_tail(y) };
    if x < 0.0 {
        2.0 - r
    } else {
        r
    }
}

/// Parameters for the Mittag-Leffler series E_{alpha,beta}(z).
///
/// `beta = 1` is the one-parameter function; the two-parameter form is kept
/// because some envelope formulas are most naturally read through it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    pub alpha: f64,
    pub beta: f64,
    /// Relative truncation tolerance for the partial sums.
    pub tolerance: f64,
    /// Largest accepted |z|; the plain series is not used beyond this.
    pub radius: f64,
}

impl MlParams {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            beta: 1.0,
            tolerance: 1e-14,
            radius: 50.0,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    fn validate(&self) -> Result<(), SpecFnError> {
        if !(self.alpha > 0.0) {
            return Err(SpecFnError::InvalidParameter(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0) {
            return Err(SpecFnError::InvalidParameter(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(SpecFnError::InvalidParameter(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

const ML_MAX_TERMS: usize = 10_000;

/// Mittag-Leffler function by direct series summation.
///
/// Terms are accumulated until the current term stays below
/// `tolerance * |sum|` for three consecutive terms. For `alpha = 1` the sum
/// runs in double-double arithmetic so that the alternating series at
/// negative arguments keeps full relative accuracy.
pub fn mittag_leffler(params: &MlParams, z: f64) -> Result<f64, SpecFnError> {
    params.validate()?;
    if z.abs() > params.radius {
        return Err(SpecFnError::RadiusExceeded {
            z,
            radius: params.radius,
        });
    }
    if z == 0.0 {
        return if params.beta == 1.0 {
            Ok(1.0)
        } else {
            gamma(params.beta)
        };
    }
    if params.alpha == 1.0 {
        return ml_series_exp_recurrence(params, z);
    }
    let mut sum = 1.0 / gamma(params.beta)?;
    let ln_abs_z = z.abs().ln();
    let mut below = 0usize;
    for k in 1..=ML_MAX_TERMS {
        let ln_term = k as f64 * ln_abs_z - ln_gamma(params.alpha * k as f64 + params.beta)?;
        let mut term = ln_term.exp();
        if z < 0.0 && k % 2 == 1 {
            term = -term;
        }
        sum += term;
        if term.abs() <= params.tolerance * sum.abs() {
            below += 1;
            if below >= 3 {
                return Ok(sum);
            }
        } else {
            below = 0;
        }
    }
    Err(SpecFnError::NonConvergence {
        alpha: params.alpha,
        z,
        max_terms: ML_MAX_TERMS,
    })
}

// double-double helpers: an f64 pair (hi, lo) with |lo| <= ulp(hi)/2

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn dd_add(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(x.0, y.0);
    quick_two_sum(s, e + x.1 + y.1)
}

#[inline]
fn dd_mul_f64(x: (f64, f64), c: f64) -> (f64, f64) {
    let p = x.0 * c;
    let e = x.0.mul_add(c, -p) + x.1 * c;
    quick_two_sum(p, e)
}

#[inline]
fn dd_div_f64(x: (f64, f64), c: f64) -> (f64, f64) {
    let q1 = x.0 / c;
    let p = q1 * c;
    let e = -q1.mul_add(c, -p);
    let r = ((x.0 - p) + e + x.1) / c;
    quick_two_sum(q1, r)
}

// E_{1,beta}(z): term ratio is z / (k - 1 + beta), so the whole series can be
// generated by an exact recurrence and summed in double-double precision.
fn ml_series_exp_recurrence(params: &MlParams, z: f64) -> Result<f64, SpecFnError> {
    let mut term = if params.beta == 1.0 {
        (1.0, 0.0)
    } else {
        (1.0 / gamma(params.beta)?, 0.0)
    };
    let mut sum = term;
    let mut below = 0usize;
    for k in 1..=ML_MAX_TERMS {
        term = dd_div_f64(dd_mul_f64(term, z), k as f64 - 1.0 + params.beta);
        sum = dd_add(sum, term);
        if term.0.abs() <= params.tolerance * (sum.0 + sum.1).abs() {
            below += 1;
            if below >= 3 {
                return Ok(sum.0 + sum.1);
            }
        } else {
            below = 0;
        }
    }
    Err(SpecFnError::NonConvergence {
        alpha: params.alpha,
        z,
        max_terms: ML_MAX_TERMS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gamma_reference_values() {
        // mpmath, 22 digits
        assert_relative_eq!(gamma(1.5).unwrap(), 0.8862269254527580136491, max_relative = 1e-13);
        assert_relative_eq!(gamma(5.0).unwrap(), 24.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(0.1).unwrap(), 9.513507698668731836292, max_relative = 1e-13);
        assert_relative_eq!(gamma(0.5).unwrap(), 1.772453850905516027298, max_relative = 1e-13);
        assert_relative_eq!(gamma(2.5).unwrap(), 1.329340388179137020474, max_relative = 1e-13);
        assert_relative_eq!(gamma(10.25).unwrap(), 639232.5987795767942838, max_relative = 1e-13);
        assert_relative_eq!(gamma(50.0).unwrap(), 6.082818640342675608723e62, max_relative = 1e-13);
        assert_relative_eq!(gamma(-0.5).unwrap(), -3.544907701811032054596, max_relative = 1e-13);
        assert_relative_eq!(gamma(-1.5).unwrap(), 2.363271801207354703064, max_relative = 1e-13);
    }

    #[test]
    fn gamma_poles() {
        for x in [0.0, -1.0, -2.0, -7.0] {
            assert!(matches!(gamma(x), Err(SpecFnError::PoleError(_))));
        }
    }

    #[test]
    fn gamma_recurrence_property() {
        // gamma(x+1) = x gamma(x) across the working range
        let mut x = 0.1;
        while x < 50.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
            x += 0.37;
        }
    }

    #[test]
    fn ln_gamma_consistency() {
        for &x in &[0.1, 0.9, 3.5, 20.0, 50.0, 120.0] {
            if x < 170.0 {
                assert_relative_eq!(
                    ln_gamma(x).unwrap(),
                    gamma(x).unwrap().ln(),
                    max_relative = 1e-12
                );
            }
        }
        // beyond f64 gamma overflow
        assert!(ln_gamma(500.0).unwrap().is_finite());
    }

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0), 0.0);
        assert_abs_diff_eq!(erf(0.3), 0.3286267594591274276389, epsilon = 1e-12);
        assert_abs_diff_eq!(erf(1.0), 0.8427007929497148693412, epsilon = 1e-12);
        assert_abs_diff_eq!(erf(1.8), 0.9890905016357307141837, epsilon = 1e-12);
        assert_abs_diff_eq!(erf(3.5), 0.9999992569016276585873, epsilon = 1e-12);
        assert_abs_diff_eq!(erf(10.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(erf(-1.0), -0.8427007929497148693412, epsilon = 1e-12);
        assert_abs_diff_eq!(erf(2.0) + erfc(2.0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn ml_trivial_cases() {
        let p = MlParams::new(1.0);
        assert_relative_eq!(mittag_leffler(&p, 1.0).unwrap(), std::f64::consts::E, max_relative = 1e-12);
        for alpha in [0.3, 0.7, 1.0, 1.6] {
            assert_eq!(mittag_leffler(&MlParams::new(alpha), 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn ml_exp_negative_arguments() {
        // the alternating series must keep relative accuracy
        let p = MlParams::new(1.0);
        for &z in &[-10.0, -7.3, -2.0, 2.0, 10.0] {
            assert_relative_eq!(mittag_leffler(&p, z).unwrap(), z.exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn ml_half_closed_form() {
        // E_{1/2}(z) = exp(z^2)(1 + erf z); value at z=1 frozen from the
        // closed form evaluated at high precision.
        let p = MlParams::new(0.5);
        assert_relative_eq!(
            mittag_leffler(&p, 1.0).unwrap(),
            5.008980080762283466309825,
            max_relative = 1e-10
        );
        for &z in &[0.25f64, 0.5, 1.5, 2.5, 3.0] {
            let closed = (z * z).exp() * (1.0 + erf(z));
            assert_relative_eq!(mittag_leffler(&p, z).unwrap(), closed, max_relative = 1e-8);
        }
    }

    #[test]
    fn ml_radius_and_params() {
        assert!(matches!(
            mittag_leffler(&MlParams::new(0.5), 60.0),
            Err(SpecFnError::RadiusExceeded { .. })
        ));
        assert!(mittag_leffler(&MlParams::new(-1.0), 1.0).is_err());
        assert!(mittag_leffler(&MlParams::new(1.0).with_beta(0.0), 1.0).is_err());
    }

    #[test]
    fn ml_monotone_on_nonnegative_axis() {
        for &alpha in &[0.4, 0.9, 1.3, 2.0] {
            let p = MlParams::new(alpha);
            let mut prev = mittag_leffler(&p, 0.0).unwrap();
            for i in 1..=30 {
                let z = 5.0 * i as f64 / 30.0;
                let v = mittag_leffler(&p, z).unwrap();
                assert!(v > prev, "E_{alpha} not increasing at z={z}");
                prev = v;
            }
        }
    }
}
