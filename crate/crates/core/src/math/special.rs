//! Special functions: complementary error function, rising factorials and the
//! Gauss hypergeometric series.

use crate::error::{Error, Result};

/// Complementary error function.
///
/// Backed by the musl/FreeBSD rational approximations shipped in `libm`,
/// which are accurate to about one ulp over the whole real line.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Rising factorial `a (a+1) ... (a+s-1)`, equal to 1 for `s = 0`.
pub fn pochhammer(a: f64, s: u32) -> f64 {
    (0..s).fold(1.0, |acc, k| acc * (a + k as f64))
}

/// Result of summing a hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of terms added.
    pub terms: usize,
    /// Magnitude of the last term relative to the sum.
    pub achieved_tol: f64,
}

pub const HYP2F1_REL_TOL: f64 = 1e-12;
pub const HYP2F1_MAX_TERMS: usize = 500;

/// Gauss hypergeometric function by direct summation of its power series.
///
/// Only the unit disk is supported; there is no analytic continuation.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<SeriesSum> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("2F1 argument |x| = {} >= 1", x.abs())));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Domain(format!("2F1 parameter c = {c} is a non-positive integer")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut terms = 1;
    let mut achieved = 0.0;
    for k in 0..HYP2F1_MAX_TERMS - 1 {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        sum += term;
        terms += 1;
        achieved = if sum != 0.0 { (term / sum).abs() } else { term.abs() };
        if term == 0.0 || achieved < HYP2F1_REL_TOL {
            break;
        }
    }
    Ok(SeriesSum { value: sum, terms, achieved_tol: achieved })
}

/// Normalized Gaussian density of standard deviation `s` at `u`.
pub(crate) fn gauss_pdf(u: f64, s: f64) -> f64 {
    (-0.5 * (u / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_basic_values() {
        assert_eq!(erfc(0.0), 1.0);
        let x = 1.3;
        assert!((erfc(x) - (2.0 - erfc(-x))).abs() < 1e-15);
        assert_eq!(erfc(40.0), 0.0);
        assert_eq!(erfc(-40.0), 2.0);
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert_eq!(pochhammer(1.0, 5), 120.0);
        assert!((pochhammer(0.5, 3) - 1.875).abs() < 1e-15);
    }

    #[test]
    fn hyp2f1_identities() {
        assert_eq!(gauss_2f1(0.3, 0.7, 1.1, 0.0).unwrap().value, 1.0);
        let r = gauss_2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((r.value - 1.3862943611198906).abs() < 1e-11);
        assert!(r.achieved_tol < 1e-12);
        // terminating series
        let poly = gauss_2f1(-2.0, 1.0, 1.0, 0.5).unwrap().value;
        assert!((poly - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hyp2f1_domain_errors() {
        assert!(matches!(gauss_2f1(1.0, 1.0, 2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gauss_2f1(1.0, 1.0, -3.0, 0.2), Err(Error::Domain(_))));
        assert!(matches!(gauss_2f1(1.0, 1.0, 0.0, 0.2), Err(Error::Domain(_))));
    }
}
