//! Laguerre polynomials, the terminating confluent hypergeometric series
//! ₁F₁(-n; σ; x) and ln Γ.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{require, Result};

/// A polynomial evaluation together with its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolynomialEval {
    pub degree: u32,
    pub parameter: f64,
    pub argument: f64,
    pub value: f64,
}

/// Terminating series ₁F₁(-n; σ; x) = Σ_p (-1)^p C(n,p) x^p / (σ)_p.
///
/// The Pochhammer ratio Γ(σ)/Γ(σ+p) is built as a running product. Terms and
/// the running sum are carried in double-double arithmetic: the alternating
/// sum cancels heavily for large x and plain f64 loses most of its digits.
pub fn hyp1f1_poly(n: u32, sigma: f64, x: f64) -> Result<f64> {
    require(sigma > 0.0 && sigma.is_finite(), "sigma", "positive", sigma)?;
    let mut term = DoubleDouble::from(1.0);
    let mut sum = term;
    for p in 0..n {
        let pf = f64::from(p);
        let shifted = DoubleDouble::two_sum(sigma, pf);
        term = term
            .mul_f64(x)
            .mul_f64(-(f64::from(n) - pf))
            .div_f64(pf + 1.0)
            .div(shifted);
        sum = sum.add(term);
    }
    Ok(sum.to_f64())
}

/// Generalized Laguerre polynomial L_n^η(x) from the three-term recurrence.
pub fn laguerre(n: u32, eta: f64, x: f64) -> Result<f64> {
    require(eta > -1.0, "eta", "greater than -1", eta)?;
    Ok(laguerre_unchecked(n, eta, x))
}

pub(crate) fn laguerre_unchecked(n: u32, eta: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = 1.0 + eta - x;
    for k in 2..=n {
        let k = f64::from(k);
        let next = ((2.0 * k - 1.0 + eta - x) * curr - (k - 1.0 + eta) * prev) / k;
        prev = curr;
        curr = next;
    }
    curr
}

/// d/dx L_n^η(x) = -L_{n-1}^{η+1}(x).
pub fn laguerre_derivative(n: u32, eta: f64, x: f64) -> Result<f64> {
    require(eta > -1.0, "eta", "greater than -1", eta)?;
    Ok(laguerre_derivative_unchecked(n, eta, x))
}

pub(crate) fn laguerre_derivative_unchecked(n: u32, eta: f64, x: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        -laguerre_unchecked(n - 1, eta + 1.0, x)
    }
}

/// Γ(n+η+1) / (n! Γ(η+1)) = L_n^η(0), as a product of n ratios.
pub fn laguerre_at_origin(n: u32, eta: f64) -> f64 {
    (1..=n).map(|k| (eta + f64::from(k)) / f64::from(k)).product()
}

pub fn laguerre_eval(n: u32, eta: f64, x: f64) -> Result<PolynomialEval> {
    Ok(PolynomialEval {
        degree: n,
        parameter: eta,
        argument: x,
        value: laguerre(n, eta, x)?,
    })
}

// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    require(x > 0.0 && x.is_finite(), "x", "positive and finite", x)?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    // Exact for small integers, where the Lanczos sum loses its last digits.
    if x <= 30.0 && x.fract() == 0.0 {
        let mut acc = 1.0f64;
        for k in 2..(x as u32) {
            acc *= f64::from(k);
        }
        return acc.ln();
    }
    let z = x - 1.0;
    let mut series = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// Unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl From<f64> for DoubleDouble {
    fn from(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }
}

impl DoubleDouble {
    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self { hi: s, lo: b - (s - a) }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, other: Self) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        let t = Self::two_sum(self.lo, other.lo);
        let s = Self::quick_two_sum(s.hi, s.lo + t.hi);
        Self::quick_two_sum(s.hi, s.lo + t.lo)
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = Self::two_prod(self.hi, b);
        Self::quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let p = Self::two_prod(q1, b);
        let r = Self::two_sum(self.hi, -p.hi);
        let q2 = (r.hi + (r.lo - p.lo + self.lo)) / b;
        Self::quick_two_sum(q1, q2)
    }

    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self.add(b.mul_f64(-q1));
        let q2 = r.hi / b.hi;
        let r = r.add(b.mul_f64(-q2));
        let q3 = r.hi / b.hi;
        Self::quick_two_sum(q1, q2).add(Self::from(q3))
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn hyp1f1_small_degrees() {
        assert_eq!(hyp1f1_poly(0, 3.2, 7.0).unwrap(), 1.0);
        for (sigma, x) in [(0.7, 2.0), (2.5, 1.3), (11.0, -4.0)] {
            assert!(rel(hyp1f1_poly(1, sigma, x).unwrap(), 1.0 - x / sigma) < 1e-15);
        }
        assert!(hyp1f1_poly(3, 0.0, 1.0).is_err());
        assert!(hyp1f1_poly(3, -1.5, 1.0).is_err());
    }

    #[test]
    fn laguerre_bases() {
        assert_eq!(laguerre(0, 4.2, 9.0).unwrap(), 1.0);
        assert_eq!(laguerre(1, 2.0, 0.5).unwrap(), 2.5);
        assert!(laguerre(2, -1.0, 0.5).is_err());
        // L_2^η(x) = ((η+1)(η+2) - 2(η+2)x + x²)/2
        let (eta, x) = (0.3f64, 1.7f64);
        let closed = ((eta + 1.0) * (eta + 2.0) - 2.0 * (eta + 2.0) * x + x * x) / 2.0;
        assert!(rel(laguerre(2, eta, x).unwrap(), closed) < 1e-14);
    }

    #[test]
    fn laguerre_matches_hypergeometric_form() {
        let (n, eta, x) = (6, 3.7, 2.2);
        let lhs = laguerre(n, eta, x).unwrap();
        let rhs = laguerre_at_origin(n, eta) * hyp1f1_poly(n, eta + 1.0, x).unwrap();
        assert!(rel(lhs, rhs) < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn laguerre_value_at_origin_is_gamma_ratio() {
        for n in 0..12u32 {
            for eta in [0.0, 0.5, 2.3, 7.9] {
                let via_gamma = (ln_gamma(f64::from(n) + eta + 1.0).unwrap()
                    - ln_gamma(f64::from(n) + 1.0).unwrap()
                    - ln_gamma(eta + 1.0).unwrap())
                .exp();
                assert!(rel(laguerre(n, eta, 0.0).unwrap(), via_gamma) < 1e-12);
                assert!(rel(laguerre_at_origin(n, eta), via_gamma) < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let (n, eta, x, h) = (5u32, 1.4, 3.1, 1e-5);
        let fd = (laguerre(n, eta, x + h).unwrap() - laguerre(n, eta, x - h).unwrap()) / (2.0 * h);
        assert!((laguerre_derivative(n, eta, x).unwrap() - fd).abs() < 1e-7);
        assert_eq!(laguerre_derivative(0, eta, x).unwrap(), 0.0);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert_eq!(ln_gamma(2.0).unwrap(), 0.0);
        assert!(rel(ln_gamma(0.5).unwrap(), PI.sqrt().ln()) < 1e-14);
        assert!(rel(ln_gamma(7.0).unwrap(), 720f64.ln()) < 1e-15);
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-2.5).is_err());
    }

    #[test]
    fn ln_gamma_recurrence() {
        // ln Γ(x+1) - ln Γ(x) = ln x, away from the zeros of ln Γ
        let mut x = 0.013;
        while x < 199.0 {
            if (x - 1.0f64).abs() > 0.1 && (x - 2.0f64).abs() > 0.1 {
                let lhs = ln_gamma(x + 1.0).unwrap();
                let rhs = ln_gamma(x).unwrap() + x.ln();
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0),
                    "x = {x}: {lhs} vs {rhs}"
                );
            }
            x += 0.377;
        }
        // large argument against exact log factorial
        let log_fact: f64 = (2..150).map(|k| (k as f64).ln()).sum();
        assert!(rel(ln_gamma(150.0).unwrap(), log_fact) < 1e-13);
        assert!(rel(ln_gamma(150.5).unwrap() - ln_gamma(149.5).unwrap(), 149.5f64.ln()) < 1e-12);
    }

    #[test]
    fn double_double_recovers_cancellation() {
        let a = DoubleDouble::from(1e16).add(DoubleDouble::from(1.0));
        let b = a.add(DoubleDouble::from(-1e16));
        assert_eq!(b.to_f64(), 1.0);
        let third = DoubleDouble::from(1.0).div(DoubleDouble::from(3.0)).mul_f64(3.0);
        assert!((third.hi - 1.0).abs() + third.lo.abs() < 1e-30 + f64::EPSILON);
    }
}
