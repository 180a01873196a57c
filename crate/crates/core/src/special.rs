//! Certified evaluations of the Riemann and Hurwitz zeta functions and of
//! `w(γ) = Σ_{j≥2} j^{-γ} log j`.
//!
//! All three use Euler–Maclaurin summation with an explicit head of `N`
//! terms. The summands `x^{-s}` and `x^{-γ} log x` have derivatives of
//! alternating constant sign on `[N, ∞)` once `log N` exceeds the harmonic
//! offsets below, so the remainder is bounded by the first omitted
//! correction term; the reported error doubles it and adds a rounding term.

use crate::error::{Error, Result};

/// `B_2, B_4, …, B_22`.
const BERNOULLI_EVEN: [f64; 11] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
];

/// Number of Euler–Maclaurin correction terms.
const EM_TERMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialKind {
    Zeta,
    Hurwitz,
    W,
    Eta,
}

/// A real value together with a rigorous bound on its absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialValue {
    pub value: f64,
    pub abs_error: f64,
    pub kind: SpecialKind,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Rising factorial `s (s+1) … (s+m-1)`.
fn rising(s: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (s + i as f64))
}

/// Euler–Maclaurin tail `Σ_{n≥0} (n + a)^{-s}` for large `a`, with a remainder bound.
fn hurwitz_tail(s: f64, a: f64) -> (f64, f64) {
    let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    for k in 1..=EM_TERMS {
        let b = BERNOULLI_EVEN[k - 1] / factorial(2 * k);
        tail += b * rising(s, 2 * k - 1) * a.powf(-s - (2 * k) as f64 + 1.0);
    }
    let k = EM_TERMS + 1;
    let omitted = BERNOULLI_EVEN[k - 1] / factorial(2 * k) * rising(s, 2 * k - 1) * a.powf(-s - (2 * k) as f64 + 1.0);
    (tail, 2.0 * omitted.abs())
}

/// Returns the value, the truncation bound and the rounding bound.
fn hurwitz_with_head(s: f64, q: f64, head: usize) -> (f64, f64, f64) {
    let mut sum = 0.0;
    // summing small terms first keeps the rounding error near one ulp of the result
    for n in (0..head).rev() {
        sum += (n as f64 + q).powf(-s);
    }
    let (tail, bound) = hurwitz_tail(s, head as f64 + q);
    let value = sum + tail;
    let rounding = 4.0 * f64::EPSILON * value.abs() * (1.0 + (head as f64).log2());
    (value, bound, rounding)
}

/// Hurwitz zeta `ζ(s, q) = Σ_{n≥0} (n+q)^{-s}` for `s > 1`, `q > 0`.
pub fn hurwitz_zeta(s: f64, q: f64, tol: f64) -> Result<SpecialValue> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain(format!("Hurwitz zeta needs s > 1, got {s}")));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("Hurwitz zeta needs q > 0, got {q}")));
    }
    // rounding is not reduced by a longer head, so only the truncation is driven below tol
    let mut head = 16usize;
    loop {
        let (value, truncation, rounding) = hurwitz_with_head(s, q, head);
        if truncation <= tol || head >= 1 << 22 {
            return Ok(SpecialValue { value, abs_error: truncation + rounding, kind: SpecialKind::Hurwitz });
        }
        head *= 4;
    }
}

/// Riemann zeta for real `s > 1 + 10^{-3}`.
pub fn zeta(s: f64, tol: f64) -> Result<SpecialValue> {
    if !(s > 1.0 + 1e-3) || !s.is_finite() {
        return Err(Error::Domain(format!("riemann zeta is evaluated for s > 1.001, got {s}")));
    }
    let mut v = hurwitz_zeta(s, 1.0, tol)?;
    v.kind = SpecialKind::Zeta;
    Ok(v)
}

/// `ζ(s)` at the default tolerance, panicking only on a domain violation by the caller.
pub(crate) fn zeta_value(s: f64) -> Result<f64> {
    Ok(zeta(s, 1e-15)?.value)
}

/// Dirichlet eta `η(s) = (1 - 2^{1-s}) ζ(s)`.
pub fn dirichlet_eta(s: f64, tol: f64) -> Result<SpecialValue> {
    let z = zeta(s, tol)?;
    let factor = 1.0 - 2f64.powf(1.0 - s);
    Ok(SpecialValue { value: factor * z.value, abs_error: factor.abs() * z.abs_error, kind: SpecialKind::Eta })
}

/// `w(γ) = Σ_{j≥2} j^{-γ} log j = -ζ'(γ)` for `γ > 1`.
pub fn w_gamma(gamma: f64, tol: f64) -> Result<SpecialValue> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("w(gamma) needs gamma > 1, got {gamma}")));
    }
    // derivative signs settle once log N exceeds sum_{i < 2p+2} 1/(gamma+i)
    let mut head = 64usize;
    loop {
        let (value, truncation, rounding) = w_with_head(gamma, head);
        if truncation <= tol || head >= 1 << 22 {
            return Ok(SpecialValue { value, abs_error: truncation + rounding, kind: SpecialKind::W });
        }
        head *= 4;
    }
}

/// m-th derivative of `x^{-γ} log x`.
fn log_power_derivative(gamma: f64, x: f64, m: usize) -> f64 {
    let harmonic: f64 = (0..m).map(|i| 1.0 / (gamma + i as f64)).sum();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * x.powf(-gamma - m as f64) * rising(gamma, m) * (x.ln() - harmonic)
}

fn w_with_head(gamma: f64, head: usize) -> (f64, f64, f64) {
    let mut sum = 0.0;
    for n in (2..head).rev() {
        let x = n as f64;
        sum += x.powf(-gamma) * x.ln();
    }
    let a = head as f64;
    let g1 = gamma - 1.0;
    let mut tail = a.powf(-g1) * (a.ln() / g1 + 1.0 / (g1 * g1)) + 0.5 * a.powf(-gamma) * a.ln();
    for k in 1..=EM_TERMS {
        let b = BERNOULLI_EVEN[k - 1] / factorial(2 * k);
        tail -= b * log_power_derivative(gamma, a, 2 * k - 1);
    }
    let k = EM_TERMS + 1;
    let omitted = BERNOULLI_EVEN[k - 1] / factorial(2 * k) * log_power_derivative(gamma, a, 2 * k - 1);
    let value = sum + tail;
    let rounding = 4.0 * f64::EPSILON * value.abs() * (1.0 + a.log2());
    (value, 2.0 * omitted.abs(), rounding)
}
