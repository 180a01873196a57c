//! Closed-form quantities of the Hofbauer renewal model: the recursion for
//! `𝓛^n_{s f}(a)` at `x ∈ [0]`, the generating-function closed forms, the
//! residue constant `c` and the eigenmeasure values.

use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, w_gamma as certified_w, zeta, SpecialValue};
use crate::zeta::{limit_s_to_1, LimitResult, DEFAULT_EXTRAPOLATION_ORDER};

const TOL: f64 = 1e-15;

/// `ζ(s)` with a certified error bound.
pub fn riemann_zeta(s: f64, tol: f64) -> Result<SpecialValue> {
    zeta(s, tol)
}

/// `w(γ) = Σ_{j≥2} j^{-γ} log j` with a certified error bound.
pub fn w_gamma(gamma: f64, tol: f64) -> Result<SpecialValue> {
    certified_w(gamma, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RenewalObservable {
    /// `a = 1_{[1]}`.
    Indicator,
    /// `a ≡ 1`.
    Ones,
}

/// The Hofbauer model at a fixed `γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hofbauer {
    gamma: f64,
    zeta_gamma: f64,
}

/// Sum of the recursion sequence with its polynomial tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecursionSum {
    pub partial: f64,
    /// `C_N ζ(γs, N+1)` with `C_N = L^N N^{γs}`.
    pub tail: f64,
    pub value: f64,
    /// Size of the tail correction, reported as its uncertainty.
    pub tail_bound: f64,
    pub n_terms: usize,
}

/// Constants of the model. Fields tagged `as_printed` evaluate displayed
/// formulas verbatim and are not asserted anywhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HofbauerConstants {
    pub gamma: f64,
    pub zeta_gamma: f64,
    pub w_gamma: f64,
    /// `c = -f'(1)/ζ(γ) = (γ w(γ) + ζ(γ) log ζ(γ)) / ζ(γ)²` with `f(s) = ζ(γs) ζ(γ)^{-s}`.
    pub c: f64,
    /// `(γ w(γ) - log ζ(γ)) / ζ(γ)²`.
    pub c_as_printed: f64,
    /// `c` from a central difference of `f` at `s = 1` (step `1e-5`).
    pub c_finite_difference: f64,
    /// `ν(C_0) = 1/ζ(γ)`.
    pub nu_c0: f64,
    /// `ν([1]) = (ζ(γ) - 1)/ζ(γ)`.
    pub nu_one: f64,
    /// `ζ(γ)/ζ(γ-1)`, the renewal-chain mass of `C_0`.
    pub mu_c0: f64,
    /// `ζ(γ)/ζ(γ-1)` as displayed; equal to `mu_c0`.
    pub mu_c0_as_printed: f64,
    /// `(ζ log ζ + γ w(γ)) / ζ(γ-1)`, entropy of the renewal chain.
    pub entropy: f64,
    /// `-(ζ log ζ + γ w(γ)) / (γ w(γ-1))` as displayed.
    pub entropy_as_printed: f64,
}

impl Hofbauer {
    /// Model with `γ > 2`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 2.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "Hofbauer model needs gamma > 2 (got {gamma}); use with_low_gamma to override"
            )));
        }
        Self::with_low_gamma(gamma)
    }

    /// Accepts `γ ∈ (1, 2]` as well.
    pub fn with_low_gamma(gamma: f64) -> Result<Self> {
        if !(gamma > 1.001) || !gamma.is_finite() {
            return Err(Error::Domain(format!("Hofbauer model needs gamma > 1, got {gamma}")));
        }
        Ok(Self { gamma, zeta_gamma: zeta(gamma, TOL)?.value })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `f(s) = ζ(γs) ζ(γ)^{-s}`, the generating function of first returns to `[0]`.
    pub fn return_function(&self, s: f64) -> Result<f64> {
        Ok(zeta(self.gamma * s, TOL)?.value * self.zeta_gamma.powf(-s))
    }

    /// `L^1, …, L^{n_max}` for `𝓛^n_{s f}(a)(x)`, `x ∈ [0]`.
    ///
    /// Indicator: `L^n = Σ_{k<n} ζ(γ)^{-s} k^{-γs} L^{n-k} + (n+1)^{-γs}`.
    /// Ones: `T^n = ζ(γ)^{-s} Σ_{j=1}^{n} j^{-γs} T^{n-j} + (n+1)^{-γs}`, `T^0 = 1`.
    pub fn recursion(&self, s: f64, n_max: usize, which: RenewalObservable) -> Vec<f64> {
        let gs = self.gamma * s;
        let zs = self.zeta_gamma.powf(-s);
        // powers[k] = k^{-γs}
        let powers: Vec<f64> = (0..=n_max + 1).map(|k| if k == 0 { 0.0 } else { (k as f64).powf(-gs) }).collect();
        // seq[n] for n = 0..=n_max; seq[0] only enters the ones variant
        let mut seq = vec![0.0; n_max + 1];
        if which == RenewalObservable::Ones {
            seq[0] = 1.0;
        }
        for n in 1..=n_max {
            let upper = match which {
                RenewalObservable::Indicator => n - 1,
                RenewalObservable::Ones => n,
            };
            let conv: f64 = (1..=upper).map(|k| powers[k] * seq[n - k]).sum();
            seq[n] = zs * conv + powers[n + 1];
        }
        seq.remove(0);
        seq
    }

    /// `Σ_{n≥1} L^n`, summing `n_terms` exactly and the rest through the
    /// asymptotic `L^n ≈ C n^{-γs}`.
    pub fn recursion_sum(&self, s: f64, n_terms: usize, which: RenewalObservable) -> Result<RecursionSum> {
        if n_terms < 2 {
            return Err(Error::Domain("need at least two recursion terms".into()));
        }
        let seq = self.recursion(s, n_terms, which);
        let partial: f64 = seq.iter().rev().sum();
        let gs = self.gamma * s;
        let n = n_terms as f64;
        let c_n = seq[n_terms - 1] * n.powf(gs);
        let tail = c_n * hurwitz_zeta(gs, n + 1.0, TOL)?.value;
        Ok(RecursionSum { partial, tail, value: partial + tail, tail_bound: tail.abs(), n_terms })
    }

    /// Generating-function closed forms for `s > 1`.
    pub fn zeta_closed(&self, s: f64, which: RenewalObservable) -> Result<f64> {
        let f = self.return_function(s)?;
        let denom = 1.0 - f;
        if !(denom > 0.0) {
            return Err(Error::Pole(format!("1 - ζ(γs)ζ(γ)^(-s) = {denom} <= 0 at s = {s}")));
        }
        let zgs = zeta(self.gamma * s, TOL)?.value;
        Ok(match which {
            RenewalObservable::Indicator => (zgs - 1.0) / denom,
            RenewalObservable::Ones => (f + zgs - 1.0) / denom,
        })
    }

    /// `lim_{s→1⁺} (s-1) ζ₊(s)` from the closed form.
    pub fn residue(&self, which: RenewalObservable, s_grid: &[f64]) -> Result<LimitResult> {
        limit_s_to_1(|s| self.zeta_closed(s, which), s_grid, DEFAULT_EXTRAPOLATION_ORDER)
    }

    /// `ν(C_k) = ζ(γ)^{-1} (k+1)^{-γ}`.
    pub fn nu_ck(&self, k: usize) -> f64 {
        (k as f64 + 1.0).powf(-self.gamma) / self.zeta_gamma
    }

    /// `Σ_{j≥k+1} j^{-γ} / ζ(γ-1)` as displayed.
    pub fn mu_ck_as_printed(&self, k: usize) -> Result<f64> {
        Ok(hurwitz_zeta(self.gamma, k as f64 + 1.0, TOL)?.value / zeta(self.gamma - 1.0, TOL)?.value)
    }

    /// `μ(C_k) = (k+1) ν(C_k) / Σ_j (j+1) ν(C_j)` for the renewal chain.
    pub fn mu_ck(&self, k: usize) -> Result<f64> {
        Ok((k as f64 + 1.0).powf(1.0 - self.gamma) / zeta(self.gamma - 1.0, TOL)?.value)
    }

    pub fn constants(&self) -> Result<HofbauerConstants> {
        let g = self.gamma;
        let z = self.zeta_gamma;
        let w = certified_w(g, TOL)?.value;
        let log_z = z.ln();
        let c = (g * w + z * log_z) / (z * z);
        let c_as_printed = (g * w - log_z) / (z * z);
        let h = 1e-5;
        let fd = (self.return_function(1.0 + h)? - self.return_function(1.0 - h)?) / (2.0 * h);
        let c_finite_difference = -fd / z;
        let (mu_c0, mu_c0_as_printed, entropy, entropy_as_printed) = if g - 1.0 > 1.001 {
            let z1 = zeta(g - 1.0, TOL)?.value;
            let w1 = certified_w(g - 1.0, TOL)?.value;
            (z / z1, z / z1, (z * log_z + g * w) / z1, -(z * log_z + g * w) / (g * w1))
        } else {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        };
        Ok(HofbauerConstants {
            gamma: g,
            zeta_gamma: z,
            w_gamma: w,
            c,
            c_as_printed,
            c_finite_difference,
            nu_c0: 1.0 / z,
            nu_one: (z - 1.0) / z,
            mu_c0,
            mu_c0_as_printed,
            entropy,
            entropy_as_printed,
        })
    }
}

pub fn hofbauer_recursion(gamma: f64, s: f64, n_max: usize, which: RenewalObservable) -> Result<Vec<f64>> {
    Ok(Hofbauer::new(gamma)?.recursion(s, n_max, which))
}

pub fn hofbauer_zeta_closed(gamma: f64, s: f64, which: RenewalObservable) -> Result<f64> {
    Hofbauer::new(gamma)?.zeta_closed(s, which)
}

pub fn hofbauer_constants(gamma: f64) -> Result<HofbauerConstants> {
    Hofbauer::new(gamma)?.constants()
}
