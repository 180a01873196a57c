//! Built-in model potentials.

use super::{GFunctionCertificate, LocallyConstant, Potential};
use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, zeta_value};
use crate::symbolic::{Alphabet, Symbol, TailPoint};

/// Depth-1 `log J = log p_{x_1}` of the Bernoulli measure with weights `p`.
pub fn bernoulli_potential(p: &[f64]) -> Result<GFunctionCertificate> {
    if p.len() < 2 {
        return Err(Error::Domain("need at least two probabilities".into()));
    }
    if p.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("probabilities must be strictly positive, got {p:?}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
    }
    let alphabet = Alphabet::full(p.len())?;
    let log_j = LocallyConstant::from_fn(&alphabet, 1, |w| p[w[0] as usize].ln())?;
    GFunctionCertificate::certify(log_j)
}

fn spin(s: Symbol) -> f64 {
    2.0 * s as f64 - 1.0
}

/// The Dyson long-range potential `f(x) = x_1 Σ_{n≥2} x_n / (n-1)^α` on spins
/// `{-1, +1}`, encoded as symbols `{0, 1}` via `s ↦ 2s - 1`.
///
/// The periodic tail of a point is summed exactly with Hurwitz zeta values,
/// so `tail_bound` is the Euler–Maclaurin remainder rather than a truncation.
#[derive(Clone, Debug)]
pub struct DysonPotential {
    alphabet: Alphabet,
    alpha: f64,
    tol: f64,
}

pub fn dyson_potential(alpha: f64, truncation_tol: f64) -> Result<DysonPotential> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Divergence(format!("Dyson interaction needs alpha > 1, got {alpha}")));
    }
    if !(truncation_tol > 0.0) {
        return Err(Error::Domain(format!("truncation tolerance must be positive, got {truncation_tol}")));
    }
    Ok(DysonPotential { alphabet: Alphabet::full(2)?, alpha, tol: truncation_tol })
}

impl DysonPotential {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn eval_with_bound(&self, x: &TailPoint) -> (f64, f64) {
        // make sure x_1 sits in the preperiod so the periodic part starts at n >= 2
        let (pre, period) = if x.preperiod().is_empty() {
            let mut per = x.period().to_vec();
            let first = per[0];
            per.rotate_left(1);
            (vec![first], per)
        } else {
            (x.preperiod().to_vec(), x.period().to_vec())
        };
        let x1 = spin(pre[0]);
        let mut sum = 0.0;
        for (i, &s) in pre.iter().enumerate().skip(1) {
            // coordinate n = i + 1 has weight (n - 1)^{-α} = i^{-α}
            sum += spin(s) * (i as f64).powf(-self.alpha);
        }
        let p = period.len() as f64;
        let n0 = pre.len() + 1;
        let mut bound = 0.0;
        let scale = p.powf(-self.alpha);
        for (r, &s) in period.iter().enumerate() {
            let q = (n0 - 1 + r) as f64 / p;
            let h = hurwitz_zeta(self.alpha, q, self.tol / period.len() as f64)
                .expect("alpha > 1 and q > 0 by construction");
            sum += spin(s) * scale * h.value;
            bound += scale * h.abs_error;
        }
        (x1 * sum, bound)
    }

    /// `sup |f(x) - f(y)|` over `x, y` sharing `n` coordinates, `2 Σ_{k>n} (k-1)^{-α}`.
    pub fn analytic_variation(&self, n: usize) -> f64 {
        if n == 0 {
            return 2.0 * self.sup_bound();
        }
        2.0 * hurwitz_zeta(self.alpha, n as f64, 1e-15).map(|v| v.value).unwrap_or(f64::NAN)
    }

    /// `sup |f| = ζ(α)`.
    pub fn sup_bound(&self) -> f64 {
        hurwitz_zeta(self.alpha, 1.0, 1e-15).map(|v| v.value).unwrap_or(f64::NAN)
    }
}

impl Potential for DysonPotential {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn eval(&self, x: &TailPoint) -> f64 {
        self.eval_with_bound(x).0
    }

    fn tail_bound(&self) -> f64 {
        self.tol
    }

    fn extremal_tails(&self) -> Vec<TailPoint> {
        vec![TailPoint::constant(0), TailPoint::constant(1)]
    }
}

/// The Hofbauer potential on `{0,1}`: `-log ζ(γ)` on `[0]`, `-γ log((k+1)/k)` on
/// `C_k = [1^k 0]`, and `0` at `(1,1,1,…)`.
#[derive(Clone, Debug)]
pub struct HofbauerPotential {
    alphabet: Alphabet,
    gamma: f64,
    log_zeta_gamma: f64,
}

/// Hofbauer potential for `γ > 2`. Values in `(1, 2]` are accepted with a warning.
pub fn hofbauer_potential(gamma: f64) -> Result<HofbauerPotential> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("Hofbauer potential needs gamma > 1, got {gamma}")));
    }
    if gamma <= 2.0 {
        log::warn!("Hofbauer potential with gamma = {gamma} <= 2: outside the standing assumption gamma > 2");
    }
    let log_zeta_gamma = zeta_value(gamma)?.ln();
    Ok(HofbauerPotential { alphabet: Alphabet::full(2)?, gamma, log_zeta_gamma })
}

impl HofbauerPotential {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of leading ones, `None` for the all-ones point.
    pub fn leading_ones(x: &TailPoint) -> Option<usize> {
        if x.is_constant(1) {
            return None;
        }
        let horizon = x.preperiod().len() + x.period().len();
        (0..horizon).find(|&i| x.symbol(i) == 0)
    }

    /// Value on `C_k` (`k = 0` is the cylinder `[0]`).
    pub fn value_on(&self, k: usize) -> f64 {
        if k == 0 {
            -self.log_zeta_gamma
        } else {
            -self.gamma * ((k as f64 + 1.0) / k as f64).ln()
        }
    }
}

impl Potential for HofbauerPotential {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn eval(&self, x: &TailPoint) -> f64 {
        match Self::leading_ones(x) {
            None => 0.0,
            Some(k) => self.value_on(k),
        }
    }

    fn extremal_tails(&self) -> Vec<TailPoint> {
        vec![TailPoint::constant(1), TailPoint::constant(0)]
    }
}

/// The observable `a(z) = Σ_{k≥1} r^k z_k`, with symbols read as numbers.
#[derive(Clone, Debug)]
pub struct CoordinateSeries {
    alphabet: Alphabet,
    ratio: f64,
}

impl CoordinateSeries {
    pub fn new(alphabet: &Alphabet, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Domain(format!("ratio must lie in (0,1), got {ratio}")));
        }
        Ok(Self { alphabet: alphabet.clone(), ratio })
    }
}

impl Potential for CoordinateSeries {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn eval(&self, x: &TailPoint) -> f64 {
        let r = self.ratio;
        let mut sum = 0.0;
        let mut w = 1.0;
        for &s in x.preperiod() {
            w *= r;
            sum += w * s as f64;
        }
        let period = x.period();
        let mut block = 0.0;
        let mut v = 1.0;
        for &s in period {
            v *= r;
            block += v * s as f64;
        }
        sum + w * block / (1.0 - r.powi(period.len() as i32))
    }
}
