//! Countable Markov shifts through finite truncations: Gurevich pressure from
//! periodic-orbit sums, the geometric SGP potential and the representation
//! check as the alphabet grows.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{GFunctionCertificate, LocallyConstant};
use crate::ruelle::{build_transfer_matrix, entropy, equilibrium_measure, integrate, leading_spectrum};
use crate::spectral::{
    eigenvalue_stream, verify_representation, RepresentationCheck, StreamLimit, StreamOrder, TripleConfig,
};
use crate::symbolic::{Alphabet, Symbol, TailPoint};

/// Transition rule on `ℕ × ℕ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionRule {
    /// Every transition allowed.
    Full,
    /// `t(i, j) = 1` iff `j = i - 1` or `i = 0`.
    Renewal,
}

/// A countable topological Markov shift, worked with through truncations
/// `{0, …, M-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountableShift {
    pub rule: TransitionRule,
}

impl CountableShift {
    pub fn full() -> Self {
        Self { rule: TransitionRule::Full }
    }

    pub fn renewal() -> Self {
        Self { rule: TransitionRule::Renewal }
    }

    pub fn allows(&self, i: Symbol, j: Symbol) -> bool {
        match self.rule {
            TransitionRule::Full => true,
            TransitionRule::Renewal => i == 0 || j + 1 == i,
        }
    }

    /// Number of predecessors of `j` inside the truncation at `m`; finite for
    /// both rules at every level, bounded independently of `m` for the renewal shift.
    pub fn predecessors(&self, j: Symbol, m: usize) -> usize {
        (0..m as Symbol).filter(|&i| self.allows(i, j)).count()
    }

    /// The truncated alphabet, rejected unless the truncated matrix is primitive.
    pub fn truncate(&self, m: usize) -> Result<Alphabet> {
        if m < 2 {
            return Err(Error::Domain(format!("truncation level must be >= 2, got {m}")));
        }
        let alphabet = match self.rule {
            TransitionRule::Full => Alphabet::full(m)?,
            TransitionRule::Renewal => Alphabet::with_transition(
                (0..m as Symbol).map(|i| (0..m as Symbol).map(|j| self.allows(i, j) as u8).collect()).collect(),
            )?,
        };
        if mixing_time(&alphabet).is_none() {
            return Err(Error::Admissibility(format!("truncation at {m} is not topologically mixing")));
        }
        Ok(alphabet)
    }
}

/// Smallest `p` with `A^p > 0`, searched up to the Wielandt bound `(m-1)^2 + 1`.
pub fn mixing_time(alphabet: &Alphabet) -> Option<usize> {
    let m = alphabet.size();
    let a: Vec<Vec<bool>> =
        (0..m).map(|i| (0..m).map(|j| alphabet.allows(i as Symbol, j as Symbol)).collect()).collect();
    let mut p = a.clone();
    let bound = (m - 1) * (m - 1) + 1;
    for power in 1..=bound {
        if p.iter().all(|row| row.iter().all(|&b| b)) {
            return Some(power);
        }
        let mut next = vec![vec![false; m]; m];
        for i in 0..m {
            for k in 0..m {
                if p[i][k] {
                    for j in 0..m {
                        next[i][j] |= a[k][j];
                    }
                }
            }
        }
        p = next;
    }
    None
}

/// A potential on the countable shift depending on finitely many coordinates.
pub trait CountablePotential: Send + Sync + fmt::Debug {
    fn depth(&self) -> usize;

    /// Value on any point starting with `prefix` (`prefix.len() == depth`).
    fn value(&self, prefix: &[Symbol]) -> f64;

    /// The restriction to the truncated alphabet.
    fn restrict(&self, alphabet: &Alphabet) -> Result<LocallyConstant> {
        LocallyConstant::from_fn(alphabet, self.depth(), |w| self.value(w))
    }
}

type PrefixFn = dyn Fn(&[Symbol]) -> f64 + Send + Sync;

/// A countable potential given by a closure on prefixes.
#[derive(Clone)]
pub struct CountableFn {
    depth: usize,
    f: Arc<PrefixFn>,
}

impl CountableFn {
    pub fn new(depth: usize, f: impl Fn(&[Symbol]) -> f64 + Send + Sync + 'static) -> Self {
        Self { depth: depth.max(1), f: Arc::new(f) }
    }
}

impl fmt::Debug for CountableFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CountableFn").field("depth", &self.depth).finish_non_exhaustive()
    }
}

impl CountablePotential for CountableFn {
    fn depth(&self) -> usize {
        self.depth
    }

    fn value(&self, prefix: &[Symbol]) -> f64 {
        (self.f)(prefix)
    }
}

/// The normalized geometric family `J(qx) = (1 - e^{-κ}) e^{-κq}`.
///
/// The printed example `e^{-x_1+1}(1-e)^{-1}` has a negative normalizer; this
/// is the sign-corrected version, equal in shape for `κ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricPotential {
    pub kappa: f64,
}

impl GeometricPotential {
    pub fn j(&self, q: Symbol) -> f64 {
        self.value(&[q]).exp()
    }

    /// `Σ_{q<m} J(q) = 1 - e^{-κm}`.
    pub fn truncated_mass(&self, m: usize) -> f64 {
        -(-self.kappa * m as f64).exp_m1()
    }

    /// Entropy of the geometric distribution: `-log(1-e^{-κ}) + κ e^{-κ}/(1-e^{-κ})`.
    pub fn entropy(&self) -> f64 {
        let k = self.kappa;
        -(-(-k).exp_m1()).ln() + k / k.exp_m1()
    }

    /// The potential renormalized within the truncation at `m`.
    pub fn normalized_truncation(&self, m: usize) -> Result<GFunctionCertificate> {
        let alphabet = CountableShift::full().truncate(m)?;
        let log_mass = self.truncated_mass(m).ln();
        GFunctionCertificate::certify(LocallyConstant::from_fn(&alphabet, 1, |w| self.value(w) - log_mass)?)
    }
}

impl CountablePotential for GeometricPotential {
    fn depth(&self) -> usize {
        1
    }

    fn value(&self, prefix: &[Symbol]) -> f64 {
        (-(-self.kappa).exp_m1()).ln() - self.kappa * prefix[0] as f64
    }
}

pub fn sgp_example_potential(kappa: f64) -> Result<GeometricPotential> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    Ok(GeometricPotential { kappa })
}

/// `S_n(x) = arctan(1/x_n) exp(-2κ₁ Σ_{j<n} x_j)`, symbols read as `q + 1`.
pub fn separating_family(n: usize, x: &TailPoint, kappa1: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("separating family is indexed from n = 1".into()));
    }
    let coord = |j: usize| x.symbol(j - 1) as f64 + 1.0;
    let sum: f64 = (1..n).map(coord).sum();
    Ok((1.0 / coord(n)).atan() * (-2.0 * kappa1 * sum).exp())
}

/// Periodic-orbit growth rates through a base symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct GurevichEstimate {
    pub q: Symbol,
    pub truncation: usize,
    /// `(n, (1/n) log Z_n(f, q))` for every `n` with `Z_n > 0`.
    pub values: Vec<(usize, f64)>,
    /// `log Z_n - log Z_{n-1}` on consecutive positive terms.
    pub log_ratios: Vec<(usize, f64)>,
    pub limit: f64,
    /// Size of the last Aitken correction, a proxy for the extrapolation error.
    pub limit_error: f64,
}

/// Weighted block graph: states are admissible words of length `L`, an edge
/// `u → v` when `v` continues `u` by one symbol, weighted `exp f(u)`.
fn block_graph(alphabet: &Alphabet, f: &LocallyConstant) -> (Vec<Vec<Symbol>>, DMatrix<f64>) {
    let len = f.depth().max(1);
    let states: Vec<Vec<Symbol>> = alphabet.words_of_length(len).into_iter().map(|w| w.0).collect();
    let n = states.len();
    let mut w = DMatrix::zeros(n, n);
    for (i, u) in states.iter().enumerate() {
        let weight = f.value(u).exp();
        for (j, v) in states.iter().enumerate() {
            if u[1..] == v[..len - 1] && alphabet.allows(u[len - 1], v[len - 1]) {
                w[(i, j)] = weight;
            }
        }
    }
    (states, w)
}

/// `log Z_n(f, q)` for `n = 1..=n_max` via traces of powers of the block graph
/// (`-∞` when there is no loop of that length).
pub fn log_periodic_sums(alphabet: &Alphabet, f: &LocallyConstant, q: Symbol, n_max: usize) -> Vec<f64> {
    let (states, w) = block_graph(alphabet, f);
    let base: Vec<usize> = (0..states.len()).filter(|&i| states[i][0] == q).collect();
    let mut power = w.clone();
    let mut log_scale = 0.0;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            power = &power * &w;
        }
        let peak = power.amax();
        if peak > 0.0 {
            power /= peak;
            log_scale += peak.ln();
        }
        let trace: f64 = base.iter().map(|&i| power[(i, i)]).sum();
        out.push(if trace > 0.0 { trace.ln() + log_scale } else { f64::NEG_INFINITY });
    }
    out
}

fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let denom = x2 - 2.0 * x1 + x0;
    if denom.abs() <= 1e-14 * (x0.abs() + x1.abs() + x2.abs()).max(1e-300) {
        x2
    } else {
        x2 - (x2 - x1) * (x2 - x1) / denom
    }
}

/// Gurevich pressure of `f` on the truncation at `m`, base symbol `q`.
pub fn gurevich_pressure(
    shift: &CountableShift,
    f: &dyn CountablePotential,
    q: Symbol,
    n_max: usize,
    m: usize,
) -> Result<GurevichEstimate> {
    let alphabet = shift.truncate(m)?;
    alphabet.check_symbol(q)?;
    let local = f.restrict(&alphabet)?;
    gurevich_from_table(&alphabet, &local, q, n_max)
}

/// As [`gurevich_pressure`] for a potential already restricted to a finite alphabet.
pub fn gurevich_from_table(
    alphabet: &Alphabet,
    f: &LocallyConstant,
    q: Symbol,
    n_max: usize,
) -> Result<GurevichEstimate> {
    let logs = log_periodic_sums(alphabet, f, q, n_max);
    let values: Vec<(usize, f64)> =
        logs.iter().enumerate().filter(|(_, v)| v.is_finite()).map(|(i, &v)| (i + 1, v / (i + 1) as f64)).collect();
    if values.is_empty() {
        return Err(Error::UndefinedPressure { symbol: q as usize, n_max });
    }
    let log_ratios: Vec<(usize, f64)> = (1..logs.len())
        .filter(|&i| logs[i].is_finite() && logs[i - 1].is_finite())
        .map(|i| (i + 1, logs[i] - logs[i - 1]))
        .collect();
    let (limit, limit_error) = match log_ratios.len() {
        0 => {
            let &(_, v) = values.last().unwrap();
            (v, f64::INFINITY)
        }
        1 | 2 => {
            let r: Vec<f64> = log_ratios.iter().map(|p| p.1).collect();
            let last = *r.last().unwrap();
            (last, if r.len() == 2 { (r[1] - r[0]).abs() } else { f64::INFINITY })
        }
        l => {
            let r: Vec<f64> = log_ratios.iter().map(|p| p.1).collect();
            let a = aitken(r[l - 3], r[l - 2], r[l - 1]);
            let b = if l >= 4 { aitken(r[l - 4], r[l - 3], r[l - 2]) } else { r[l - 1] };
            (a, (a - b).abs().max((a - r[l - 1]).abs()))
        }
    };
    Ok(GurevichEstimate { q, truncation: alphabet.size(), values, log_ratios, limit, limit_error })
}

/// Hofbauer-type renewal weights: `f(0j…) = log p_j`, `p_j = (j+1)^{-γ}/ζ(γ)`, and
/// `f = 0` off the base symbol. Depth 2.
pub fn renewal_potential(gamma: f64) -> Result<CountableFn> {
    if !(gamma > 1.001) {
        return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    let log_z = crate::special::zeta_value(gamma)?.ln();
    Ok(CountableFn::new(2, move |w| if w[0] == 0 { -gamma * ((w[1] + 1) as f64).ln() - log_z } else { 0.0 }))
}

/// Root `P` of `Σ_{j<m} p_j e^{-P(j+1)} = 1`, the renewal-equation value of
/// the pressure of [`renewal_potential`] truncated at `m`.
pub fn renewal_pressure_root(gamma: f64, m: usize) -> Result<f64> {
    let log_z = crate::special::zeta_value(gamma)?.ln();
    let g = |p: f64| -> f64 {
        (0..m).map(|j| (-gamma * ((j + 1) as f64).ln() - log_z - p * (j + 1) as f64).exp()).sum::<f64>() - 1.0
    };
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One row of the truncation sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationRecord {
    pub truncation: usize,
    /// Gurevich pressure of the geometric potential restricted, not renormalized.
    pub pressure: GurevichEstimate,
    /// Gurevich pressure after renormalizing within the truncation.
    pub normalized_pressure: GurevichEstimate,
    pub entropy: f64,
    pub entropy_closed_form: f64,
    /// `|λ₂| / λ₁` of the truncated operator.
    pub gap_ratio: f64,
    pub check: RepresentationCheck,
}

/// Renormalizes the geometric potential within each truncation and runs the
/// representation check on the resulting full shift.
pub fn truncated_representation_check(
    kappa: f64,
    m_grid: &[usize],
    a: &[(f64, Vec<Symbol>)],
    n: usize,
) -> Result<Vec<TruncationRecord>> {
    let pot = sgp_example_potential(kappa)?;
    m_grid
        .par_iter()
        .map(|&m| {
            let alphabet = CountableShift::full().truncate(m)?;
            let g = pot.normalized_truncation(m)?;
            let obs = LocallyConstant::cylinder_combination(&alphabet, a)?;
            let cfg = TripleConfig::with_defaults(g.clone())?;
            let check = verify_representation(&obs, &cfg, n, obs.depth())?;
            let mu = equilibrium_measure(&g, 1)?;
            let spectrum = leading_spectrum(&build_transfer_matrix(&g.log_j, 1)?, crate::ruelle::DEFAULT_TOL)?;
            let n_max = 64;
            Ok(TruncationRecord {
                truncation: m,
                pressure: gurevich_from_table(&alphabet, &pot.restrict(&alphabet)?, 0, n_max)?,
                normalized_pressure: gurevich_from_table(&alphabet, &g.log_j, 0, n_max)?,
                entropy: entropy(&g, &mu),
                entropy_closed_form: pot.entropy(),
                gap_ratio: spectrum.gap_estimate,
                check,
            })
        })
        .collect()
}

/// Finite-difference smoothness of `t ↦ P(f + t·1_{[q]})` at `t = 0` on a truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessCheck {
    pub step: f64,
    pub pressures: [f64; 3],
    pub derivative: f64,
    /// `μ([q])`, the derivative predicted by the equilibrium state.
    pub predicted_derivative: f64,
    pub second_derivative: f64,
}

pub fn pressure_smoothness(kappa: f64, m: usize, q: Symbol, step: f64) -> Result<SmoothnessCheck> {
    let pot = sgp_example_potential(kappa)?;
    let alphabet = CountableShift::full().truncate(m)?;
    alphabet.check_symbol(q)?;
    let base = pot.restrict(&alphabet)?;
    let bump = LocallyConstant::cylinder_combination(&alphabet, &[(1.0, vec![q])])?;
    let mut pressures = [0.0; 3];
    for (slot, t) in [-step, 0.0, step].into_iter().enumerate() {
        let f = LocallyConstant::from_fn(&alphabet, 1, |w| base.value(w) + t * bump.value(w))?;
        pressures[slot] = gurevich_from_table(&alphabet, &f, 0, 64)?.limit;
    }
    let g = pot.normalized_truncation(m)?;
    let mu = equilibrium_measure(&g, 1)?;
    Ok(SmoothnessCheck {
        step,
        pressures,
        derivative: (pressures[2] - pressures[0]) / (2.0 * step),
        predicted_derivative: integrate(&bump, &mu).value,
        second_derivative: (pressures[2] - 2.0 * pressures[1] + pressures[0]) / (step * step),
    })
}

/// Dirac weights sorted decreasingly, sampled at positions `2^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactnessCheck {
    pub samples: Vec<(usize, f64)>,
    /// Samples strictly decrease and the last one is below `1e-3` of the first.
    pub tends_to_zero: bool,
}

pub fn compactness_check(g: &GFunctionCertificate, n: usize) -> Result<CompactnessCheck> {
    let cfg = TripleConfig::with_defaults(g.clone())?;
    let one = LocallyConstant::constant(g.alphabet(), 1.0);
    let stream = eigenvalue_stream(&one, &cfg, 1.0, StreamLimit::Entries(n), StreamOrder::DecreasingWeight);
    let mut samples = Vec::new();
    let mut pos = 1;
    while pos <= stream.len() {
        samples.push((pos, stream.entries()[pos - 1].weight));
        pos *= 2;
    }
    let decreasing = samples.windows(2).all(|p| p[1].1 <= p[0].1);
    let tends_to_zero = decreasing && samples.len() >= 2 && samples.last().unwrap().1 < 1e-3 * samples[0].1;
    Ok(CompactnessCheck { samples, tends_to_zero })
}
