//! Potentials on shift spaces and the regularity machinery around them.

mod models;
mod regularity;

use std::fmt;
use std::sync::Arc;

pub use models::{
    bernoulli_potential, dyson_potential, hofbauer_potential, CoordinateSeries, DysonPotential, HofbauerPotential,
};
pub use regularity::{
    holder_constant, localize, localize_averaged, variation, walters_check, RegularityReport, TailGrid,
    VariationEstimate,
};

use crate::error::{Error, Result};
use crate::symbolic::{Alphabet, Symbol, TailPoint};

/// Default threshold below which a potential counts as a g-function.
pub const NORMALIZATION_THRESHOLD: f64 = 1e-10;

/// A real function on the shift space, evaluable at preperiodic points.
pub trait Potential: Send + Sync + fmt::Debug {
    fn alphabet(&self) -> &Alphabet;

    fn eval(&self, x: &TailPoint) -> f64;

    /// `Some(k)` when the value only depends on the first `k` coordinates.
    fn depth(&self) -> Option<usize> {
        None
    }

    /// Certified bound on the truncation error of a single `eval`.
    fn tail_bound(&self) -> f64 {
        0.0
    }

    /// Model-specific tails added to the sampling grid for suprema.
    fn extremal_tails(&self) -> Vec<TailPoint> {
        Vec::new()
    }
}

/// A value together with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certified {
    pub value: f64,
    pub abs_error: f64,
}

/// A potential depending on the first `depth` coordinates, stored as a table
/// indexed by the base-`m` code of the prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct LocallyConstant {
    alphabet: Alphabet,
    depth: usize,
    table: Vec<f64>,
    /// Sup-distance to the potential this table approximates (0 when exact).
    approx_error: f64,
}

impl LocallyConstant {
    /// Tabulates `f` on all words of length `depth`. Inadmissible words get `NaN`.
    pub fn from_fn(alphabet: &Alphabet, depth: usize, mut f: impl FnMut(&[Symbol]) -> f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Domain("locally constant depth must be >= 1".into()));
        }
        let m = alphabet.size();
        let len = m
            .checked_pow(depth as u32)
            .filter(|&l| l <= 1 << 26)
            .ok_or_else(|| Error::Domain(format!("table of {m}^{depth} entries is too large")))?;
        let mut table = vec![f64::NAN; len];
        let mut word = vec![0 as Symbol; depth];
        for (code, slot) in table.iter_mut().enumerate() {
            let mut c = code;
            for i in (0..depth).rev() {
                word[i] = (c % m) as Symbol;
                c /= m;
            }
            if alphabet.is_admissible(&word) {
                *slot = f(&word);
            }
        }
        Ok(Self { alphabet: alphabet.clone(), depth, table, approx_error: 0.0 })
    }

    pub fn constant(alphabet: &Alphabet, c: f64) -> Self {
        Self { alphabet: alphabet.clone(), depth: 1, table: vec![c; alphabet.size()], approx_error: 0.0 }
    }

    /// `Σ c_i 1_{[w_i]}` for a list of cylinder indicators with coefficients.
    pub fn cylinder_combination(alphabet: &Alphabet, terms: &[(f64, Vec<Symbol>)]) -> Result<Self> {
        for (_, w) in terms {
            alphabet.check_word(w)?;
        }
        let depth = terms.iter().map(|(_, w)| w.len()).max().unwrap_or(1).max(1);
        Self::from_fn(alphabet, depth, |prefix| {
            terms.iter().filter(|(_, w)| prefix.starts_with(w)).map(|(c, _)| *c).sum()
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn approx_error(&self) -> f64 {
        self.approx_error
    }

    pub fn with_approx_error(mut self, err: f64) -> Self {
        self.approx_error = err;
        self
    }

    pub fn code(&self, prefix: &[Symbol]) -> usize {
        let m = self.alphabet.size();
        prefix[..self.depth].iter().fold(0, |acc, &s| acc * m + s as usize)
    }

    /// Value on the cylinder of the first `depth` symbols of `prefix`.
    pub fn value(&self, prefix: &[Symbol]) -> f64 {
        self.table[self.code(prefix)]
    }

    /// Raw table (inadmissible entries are `NaN`).
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            alphabet: self.alphabet.clone(),
            depth: self.depth,
            table: self.table.iter().map(|v| s * v).collect(),
            approx_error: s.abs() * self.approx_error,
        }
    }

    /// The same function tabulated at a larger depth.
    pub fn deepen(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::Domain(format!("cannot reduce depth {} to {depth}", self.depth)));
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        let mut out = Self::from_fn(&self.alphabet, depth, |w| self.value(w))?;
        out.approx_error = self.approx_error;
        Ok(out)
    }

    /// Sup norm over admissible cylinders.
    pub fn sup_norm(&self) -> f64 {
        self.table.iter().filter(|v| !v.is_nan()).fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.table.iter().filter(|v| !v.is_nan()).fold(f64::INFINITY, |a, &v| a.min(v))
    }
}

impl Potential for LocallyConstant {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn eval(&self, x: &TailPoint) -> f64 {
        self.value(&x.prefix(self.depth))
    }

    fn depth(&self) -> Option<usize> {
        Some(self.depth)
    }

    fn tail_bound(&self) -> f64 {
        0.0
    }
}

/// A potential given by an arbitrary closure.
#[derive(Clone)]
pub struct FnPotential {
    alphabet: Alphabet,
    depth: Option<usize>,
    f: Arc<dyn Fn(&TailPoint) -> f64 + Send + Sync>,
}

impl FnPotential {
    pub fn new(
        alphabet: &Alphabet,
        depth: Option<usize>,
        f: impl Fn(&TailPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { alphabet: alphabet.clone(), depth, f: Arc::new(f) }
    }
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential").field("alphabet", &self.alphabet).field("depth", &self.depth).finish()
    }
}

impl Potential for FnPotential {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn eval(&self, x: &TailPoint) -> f64 {
        (self.f)(x)
    }

    fn depth(&self) -> Option<usize> {
        self.depth
    }
}

/// A normalized potential `log J` together with its measured normalization defect.
#[derive(Clone, Debug, PartialEq)]
pub struct GFunctionCertificate {
    pub log_j: LocallyConstant,
    /// `sup_x |Σ_q J(qx) - 1|`, exact over all cylinders of depth `depth - 1`.
    pub normalization_defect: f64,
}

impl GFunctionCertificate {
    /// Measures the defect and rejects potentials above `NORMALIZATION_THRESHOLD`.
    pub fn certify(log_j: LocallyConstant) -> Result<Self> {
        let defect = normalization_defect(&log_j);
        if !(defect <= NORMALIZATION_THRESHOLD) {
            return Err(Error::NotNormalized { defect, threshold: NORMALIZATION_THRESHOLD });
        }
        Ok(Self { log_j, normalization_defect: defect })
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.log_j.alphabet()
    }

    /// `inf J` over admissible cylinders.
    pub fn inf_j(&self) -> f64 {
        self.log_j.min_value().exp()
    }

    /// `|Σ_q J(qx) - 1|` at a single point.
    pub fn defect_at(&self, x: &TailPoint) -> f64 {
        let a = self.alphabet();
        let first = x.symbol(0);
        let total: f64 =
            a.symbols().filter(|&q| a.allows(q, first)).map(|q| self.log_j.eval(&x.prepend(&[q])).exp()).sum();
        (total - 1.0).abs()
    }
}

/// `sup_x |Σ_q exp(f(qx)) - 1|` for a locally constant `f`, exact.
pub fn normalization_defect(f: &LocallyConstant) -> f64 {
    let a = f.alphabet();
    let tails: Vec<Vec<Symbol>> =
        if f.depth() == 1 { vec![vec![]] } else { a.words_of_length(f.depth() - 1).into_iter().map(|w| w.0).collect() };
    let mut worst: f64 = 0.0;
    for u in &tails {
        let mut total = 0.0;
        for q in a.symbols() {
            if u.first().is_none_or(|&u0| a.allows(q, u0)) {
                let mut w = Vec::with_capacity(f.depth());
                w.push(q);
                w.extend_from_slice(u);
                total += f.value(&w).exp();
            }
        }
        worst = worst.max((total - 1.0).abs());
    }
    worst
}

/// `S_n f(x) = Σ_{k<n} f(σ^k x)`, with the accumulated truncation bound of `f`.
pub fn birkhoff_sum(f: &dyn Potential, x: &TailPoint, n: usize) -> Certified {
    let mut value = 0.0;
    let mut point = x.clone();
    for _ in 0..n {
        value += f.eval(&point);
        point = point.shift();
    }
    Certified { value, abs_error: n as f64 * f.tail_bound() }
}
