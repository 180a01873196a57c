//! Ruelle transfer operators, their finite-rank matrices on cylinder
//! functions, and the spectral data derived from them.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{localize, Certified, GFunctionCertificate, LocallyConstant, Potential};
use crate::symbolic::{Alphabet, Symbol, TailPoint};

/// Residual tolerance used when callers have no preference.
pub const DEFAULT_TOL: f64 = 1e-13;

const MAX_ITERATIONS: usize = 50_000;
const DENSE_LIMIT: usize = 1024;
const PAR_ROWS: usize = 2048;

/// `(𝓛_f φ)(x) = Σ_q e^{f(qx)} φ(qx)` over the admissible preimages of `x`.
pub fn apply_operator(f: &dyn Potential, phi: &dyn Potential, x: &TailPoint) -> f64 {
    let a = f.alphabet();
    let first = x.symbol(0);
    a.symbols()
        .filter(|&q| a.allows(q, first))
        .map(|q| {
            let qx = x.prepend(&[q]);
            f.eval(&qx).exp() * phi.eval(&qx)
        })
        .sum()
}

/// One nonzero entry of a transfer matrix row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    /// The prepended symbol `q`.
    pub symbol: Symbol,
    /// Column index of `(q·u)[..k]`.
    pub col: usize,
    /// `f(q·u)`.
    pub log_weight: f64,
}

/// 𝓛_f restricted to functions of the first `k` coordinates, for `f` of depth at most `k + 1`.
///
/// Row `u` holds one entry per admissible `q`, so `(Mφ)[u] = Σ_q e^{f(qu)} φ[(qu)[..k]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    alphabet: Alphabet,
    depth: usize,
    index: Vec<Vec<Symbol>>,
    /// base-m code → row, `usize::MAX` for inadmissible words
    lookup: Vec<usize>,
    rows: Vec<Vec<Entry>>,
}

fn word_code(m: usize, w: &[Symbol]) -> usize {
    w.iter().fold(0, |acc, &s| acc * m + s as usize)
}

impl TransferMatrix {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Admissible depth-`k` cylinders in lexicographic order.
    pub fn index(&self) -> &[Vec<Symbol>] {
        &self.index
    }

    pub fn rows(&self) -> &[Vec<Entry>] {
        &self.rows
    }

    pub fn position(&self, w: &[Symbol]) -> Option<usize> {
        if w.len() != self.depth || w.iter().any(|&s| s as usize >= self.alphabet.size()) {
            return None;
        }
        let i = self.lookup[word_code(self.alphabet.size(), w)];
        (i != usize::MAX).then_some(i)
    }

    /// `f(q·u)` for the row `u`, if `q` may precede `u`.
    pub fn log_weight(&self, q: Symbol, row: usize) -> Option<f64> {
        self.rows[row].iter().find(|e| e.symbol == q).map(|e| e.log_weight)
    }

    /// `Mφ`.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let row = |r: &Vec<Entry>| r.iter().map(|e| e.log_weight.exp() * phi[e.col]).sum::<f64>();
        if self.rows.len() >= PAR_ROWS {
            self.rows.par_iter().map(row).collect()
        } else {
            self.rows.iter().map(row).collect()
        }
    }

    /// `Mᵀν`, the action on measures.
    pub fn apply_transpose(&self, nu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (u, r) in self.rows.iter().enumerate() {
            for e in r {
                out[e.col] += nu[u] * e.log_weight.exp();
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (u, r) in self.rows.iter().enumerate() {
            for e in r {
                m[(u, e.col)] += e.log_weight.exp();
            }
        }
        m
    }
}

/// Completion of a finite word by the smallest admissible tail.
fn complete(a: &Alphabet, w: &[Symbol]) -> TailPoint {
    a.default_tail(w.last().copied()).prepend(w)
}

/// The transfer matrix of `f` on depth-`k` cylinder functions.
pub fn build_transfer_matrix(f: &dyn Potential, k: usize) -> Result<TransferMatrix> {
    if k == 0 {
        return Err(Error::Domain("transfer matrix depth must be >= 1".into()));
    }
    match f.depth() {
        Some(d) if d <= k + 1 => {}
        Some(d) => return Err(Error::Depth { depth: d, k }),
        None => return Err(Error::Depth { depth: usize::MAX, k }),
    }
    let a = f.alphabet().clone();
    let m = a.size();
    let len = m
        .checked_pow(k as u32)
        .filter(|&l| l <= 1 << 24)
        .ok_or_else(|| Error::Domain(format!("{m}^{k} cylinders is too many")))?;
    let index: Vec<Vec<Symbol>> = a.words_of_length(k).into_iter().map(|w| w.0).collect();
    let mut lookup = vec![usize::MAX; len];
    for (i, w) in index.iter().enumerate() {
        lookup[word_code(m, w)] = i;
    }
    let build_row = |u: &Vec<Symbol>| -> Vec<Entry> {
        let mut qu = Vec::with_capacity(k + 1);
        a.symbols()
            .filter(|&q| a.allows(q, u[0]))
            .map(|q| {
                qu.clear();
                qu.push(q);
                qu.extend_from_slice(u);
                Entry { symbol: q, col: lookup[word_code(m, &qu[..k])], log_weight: f.eval(&complete(&a, &qu)) }
            })
            .collect()
    };
    let rows: Vec<Vec<Entry>> = if index.len() >= PAR_ROWS {
        index.par_iter().map(build_row).collect()
    } else {
        index.iter().map(build_row).collect()
    };
    Ok(TransferMatrix { alphabet: a, depth: k, index, lookup, rows })
}

/// Leading eigendata of a transfer matrix.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub lambda: f64,
    pub pressure: f64,
    /// Right eigenvector, positive, scaled so that `Σ h ν = 1`.
    pub h: Vec<f64>,
    /// Left eigenvector, the eigenmeasure on depth-`k` cylinders, summing to 1.
    pub nu: Vec<f64>,
    /// `μ[u] = h[u] ν[u]`.
    pub mu: Vec<f64>,
    /// `max(|Mh - λh|/λ|h|, |Mᵀν - λν|/λ|ν|)` in the sup norm.
    pub residual: f64,
    /// Estimated `|λ₂| / λ`.
    pub gap_estimate: f64,
    pub iterations: usize,
    pub matrix: TransferMatrix,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn eigen_residual(mv: &[f64], v: &[f64], lambda: f64) -> f64 {
    let r = mv.iter().zip(v).fold(0.0f64, |a, (x, y)| a.max((x - lambda * y).abs()));
    r / (lambda * sup(v))
}

struct PowerResult {
    lambda: f64,
    vector: Vec<f64>,
    residual: f64,
    ratio: f64,
    iterations: usize,
}

/// Positive power iteration. Averaging `M` with the identity removes
/// periodicity without moving the Perron vector.
fn power_iterate(apply: impl Fn(&[f64]) -> Vec<f64>, n: usize, tol: f64, cap: usize) -> PowerResult {
    let mut v = vec![1.0 / n as f64; n];
    let mut prev_step = f64::NAN;
    let mut ratio = 0.0;
    let mut residual = f64::INFINITY;
    let mut lambda = 0.0;
    for it in 1..=cap {
        let mv = apply(&v);
        let sv: f64 = v.iter().sum();
        lambda = mv.iter().sum::<f64>() / sv;
        residual = eigen_residual(&mv, &v, lambda);
        if residual < tol {
            return PowerResult { lambda, vector: v, residual, ratio, iterations: it };
        }
        let next: Vec<f64> = mv.iter().zip(&v).map(|(a, b)| 0.5 * (a / lambda + b)).collect();
        let total: f64 = next.iter().sum();
        let next: Vec<f64> = next.into_iter().map(|x| x / total).collect();
        let step = next.iter().zip(&v).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        if prev_step.is_finite() && prev_step > 0.0 && step > 0.0 {
            // contraction of the damped map is (1 + λ₂/λ)/2 along the slowest direction
            ratio = (2.0 * step / prev_step - 1.0).abs().min(1.0);
        }
        prev_step = step;
        v = next;
    }
    PowerResult { lambda, vector: v, residual, ratio, iterations: cap }
}

fn dense_perron(m: &DMatrix<f64>) -> Option<(f64, f64, Vec<f64>, Vec<f64>)> {
    let eig = m.complex_eigenvalues();
    let mut mods: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let lambda =
        eig.iter().filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1.0)).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !(lambda > 0.0) {
        return None;
    }
    let second = mods.get(1).copied().unwrap_or(0.0) / lambda;
    let n = m.nrows();
    let shift = lambda * (1.0 + 1e-10);
    let inverse_iterate = |mat: &DMatrix<f64>| -> Option<Vec<f64>> {
        let shifted = mat - DMatrix::identity(n, n) * shift;
        let lu = shifted.lu();
        let mut v = nalgebra::DVector::from_element(n, 1.0);
        for _ in 0..4 {
            v = lu.solve(&v)?;
            let s = v.iter().sum::<f64>();
            v /= s;
        }
        Some(v.iter().map(|x| x.abs()).collect())
    };
    let h = inverse_iterate(m)?;
    let nu = inverse_iterate(&m.transpose())?;
    Some((lambda, second, h, nu))
}

/// Perron eigendata of `M` by power iteration, falling back to a dense
/// solver for small matrices that iterate slowly.
pub fn leading_spectrum(m: &TransferMatrix, tol: f64) -> Result<SpectralData> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Domain("empty transfer matrix".into()));
    }
    let cap = if n <= DENSE_LIMIT { 5_000 } else { MAX_ITERATIONS };
    let right = power_iterate(|v| m.apply(v), n, tol, cap);
    let left = power_iterate(|v| m.apply_transpose(v), n, tol, cap);
    let iterations = right.iterations.max(left.iterations);

    let (lambda, gap, h, nu) = if right.residual < tol && left.residual < tol {
        (right.lambda, right.ratio, right.vector, left.vector)
    } else if n <= DENSE_LIMIT {
        let dense = m.to_dense();
        let (_, gap, h, nu) = dense_perron(&dense)
            .ok_or(Error::Convergence { iterations, residual: right.residual.max(left.residual) })?;
        let mh = m.apply(&h);
        let lambda = mh.iter().sum::<f64>() / h.iter().sum::<f64>();
        (lambda, gap, h, nu)
    } else {
        return Err(Error::Convergence { iterations, residual: right.residual.max(left.residual) });
    };

    let total_nu: f64 = nu.iter().sum();
    let nu: Vec<f64> = nu.iter().map(|x| x / total_nu).collect();
    let pairing: f64 = h.iter().zip(&nu).map(|(a, b)| a * b).sum();
    let h: Vec<f64> = h.iter().map(|x| x / pairing).collect();
    let mu: Vec<f64> = h.iter().zip(&nu).map(|(a, b)| a * b).collect();
    let residual = eigen_residual(&m.apply(&h), &h, lambda).max(eigen_residual(&m.apply_transpose(&nu), &nu, lambda));
    if !(residual < tol.max(1e-12)) {
        return Err(Error::Convergence { iterations, residual });
    }
    Ok(SpectralData {
        lambda,
        pressure: lambda.ln(),
        h,
        nu,
        mu,
        residual,
        gap_estimate: gap,
        iterations,
        matrix: m.clone(),
    })
}

impl SpectralData {
    pub fn depth(&self) -> usize {
        self.matrix.depth()
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.matrix.alphabet()
    }

    /// `ν([w])` for any admissible word, using the eigenmeasure relation
    /// `ν([w]) = λ^{-n} e^{S_n f(w…)} ν([w_{n+1} … w_{n+k}])` when `|w| = n + k`.
    pub fn nu_mass(&self, w: &[Symbol]) -> f64 {
        let k = self.depth();
        if w.len() <= k {
            return self.sum_extensions(w, &self.nu);
        }
        let n = w.len() - k;
        let mut log_mass = -(n as f64) * self.lambda.ln();
        for i in 0..n {
            let Some(row) = self.matrix.position(&w[i + 1..i + 1 + k]) else { return 0.0 };
            match self.matrix.log_weight(w[i], row) {
                Some(lw) => log_mass += lw,
                None => return 0.0,
            }
        }
        match self.matrix.position(&w[n..]) {
            Some(tail) => log_mass.exp() * self.nu[tail],
            None => 0.0,
        }
    }

    /// `μ([w]) = ∫_{[w]} h dν`.
    pub fn cylinder_mass(&self, w: &[Symbol]) -> f64 {
        let k = self.depth();
        if w.len() <= k {
            return self.sum_extensions(w, &self.mu);
        }
        match self.matrix.position(&w[..k]) {
            Some(head) => self.h[head] * self.nu_mass(w),
            None => 0.0,
        }
    }

    fn sum_extensions(&self, w: &[Symbol], weights: &[f64]) -> f64 {
        self.matrix.index().iter().zip(weights).filter(|(u, _)| u.starts_with(w)).map(|(_, x)| x).sum()
    }

    /// `max_w |μ[w] - Σ_q μ[qw]|` over words of length `k - 1`.
    pub fn shift_invariance_defect(&self) -> f64 {
        let k = self.depth();
        let a = self.alphabet();
        let words: Vec<Vec<Symbol>> =
            if k == 1 { vec![vec![]] } else { a.words_of_length(k - 1).into_iter().map(|w| w.0).collect() };
        words
            .iter()
            .map(|w| {
                let direct = self.cylinder_mass(w);
                let pre: f64 = a
                    .symbols()
                    .filter(|&q| w.first().is_none_or(|&w0| a.allows(q, w0)))
                    .map(|q| {
                        let mut qw = vec![q];
                        qw.extend_from_slice(w);
                        self.cylinder_mass(&qw)
                    })
                    .sum();
                (direct - pre).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Topological pressure with a bracket accounting for localization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `log λ` of the depth-`k` matrix. Potentials deeper than `k + 1` are first
/// replaced by a depth-`(k+1)` approximant; `|P(f) - P(g)| ≤ ‖f - g‖_∞` gives the bracket.
pub fn pressure(f: &dyn Potential, k: usize) -> Result<PressureEstimate> {
    let (m, err) = match f.depth() {
        Some(d) if d <= k + 1 => (build_transfer_matrix(f, k)?, 0.0),
        _ => {
            let anchor = f.alphabet().default_tail(None);
            let g = localize(f, k + 1, &anchor)?;
            let err = g.approx_error();
            (build_transfer_matrix(&g, k)?, err)
        }
    };
    let data = leading_spectrum(&m, DEFAULT_TOL)?;
    let slack = err + data.residual;
    Ok(PressureEstimate { value: data.pressure, lower: data.pressure - slack, upper: data.pressure + slack })
}

/// `log J = f + log h - log h∘σ - log λ` at depth `k + 1`.
pub fn normalize(f: &dyn Potential, k: usize) -> Result<GFunctionCertificate> {
    let (g, err) = match f.depth() {
        Some(d) if d <= k + 1 => (None, 0.0),
        _ => {
            let anchor = f.alphabet().default_tail(None);
            let g = localize(f, k + 1, &anchor)?;
            let err = g.approx_error();
            (Some(g), err)
        }
    };
    let source: &dyn Potential = match &g {
        Some(g) => g,
        None => f,
    };
    let m = build_transfer_matrix(source, k)?;
    let data = leading_spectrum(&m, DEFAULT_TOL)?;
    let log_lambda = data.lambda.ln();
    let log_j = LocallyConstant::from_fn(source.alphabet(), k + 1, |qu| {
        let row = m.position(&qu[1..]).expect("admissible");
        let col = m.position(&qu[..k]).expect("admissible");
        let fw = m.log_weight(qu[0], row).expect("admissible");
        fw + data.h[col].ln() - data.h[row].ln() - log_lambda
    })?;
    // divide out what the eigenvector residual leaves in Σ_q J(qu)
    let alphabet = source.alphabet().clone();
    let log_j = LocallyConstant::from_fn(&alphabet, k + 1, |qu| {
        let mut pre = qu.to_vec();
        let total: f64 = alphabet
            .symbols()
            .filter(|&q| qu.len() < 2 || alphabet.allows(q, qu[1]))
            .map(|q| {
                pre[0] = q;
                log_j.value(&pre).exp()
            })
            .sum();
        log_j.value(qu) - total.ln()
    })?
    .with_approx_error(2.0 * err);
    GFunctionCertificate::certify(log_j)
}

/// Equilibrium (g-)measure of a certified g-function on depth-`k` cylinders.
pub fn equilibrium_measure(g: &GFunctionCertificate, k: usize) -> Result<SpectralData> {
    let m = build_transfer_matrix(&g.log_j, k)?;
    leading_spectrum(&m, DEFAULT_TOL)
}

/// `∫ a dμ` for a locally constant observable, exact up to the observable's own approximation error.
pub fn integrate(a: &LocallyConstant, mu: &SpectralData) -> Certified {
    let words = a.alphabet().words_of_length(a.depth());
    let value = words.iter().map(|w| a.value(w.symbols()) * mu.cylinder_mass(w.symbols())).sum();
    Certified { value, abs_error: a.approx_error() + mu.residual * a.sup_norm() }
}

/// `h_μ(σ) = -∫ log J dμ`.
pub fn entropy(g: &GFunctionCertificate, mu: &SpectralData) -> f64 {
    -integrate(&g.log_j, mu).value
}
