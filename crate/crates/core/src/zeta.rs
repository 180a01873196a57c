//! Dynamical zeta functions `ζ₊`, `ζ₋`, the residue `lim_{s→1⁺} (s-1) ζ(s)`
//! and its comparison with Dixmier-trace estimates.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{localize_averaged, GFunctionCertificate, LocallyConstant, Potential};
use crate::ruelle::{build_transfer_matrix, leading_spectrum, normalize, TransferMatrix, DEFAULT_TOL};
use crate::spectral::{
    dixmier_estimate, eigenvalue_stream, verify_representation, DixmierEstimate, RepresentationCheck, StreamLimit,
    StreamOrder, TripleConfig,
};
use crate::symbolic::{Symbol, TailPoint};

/// Largest matrix the resolvent method factorizes densely.
const RESOLVENT_LIMIT: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ZetaMethod {
    /// `Σ_{k ≤ k_max} 𝓛^k a(x)` by matrix powers, with a geometric tail bound.
    OperatorPower,
    /// `e_xᵀ (I - M)^{-1} M a`, the full series in one linear solve.
    Resolvent,
    /// Geometric-series closed form, for depth-one (Bernoulli) `J` only.
    ClosedForm,
    /// Direct enumeration of words of length at most `k_max`.
    WordSum,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaEvaluation {
    pub s: f64,
    pub value: f64,
    pub k_max: usize,
    pub tail_bound: f64,
    pub method: ZetaMethod,
    /// `P(s log J)`.
    pub pressure: f64,
    /// Estimated `|λ₂/λ₁|` of `𝓛_{s log J}`.
    pub gap_estimate: f64,
}

/// A normalized `J`, an observable and the anchors, fixed across `s`.
#[derive(Clone, Debug)]
pub struct ZetaSetup {
    pub g: GFunctionCertificate,
    pub a: LocallyConstant,
    pub x: TailPoint,
    pub y: TailPoint,
    /// Cylinder depth of the transfer matrix.
    pub depth: usize,
}

struct Operator {
    matrix: TransferMatrix,
    lambda: f64,
    /// `max h / min h`
    distortion: f64,
    gap: f64,
    a: Vec<f64>,
    row: usize,
}

impl ZetaSetup {
    pub fn new(g: GFunctionCertificate, a: LocallyConstant, x: TailPoint, y: TailPoint, depth: usize) -> Result<Self> {
        g.alphabet().check_point(&x)?;
        g.alphabet().check_point(&y)?;
        if a.alphabet() != g.alphabet() {
            return Err(Error::Domain("observable and g-function live on different alphabets".into()));
        }
        let depth = depth.max(a.depth()).max(g.log_j.depth().saturating_sub(1)).max(1);
        Ok(Self { g, a, x, y, depth })
    }

    fn operator(&self, s: f64) -> Result<Operator> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Domain(format!("s must be positive, got {s}")));
        }
        let f = self.g.log_j.scaled(s);
        let matrix = build_transfer_matrix(&f, self.depth)?;
        let data = leading_spectrum(&matrix, DEFAULT_TOL)?;
        if data.pressure >= 0.0 {
            return Err(Error::Divergence(format!(
                "P(s log J) = {} >= 0 at s = {s}: at or below the abscissa of convergence",
                data.pressure
            )));
        }
        let hmax = data.h.iter().cloned().fold(0.0, f64::max);
        let hmin = data.h.iter().cloned().fold(f64::INFINITY, f64::min);
        let a = self.a.deepen(self.depth)?;
        let avec: Vec<f64> = matrix.index().iter().map(|w| a.value(w)).collect();
        let row = matrix.position(&self.x.prefix(self.depth)).expect("anchor is admissible");
        Ok(Operator { lambda: data.lambda, distortion: hmax / hmin, gap: data.gap_estimate, a: avec, row, matrix })
    }

    /// `ζ₊(s) = Σ_{k≥1} 𝓛^k_{s log J}(a)(x)`.
    pub fn plus(&self, s: f64, method: ZetaMethod, k_max: usize) -> Result<ZetaEvaluation> {
        match method {
            ZetaMethod::ClosedForm => self.closed_form(s, &self.x),
            ZetaMethod::WordSum => self.word_sum(s, &self.x, k_max),
            ZetaMethod::OperatorPower | ZetaMethod::Resolvent => {
                let op = self.operator(s)?;
                let sup_a = self.a.sup_norm();
                let (value, tail_bound, k_used) = if method == ZetaMethod::OperatorPower {
                    let mut v = op.a.clone();
                    let mut sum = 0.0;
                    for _ in 0..k_max {
                        v = op.matrix.apply(&v);
                        sum += v[op.row];
                    }
                    let tail = sup_a * op.distortion * op.lambda.powi(k_max as i32 + 1) / (1.0 - op.lambda);
                    let rounding = 2.0 * k_max as f64 * f64::EPSILON * (sum.abs() + sup_a);
                    (sum, tail + rounding, k_max)
                } else {
                    let (value, bound) = resolvent(&op, sup_a)?;
                    (value, bound, usize::MAX)
                };
                Ok(ZetaEvaluation {
                    s,
                    value,
                    k_max: k_used,
                    tail_bound,
                    method,
                    pressure: op.lambda.ln(),
                    gap_estimate: op.gap,
                })
            }
        }
    }

    /// `ζ₋(s) = Σ_w a(wy) 𝕁(wx)^s`, computed as `ζ₊` plus the finitely many
    /// words shorter than the depth of `a`, where `a(wy)` and `a(wx)` can differ.
    pub fn minus(&self, s: f64, method: ZetaMethod, k_max: usize) -> Result<ZetaEvaluation> {
        if method == ZetaMethod::WordSum {
            return self.word_sum(s, &self.y, k_max);
        }
        let mut base = self.plus(s, method, k_max)?;
        base.value += self.branch_correction(s);
        Ok(base)
    }

    /// `ζ(s) = ζ₊(s) + ζ₋(s)`.
    pub fn total(&self, s: f64, method: ZetaMethod, k_max: usize) -> Result<ZetaEvaluation> {
        let plus = self.plus(s, method, k_max)?;
        let mut out = plus;
        out.value = 2.0 * plus.value + self.branch_correction(s);
        out.tail_bound = 2.0 * plus.tail_bound;
        Ok(out)
    }

    fn log_weight(&self, w: &[Symbol], x: &TailPoint) -> f64 {
        let d = self.g.log_j.depth();
        let mut buf = w.to_vec();
        buf.extend(x.prefix(d));
        (0..w.len()).map(|i| self.g.log_j.value(&buf[i..i + d])).sum()
    }

    fn a_at(&self, w: &[Symbol], x: &TailPoint) -> f64 {
        let mut buf = w.to_vec();
        buf.extend(x.prefix(self.a.depth()));
        self.a.value(&buf)
    }

    fn branch_correction(&self, s: f64) -> f64 {
        let alphabet = self.g.alphabet();
        let mut total = 0.0;
        for n in 1..self.a.depth() {
            for w in alphabet.words_of_length(n) {
                let w = w.symbols();
                let diff = self.a_at(w, &self.y) - self.a_at(w, &self.x);
                if diff != 0.0 {
                    total += diff * (s * self.log_weight(w, &self.x)).exp();
                }
            }
        }
        total
    }

    fn word_sum(&self, s: f64, branch: &TailPoint, k_max: usize) -> Result<ZetaEvaluation> {
        if k_max > 24 {
            return Err(Error::Domain(format!("word sums are an oracle for short words; k_max = {k_max}")));
        }
        let alphabet = self.g.alphabet();
        let mut value = 0.0;
        for n in 1..=k_max {
            for w in alphabet.words_of_length(n) {
                let w = w.symbols();
                value += self.a_at(w, branch) * (s * self.log_weight(w, &self.x)).exp();
            }
        }
        let op = self.operator(s)?;
        let tail = self.a.sup_norm() * op.distortion * op.lambda.powi(k_max as i32 + 1) / (1.0 - op.lambda);
        Ok(ZetaEvaluation {
            s,
            value,
            k_max,
            tail_bound: tail,
            method: ZetaMethod::WordSum,
            pressure: op.lambda.ln(),
            gap_estimate: op.gap,
        })
    }

    fn closed_form(&self, s: f64, branch: &TailPoint) -> Result<ZetaEvaluation> {
        if self.g.log_j.depth() != 1 {
            return Err(Error::Domain("the closed form needs a depth-one J".into()));
        }
        let alphabet = self.g.alphabet();
        let ps: Vec<f64> = alphabet.symbols().map(|q| (s * self.g.log_j.value(&[q])).exp()).collect();
        let f: f64 = ps.iter().sum();
        if f >= 1.0 {
            return Err(Error::Divergence(format!("Σ p^s = {f} >= 1 at s = {s}")));
        }
        let d = self.a.depth();
        let mut value = 0.0;
        for n in 1..d {
            for w in alphabet.words_of_length(n) {
                let w = w.symbols();
                let weight: f64 = w.iter().map(|&q| ps[q as usize]).product();
                value += self.a_at(w, branch) * weight;
            }
        }
        // words of length k >= d contribute (Σ_u a(u) p_u^s) f^{k-d}
        let head: f64 = alphabet
            .words_of_length(d)
            .iter()
            .map(|u| self.a.value(u.symbols()) * u.symbols().iter().map(|&q| ps[q as usize]).product::<f64>())
            .sum();
        value += head / (1.0 - f);
        Ok(ZetaEvaluation {
            s,
            value,
            k_max: usize::MAX,
            tail_bound: 0.0,
            method: ZetaMethod::ClosedForm,
            pressure: f.ln(),
            gap_estimate: 0.0,
        })
    }
}

/// Solves `(I - M) z = M a` and bounds the error through the residual,
/// using `‖(I - M)^{-1}‖_∞ ≤ (max h / min h) / (1 - λ)`.
fn resolvent(op: &Operator, sup_a: f64) -> Result<(f64, f64)> {
    let n = op.matrix.dim();
    if n > RESOLVENT_LIMIT {
        return Err(Error::Domain(format!("resolvent needs a dense {n}x{n} solve; use operator powers")));
    }
    let dense = op.matrix.to_dense();
    let ma = DVector::from_vec(op.matrix.apply(&op.a));
    let system = DMatrix::identity(n, n) - &dense;
    let z = system.clone().lu().solve(&ma).ok_or_else(|| Error::Divergence("I - M is singular".into()))?;
    let residual = (&system * &z - &ma).amax();
    let inverse_norm = op.distortion / (1.0 - op.lambda);
    let rounding = 1e-15 * inverse_norm * sup_a;
    Ok((z[op.row], inverse_norm * residual + rounding))
}

/// `ζ₊` by operator powers.
pub fn zeta_plus(
    a: &LocallyConstant,
    g: &GFunctionCertificate,
    s: f64,
    x: &TailPoint,
    k_max: usize,
    depth: usize,
) -> Result<ZetaEvaluation> {
    ZetaSetup::new(g.clone(), a.clone(), x.clone(), x.clone(), depth)?.plus(s, ZetaMethod::OperatorPower, k_max)
}

/// `ζ₋` by operator powers.
pub fn zeta_minus(
    a: &LocallyConstant,
    g: &GFunctionCertificate,
    s: f64,
    x: &TailPoint,
    y: &TailPoint,
    k_max: usize,
    depth: usize,
) -> Result<ZetaEvaluation> {
    ZetaSetup::new(g.clone(), a.clone(), x.clone(), y.clone(), depth)?.minus(s, ZetaMethod::OperatorPower, k_max)
}

/// `s_j = 1 + 2^{-j}` for `j` in `lo..=hi`.
pub fn dyadic_grid(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|j| 1.0 + 2f64.powi(-(j as i32))).collect()
}

/// The default grid `1 + 2^{-j}`, `j = 3, …, 14`.
pub fn default_s_grid() -> Vec<f64> {
    dyadic_grid(3, 14)
}

pub const DEFAULT_EXTRAPOLATION_ORDER: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct LimitResult {
    pub limit: f64,
    pub s_grid: Vec<f64>,
    /// `(s - 1) ζ(s)` on the grid.
    pub products: Vec<f64>,
    pub extrapolation_order: usize,
    /// Difference between the last two extrapolated values.
    pub residual: f64,
}

/// Polynomial (Neville) extrapolation to `e = 0` through the given points.
fn neville_at_zero(e: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (ei, ej) = (e[i], e[i + level]);
            p[i] = (ej * p[i] - ei * p[i + 1]) / (ej - ei);
        }
    }
    p[0]
}

/// `lim_{s→1⁺} (s-1) ζ(s)` by Richardson extrapolation in `s - 1` over a
/// grid decreasing to 1. Evaluations run in parallel.
pub fn limit_s_to_1<F>(evaluator: F, s_grid: &[f64], order: usize) -> Result<LimitResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if s_grid.len() < order + 2 {
        return Err(Error::Domain(format!("need at least {} grid points for order {order}", order + 2)));
    }
    if s_grid.iter().any(|&s| !(s > 1.0)) || s_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("s grid must decrease strictly towards 1 from above".into()));
    }
    let values: Vec<Result<f64>> = s_grid.par_iter().map(|&s| evaluator(s)).collect();
    let mut products = Vec::with_capacity(s_grid.len());
    for (s, v) in s_grid.iter().zip(values) {
        let v = v.map_err(|e| match e {
            Error::Divergence(msg) => Error::AbscissaMismatch(format!("evaluation failed at s = {s}: {msg}")),
            other => other,
        })?;
        let p = (s - 1.0) * v;
        if !p.is_finite() {
            return Err(Error::AbscissaMismatch(format!("(s-1) zeta(s) is not finite at s = {s}")));
        }
        products.push(p);
    }
    // a simple pole gives a smooth product whose increments shrink with s - 1
    let incr: Vec<f64> = products.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = products.iter().fold(1.0f64, |a, p| a.max(p.abs()));
    if incr.len() >= 3 {
        let k = incr.len();
        let growing = incr[k - 1] > 0.75 * incr[k - 2] && incr[k - 2] > 0.75 * incr[k - 3];
        if growing && incr[k - 1] > 1e-6 * scale {
            return Err(Error::AbscissaMismatch(format!(
                "(s-1) zeta(s) keeps moving near s = 1 (last increments {:.3e}, {:.3e}): the pole is not simple at s = 1",
                incr[k - 2],
                incr[k - 1]
            )));
        }
    }
    let eps: Vec<f64> = s_grid.iter().map(|s| s - 1.0).collect();
    let n = eps.len();
    let w = order + 1;
    let last = neville_at_zero(&eps[n - w..], &products[n - w..]);
    let prev = neville_at_zero(&eps[n - w - 1..n - 1], &products[n - w - 1..n - 1]);
    Ok(LimitResult {
        limit: last,
        s_grid: s_grid.to_vec(),
        products,
        extrapolation_order: order,
        residual: (last - prev).abs(),
    })
}

/// `lim (s-1) ζ_±(s)` for a setup, using the resolvent.
pub fn residue(setup: &ZetaSetup, branch_minus: bool, s_grid: &[f64], order: usize) -> Result<LimitResult> {
    limit_s_to_1(
        |s| {
            if branch_minus {
                setup.minus(s, ZetaMethod::Resolvent, 0).map(|z| z.value)
            } else {
                setup.plus(s, ZetaMethod::Resolvent, 0).map(|z| z.value)
            }
        },
        s_grid,
        order,
    )
}

/// Residue of `ζ = ζ₊ + ζ₋` next to the Dixmier estimate of `L_a D^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TauberianRecord {
    pub plus: LimitResult,
    pub minus: LimitResult,
    pub zeta_limit: f64,
    pub estimate: DixmierEstimate,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

pub fn tauberian_bridge(a: &LocallyConstant, cfg: &TripleConfig, n: usize, s_grid: &[f64]) -> Result<TauberianRecord> {
    let setup = ZetaSetup::new(cfg.g.clone(), a.clone(), cfg.x.clone(), cfg.y.clone(), a.depth())?;
    let plus = residue(&setup, false, s_grid, DEFAULT_EXTRAPOLATION_ORDER)?;
    let minus = residue(&setup, true, s_grid, DEFAULT_EXTRAPOLATION_ORDER)?;
    let zeta_limit = plus.limit + minus.limit;
    let stream = eigenvalue_stream(a, cfg, 1.0, StreamLimit::Entries(n), StreamOrder::DecreasingWeight);
    let estimate = dixmier_estimate(&stream, n.min(stream.len()))?;
    let abs_gap = (estimate.value - zeta_limit).abs();
    let rel_gap = if zeta_limit != 0.0 { abs_gap / zeta_limit.abs() } else { abs_gap };
    Ok(TauberianRecord { plus, minus, zeta_limit, estimate, abs_gap, rel_gap })
}

/// Inputs of the localization pipeline besides the potential and observable.
#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// Anchors averaged by the localization; empty means the minimal tail.
    pub anchors: Vec<TailPoint>,
    pub x: TailPoint,
    pub y: TailPoint,
    /// Stream entries used by each Dixmier estimate.
    pub entries: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineStep {
    pub depth: usize,
    /// `‖f_n - f‖_∞` (sampled).
    pub localization_error: f64,
    /// `P(f_n)` before normalization.
    pub pressure: f64,
    pub normalization_defect: f64,
    pub check: RepresentationCheck,
    /// `lim (s-1) (ζ₊ + ζ₋)(s)`, the Tauberian value of the same trace.
    pub zeta_limit: f64,
}

/// Localize at each depth, normalize, and compare both sides of the
/// representation formula. Depths run in parallel.
pub fn walters_pipeline(
    f: &dyn Potential,
    depths: &[usize],
    a: &LocallyConstant,
    opts: &PipelineOptions,
) -> Result<Vec<PipelineStep>> {
    if depths.iter().any(|&d| d < 2) {
        return Err(Error::Domain("pipeline depths must be >= 2".into()));
    }
    let anchors = if opts.anchors.is_empty() { vec![f.alphabet().default_tail(None)] } else { opts.anchors.clone() };
    depths
        .par_iter()
        .map(|&n| {
            let fn_ = localize_averaged(f, n, &anchors)?;
            let k = (n - 1).max(a.depth());
            let m = build_transfer_matrix(&fn_, n - 1)?;
            let pressure = leading_spectrum(&m, DEFAULT_TOL)?.pressure;
            let g = normalize(&fn_, n - 1)?;
            let defect = g.normalization_defect;
            let cfg = TripleConfig::new(g, opts.x.clone(), opts.y.clone(), 0.25 * 0.5)?;
            let cfg = TripleConfig { alpha_metric: 0.25 * cfg.inf_j(), ..cfg };
            let check = verify_representation(a, &cfg, opts.entries, k)?;
            let setup = ZetaSetup::new(cfg.g.clone(), a.clone(), cfg.x.clone(), cfg.y.clone(), a.depth())?;
            let grid = default_s_grid();
            let plus = residue(&setup, false, &grid, DEFAULT_EXTRAPOLATION_ORDER)?;
            let minus = residue(&setup, true, &grid, DEFAULT_EXTRAPOLATION_ORDER)?;
            Ok(PipelineStep {
                depth: n,
                localization_error: fn_.approx_error(),
                pressure,
                normalization_defect: defect,
                check,
                zeta_limit: plus.limit + minus.limit,
            })
        })
        .collect()
}

/// `Hol_θ(a) d_{1/2}(x, y)^θ 2^{-θ} / (1 - 2^{-θ})`, which bounds
/// `|ζ₊(s) - ζ₋(s)|` for every `s ≥ 1` when `J` is normalized.
pub fn branch_difference_bound(a: &LocallyConstant, theta: f64, x: &TailPoint, y: &TailPoint) -> f64 {
    let hol = crate::potential::holder_constant(a, theta);
    let d = crate::symbolic::metric_distance(x, y, 0.5);
    let q = 2f64.powf(-theta);
    hol * d.powf(theta) * q / (1.0 - q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{bernoulli_potential, dyson_potential};
    use crate::ruelle::{entropy, equilibrium_measure, integrate};
    use crate::symbolic::Alphabet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bernoulli_setup(p: &[f64], cyl: &[Symbol]) -> ZetaSetup {
        let g = bernoulli_potential(p).unwrap();
        let a = LocallyConstant::cylinder_combination(g.alphabet(), &[(1.0, cyl.to_vec())]).unwrap();
        ZetaSetup::new(g, a, TailPoint::constant(0), TailPoint::constant(1), 1).unwrap()
    }

    #[test]
    fn bernoulli_zeta_plus_all_methods() {
        let st = bernoulli_setup(&[0.3, 0.7], &[0]);
        let s = 1.5;
        // oracle: Σ_k p_1^s (p_1^s + p_2^s)^{k-1}
        let (a, b) = (0.3f64.powf(s), 0.7f64.powf(s));
        let oracle = a / (1.0 - (a + b));
        assert!((oracle - 0.657_21).abs() < 1e-5);
        let cf = st.plus(s, ZetaMethod::ClosedForm, 0).unwrap();
        let rv = st.plus(s, ZetaMethod::Resolvent, 0).unwrap();
        let op = st.plus(s, ZetaMethod::OperatorPower, 200).unwrap();
        assert!((cf.value - oracle).abs() < 1e-14);
        assert!((rv.value - oracle).abs() < 1e-13 && (rv.value - oracle).abs() <= rv.tail_bound + 1e-15);
        assert!((op.value - oracle).abs() <= op.tail_bound);
        let ws = st.plus(s, ZetaMethod::WordSum, 4).unwrap();
        let op4 = st.plus(s, ZetaMethod::OperatorPower, 4).unwrap();
        assert!((ws.value - op4.value).abs() < 1e-12);
        let zero = ZetaSetup { a: LocallyConstant::constant(st.g.alphabet(), 0.0), ..st };
        assert_eq!(zero.plus(s, ZetaMethod::Resolvent, 0).unwrap().value, 0.0);
    }

    #[test]
    fn word_sum_matches_operator_powers_for_deep_inputs() {
        let a3 = Alphabet::full(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = LocallyConstant::from_fn(&a3, 2, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let g = normalize(&f, 1).unwrap();
        let a = LocallyConstant::from_fn(&a3, 3, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let st = ZetaSetup::new(g, a, "1;2,0".parse().unwrap(), TailPoint::constant(2), 1).unwrap();
        for k in 1..=6 {
            for s in [1.2, 2.0] {
                let ws = st.plus(s, ZetaMethod::WordSum, k).unwrap().value;
                let op = st.plus(s, ZetaMethod::OperatorPower, k).unwrap().value;
                assert!((ws - op).abs() < 1e-12, "k={k}");
                let wm = st.minus(s, ZetaMethod::WordSum, k).unwrap().value;
                let om = st.minus(s, ZetaMethod::OperatorPower, k).unwrap().value;
                if k >= 2 {
                    assert!((wm - om).abs() < 1e-12, "k={k}");
                }
            }
        }
    }

    #[test]
    fn zeta_minus_examples() {
        let st = bernoulli_setup(&[0.3, 0.7], &[1]);
        for s in [1.1, 1.7] {
            let p = st.plus(s, ZetaMethod::Resolvent, 0).unwrap().value;
            let m = st.minus(s, ZetaMethod::Resolvent, 0).unwrap().value;
            assert_eq!(p, m);
        }
        let one = ZetaSetup { a: LocallyConstant::constant(st.g.alphabet(), 1.0), ..st.clone() };
        assert_eq!(
            one.plus(1.3, ZetaMethod::Resolvent, 0).unwrap().value,
            one.minus(1.3, ZetaMethod::Resolvent, 0).unwrap().value
        );
    }

    #[test]
    fn divergence_at_and_below_abscissa() {
        let st = bernoulli_setup(&[0.3, 0.7], &[0]);
        assert!(matches!(st.plus(1.0, ZetaMethod::Resolvent, 0), Err(Error::Divergence(_))));
        assert!(matches!(st.plus(0.8, ZetaMethod::OperatorPower, 10), Err(Error::Divergence(_))));
        // partial sums at s = 1 grow linearly: each power of a normalized operator preserves ∫
        let one = ZetaSetup { a: LocallyConstant::constant(st.g.alphabet(), 1.0), ..st };
        let m = build_transfer_matrix(&one.g.log_j, 1).unwrap();
        let mut v = vec![1.0; m.dim()];
        let mut sum = 0.0;
        for _ in 0..100 {
            v = m.apply(&v);
            sum += v[0];
        }
        assert!((sum - 100.0).abs() < 1e-10);
    }

    #[test]
    fn bernoulli_limits() {
        let h = -(0.3 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
        let st = bernoulli_setup(&[0.3, 0.7], &[0]);
        let r = residue(&st, false, &default_s_grid(), DEFAULT_EXTRAPOLATION_ORDER).unwrap();
        assert!((r.limit / (0.3 / h) - 1.0).abs() < 1e-8, "{r:?}");
        let st = bernoulli_setup(&[0.3, 0.7], &[1]);
        let r = residue(&st, false, &default_s_grid(), DEFAULT_EXTRAPOLATION_ORDER).unwrap();
        assert!((r.limit - 1.14592).abs() < 1e-5);
        let st = bernoulli_setup(&[0.5, 0.5], &[1]);
        let r = residue(&st, false, &default_s_grid(), DEFAULT_EXTRAPOLATION_ORDER).unwrap();
        assert!((r.limit - 0.5 / 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn residue_is_integral_over_entropy() {
        let a3 = Alphabet::full(3).unwrap();
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let f = LocallyConstant::from_fn(&a3, 2, |_| rng.gen_range(-1.0..1.0)).unwrap();
            let g = normalize(&f, 1).unwrap();
            let a = LocallyConstant::from_fn(&a3, 3, |_| rng.gen_range(0.0..1.0)).unwrap();
            let mu = equilibrium_measure(&g, 2).unwrap();
            let expected = integrate(&a, &mu).value / entropy(&g, &mu);
            let st = ZetaSetup::new(g, a, TailPoint::constant(0), TailPoint::constant(2), 1).unwrap();
            let r = residue(&st, false, &default_s_grid(), DEFAULT_EXTRAPOLATION_ORDER).unwrap();
            assert!((r.limit - expected).abs() < 1e-6, "seed {seed}: {} vs {expected}", r.limit);
            let rm = residue(&st, true, &default_s_grid(), DEFAULT_EXTRAPOLATION_ORDER).unwrap();
            assert!((r.limit - rm.limit).abs() < 1e-6);
        }
    }

    #[test]
    fn limit_rejects_double_pole() {
        let r = limit_s_to_1(|s| Ok(1.0 / (s - 1.0).powi(2)), &default_s_grid(), 2);
        assert!(matches!(r, Err(Error::AbscissaMismatch(_))));
        let ok = limit_s_to_1(|s| Ok(3.0 / (s - 1.0) + 2.0 + s), &default_s_grid(), 2).unwrap();
        assert!((ok.limit - 3.0).abs() < 1e-12);
        assert!(ok.residual < 1e-10);
    }

    #[test]
    fn branch_bound_holds_at_finite_s() {
        let a2 = Alphabet::full(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let f = LocallyConstant::from_fn(&a2, 2, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let g = normalize(&f, 1).unwrap();
        let x = TailPoint::constant(0);
        let y: TailPoint = "0,1;1".parse().unwrap();
        for _ in 0..10 {
            let a = LocallyConstant::from_fn(&a2, 3, |_| rng.gen_range(-1.0..1.0)).unwrap();
            let bound = branch_difference_bound(&a, 1.0, &x, &y);
            let st = ZetaSetup::new(g.clone(), a, x.clone(), y.clone(), 1).unwrap();
            for s in [1.01, 1.5, 3.0] {
                let d = st.minus(s, ZetaMethod::Resolvent, 0).unwrap().value
                    - st.plus(s, ZetaMethod::Resolvent, 0).unwrap().value;
                assert!(d.abs() <= bound + 1e-12, "{d} > {bound}");
            }
        }
    }

    #[test]
    fn tauberian_examples() {
        let g = bernoulli_potential(&[0.5, 0.5]).unwrap();
        let cfg = TripleConfig::with_defaults(g).unwrap();
        let ind = LocallyConstant::cylinder_combination(cfg.alphabet(), &[(1.0, vec![1])]).unwrap();
        let r = tauberian_bridge(&ind, &cfg, 1 << 16, &default_s_grid()).unwrap();
        assert!((r.zeta_limit - 1.0 / 2f64.ln()).abs() < 1e-8);
        assert!(r.rel_gap < 0.03, "{r:?}");
        let zero = LocallyConstant::constant(cfg.alphabet(), 0.0);
        let r = tauberian_bridge(&zero, &cfg, 1 << 10, &default_s_grid()).unwrap();
        assert_eq!(r.zeta_limit, 0.0);
        assert_eq!(r.estimate.value, 0.0);
    }

    #[test]
    fn pipeline_is_constant_for_locally_constant_input() {
        let a2 = Alphabet::full(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = LocallyConstant::from_fn(&a2, 2, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let a = LocallyConstant::cylinder_combination(&a2, &[(1.0, vec![1])]).unwrap();
        let opts =
            PipelineOptions { anchors: vec![], x: TailPoint::constant(0), y: TailPoint::constant(1), entries: 1 << 12 };
        let steps = walters_pipeline(&f, &[2, 3, 4], &a, &opts).unwrap();
        for s in &steps[1..] {
            assert!((s.check.predicted - steps[0].check.predicted).abs() < 1e-10);
            assert!((s.check.entropy - steps[0].check.entropy).abs() < 1e-10);
        }
    }

    #[test]
    fn dyson_pipeline_symmetry() {
        let f = dyson_potential(3.0, 1e-13).unwrap();
        let a2 = Alphabet::full(2).unwrap();
        let plus = LocallyConstant::cylinder_combination(&a2, &[(1.0, vec![1])]).unwrap();
        let opts = PipelineOptions {
            anchors: vec![TailPoint::constant(0), TailPoint::constant(1)],
            x: TailPoint::constant(0),
            y: TailPoint::constant(1),
            entries: 1 << 12,
        };
        for s in walters_pipeline(&f, &[4, 6], &plus, &opts).unwrap() {
            assert!((s.check.integral.value - 0.5).abs() < 1e-10);
        }
    }
}
