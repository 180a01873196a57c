//! The spectral triple built from a g-function: Dirac weights `𝕁(wx)`,
//! eigenvalue streams of `L_a D^{-s}`, commutator norms and Dixmier-trace
//! estimators.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::potential::{localize, Certified, GFunctionCertificate, LocallyConstant, Potential};
use crate::ruelle::{entropy, equilibrium_measure, integrate};
use crate::symbolic::{Alphabet, Symbol, TailPoint, Word};

/// Dyadic octaves spanned by the secant estimator.
pub const DEFAULT_OCTAVES: u32 = 4;

const NO_PARENT: u32 = u32::MAX;
/// Observables of depth `d` are tabulated when `m^d` stays below this.
const TABLE_LIMIT: usize = 1 << 20;

/// g-function, anchor points and metric parameter of the triple.
#[derive(Clone, Debug)]
pub struct TripleConfig {
    pub g: GFunctionCertificate,
    pub x: TailPoint,
    pub y: TailPoint,
    pub alpha_metric: f64,
}

impl TripleConfig {
    pub fn new(g: GFunctionCertificate, x: TailPoint, y: TailPoint, alpha_metric: f64) -> Result<Self> {
        let a = g.alphabet();
        if !a.is_full() {
            return Err(Error::Domain("the spectral triple is built on a full shift".into()));
        }
        a.check_point(&x)?;
        a.check_point(&y)?;
        if !(alpha_metric > 0.0 && alpha_metric < 1.0) {
            return Err(Error::Domain(format!("metric parameter must lie in (0,1), got {alpha_metric}")));
        }
        if !(g.inf_j() > 0.0) {
            return Err(Error::Domain("inf J must be positive".into()));
        }
        Ok(Self { g, x, y, alpha_metric })
    }

    /// Anchors `0^∞`, `1^∞` and `α = inf J / 4`.
    pub fn with_defaults(g: GFunctionCertificate) -> Result<Self> {
        let alpha = 0.25 * g.inf_j();
        Self::new(g, TailPoint::constant(0), TailPoint::constant(1), alpha)
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.g.alphabet()
    }

    pub fn inf_j(&self) -> f64 {
        self.g.inf_j()
    }

    /// `α < inf J / 2`, under which Lipschitz functions have summable commutators.
    pub fn density_condition(&self) -> bool {
        self.alpha_metric < 0.5 * self.inf_j()
    }

    pub fn swapped(&self) -> Self {
        Self { x: self.y.clone(), y: self.x.clone(), ..self.clone() }
    }
}

/// `log 𝕁(wx) = S_{|w|} (log J)(wx)`.
pub fn log_dirac_weight(g: &GFunctionCertificate, w: &Word, x: &TailPoint) -> Result<f64> {
    let a = g.alphabet();
    a.check_word(w.symbols())?;
    if let Some(&last) = w.symbols().last() {
        if !a.allows(last, x.symbol(0)) {
            return Err(Error::Admissibility(format!("{w} cannot precede {x}")));
        }
    }
    let d = g.log_j.depth();
    let mut buf: Vec<Symbol> = w.symbols().to_vec();
    buf.extend(x.prefix(d));
    Ok((0..w.len()).map(|i| g.log_j.value(&buf[i..i + d])).sum())
}

/// `𝕁(wx)`, the product of `J` along the orbit segment `wx, σ(wx), …`.
pub fn dirac_weight(g: &GFunctionCertificate, w: &Word, x: &TailPoint) -> Result<f64> {
    log_dirac_weight(g, w, x).map(f64::exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamOrder {
    /// Length-lexicographic words, each giving the pair `wx`, `wy`.
    Paper,
    /// Non-increasing Dirac weight, i.e. the singular-value order of `D^{-1}`.
    DecreasingWeight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    X,
    Y,
}

/// How much of the stream to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamLimit {
    /// All words of length at most this.
    MaxLen(usize),
    /// This many entries (two per word).
    Entries(usize),
}

#[derive(Clone, Copy, Debug)]
struct Node {
    parent: u32,
    symbol: Symbol,
    len: u32,
    log_w: f64,
}

/// Words stored as a prefix tree grown on the left: a child is `q·parent`,
/// so walking up from a node reads the word from left to right.
#[derive(Clone, Debug, Default)]
struct WordTree {
    nodes: Vec<Node>,
}

impl WordTree {
    fn word(&self, id: u32) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.nodes[id as usize].len as usize);
        let mut cur = id;
        while cur != NO_PARENT {
            let n = &self.nodes[cur as usize];
            out.push(n.symbol);
            cur = n.parent;
        }
        out
    }

    /// First `n` symbols of `(word of id)·x`, written into `buf`.
    fn prefix_into(&self, id: u32, n: usize, x: &TailPoint, buf: &mut Vec<Symbol>) {
        buf.clear();
        self.extend_prefix(id, n, x, buf);
    }

    /// Appends the first `n` symbols of `(word of id)·x`; `id` may be `NO_PARENT`.
    fn extend_prefix(&self, id: u32, n: usize, x: &TailPoint, buf: &mut Vec<Symbol>) {
        let target = buf.len() + n;
        let mut cur = id;
        while cur != NO_PARENT && buf.len() < target {
            let node = &self.nodes[cur as usize];
            buf.push(node.symbol);
            cur = node.parent;
        }
        let mut i = 0;
        while buf.len() < target {
            buf.push(x.symbol(i));
            i += 1;
        }
    }

    fn push(&mut self, parent: u32, symbol: Symbol, log_w: f64) -> u32 {
        let len = if parent == NO_PARENT { 1 } else { self.nodes[parent as usize].len + 1 };
        self.nodes.push(Node { parent, symbol, len, log_w });
        (self.nodes.len() - 1) as u32
    }
}

/// Fast evaluation of an observable at `wx` for words kept in a [`WordTree`].
enum ObservableEval<'a> {
    Table(LocallyConstant),
    General(&'a dyn Potential),
}

impl<'a> ObservableEval<'a> {
    fn new(a: &'a dyn Potential) -> Self {
        let alphabet = a.alphabet();
        match a.depth() {
            Some(d) if alphabet.size().checked_pow(d as u32).is_some_and(|n| n <= TABLE_LIMIT) => {
                let table = LocallyConstant::from_fn(alphabet, d, |w| {
                    a.eval(&alphabet.default_tail(w.last().copied()).prepend(w))
                })
                .expect("depth >= 1 and table within limit");
                Self::Table(table)
            }
            _ => Self::General(a),
        }
    }

    fn eval(&self, tree: &WordTree, id: u32, x: &TailPoint, buf: &mut Vec<Symbol>) -> f64 {
        match self {
            Self::Table(t) => {
                tree.prefix_into(id, t.depth(), x, buf);
                t.value(buf)
            }
            Self::General(a) => a.eval(&x.prepend(&tree.word(id))),
        }
    }
}

/// One eigenvalue `a(w·branch) 𝕁(wx)^s` of `L_a D^{-s}`, kept in factored form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamEntry {
    pub a_value: f64,
    /// `𝕁(wx)^s`; both branches carry the `x`-based weight.
    pub weight: f64,
    pub branch: Branch,
    node: u32,
}

impl StreamEntry {
    pub fn product(&self) -> f64 {
        self.a_value * self.weight
    }
}

#[derive(Clone, Debug)]
pub struct EigenvalueStream {
    pub order: StreamOrder,
    pub s: f64,
    entries: Vec<StreamEntry>,
    tree: WordTree,
}

impl EigenvalueStream {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[StreamEntry] {
        &self.entries
    }

    /// The word `w` behind entry `i`.
    pub fn word(&self, i: usize) -> Word {
        Word(self.tree.word(self.entries[i].node))
    }

    /// Running sums `Σ_{k ≤ N} a_k λ_k`, index `N - 1`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.entries
            .iter()
            .map(|e| {
                acc += e.product();
                acc
            })
            .collect()
    }
}

#[derive(PartialEq)]
struct HeapKey {
    log_w: f64,
    id: u32,
}

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    // larger weight first, then earlier-created node
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_w.total_cmp(&other.log_w).then_with(|| other.id.cmp(&self.id))
    }
}

/// Eigenvalues of `L_a D^{-s}` in the requested order.
pub fn eigenvalue_stream(
    a: &dyn Potential,
    cfg: &TripleConfig,
    s: f64,
    limit: StreamLimit,
    order: StreamOrder,
) -> EigenvalueStream {
    let alphabet = cfg.alphabet();
    let m = alphabet.size();
    let eval = ObservableEval::new(a);
    let d = cfg.g.log_j.depth();
    let (max_len, max_entries) = match limit {
        StreamLimit::MaxLen(l) => (l, usize::MAX),
        StreamLimit::Entries(n) => (usize::MAX, n),
    };
    let mut tree = WordTree::default();
    let mut entries = Vec::new();
    let mut buf = Vec::with_capacity(d.max(8));
    let mut jbuf = Vec::with_capacity(d);

    let child_log_w = |tree: &WordTree, parent: u32, q: Symbol, jbuf: &mut Vec<Symbol>| -> f64 {
        let base = if parent == NO_PARENT { 0.0 } else { tree.nodes[parent as usize].log_w };
        jbuf.clear();
        jbuf.push(q);
        tree.extend_prefix(parent, d - 1, &cfg.x, jbuf);
        base + cfg.g.log_j.value(jbuf)
    };

    let emit = |tree: &WordTree, id: u32, entries: &mut Vec<StreamEntry>, buf: &mut Vec<Symbol>| -> bool {
        let weight = (s * tree.nodes[id as usize].log_w).exp();
        for (branch, anchor) in [(Branch::X, &cfg.x), (Branch::Y, &cfg.y)] {
            if entries.len() >= max_entries {
                return false;
            }
            let a_value = eval.eval(tree, id, anchor, buf);
            entries.push(StreamEntry { a_value, weight, branch, node: id });
        }
        entries.len() < max_entries
    };

    match order {
        StreamOrder::Paper => {
            let mut level: Vec<u32> = vec![NO_PARENT];
            let mut len = 0;
            'outer: while len < max_len {
                len += 1;
                let mut next = Vec::with_capacity(level.len() * m);
                for q in 0..m as Symbol {
                    for &parent in &level {
                        let lw = child_log_w(&tree, parent, q, &mut jbuf);
                        let id = tree.push(parent, q, lw);
                        next.push(id);
                        if !emit(&tree, id, &mut entries, &mut buf) {
                            break 'outer;
                        }
                    }
                }
                level = next;
            }
        }
        StreamOrder::DecreasingWeight => {
            let mut heap = BinaryHeap::new();
            if max_len >= 1 {
                for q in 0..m as Symbol {
                    let lw = child_log_w(&tree, NO_PARENT, q, &mut jbuf);
                    let id = tree.push(NO_PARENT, q, lw);
                    heap.push(HeapKey { log_w: lw, id });
                }
            }
            while let Some(HeapKey { id, .. }) = heap.pop() {
                if !emit(&tree, id, &mut entries, &mut buf) {
                    break;
                }
                if (tree.nodes[id as usize].len as usize) < max_len {
                    for q in 0..m as Symbol {
                        let lw = child_log_w(&tree, id, q, &mut jbuf);
                        let child = tree.push(id, q, lw);
                        heap.push(HeapKey { log_w: lw, id: child });
                    }
                }
            }
        }
    }
    EigenvalueStream { order, s, entries, tree }
}

/// Operator norm and summability of `[D, π(a)]` on the enumerated words.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorReport {
    /// `sup_w |a(wx) - a(wy)| / 𝕁(wx)`.
    pub sup_ratio: f64,
    /// `Σ_{|w| = n} |a(wx) - a(wy)| / 𝕁(wx)` for `n = 1, …, max_len`.
    pub increments: Vec<f64>,
    /// Cumulative sums of `increments`.
    pub partial_sums: Vec<f64>,
    /// Whether the increments decay geometrically with a negligible tail.
    pub summable: bool,
    /// Geometric tail estimate beyond `max_len` (infinite when not summable).
    pub tail_estimate: f64,
}

/// Relative tail size under which the commutator series counts as summable.
const SUMMABLE_TAIL: f64 = 1e-3;

pub fn commutator_norm(a: &dyn Potential, cfg: &TripleConfig, max_len: usize) -> CommutatorReport {
    let stream = eigenvalue_stream(a, cfg, 1.0, StreamLimit::MaxLen(max_len), StreamOrder::Paper);
    let mut increments = vec![0.0; max_len];
    let mut sup_ratio: f64 = 0.0;
    for pair in stream.entries.chunks_exact(2) {
        let len = stream.tree.nodes[pair[0].node as usize].len as usize;
        let ratio = (pair[0].a_value - pair[1].a_value).abs() / pair[0].weight;
        sup_ratio = sup_ratio.max(ratio);
        increments[len - 1] += ratio;
    }
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = increments
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();

    let total = partial_sums.last().copied().unwrap_or(0.0);
    let half = max_len / 2;
    let mut worst_ratio: f64 = 0.0;
    for w in increments[half..].windows(2) {
        if w[0] > 0.0 {
            worst_ratio = worst_ratio.max(w[1] / w[0]);
        } else if w[1] > 0.0 {
            worst_ratio = f64::INFINITY;
        }
    }
    let last = increments.last().copied().unwrap_or(0.0);
    let tail_estimate = if last == 0.0 {
        0.0
    } else if worst_ratio < 1.0 {
        last * worst_ratio / (1.0 - worst_ratio)
    } else {
        f64::INFINITY
    };
    let summable = tail_estimate <= SUMMABLE_TAIL * total.max(f64::MIN_POSITIVE) || total == 0.0;
    CommutatorReport { sup_ratio, increments, partial_sums, summable, tail_estimate }
}

/// Dixmier-trace estimate from the first `N` eigenvalues at `s = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DixmierEstimate {
    /// Slope of `Σ_{k≤N} a_k λ_k` against `log N` over the last octaves.
    pub value: f64,
    /// `(1/log N) Σ_{k≤N} a_k λ_k`.
    pub log_average: f64,
    pub n_terms: usize,
    pub order: StreamOrder,
    pub octaves: u32,
    /// `|log_average(N) - log_average(N/2)|`.
    pub tail_proxy: f64,
}

fn estimate_from_sums(sums: &[f64], n: usize, order: StreamOrder, octaves: u32) -> DixmierEstimate {
    let s_n = sums[n - 1];
    let log_n = (n as f64).ln();
    let log_average = if n > 1 { s_n / log_n } else { 0.0 };
    let usable = (n as f64).log2().floor() as u32;
    let d = octaves.min(usable.saturating_sub(1)).max(1).min(usable.max(1));
    let back = (n >> d).max(1);
    let value = if n > back { (s_n - sums[back - 1]) / ((n as f64 / back as f64).ln()) } else { log_average };
    let half = n / 2;
    let tail_proxy = if half > 1 { (log_average - sums[half - 1] / (half as f64).ln()).abs() } else { f64::INFINITY };
    DixmierEstimate { value, log_average, n_terms: n, order, octaves: d, tail_proxy }
}

fn check_stream(stream: &EigenvalueStream, n: usize) -> Result<()> {
    if stream.s != 1.0 {
        return Err(Error::Domain(format!("Dixmier estimates need the s = 1 stream, got s = {}", stream.s)));
    }
    if n < 2 || n > stream.len() {
        return Err(Error::Domain(format!("N = {n} outside 2..={}", stream.len())));
    }
    Ok(())
}

pub fn dixmier_estimate(stream: &EigenvalueStream, n: usize) -> Result<DixmierEstimate> {
    dixmier_estimate_with(stream, n, DEFAULT_OCTAVES)
}

pub fn dixmier_estimate_with(stream: &EigenvalueStream, n: usize, octaves: u32) -> Result<DixmierEstimate> {
    check_stream(stream, n)?;
    Ok(estimate_from_sums(&stream.partial_sums(), n, stream.order, octaves))
}

/// Estimates at `N = 4, 8, 16, …` up to the stream length.
pub fn dixmier_trajectory(stream: &EigenvalueStream) -> Result<Vec<DixmierEstimate>> {
    check_stream(stream, 2)?;
    let sums = stream.partial_sums();
    let mut out = Vec::new();
    let mut n = 4;
    while n <= stream.len() {
        out.push(estimate_from_sums(&sums, n, stream.order, DEFAULT_OCTAVES));
        n *= 2;
    }
    Ok(out)
}

/// Both sides of `Tr_ω(L_a D^{-1}) = (2/h_μ) ∫ a dμ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationCheck {
    pub estimate: DixmierEstimate,
    pub predicted: f64,
    /// Bound on the error of `predicted` from localizing `a`.
    pub predicted_error: f64,
    pub entropy: f64,
    pub integral: Certified,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

/// Right-hand side of the representation formula.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    /// `(2/h_μ) ∫ a dμ`.
    pub value: f64,
    pub abs_error: f64,
    pub entropy: f64,
    pub integral: Certified,
}

/// `(2/h_μ) ∫ a dμ` with `μ` computed on depth-`depth` cylinders.
pub fn representation_prediction(a: &dyn Potential, cfg: &TripleConfig, depth: usize) -> Result<Prediction> {
    let k = depth.max(cfg.g.log_j.depth().saturating_sub(1)).max(1);
    let mu = equilibrium_measure(&cfg.g, k)?;
    let h = entropy(&cfg.g, &mu);
    let local = match a.depth() {
        Some(_) => match ObservableEval::new(a) {
            ObservableEval::Table(t) => t,
            ObservableEval::General(_) => localize(a, k, &cfg.alphabet().default_tail(None))?,
        },
        None => localize(a, k, &cfg.alphabet().default_tail(None))?,
    };
    let integral = integrate(&local, &mu);
    Ok(Prediction { value: 2.0 * integral.value / h, abs_error: 2.0 * integral.abs_error / h, entropy: h, integral })
}

/// Compares the decreasing-weight Dixmier estimate at `N` entries with
/// `(2/h_μ) ∫ a dμ`, the measure computed on depth-`depth` cylinders.
pub fn verify_representation(
    a: &dyn Potential,
    cfg: &TripleConfig,
    n: usize,
    depth: usize,
) -> Result<RepresentationCheck> {
    let stream = eigenvalue_stream(a, cfg, 1.0, StreamLimit::Entries(n), StreamOrder::DecreasingWeight);
    let estimate = dixmier_estimate(&stream, n.min(stream.len()))?;
    let p = representation_prediction(a, cfg, depth)?;
    let abs_gap = (estimate.value - p.value).abs();
    let rel_gap = if p.value != 0.0 { abs_gap / p.value.abs() } else { abs_gap };
    Ok(RepresentationCheck {
        estimate,
        predicted: p.value,
        predicted_error: p.abs_error,
        entropy: p.entropy,
        integral: p.integral,
        abs_gap,
        rel_gap,
    })
}
