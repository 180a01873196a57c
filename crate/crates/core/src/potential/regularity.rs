//! Variations, the Walters modulus and locally constant approximation.
//!
//! Suprema over the shift space are taken over a deterministic grid of
//! preperiodic completions: every admissible prefix up to a size budget,
//! followed by every admissible tail of period at most two over the first
//! few symbols and by the potential's own extremal tails. The resulting
//! numbers are lower estimates of the true suprema and are reported as such.

use super::{LocallyConstant, Potential};
use crate::error::Result;
use crate::symbolic::{Alphabet, Symbol, TailPoint};

/// Sampling budget for suprema over the shift space.
#[derive(Clone, Debug)]
pub struct TailGrid {
    /// Maximum number of distinct prefixes enumerated at one depth.
    pub max_prefixes: usize,
    /// Tails are built from the first `tail_symbols` symbols of the alphabet.
    pub tail_symbols: usize,
}

impl Default for TailGrid {
    fn default() -> Self {
        Self { max_prefixes: 4096, tail_symbols: 4 }
    }
}

impl TailGrid {
    /// Periodic tails of period one and two, plus model-specific ones.
    pub fn tails(&self, f: &dyn Potential) -> Vec<TailPoint> {
        let a = f.alphabet();
        let k = self.tail_symbols.min(a.size()) as Symbol;
        let mut tails = Vec::new();
        for s in 0..k {
            let t = TailPoint::constant(s);
            if a.check_point(&t).is_ok() {
                tails.push(t);
            }
        }
        for s in 0..k {
            for r in 0..k {
                if s != r {
                    let t = TailPoint::periodic(vec![s, r]).expect("non-empty");
                    if a.check_point(&t).is_ok() {
                        tails.push(t);
                    }
                }
            }
        }
        for t in f.extremal_tails() {
            if !tails.contains(&t) && a.check_point(&t).is_ok() {
                tails.push(t);
            }
        }
        tails
    }

    /// Prefixes of length `n`: all admissible words when they fit the budget,
    /// otherwise all words of the largest length that fits, padded with the
    /// smallest admissible continuation.
    pub fn prefixes(&self, alphabet: &Alphabet, n: usize) -> Vec<Vec<Symbol>> {
        let mut base_len = n;
        while base_len > 0 && crate::symbolic::count_words(alphabet, base_len) as f64 > self.max_prefixes as f64 * 2.0 {
            base_len -= 1;
        }
        let base = alphabet.words_of_length(base_len);
        base.into_iter()
            .map(|w| {
                let mut v = w.0;
                if v.len() < n {
                    let tail = alphabet.default_tail(v.last().copied());
                    let missing = n - v.len();
                    v.extend(tail.prefix(missing));
                }
                v
            })
            .collect()
    }
}

/// A sampled (or exact) supremum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationEstimate {
    pub value: f64,
    /// Number of point evaluations behind the estimate (0 when exact).
    pub samples: usize,
    /// `true` when the value is exact rather than a grid lower estimate.
    pub exact: bool,
}

fn admissible_join(a: &Alphabet, prefix: &[Symbol], tail: &TailPoint) -> bool {
    prefix.last().is_none_or(|&l| a.allows(l, tail.symbol(0)))
}

/// `var_n(f) = sup{|f(x) - f(y)| : x_1^n = y_1^n}`.
pub fn variation(f: &dyn Potential, n: usize, grid: &TailGrid) -> VariationEstimate {
    if f.depth().is_some_and(|d| d <= n) {
        return VariationEstimate { value: 0.0, samples: 0, exact: true };
    }
    let a = f.alphabet();
    let tails = grid.tails(f);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for u in grid.prefixes(a, n) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in tails.iter().filter(|t| admissible_join(a, &u, t)) {
            let v = f.eval(&t.prepend(&u));
            samples += 1;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi >= lo {
            worst = worst.max(hi - lo);
        }
    }
    VariationEstimate { value: worst, samples, exact: false }
}

/// Regularity summary of a potential.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    /// `(n, var_n(f))`.
    pub variations: Vec<(usize, VariationEstimate)>,
    /// `(m, sup_{n ≤ n_max} sup_a |S_n f(a x) - S_n f(a y)|)` over `x, y` agreeing on `m` coordinates.
    pub walters_modulus: Vec<(usize, f64)>,
    /// Fitted `θ` in `var_n ≈ C θ^n`, when at least two variations are positive.
    pub holder_exponent_estimate: Option<f64>,
}

/// Samples the Walters modulus at each separation depth in `depth_grid`.
pub fn walters_check(f: &dyn Potential, n_max: usize, depth_grid: &[usize], grid: &TailGrid) -> RegularityReport {
    let a = f.alphabet();
    let tails = grid.tails(f);
    // Birkhoff windows are enumerated exhaustively, so keep the anchor set small.
    let anchor_grid = TailGrid { max_prefixes: 8, ..grid.clone() };

    let mut modulus = Vec::with_capacity(depth_grid.len());
    let mut variations = Vec::with_capacity(depth_grid.len());
    for &m in depth_grid {
        variations.push((m, variation(f, m, grid)));
        let mut worst: f64 = 0.0;
        for u in anchor_grid.prefixes(a, m) {
            let completions: Vec<TailPoint> =
                tails.iter().filter(|t| admissible_join(a, &u, t)).map(|t| t.prepend(&u)).collect();
            for n in 1..=n_max {
                for word in a.words_of_length(n) {
                    let w = word.symbols();
                    if !u.first().is_none_or(|&u0| a.allows(*w.last().unwrap(), u0)) {
                        continue;
                    }
                    let sums: Vec<f64> =
                        completions.iter().map(|x| super::birkhoff_sum(f, &x.prepend(w), n).value).collect();
                    let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if hi >= lo {
                        worst = worst.max(hi - lo);
                    }
                }
            }
        }
        modulus.push((m, worst));
    }

    let positive: Vec<(f64, f64)> =
        variations.iter().filter(|(_, v)| v.value > 0.0).map(|(n, v)| (*n as f64, v.value.ln())).collect();
    let holder_exponent_estimate = if positive.len() >= 2 {
        let k = positive.len() as f64;
        let mx = positive.iter().map(|p| p.0).sum::<f64>() / k;
        let my = positive.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = positive.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = positive.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some((sxy / sxx).exp())
    } else {
        None
    };

    RegularityReport { variations, walters_modulus: modulus, holder_exponent_estimate }
}

fn completion(a: &Alphabet, w: &[Symbol], anchor: &TailPoint) -> TailPoint {
    if admissible_join(a, w, anchor) {
        anchor.prepend(w)
    } else {
        a.default_tail(w.last().copied()).prepend(w)
    }
}

/// `f_n(x) = f(x_1 … x_n · anchor)`; the result records `var_n(f)` as its approximation error.
pub fn localize(f: &dyn Potential, depth: usize, tail_anchor: &TailPoint) -> Result<LocallyConstant> {
    localize_averaged(f, depth, std::slice::from_ref(tail_anchor))
}

/// Like [`localize`] but averages over several anchors. A convex combination
/// of anchored values stays within `var_n(f)` of `f`.
pub fn localize_averaged(f: &dyn Potential, depth: usize, anchors: &[TailPoint]) -> Result<LocallyConstant> {
    let a = f.alphabet().clone();
    let weight = 1.0 / anchors.len().max(1) as f64;
    let table = LocallyConstant::from_fn(&a, depth, |w| {
        anchors.iter().map(|t| f.eval(&completion(&a, w, t))).sum::<f64>() * weight
    })?;
    let err = variation(f, depth, &TailGrid::default()).value;
    Ok(table.with_approx_error(err))
}

/// `sup |a(u) - a(v)| / d(u, v)^θ` for a locally constant `a`, with `d = 2^{-N}`
/// and `N` the first index where `u` and `v` differ.
pub fn holder_constant(a: &LocallyConstant, theta: f64) -> f64 {
    let words = a.alphabet().words_of_length(a.depth());
    let mut worst: f64 = 0.0;
    for (i, u) in words.iter().enumerate() {
        for v in &words[i + 1..] {
            let n = u.symbols().iter().zip(v.symbols()).position(|(p, q)| p != q).expect("distinct words") + 1;
            let diff = (a.value(u.symbols()) - a.value(v.symbols())).abs();
            worst = worst.max(diff * 2f64.powf(theta * n as f64));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{dyson_potential, hofbauer_potential, FnPotential};

    #[test]
    fn holder_constant_of_indicators() {
        let a = Alphabet::full(2).unwrap();
        let first = LocallyConstant::cylinder_combination(&a, &[(1.0, vec![1])]).unwrap();
        assert!((holder_constant(&first, 1.0) - 2.0).abs() < 1e-15);
        let second = LocallyConstant::cylinder_combination(&a, &[(1.0, vec![0, 1])]).unwrap();
        assert!((holder_constant(&second, 1.0) - 4.0).abs() < 1e-15);
        assert_eq!(holder_constant(&LocallyConstant::constant(&a, 2.0), 0.5), 0.0);
    }

    #[test]
    fn variation_of_locally_constant_is_exact_zero() {
        let a = Alphabet::full(2).unwrap();
        let f = LocallyConstant::from_fn(&a, 2, |w| w[0] as f64 - 2.0 * w[1] as f64).unwrap();
        let v = variation(&f, 3, &TailGrid::default());
        assert!(v.exact && v.value == 0.0);
        let ind = LocallyConstant::cylinder_combination(&a, &[(1.0, vec![0])]).unwrap();
        assert_eq!(variation(&ind, 1, &TailGrid::default()).value, 0.0);
    }

    #[test]
    fn variation_of_depth_two_at_one_is_sampled() {
        let a = Alphabet::full(2).unwrap();
        let f = LocallyConstant::from_fn(&a, 2, |w| w[1] as f64).unwrap();
        let v = variation(&f, 1, &TailGrid::default());
        assert!(!v.exact);
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn dyson_variation_against_tail_bound() {
        let f = dyson_potential(3.0, 1e-13).unwrap();
        // 2 Σ_{k>4} (k-1)^{-3}, by partial sums plus an integral tail
        let partial: f64 = (5..200_000).rev().map(|k| 2.0 / ((k - 1) as f64).powi(3)).sum();
        let bound = partial + 2.0 * 0.5 * (199_998f64).powi(-2);
        let v = variation(&f, 4, &TailGrid::default());
        assert!(v.value <= bound + 1e-12);
        assert!(v.value >= 0.5 * bound);
        assert!((bound - 0.080_04).abs() < 1e-4);
    }

    #[test]
    fn localize_is_idempotent_on_shallow_input() {
        let a = Alphabet::full(3).unwrap();
        let f = LocallyConstant::from_fn(&a, 2, |w| (w[0] + 2 * w[1]) as f64).unwrap();
        let g = localize(&f, 3, &TailPoint::constant(2)).unwrap();
        assert_eq!(g.approx_error(), 0.0);
        for w in a.words_of_length(3) {
            assert_eq!(g.value(w.symbols()), f.value(w.symbols()));
        }
    }

    #[test]
    fn localized_dyson_within_variation() {
        let f = dyson_potential(3.0, 1e-13).unwrap();
        for n in [3usize, 5, 8] {
            let fn_ = localize(&f, n, &TailPoint::constant(1)).unwrap();
            let bound = ((n - 1) as f64).powi(-2);
            assert!(fn_.approx_error() <= bound);
            for t in TailGrid::default().tails(&f) {
                for u in TailGrid::default().prefixes(f.alphabet(), n) {
                    let x = t.prepend(&u);
                    assert!((fn_.eval(&x) - f.eval(&x)).abs() <= fn_.approx_error() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn hofbauer_localization_error() {
        let g = hofbauer_potential(3.0).unwrap();
        let n = 6;
        let gn = localize(&g, n, &TailPoint::constant(0)).unwrap();
        // the only non-constant cylinder at depth n is [1^n], where values range over
        // -γ log((k+1)/k), k >= n, and 0
        let expected = 3.0 * ((n as f64 + 1.0) / n as f64).ln();
        assert!((gn.approx_error() - expected).abs() < 1e-12);
    }

    #[test]
    fn walters_constant_is_zero_and_depth_k_vanishes() {
        let a = Alphabet::full(2).unwrap();
        let c = LocallyConstant::constant(&a, 1.3);
        let r = walters_check(&c, 3, &[1, 2, 3], &TailGrid::default());
        assert!(r.walters_modulus.iter().all(|(_, v)| *v == 0.0));

        let f = LocallyConstant::from_fn(&a, 3, |w| (w[0] + w[1] * 2 + w[2] * 4) as f64).unwrap();
        let r = walters_check(&f, 3, &[1, 2, 3, 4], &TailGrid::default());
        let vals: Vec<f64> = r.walters_modulus.iter().map(|p| p.1).collect();
        // S_n f(w u x) only reads u_1..u_{k-1} past w
        assert!(vals[0] > 0.0, "{vals:?}");
        assert_eq!(vals[1], 0.0);
        assert_eq!(vals[2], 0.0);
        assert_eq!(vals[3], 0.0);
    }

    #[test]
    fn walters_dyson_decays() {
        let f = dyson_potential(3.0, 1e-12).unwrap();
        let r = walters_check(&f, 4, &[2, 4, 8, 16], &TailGrid { max_prefixes: 8, tail_symbols: 2 });
        let vals: Vec<f64> = r.walters_modulus.iter().map(|p| p.1).collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0], "{vals:?}");
        }
        // sum_{j<n} 2 Σ_{k>m+n-j} (k-1)^{-α} <= n (m-1)^{2-α}... checked loosely against m^{2-α}
        for &(m, v) in &r.walters_modulus {
            assert!(v <= 4.0 * 4.0 * (m as f64).powf(-1.0) + 1e-12, "m={m} v={v}");
        }
    }

    #[test]
    fn holder_estimate_for_geometric_variation() {
        let a = Alphabet::full(2).unwrap();
        let f = FnPotential::new(&a, None, |x| (0..40).map(|i| 0.5f64.powi(i as i32) * x.symbol(i) as f64).sum());
        let r = walters_check(&f, 1, &[2, 3, 4, 5, 6], &TailGrid::default());
        let theta = r.holder_exponent_estimate.unwrap();
        assert!((theta - 0.5).abs() < 0.02, "{theta}");
    }
}
