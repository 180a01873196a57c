mod common;

use gibbs_dixmier::countable::{gurevich_pressure, renewal_potential, CountableShift};
use gibbs_dixmier::potential::{LocallyConstant, Potential};
use gibbs_dixmier::ruelle::{equilibrium_measure, normalize, pressure};
use gibbs_dixmier::spectral::{eigenvalue_stream, StreamLimit, StreamOrder, TripleConfig};
use gibbs_dixmier::symbolic::{Alphabet, TailPoint};
use gibbs_dixmier::zeta::{default_s_grid, residue, ZetaSetup, DEFAULT_EXTRAPOLATION_ORDER};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_g(m: usize, seed: u64) -> gibbs_dixmier::potential::GFunctionCertificate {
    let a = Alphabet::full(m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = LocallyConstant::from_fn(&a, 2, |_| rng.gen_range(-2.0..2.0)).unwrap();
    normalize(&f, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalized_potentials_have_zero_pressure(m in 2usize..=4, seed in any::<u64>()) {
        let g = random_g(m, seed);
        prop_assert!(g.normalization_defect < 1e-12);
        prop_assert!(pressure(&g.log_j, 1).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn equilibrium_measure_matches_markov_oracle(m in 2usize..=4, seed in any::<u64>()) {
        let g = random_g(m, seed);
        let oracle = common::MarkovOracle::new(&g.log_j);
        let mu = equilibrium_measure(&g, 2).unwrap();
        for (i, u) in mu.matrix.index().iter().enumerate() {
            let expected = oracle.mass(u[0] as usize, u[1] as usize);
            prop_assert!((mu.mu[i] - expected).abs() < 1e-11, "{u:?}: {} vs {expected}", mu.mu[i]);
        }
        let total: f64 = mu.mu.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residue_is_integral_over_entropy(m in 2usize..=3, seed in any::<u64>(), w0 in 0u32..3, w1 in 0u32..3) {
        let g = random_g(m, seed);
        let word = vec![w0 % m as u32, w1 % m as u32];
        let a = LocallyConstant::cylinder_combination(g.alphabet(), &[(1.0, word)]).unwrap();
        let oracle = common::MarkovOracle::new(&g.log_j);
        let expected = oracle.integral(&a) / oracle.entropy();
        let setup = ZetaSetup::new(g, a, TailPoint::constant(0), TailPoint::constant(1), 2).unwrap();
        let r = residue(&setup, false, &default_s_grid(), DEFAULT_EXTRAPOLATION_ORDER).unwrap();
        prop_assert!((r.limit - expected).abs() < 1e-6 * expected.max(1e-3), "{} vs {expected}", r.limit);
    }

    #[test]
    fn decreasing_stream_is_monotone_and_matches_words(m in 2usize..=3, seed in any::<u64>(), n in 16usize..400) {
        let g = random_g(m, seed);
        let cfg = TripleConfig::with_defaults(g).unwrap();
        let one = LocallyConstant::constant(cfg.alphabet(), 1.0);
        let s = eigenvalue_stream(&one, &cfg, 1.0, StreamLimit::Entries(n), StreamOrder::DecreasingWeight);
        prop_assert_eq!(s.len(), n);
        for w in s.entries().windows(2) {
            prop_assert!(w[1].weight <= w[0].weight);
        }
        for (i, e) in s.entries().iter().enumerate().take(40) {
            let word = s.word(i);
            let point = cfg.x.prepend(word.symbols());
            let direct: f64 = (0..word.len()).map(|j| cfg.g.log_j.eval(&point.shift_by(j))).sum::<f64>().exp();
            prop_assert!((e.weight - direct).abs() < 1e-14, "{} vs {direct}", e.weight);
        }
    }
}

#[test]
fn renewal_gurevich_pressure_matches_bisection_root() {
    for gamma in [2.5, 3.0, 4.0] {
        let f = renewal_potential(gamma).unwrap();
        let est = gurevich_pressure(&CountableShift::renewal(), &f, 0, 400, 64).unwrap();
        let z = common::zeta(gamma);
        let p: Vec<f64> = (1..=64).map(|j| (j as f64).powf(-gamma) / z).collect();
        let g = |x: f64| p.iter().enumerate().map(|(j, pj)| pj * (-x * (j + 1) as f64).exp()).sum::<f64>() - 1.0;
        let (mut lo, mut hi) = (-5.0, 5.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((est.limit - lo).abs() < 1e-9, "gamma {gamma}: {} vs {lo}", est.limit);
        assert!(est.limit < 0.0);
    }
}
