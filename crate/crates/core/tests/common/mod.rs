//! Independent reference values for the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use gibbs_dixmier::potential::LocallyConstant;
use gibbs_dixmier::symbolic::Symbol;

/// Riemann zeta by Euler-Maclaurin with a fixed head of 1000 terms.
pub fn zeta(s: f64) -> f64 {
    let n = 1000.0f64;
    let head: f64 = (1..1000).map(|k| (k as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

/// `Σ_k log k · k^{-γ}`, the same way.
pub fn w(gamma: f64) -> f64 {
    let n = 1000.0f64;
    let g = gamma;
    let head: f64 = (2..1000).map(|k| (k as f64).ln() * (k as f64).powf(-g)).sum();
    let l = n.ln();
    let integral = n.powf(1.0 - g) * (l / (g - 1.0) + 1.0 / ((g - 1.0) * (g - 1.0)));
    // f(x) = log x · x^{-γ}, f'(x) = x^{-γ-1} (1 - γ log x)
    let f = l * n.powf(-g);
    let df = n.powf(-g - 1.0) * (1.0 - g * l);
    head + integral + 0.5 * f - df / 12.0
}

pub fn bernoulli_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// Equilibrium data of a depth-2 g-function `J(x₀x₁)`: the measure is the
/// Markov chain with `μ[x₀x₁] = J(x₀x₁) π(x₁)`, `π` the fixed vector of `J`.
pub struct MarkovOracle {
    pub m: usize,
    pub j: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
}

impl MarkovOracle {
    pub fn new(log_j: &LocallyConstant) -> Self {
        assert_eq!(log_j.depth(), 2);
        let m = log_j.alphabet().size();
        let j: Vec<Vec<f64>> =
            (0..m).map(|a| (0..m).map(|b| log_j.value(&[a as Symbol, b as Symbol]).exp()).collect()).collect();
        for b in 0..m {
            let col: f64 = (0..m).map(|a| j[a][b]).sum();
            assert!((col - 1.0).abs() < 1e-12, "not normalized: column {b} sums to {col}");
        }
        let mut pi = vec![1.0 / m as f64; m];
        for _ in 0..5000 {
            pi = (0..m).map(|a| (0..m).map(|b| j[a][b] * pi[b]).sum()).collect();
        }
        Self { m, j, pi }
    }

    pub fn mass(&self, a: usize, b: usize) -> f64 {
        self.j[a][b] * self.pi[b]
    }

    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for a in 0..self.m {
            for b in 0..self.m {
                h -= self.mass(a, b) * self.j[a][b].ln();
            }
        }
        h
    }

    /// `∫ a dμ` for an observable of depth at most 2.
    pub fn integral(&self, obs: &LocallyConstant) -> f64 {
        let obs = obs.deepen(2).unwrap();
        let mut s = 0.0;
        for a in 0..self.m {
            for b in 0..self.m {
                s += self.mass(a, b) * obs.value(&[a as Symbol, b as Symbol]);
            }
        }
        s
    }
}
