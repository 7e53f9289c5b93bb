//! Closed-form sums for two diagonal maps on the full shift.
//!
//! For `A_0 = diag(b_1, .., b_d)` and `A_1 = diag(c_1, .., c_d)` the product
//! along a word depends only on the number `k` of zeros it contains, so any
//! sum over `{0,1}ⁿ` of a function of the product collapses to a binomial
//! sum with `n + 1` terms.

use crate::error::{Error, Result};
use crate::linalg::{log_phi_raw, Matrix};
use crate::numeric::{log_binomials, log_sum_exp};

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPair {
    log_first: Vec<f64>,
    log_second: Vec<f64>,
}

impl DiagonalPair {
    pub fn new(matrices: &[Matrix]) -> Result<Self> {
        if matrices.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "diagonal fast path needs exactly two maps, got {}",
                matrices.len()
            )));
        }
        let d = matrices[0].dim();
        if matrices[1].dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrices[1].dim(),
            });
        }
        let mut logs = Vec::with_capacity(2);
        for (i, m) in matrices.iter().enumerate() {
            if !m.is_diagonal() {
                return Err(Error::NotDiagonal { map: i });
            }
            let entries = m.diagonal_entries();
            if entries.iter().any(|&e| e == 0.0) {
                return Err(Error::SingularMatrix);
            }
            logs.push(entries.iter().map(|e| e.abs().ln()).collect::<Vec<_>>());
        }
        let log_second = logs.pop().unwrap();
        let log_first = logs.pop().unwrap();
        Ok(DiagonalPair {
            log_first,
            log_second,
        })
    }

    pub fn dim(&self) -> usize {
        self.log_first.len()
    }

    /// Log singular values, sorted nonincreasing, of a product of length
    /// `n` with `zeros` factors `A_0`.
    pub fn log_alphas(&self, zeros: usize, n: usize) -> Vec<f64> {
        let (k, rest) = (zeros as f64, (n - zeros) as f64);
        let mut v: Vec<f64> = self
            .log_first
            .iter()
            .zip(&self.log_second)
            .map(|(a, b)| k * a + rest * b)
            .collect();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    }

    /// `log Σ_{w ∈ {0,1}ⁿ} φᵗ(A_w)`.
    pub fn log_partition_sum(&self, t: f64, n: usize) -> f64 {
        let binom = log_binomials(n);
        let terms: Vec<f64> = (0..=n)
            .map(|k| binom[k] + log_phi_raw(t, &self.log_alphas(k, n)))
            .collect();
        log_sum_exp(&terms)
    }

    fn bernoulli_weights(p0: f64, n: usize) -> Vec<f64> {
        let binom = log_binomials(n);
        let (l0, l1) = (p0.ln(), (1.0 - p0).ln());
        (0..=n)
            .map(|k| {
                let log_w = binom[k]
                    + if k > 0 { k as f64 * l0 } else { 0.0 }
                    + if k < n { (n - k) as f64 * l1 } else { 0.0 };
                log_w.exp()
            })
            .collect()
    }

    /// `(1/n) Σ_w μ([w]) log φᵗ(A_w)` for the Bernoulli measure with
    /// `μ([0]) = p0`.
    pub fn bernoulli_energy(&self, p0: f64, t: f64, n: usize) -> f64 {
        let w = Self::bernoulli_weights(p0, n);
        (0..=n)
            .map(|k| w[k] * log_phi_raw(t, &self.log_alphas(k, n)))
            .sum::<f64>()
            / n as f64
    }

    /// Depth-`n` Lyapunov exponents `(1/n) Σ_w μ([w]) log α_l(A_w)` for the
    /// Bernoulli measure with `μ([0]) = p0`.
    pub fn bernoulli_lyapunov(&self, p0: f64, n: usize) -> Vec<f64> {
        let w = Self::bernoulli_weights(p0, n);
        let mut acc = vec![0.0; self.dim()];
        for (k, wk) in w.iter().enumerate() {
            for (a, la) in acc.iter_mut().zip(self.log_alphas(k, n)) {
                *a += wk * la;
            }
        }
        acc.iter().map(|a| a / n as f64).collect()
    }
}
