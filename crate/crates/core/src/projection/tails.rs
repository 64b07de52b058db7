//! Upper-tail probabilities of the Poisson and Poisson-binomial distributions.
//!
//! Both are summed over the tail itself rather than as `1 - cdf`, so that
//! p-values far below machine epsilon keep their relative precision.

use statrs::function::gamma::ln_gamma;

/// `P(X >= k)` for `X ~ Poisson(mu)`.
pub fn poisson_upper_tail(mu: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mu <= 0.0 {
        return 0.0;
    }
    let log_pmf = |j: u64| -mu + j as f64 * mu.ln() - ln_gamma(j as f64 + 1.0);
    if k as f64 > mu {
        // Terms decrease from j = k onward.
        let mut term = log_pmf(k).exp();
        let mut sum = 0.0;
        let mut j = k;
        while term > 0.0 && term > sum * 1e-17 {
            sum += term;
            j += 1;
            term *= mu / j as f64;
        }
        sum.min(1.0)
    } else {
        // The tail holds at least about half the mass: 1 - cdf is safe here.
        // Terms increase up to j = k - 1 <= mu, so walk downward from there.
        let mut term = log_pmf(k - 1).exp();
        let mut lower = 0.0;
        let mut j = k - 1;
        loop {
            lower += term;
            if j == 0 || term < lower * 1e-17 {
                break;
            }
            term *= j as f64 / mu;
            j -= 1;
        }
        (1.0 - lower).clamp(0.0, 1.0)
    }
}

/// `P(X >= k)` for a sum of independent Bernoulli variables with success
/// probabilities `probs`, by dynamic programming over the truncated state
/// space `{0, .., k-1, >= k}`. Cost is `O(n k)`.
pub fn poisson_binomial_upper_tail(probs: &[f64], k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > probs.len() {
        return 0.0;
    }
    let mut pmf = vec![0.0; k];
    pmf[0] = 1.0;
    let mut tail = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        tail += pmf[k - 1] * p;
        let top = (i + 1).min(k - 1);
        for j in (1..=top).rev() {
            pmf[j] = pmf[j] * q + pmf[j - 1] * p;
        }
        pmf[0] *= q;
    }
    tail.clamp(0.0, 1.0)
}

/// Full probability mass function of a Poisson-binomial variable.
pub fn poisson_binomial_pmf(probs: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; probs.len() + 1];
    pmf[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            pmf[j] = pmf[j] * (1.0 - p) + pmf[j - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    pmf
}
