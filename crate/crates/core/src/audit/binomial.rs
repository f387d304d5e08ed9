//! Exact binomial tail probabilities, summed in log space.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialTest {
    /// `P(X >= k)` under `Binomial(n, p0)`.
    pub p_one_sided: f64,
    /// `min(1, 2 min(P(X <= k), P(X >= k)))`.
    pub p_two_sided: f64,
}

fn ln_pmf(j: u64, n: u64, ln_p: f64, ln_q: f64) -> f64 {
    let (j, n) = (j as f64, n as f64);
    ln_gamma(n + 1.0) - ln_gamma(j + 1.0) - ln_gamma(n - j + 1.0) + j * ln_p + (n - j) * ln_q
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Natural log of `P(lo <= X <= hi)`.
fn ln_range(lo: u64, hi: u64, n: u64, p0: f64) -> f64 {
    let (ln_p, ln_q) = (p0.ln(), (1.0 - p0).ln());
    log_sum_exp((lo..=hi).map(move |j| ln_pmf(j, n, ln_p, ln_q)))
}

pub fn binomial_test(k: u64, n: u64, p0: f64) -> Result<BinomialTest> {
    if n == 0 {
        return Err(Error::validation("binomial test needs n >= 1"));
    }
    if k > n {
        return Err(Error::validation(format!("k = {k} exceeds n = {n}")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::validation(format!("p0 must be in (0, 1), got {p0}")));
    }
    let upper = ln_range(k, n, n, p0).exp().min(1.0);
    let lower = ln_range(0, k, n, p0).exp().min(1.0);
    Ok(BinomialTest {
        p_one_sided: upper,
        p_two_sided: (2.0 * upper.min(lower)).min(1.0),
    })
}
