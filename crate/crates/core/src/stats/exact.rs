//! Two-sided exact tests by the "sum of no-more-probable outcomes" rule.
//!
//! Point probabilities are computed relative to the distribution's mode with
//! the ratio recurrence of consecutive terms, which keeps every weight in
//! [0, 1] and avoids the cancellation of differencing log-gamma values.

use serde::{Deserialize, Serialize};

use super::{StatsError, TIE_SLACK};

/// `[[a, b], [c, d]]`: rows are the two samples, columns outcomes 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

/// Two-sided Fisher's exact test with fixed margins.
pub fn fisher_exact_two_sided(t: &ContingencyTable2x2) -> Result<f64, StatsError> {
    let n = t.total();
    if n == 0 {
        return Err(StatsError::EmptyTable);
    }
    let r1 = t.a + t.b;
    let r2 = t.c + t.d;
    let c1 = t.a + t.c;
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    if lo == hi {
        return Ok(1.0);
    }
    // P(x+1)/P(x) for the hypergeometric count in cell a
    let ratio = |x: u64| -> f64 {
        ((r1 - x) as f64 * (c1 - x) as f64) / ((x + 1) as f64 * (r2 + x + 1 - c1) as f64)
    };
    // mode of the hypergeometric distribution
    let mode = (((r1 + 1) as f64 * (c1 + 1) as f64 / (n + 2) as f64).floor() as u64).clamp(lo, hi);
    Ok(two_sided(lo, hi, mode, t.a, ratio))
}

/// Two-sided exact binomial test of `successes` out of `trials` against `p0`.
pub fn binomial_two_sided(successes: u64, trials: u64, p0: f64) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(StatsError::InvalidProbability(p0));
    }
    if successes > trials {
        return Err(StatsError::InvalidCount { successes, trials });
    }
    if trials == 0 {
        return Ok(1.0);
    }
    if p0 == 0.0 {
        return Ok(if successes == 0 { 1.0 } else { 0.0 });
    }
    if p0 == 1.0 {
        return Ok(if successes == trials { 1.0 } else { 0.0 });
    }
    let odds = p0 / (1.0 - p0);
    let ratio = |k: u64| -> f64 { (trials - k) as f64 / (k + 1) as f64 * odds };
    let mode = (((trials + 1) as f64 * p0).floor() as u64).min(trials);
    Ok(two_sided(0, trials, mode, successes, ratio))
}

/// Sums the weights no larger than the observed one over the support
/// `lo..=hi`, with weights built outwards from `mode` by `ratio(x) = w(x+1)/w(x)`.
fn two_sided(lo: u64, hi: u64, mode: u64, observed: u64, ratio: impl Fn(u64) -> f64) -> f64 {
    let len = (hi - lo + 1) as usize;
    let mut w = vec![0.0f64; len];
    let m = (mode - lo) as usize;
    w[m] = 1.0;
    for i in m + 1..len {
        w[i] = w[i - 1] * ratio(lo + i as u64 - 1);
    }
    for i in (0..m).rev() {
        w[i] = w[i + 1] / ratio(lo + i as u64);
    }
    // the formula mode can sit one step off the true maximum; renormalise
    let peak = w.iter().cloned().fold(0.0, f64::max);
    let total: f64 = w.iter().sum::<f64>() / peak;
    let obs = w[(observed - lo) as usize] / peak;
    let cut = obs * (1.0 + TIE_SLACK);
    let tail: f64 = w.iter().map(|x| x / peak).filter(|&x| x <= cut).sum();
    (tail / total).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_table_is_one() {
        let p = fisher_exact_two_sided(&ContingencyTable2x2::new(5, 5, 5, 5)).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_table() {
        let p = fisher_exact_two_sided(&ContingencyTable2x2::new(10, 0, 0, 10)).unwrap();
        let want = 2.0 / 184_756.0;
        assert!((p - want).abs() / want < 1e-12, "{p}");
    }

    #[test]
    fn empty_table_errors() {
        assert_eq!(fisher_exact_two_sided(&ContingencyTable2x2::new(0, 0, 0, 0)), Err(StatsError::EmptyTable));
    }

    #[test]
    fn degenerate_margins() {
        assert_eq!(fisher_exact_two_sided(&ContingencyTable2x2::new(100, 0, 100, 0)).unwrap(), 1.0);
    }

    #[test]
    fn binomial_cases() {
        assert_eq!(binomial_two_sided(100, 100, 1.0).unwrap(), 1.0);
        assert_eq!(binomial_two_sided(100, 100, 0.0).unwrap(), 0.0);
        // symmetric: P(X<=2)+P(X>=8) for Bin(10, 0.5) = 112/1024
        let p = binomial_two_sided(2, 10, 0.5).unwrap();
        assert!((p - 112.0 / 1024.0).abs() < 1e-14);
        assert!((binomial_two_sided(5, 10, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!(binomial_two_sided(1, 2, 1.5).is_err());
    }
}
