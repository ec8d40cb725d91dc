use serde::{Deserialize, Serialize};

/// Result of Holm's step-down procedure, aligned with the input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmOutcome {
    pub rejected: Vec<bool>,
    /// The threshold α/(m−k+1) each test faced at its sorted rank k.
    pub thresholds: Vec<f64>,
}

impl HolmOutcome {
    pub fn num_rejected(&self) -> usize {
        self.rejected.iter().filter(|&&r| r).count()
    }
}

/// Sorts p-values ascending (ties keep input order) and rejects while
/// `p_(k) ≤ α/(m−k+1)`, stopping at the first acceptance.
pub fn holm_bonferroni(p_values: &[f64], alpha: f64) -> HolmOutcome {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
    let mut rejected = vec![false; m];
    let mut thresholds = vec![0.0; m];
    let mut stopped = false;
    for (rank, &i) in order.iter().enumerate() {
        let threshold = alpha / (m - rank) as f64;
        thresholds[i] = threshold;
        if !stopped && p_values[i] <= threshold {
            rejected[i] = true;
        } else {
            stopped = true;
        }
    }
    HolmOutcome { rejected, thresholds }
}
