//! Multinomial-logit choice probabilities with unit scale.

/// Softmax over the utilities of every option in a task (none included).
pub fn choice_probabilities(utilities: &[f64]) -> Vec<f64> {
    let max = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = utilities.iter().map(|u| (u - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    let probs: Vec<f64> = exp.into_iter().map(|e| e / total).collect();
    debug_assert!(
        utilities.is_empty() || (probs.iter().sum::<f64>() - 1.0).abs() < 1e-9,
        "choice probabilities must sum to one"
    );
    probs
}

/// log P(chosen) under the logit model, computed with log-sum-exp.
pub fn log_choice_probability(utilities: &[f64], chosen: usize) -> f64 {
    let max = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + utilities.iter().map(|u| (u - max).exp()).sum::<f64>().ln();
    utilities[chosen] - lse
}

/// Index of the highest utility; ties go to the lowest index.
pub fn argmax(utilities: &[f64]) -> usize {
    let mut best = 0;
    for (i, &u) in utilities.iter().enumerate().skip(1) {
        if u > utilities[best] {
            best = i;
        }
    }
    best
}
