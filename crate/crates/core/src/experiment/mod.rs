//! Product sampling, the diffusion sweep and its aggregation.

mod summary;
mod sweep;

use rand::seq::index;

use crate::rng;
use crate::threshold::ThresholdMatrix;

pub use summary::{emit_report, read_summary_csv, summarize, write_summary_csv, GroupKey, PlotRow, SummaryRow};
pub use sweep::{
    enumerate_row_keys, list_networks, load_sweep_inputs, plan_row_keys, read_results_csv, run_row, run_sweep, run_sweep_with,
    write_results_csv, ProductSampling, ResultRow, RowKey, SweepConfig, SweepInputs, DEFAULT_Q_VALUES,
};

/// Value used for NEVER when averaging thresholds.
pub const NEVER_AS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSample {
    /// Selected product ids, ascending.
    pub products: Vec<usize>,
    /// Mean threshold of every product over the pool.
    pub mean_thresholds: Vec<f64>,
    /// Members of each bin (empty when sampling was bypassed).
    pub bins: Vec<Vec<usize>>,
}

/// Mean threshold per product over all agents, NEVER counted as 1.
pub fn mean_thresholds(pool: &ThresholdMatrix) -> Vec<f64> {
    let n = pool.n_agents().max(1) as f64;
    (0..pool.n_products())
        .map(|p| pool.column(p).map(|t| t.value_or(NEVER_AS)).sum::<f64>() / n)
        .collect()
}

/// Split the range of mean thresholds into `n_intervals` equal-width bins
/// and draw `per_interval` products from each. Asking for at least as many
/// products as exist returns all of them.
pub fn sample_products_by_threshold(
    human: &ThresholdMatrix,
    n_intervals: usize,
    per_interval: usize,
    seed: u64,
) -> ProductSample {
    let means = mean_thresholds(human);
    let n = means.len();
    if n_intervals.saturating_mul(per_interval) >= n || n_intervals == 0 {
        return ProductSample { products: (0..n).collect(), mean_thresholds: means, bins: Vec::new() };
    }
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_intervals as f64;
    let mut bins = vec![Vec::new(); n_intervals];
    for (p, &m) in means.iter().enumerate() {
        let b = if width > 0.0 { (((m - lo) / width) as usize).min(n_intervals - 1) } else { 0 };
        bins[b].push(p);
    }
    let mut r = rng::rng(seed);
    let mut products = Vec::new();
    for (b, members) in bins.iter().enumerate() {
        if members.len() <= per_interval {
            if members.len() < per_interval {
                log::info!("threshold bin {b} has only {} products", members.len());
            }
            products.extend(members);
        } else {
            products.extend(index::sample(&mut r, members.len(), per_interval).into_iter().map(|i| members[i]));
        }
    }
    products.sort_unstable();
    ProductSample { products, mean_thresholds: means, bins }
}
