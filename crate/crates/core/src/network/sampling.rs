use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::stats::quantile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub network_id: String,
    pub n_nodes: usize,
    pub transitivity: f64,
}

/// Tercile class of a value, cut at the 33rd and 67th percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Low,
    Medium,
    High,
}

impl SizeClass {
    const ALL: [SizeClass; 3] = [SizeClass::Low, SizeClass::Medium, SizeClass::High];

    fn of(x: f64, lo: f64, hi: f64) -> SizeClass {
        if x < lo {
            SizeClass::Low
        } else if x > hi {
            SizeClass::High
        } else {
            SizeClass::Medium
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub size: SizeClass,
    pub transitivity: SizeClass,
    pub members: Vec<String>,
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratifiedSample {
    pub cells: Vec<CellReport>,
}

impl StratifiedSample {
    pub fn selected(&self) -> Vec<String> {
        self.cells.iter().flat_map(|c| c.selected.iter().cloned()).collect()
    }
}

/// Pick two networks at random from each size x transitivity tercile cell.
/// Cells with fewer than two members contribute everything they have.
pub fn stratified_network_sample(networks: &[NetworkSummary], seed: u64) -> StratifiedSample {
    if networks.is_empty() {
        log::warn!("no networks to sample from");
        return StratifiedSample { cells: Vec::new() };
    }
    let sizes: Vec<f64> = networks.iter().map(|n| n.n_nodes as f64).collect();
    let trans: Vec<f64> = networks.iter().map(|n| n.transitivity).collect();
    let (s_lo, s_hi) = (quantile(&sizes, 0.33), quantile(&sizes, 0.67));
    let (t_lo, t_hi) = (quantile(&trans, 0.33), quantile(&trans, 0.67));
    let mut r = rng::rng(seed);
    let mut cells = Vec::with_capacity(9);
    for size in SizeClass::ALL {
        for tc in SizeClass::ALL {
            let members: Vec<&NetworkSummary> = networks
                .iter()
                .filter(|n| {
                    SizeClass::of(n.n_nodes as f64, s_lo, s_hi) == size
                        && SizeClass::of(n.transitivity, t_lo, t_hi) == tc
                })
                .collect();
            let selected: Vec<String> = if members.len() <= 2 {
                if members.len() < 2 {
                    log::warn!("cell size={size:?} transitivity={tc:?} has {} networks", members.len());
                }
                members.iter().map(|n| n.network_id.clone()).collect()
            } else {
                let mut picks = index::sample(&mut r, members.len(), 2).into_vec();
                picks.sort_unstable();
                picks.into_iter().map(|i| members[i].network_id.clone()).collect()
            };
            cells.push(CellReport {
                size,
                transitivity: tc,
                members: members.iter().map(|n| n.network_id.clone()).collect(),
                selected,
            });
        }
    }
    StratifiedSample { cells }
}
