use serde::Serialize;

use super::Network;
use crate::error::{Error, Result};
use crate::threshold::Threshold;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionResult {
    /// Nodes adopting at each step; step 0 holds the seeds.
    pub new_adopters: Vec<Vec<usize>>,
    /// Step at which each node adopted, if it did.
    pub adoption_step: Vec<Option<u32>>,
    /// Last step with a new adoption.
    pub steps_to_fixation: usize,
    /// Final adopters (seeds included) over all nodes.
    pub adoption_rate: f64,
}

impl DiffusionResult {
    pub fn n_adopters(&self) -> usize {
        self.adoption_step.iter().filter(|s| s.is_some()).count()
    }

    /// Adopters up to and including `step`.
    pub fn adopters_at(&self, step: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.new_adopters.iter().take(step + 1).flatten().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn final_adopters(&self) -> Vec<usize> {
        self.adopters_at(self.new_adopters.len())
    }
}

/// Synchronous threshold dynamics.
///
/// A non-adopter adopts at step t+1 when at least one neighbour had adopted
/// by step t and the adopted share of all its neighbours reaches its
/// threshold. Adoption is permanent; the run stops at the first step
/// without new adopters.
pub fn run_diffusion(net: &Network, thresholds: &[Threshold], seeds: &[usize]) -> Result<DiffusionResult> {
    let n = net.n_nodes();
    if thresholds.len() < n {
        return Err(Error::MissingThreshold(thresholds.len()));
    }
    let mut adoption_step: Vec<Option<u32>> = vec![None; n];
    let mut adopted_neighbors = vec![0u32; n];
    let mut frontier = Vec::with_capacity(seeds.len());
    for &s in seeds {
        if s >= n {
            return Err(Error::InvalidArgument(format!("seed {s} is not a node")));
        }
        if adoption_step[s].is_none() {
            adoption_step[s] = Some(0);
            frontier.push(s);
        }
    }
    frontier.sort_unstable();
    let mut new_adopters = vec![frontier.clone()];
    let mut candidate_mark = vec![false; n];

    let mut step = 0u32;
    while !frontier.is_empty() {
        for &v in &frontier {
            for &u in net.neighbors(v) {
                adopted_neighbors[u] += 1;
            }
        }
        // Only neighbours of the last adopters saw their exposure change.
        let mut candidates = Vec::new();
        for &v in &frontier {
            for &u in net.neighbors(v) {
                if adoption_step[u].is_none() && !candidate_mark[u] {
                    candidate_mark[u] = true;
                    candidates.push(u);
                }
            }
        }
        step += 1;
        let mut next: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&u| {
                let k = adopted_neighbors[u];
                k >= 1 && thresholds[u].is_met_by(f64::from(k) / net.degree(u) as f64)
            })
            .collect();
        for &u in &candidates {
            candidate_mark[u] = false;
        }
        next.sort_unstable();
        for &u in &next {
            adoption_step[u] = Some(step);
        }
        if !next.is_empty() {
            new_adopters.push(next.clone());
        }
        frontier = next;
    }

    let total = adoption_step.iter().filter(|s| s.is_some()).count();
    Ok(DiffusionResult {
        steps_to_fixation: new_adopters.len() - 1,
        new_adopters,
        adoption_step,
        adoption_rate: if n == 0 { 0.0 } else { total as f64 / n as f64 },
    })
}
