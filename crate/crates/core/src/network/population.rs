use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::Network;
use crate::error::{Error, Result};
use crate::rng;
use crate::threshold::{Pool, Threshold, ThresholdMatrix};

/// Which pool each node draws from and which agent of that pool it got.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentAssignment {
    pub pools: Vec<Pool>,
    pub agents: Vec<usize>,
}

impl AgentAssignment {
    pub fn n_artificial(&self) -> usize {
        self.pools.iter().filter(|&&p| p == Pool::Artificial).count()
    }
}

/// Assign a pool and an agent to every node.
///
/// Exactly `round(q * n)` nodes are artificial. Nodes are ranked by one
/// fixed seeded permutation, so the artificial set only grows with `q`.
/// Each node also gets one uniform draw `u` and takes agent
/// `floor(u * pool_size)` from whichever pool it ends up in.
pub fn assign_population(
    net: &Network,
    human_pool_size: usize,
    artificial_pool_size: usize,
    q: f64,
    seed: u64,
) -> Result<AgentAssignment> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("artificial fraction {q} outside [0, 1]")));
    }
    let n = net.n_nodes();
    let n_artificial = (q * n as f64).round() as usize;
    if n_artificial > 0 && artificial_pool_size == 0 {
        return Err(Error::Empty("artificial agent pool"));
    }
    if n_artificial < n && human_pool_size == 0 {
        return Err(Error::Empty("human agent pool"));
    }
    let mut r = rng::rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let u: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();

    let mut pools = vec![Pool::Human; n];
    for &v in &order[..n_artificial] {
        pools[v] = Pool::Artificial;
    }
    let agents = (0..n)
        .map(|v| {
            let size = match pools[v] {
                Pool::Human => human_pool_size,
                Pool::Artificial => artificial_pool_size,
            };
            ((u[v] * size as f64) as usize).min(size - 1)
        })
        .collect();
    Ok(AgentAssignment { pools, agents })
}

/// Per-node thresholds for one product under an assignment.
pub fn node_thresholds(
    assignment: &AgentAssignment,
    human: &ThresholdMatrix,
    artificial: &ThresholdMatrix,
    product: usize,
) -> Result<Vec<Threshold>> {
    assignment
        .pools
        .iter()
        .zip(&assignment.agents)
        .map(|(&pool, &agent)| {
            let m = match pool {
                Pool::Human => human,
                Pool::Artificial => artificial,
            };
            if product >= m.n_products() {
                return Err(Error::InvalidArgument(format!("product {product} out of range")));
            }
            if agent >= m.n_agents() {
                return Err(Error::Empty("agent pool"));
            }
            Ok(m.get(agent, product))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedingPolicy {
    Random,
    Degree,
}

impl fmt::Display for SeedingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedingPolicy::Random => "random",
            SeedingPolicy::Degree => "degree",
        })
    }
}

impl FromStr for SeedingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(SeedingPolicy::Random),
            "degree" => Ok(SeedingPolicy::Degree),
            other => Err(Error::InvalidArgument(format!("unknown seeding policy '{other}'"))),
        }
    }
}

/// Pick `max(1, round(rate * n))` seed nodes. Degree seeding takes the
/// highest degrees, breaking ties by ascending node label.
pub fn select_seeds(net: &Network, policy: SeedingPolicy, rate: f64, seed: u64) -> Result<Vec<usize>> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidArgument(format!("seed rate {rate} outside (0, 1]")));
    }
    let n = net.n_nodes();
    if n == 0 {
        return Err(Error::InvalidNetwork("network has no nodes".into()));
    }
    let k = ((rate * n as f64).round() as usize).clamp(1, n);
    let mut seeds: Vec<usize> = match policy {
        SeedingPolicy::Random => rand::seq::index::sample(&mut rng::rng(seed), n, k).into_vec(),
        SeedingPolicy::Degree => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| net.degree(b).cmp(&net.degree(a)).then(net.label(a).cmp(&net.label(b))));
            order.truncate(k);
            order
        }
    };
    seeds.sort_unstable();
    Ok(seeds)
}
