//! Undirected networks, population assignment, seeding and threshold
//! diffusion.

mod diffusion;
mod population;
mod sampling;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub use diffusion::{run_diffusion, DiffusionResult};
pub use population::{assign_population, node_thresholds, select_seeds, AgentAssignment, SeedingPolicy};
pub use sampling::{stratified_network_sample, CellReport, NetworkSummary, StratifiedSample, SizeClass};

/// Simple undirected graph over dense node indices `0..n`. Each index keeps
/// the integer label it had in the source file; indices follow label order.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    labels: Vec<i64>,
    adjacency: Vec<Vec<usize>>,
    n_edges: usize,
}

/// What was dropped while building a network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CleaningStats {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

impl Network {
    /// Build from labelled edges. Self-loops and repeated edges are dropped
    /// and counted; `isolated` adds labels without edges.
    pub fn from_labeled_edges(edges: &[(i64, i64)], isolated: &[i64]) -> (Network, CleaningStats) {
        let mut stats = CleaningStats::default();
        let mut labels: BTreeSet<i64> = isolated.iter().copied().collect();
        let mut unique: BTreeSet<(i64, i64)> = BTreeSet::new();
        for &(a, b) in edges {
            labels.insert(a);
            labels.insert(b);
            if a == b {
                stats.self_loops += 1;
            } else if !unique.insert((a.min(b), a.max(b))) {
                stats.duplicate_edges += 1;
            }
        }
        let labels: Vec<i64> = labels.into_iter().collect();
        let index: BTreeMap<i64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut adjacency = vec![Vec::new(); labels.len()];
        for &(a, b) in &unique {
            let (i, j) = (index[&a], index[&b]);
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let n_edges = unique.len();
        (Network { labels, adjacency, n_edges }, stats)
    }

    /// Build from edges over indices `0..n_nodes` (labels equal indices).
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize)]) -> Network {
        let labeled: Vec<(i64, i64)> = edges.iter().map(|&(a, b)| (a as i64, b as i64)).collect();
        let all: Vec<i64> = (0..n_nodes as i64).collect();
        Network::from_labeled_edges(&labeled, &all).0
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn label(&self, v: usize) -> i64 {
        self.labels[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }
}

/// Parse an edge list: two integers per line separated by whitespace or a
/// comma; lines starting with '#' are comments; a line with one integer
/// declares an isolated node.
pub fn parse_edge_list(reader: impl Read) -> Result<(Network, CleaningStats)> {
    let mut edges = Vec::new();
    let mut isolated = Vec::new();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io("<edge list>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parse = |f: &str| {
            f.parse::<i64>().map_err(|_| {
                Error::InvalidNetwork(format!("line {}: '{f}' is not an integer node id", lineno + 1))
            })
        };
        match fields.as_slice() {
            [a] => isolated.push(parse(a)?),
            [a, b, ..] => edges.push((parse(a)?, parse(b)?)),
            [] => {}
        }
    }
    let (net, stats) = Network::from_labeled_edges(&edges, &isolated);
    if net.n_nodes() == 0 {
        return Err(Error::InvalidNetwork("network has no nodes".into()));
    }
    Ok((net, stats))
}

pub fn load_network(path: &Path) -> Result<Network> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (net, stats) = parse_edge_list(file)?;
    if stats.self_loops > 0 || stats.duplicate_edges > 0 {
        log::info!(
            "{}: dropped {} self-loops and {} duplicate edges",
            path.display(),
            stats.self_loops,
            stats.duplicate_edges
        );
    }
    Ok(net)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkMetrics {
    pub n_nodes: usize,
    pub n_edges: usize,
    /// 3 x triangles / connected triples (0 when there are no triples).
    pub global_transitivity: f64,
    pub degrees: Vec<usize>,
}

pub fn network_metrics(net: &Network) -> NetworkMetrics {
    let mut triangles = 0usize;
    for (u, v) in net.edges() {
        // Count common neighbours w > v to see each triangle once.
        let (a, b) = (net.neighbors(u), net.neighbors(v));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if a[i] > v {
                        triangles += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    let degrees: Vec<usize> = (0..net.n_nodes()).map(|v| net.degree(v)).collect();
    let triples: usize = degrees.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
    NetworkMetrics {
        n_nodes: net.n_nodes(),
        n_edges: net.n_edges(),
        global_transitivity: if triples == 0 { 0.0 } else { 3.0 * triangles as f64 / triples as f64 },
        degrees,
    }
}
