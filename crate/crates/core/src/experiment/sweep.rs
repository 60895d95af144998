use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample_products_by_threshold;
use crate::error::{Error, Result};
use crate::network::{
    assign_population, load_network, node_thresholds, run_diffusion, select_seeds, Network, SeedingPolicy,
};
use crate::rng;
use crate::threshold::ThresholdMatrix;

pub const DEFAULT_Q_VALUES: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSampling {
    pub n_intervals: usize,
    pub per_interval: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub study_id: String,
    #[serde(default = "default_label")]
    pub llm_label: String,
    pub human_thresholds: PathBuf,
    pub artificial_thresholds: PathBuf,
    pub network_dir: PathBuf,
    /// Restrict to these network ids (file stems); all files otherwise.
    #[serde(default)]
    pub networks: Option<Vec<String>>,
    /// Explicit product ids; overrides `product_sampling`.
    #[serde(default)]
    pub products: Option<Vec<usize>>,
    #[serde(default)]
    pub product_sampling: Option<ProductSampling>,
    #[serde(default = "default_q")]
    pub q_values: Vec<f64>,
    #[serde(default = "default_policies")]
    pub policies: Vec<SeedingPolicy>,
    #[serde(default = "default_seed_rate")]
    pub seed_rate: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default)]
    pub master_seed: u64,
    pub output: PathBuf,
}

fn default_label() -> String {
    "llm".into()
}
fn default_q() -> Vec<f64> {
    DEFAULT_Q_VALUES.to_vec()
}
fn default_policies() -> Vec<SeedingPolicy> {
    vec![SeedingPolicy::Random, SeedingPolicy::Degree]
}
fn default_seed_rate() -> f64 {
    0.01
}
fn default_repetitions() -> u32 {
    1
}

impl SweepConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(file)?)
    }

    pub fn validate(&self) -> Result<()> {
        validate_factors(&self.q_values, &self.policies, self.seed_rate, self.repetitions)
    }
}

fn validate_factors(q_values: &[f64], policies: &[SeedingPolicy], seed_rate: f64, repetitions: u32) -> Result<()> {
    if q_values.is_empty() {
        return Err(Error::Empty("q values"));
    }
    for (i, &q) in q_values.iter().enumerate() {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!("q = {q} outside [0, 1]")));
        }
        if q_values[..i].contains(&q) {
            return Err(Error::InvalidArgument(format!("q = {q} listed twice")));
        }
    }
    if policies.is_empty() {
        return Err(Error::Empty("seeding policies"));
    }
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    if !(seed_rate > 0.0 && seed_rate <= 1.0) {
        return Err(Error::InvalidArgument(format!("seed rate {seed_rate} outside (0, 1]")));
    }
    Ok(())
}

/// One cell of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RowKey {
    pub study: String,
    pub llm_label: String,
    pub network_id: String,
    pub product_id: usize,
    pub q: f64,
    pub policy: SeedingPolicy,
    pub repetition: u32,
}

impl RowKey {
    /// Stable text form used for resume checks.
    pub fn id(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}|{}|{}",
            self.study, self.llm_label, self.network_id, self.product_id, self.q, self.policy, self.repetition
        )
    }

    /// Seed for the random parts of a run. `q` is left out so that runs
    /// differing only in `q` share node order, agent draws and seeds.
    pub fn seed(&self, master_seed: u64) -> u64 {
        let key = format!(
            "{}|{}|{}|{}|{}|{}",
            self.study, self.llm_label, self.network_id, self.product_id, self.policy, self.repetition
        );
        rng::derive_str(master_seed, &key)
    }
}

/// Every (network, product, q, policy, repetition) combination, in that
/// nesting order.
pub fn enumerate_row_keys(
    study: &str,
    llm_label: &str,
    network_ids: &[String],
    products: &[usize],
    q_values: &[f64],
    policies: &[SeedingPolicy],
    repetitions: u32,
) -> Vec<RowKey> {
    let mut keys = Vec::with_capacity(network_ids.len() * products.len() * q_values.len() * policies.len());
    for network_id in network_ids {
        for &product_id in products {
            for &q in q_values {
                for &policy in policies {
                    for repetition in 0..repetitions {
                        keys.push(RowKey {
                            study: study.to_string(),
                            llm_label: llm_label.to_string(),
                            network_id: network_id.clone(),
                            product_id,
                            q,
                            policy,
                            repetition,
                        });
                    }
                }
            }
        }
    }
    keys
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub study: String,
    pub llm_label: String,
    pub network_id: String,
    pub product_id: usize,
    pub q: f64,
    pub policy: SeedingPolicy,
    pub repetition: u32,
    pub adoption_rate: f64,
    pub steps: usize,
    pub seed_count: usize,
}

impl ResultRow {
    pub fn key(&self) -> RowKey {
        RowKey {
            study: self.study.clone(),
            llm_label: self.llm_label.clone(),
            network_id: self.network_id.clone(),
            product_id: self.product_id,
            q: self.q,
            policy: self.policy,
            repetition: self.repetition,
        }
    }
}

pub fn write_results_csv(rows: &[ResultRow], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<results>", e))?;
    Ok(())
}

pub fn read_results_csv(reader: impl Read) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let rows = r.deserialize().collect::<Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}

/// Everything a sweep needs, loaded into memory.
#[derive(Debug, Clone)]
pub struct SweepInputs {
    pub study: String,
    pub llm_label: String,
    pub networks: Vec<(String, Network)>,
    pub human: ThresholdMatrix,
    pub artificial: ThresholdMatrix,
    pub products: Vec<usize>,
    pub q_values: Vec<f64>,
    pub policies: Vec<SeedingPolicy>,
    pub seed_rate: f64,
    pub repetitions: u32,
    pub master_seed: u64,
}

impl SweepInputs {
    pub fn row_keys(&self) -> Vec<RowKey> {
        let ids: Vec<String> = self.networks.iter().map(|(id, _)| id.clone()).collect();
        enumerate_row_keys(
            &self.study,
            &self.llm_label,
            &ids,
            &self.products,
            &self.q_values,
            &self.policies,
            self.repetitions,
        )
    }

    fn network(&self, id: &str) -> Result<&Network> {
        self.networks
            .iter()
            .find(|(n, _)| n == id)
            .map(|(_, net)| net)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown network '{id}'")))
    }

    fn validate(&self) -> Result<()> {
        validate_factors(&self.q_values, &self.policies, self.seed_rate, self.repetitions)?;
        if self.networks.is_empty() {
            return Err(Error::Empty("networks"));
        }
        if self.products.is_empty() {
            return Err(Error::Empty("products"));
        }
        for &p in &self.products {
            for m in [&self.human, &self.artificial] {
                if m.n_agents() > 0 && p >= m.n_products() {
                    return Err(Error::InvalidArgument(format!(
                        "product {p} not in a threshold pool with {} products",
                        m.n_products()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Network files in a directory, sorted by file name. The id is the stem.
pub fn list_networks(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if path.is_file() && !name.starts_with('.') {
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name).to_string();
            out.push((id, path));
        }
    }
    out.sort();
    Ok(out)
}

fn read_matrix(path: &Path) -> Result<ThresholdMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ThresholdMatrix::read_csv(file)
}

pub fn load_sweep_inputs(config: &SweepConfig) -> Result<SweepInputs> {
    config.validate()?;
    let human = read_matrix(&config.human_thresholds)?;
    let artificial = read_matrix(&config.artificial_thresholds)?;
    let mut files = list_networks(&config.network_dir)?;
    if let Some(wanted) = &config.networks {
        for id in wanted {
            if !files.iter().any(|(f, _)| f == id) {
                return Err(Error::InvalidArgument(format!("network '{id}' not found")));
            }
        }
        files.retain(|(id, _)| wanted.contains(id));
    }
    let networks = files
        .into_iter()
        .map(|(id, path)| load_network(&path).map(|net| (id, net)))
        .collect::<Result<Vec<_>>>()?;
    let products = match (&config.products, &config.product_sampling) {
        (Some(p), _) => p.clone(),
        (None, Some(s)) => {
            sample_products_by_threshold(&human, s.n_intervals, s.per_interval, config.master_seed).products
        }
        (None, None) => (0..human.n_products()).collect(),
    };
    Ok(SweepInputs {
        study: config.study_id.clone(),
        llm_label: config.llm_label.clone(),
        networks,
        human,
        artificial,
        products,
        q_values: config.q_values.clone(),
        policies: config.policies.clone(),
        seed_rate: config.seed_rate,
        repetitions: config.repetitions,
        master_seed: config.master_seed,
    })
}

/// Row keys a config would produce, without loading networks or running
/// anything. Threshold pools are read only when products are sampled or
/// not listed.
pub fn plan_row_keys(config: &SweepConfig) -> Result<Vec<RowKey>> {
    config.validate()?;
    let mut ids: Vec<String> = list_networks(&config.network_dir)?.into_iter().map(|(id, _)| id).collect();
    if let Some(wanted) = &config.networks {
        for id in wanted {
            if !ids.contains(id) {
                return Err(Error::InvalidArgument(format!("network '{id}' not found")));
            }
        }
        ids.retain(|id| wanted.contains(id));
    }
    let products = match (&config.products, &config.product_sampling) {
        (Some(p), _) => p.clone(),
        (None, sampling) => {
            let human = read_matrix(&config.human_thresholds)?;
            match sampling {
                Some(s) => sample_products_by_threshold(&human, s.n_intervals, s.per_interval, config.master_seed).products,
                None => (0..human.n_products()).collect(),
            }
        }
    };
    Ok(enumerate_row_keys(
        &config.study_id,
        &config.llm_label,
        &ids,
        &products,
        &config.q_values,
        &config.policies,
        config.repetitions,
    ))
}

/// Run one cell. Depends only on the inputs and the key.
pub fn run_row(inputs: &SweepInputs, key: &RowKey) -> Result<ResultRow> {
    let net = inputs.network(&key.network_id)?;
    let base = key.seed(inputs.master_seed);
    let assignment = assign_population(
        net,
        inputs.human.n_agents(),
        inputs.artificial.n_agents(),
        key.q,
        rng::derive(base, &[0]),
    )?;
    let thresholds = node_thresholds(&assignment, &inputs.human, &inputs.artificial, key.product_id)?;
    let seeds = select_seeds(net, key.policy, inputs.seed_rate, rng::derive(base, &[1]))?;
    let result = run_diffusion(net, &thresholds, &seeds)?;
    Ok(ResultRow {
        study: key.study.clone(),
        llm_label: key.llm_label.clone(),
        network_id: key.network_id.clone(),
        product_id: key.product_id,
        q: key.q,
        policy: key.policy,
        repetition: key.repetition,
        adoption_rate: result.adoption_rate,
        steps: result.steps_to_fixation,
        seed_count: seeds.len(),
    })
}

/// Run every cell not in `done`, handing finished rows to `sink` in
/// enumeration order, one chunk at a time.
pub fn run_sweep_with(
    inputs: &SweepInputs,
    done: &HashSet<String>,
    mut sink: impl FnMut(&[ResultRow]) -> Result<()>,
) -> Result<usize> {
    inputs.validate()?;
    let pending: Vec<RowKey> = inputs.row_keys().into_iter().filter(|k| !done.contains(&k.id())).collect();
    for chunk in pending.chunks(CHUNK) {
        let rows = chunk.par_iter().map(|k| run_row(inputs, k)).collect::<Result<Vec<_>>>()?;
        sink(&rows)?;
    }
    Ok(pending.len())
}

/// Load inputs, skip rows already in the output file, append the rest and
/// return the full result set in enumeration order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    let inputs = load_sweep_inputs(config)?;
    let path = &config.output;
    let existing = if path.exists() {
        read_results_csv(File::open(path).map_err(|e| Error::io(path, e))?)?
    } else {
        Vec::new()
    };
    let done: HashSet<String> = existing.iter().map(|r| r.key().id()).collect();
    if !existing.is_empty() {
        log::info!("{}: {} rows already present", path.display(), existing.len());
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let header_needed = existing.is_empty();
    let file = OpenOptions::new()
        .create(true)
        .append(!header_needed)
        .write(true)
        .truncate(header_needed)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new().has_headers(header_needed).from_writer(file);
    let mut fresh = Vec::new();
    let ran = run_sweep_with(&inputs, &done, |rows| {
        for row in rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        fresh.extend_from_slice(rows);
        Ok(())
    })?;
    log::info!("ran {ran} diffusion simulations");

    let mut by_id: std::collections::HashMap<String, ResultRow> =
        existing.into_iter().chain(fresh).map(|r| (r.key().id(), r)).collect();
    Ok(inputs.row_keys().iter().filter_map(|k| by_id.remove(&k.id())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threshold::{AgentRow, Pool, Threshold};

    fn matrix(pool: Pool, n_agents: usize, n_products: usize, scale: f64) -> ThresholdMatrix {
        let agents = (0..n_agents).map(|i| AgentRow { agent_id: format!("{pool}{i}"), pool }).collect();
        let entries = (0..n_agents * n_products)
            .map(|i| Threshold::Value(scale * ((i * 37) % 11) as f64 / 10.0))
            .collect();
        ThresholdMatrix::new(agents, n_products, entries).unwrap()
    }

    fn lattice(n: usize) -> Network {
        let mut edges = Vec::new();
        for i in 0..n {
            edges.push((i, (i + 1) % n));
            edges.push((i, (i + 2) % n));
        }
        Network::from_edges(n, &edges)
    }

    fn inputs() -> SweepInputs {
        SweepInputs {
            study: "PS".into(),
            llm_label: "mock".into(),
            networks: vec![("a".into(), lattice(30)), ("b".into(), lattice(45))],
            human: matrix(Pool::Human, 8, 5, 1.0),
            artificial: matrix(Pool::Artificial, 8, 5, 0.5),
            products: vec![0, 3],
            q_values: DEFAULT_Q_VALUES.to_vec(),
            policies: vec![SeedingPolicy::Random, SeedingPolicy::Degree],
            seed_rate: 0.05,
            repetitions: 2,
            master_seed: 17,
        }
    }

    #[test]
    fn row_count_is_product_of_factors() {
        let keys = inputs().row_keys();
        assert_eq!(keys.len(), 2 * 2 * 6 * 2 * 2);
        let ids: HashSet<String> = keys.iter().map(RowKey::id).collect();
        assert_eq!(ids.len(), keys.len());
    }

    #[test]
    fn paper_shaped_enumeration() {
        let nets: Vec<String> = (0..18).map(|i| format!("n{i}")).collect();
        let products: Vec<usize> = (0..36).collect();
        let policies = [SeedingPolicy::Random, SeedingPolicy::Degree];
        let mut total = 0;
        for study in ["PS", "AA"] {
            for label in ["gpt", "gemini"] {
                let keys = enumerate_row_keys(study, label, &nets, &products, &DEFAULT_Q_VALUES, &policies, 1);
                assert_eq!(keys.len(), 7776);
                total += keys.len();
            }
        }
        assert_eq!(total, 31_104);
        let one = enumerate_row_keys("PS", "x", &nets[..1], &[0], &[0.0], &policies[..1], 1);
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn rows_reproduce_in_isolation() {
        let inp = inputs();
        let mut all = Vec::new();
        run_sweep_with(&inp, &HashSet::new(), |rows| {
            all.extend_from_slice(rows);
            Ok(())
        })
        .unwrap();
        assert_eq!(all.len(), inp.row_keys().len());
        for row in all.iter().step_by(7) {
            assert_eq!(&run_row(&inp, &row.key()).unwrap(), row);
        }
        assert!(all.iter().all(|r| (0.0..=1.0).contains(&r.adoption_rate)));
    }

    #[test]
    fn coupled_rows_are_monotone_in_q() {
        let inp = inputs();
        for net in ["a", "b"] {
            for &product in &inp.products {
                for policy in [SeedingPolicy::Random, SeedingPolicy::Degree] {
                    let rates: Vec<f64> = DEFAULT_Q_VALUES
                        .iter()
                        .map(|&q| {
                            let key = RowKey {
                                study: "PS".into(),
                                llm_label: "mock".into(),
                                network_id: net.into(),
                                product_id: product,
                                q,
                                policy,
                                repetition: 0,
                            };
                            run_row(&inp, &key).unwrap().adoption_rate
                        })
                        .collect();
                    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
                }
            }
        }
    }

    #[test]
    fn invalid_factors_are_rejected() {
        let mut inp = inputs();
        inp.q_values = vec![0.0, 0.0];
        assert!(run_sweep_with(&inp, &HashSet::new(), |_| Ok(())).is_err());
        let mut inp = inputs();
        inp.repetitions = 0;
        assert!(run_sweep_with(&inp, &HashSet::new(), |_| Ok(())).is_err());
        let mut inp = inputs();
        inp.products = vec![9];
        assert!(run_sweep_with(&inp, &HashSet::new(), |_| Ok(())).is_err());
    }

    #[test]
    fn config_defaults_from_json() {
        let cfg: SweepConfig = serde_json::from_str(
            r#"{"study_id":"AA","human_thresholds":"h.csv","artificial_thresholds":"a.csv",
                "network_dir":"nets","output":"out.csv"}"#,
        )
        .unwrap();
        assert_eq!(cfg.q_values, DEFAULT_Q_VALUES.to_vec());
        assert_eq!(cfg.policies, vec![SeedingPolicy::Random, SeedingPolicy::Degree]);
        assert_eq!(cfg.seed_rate, 0.01);
        assert_eq!(cfg.repetitions, 1);
        cfg.validate().unwrap();
    }

    #[test]
    fn results_csv_round_trip() {
        let row = ResultRow {
            study: "PS".into(),
            llm_label: "mock".into(),
            network_id: "n1".into(),
            product_id: 3,
            q: 0.2,
            policy: SeedingPolicy::Degree,
            repetition: 0,
            adoption_rate: 0.125,
            steps: 4,
            seed_count: 2,
        };
        let mut buf = Vec::new();
        write_results_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "study,llm_label,network_id,product_id,q,policy,repetition,adoption_rate,steps,seed_count\n"
        ));
        assert_eq!(read_results_csv(buf.as_slice()).unwrap(), vec![row]);
    }
}
