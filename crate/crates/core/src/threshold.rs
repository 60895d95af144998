//! Adoption thresholds and attribute importances from individual parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::CodingSpec;
use crate::conjoint::ProductProfile;
use crate::error::{Error, Result};
use crate::params::IndividualParams;

/// Minimum fraction of adopting neighbours needed to adopt, or `Never` when
/// no social signal in [0, 1] can make adoption preferable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Threshold {
    Value(f64),
    Never,
}

impl Threshold {
    /// `Never` behaves as +inf.
    pub fn as_f64(self) -> f64 {
        match self {
            Threshold::Value(t) => t,
            Threshold::Never => f64::INFINITY,
        }
    }

    /// Value used when averaging thresholds, with `Never` counted as `never_as`.
    pub fn value_or(self, never_as: f64) -> f64 {
        match self {
            Threshold::Value(t) => t,
            Threshold::Never => never_as,
        }
    }

    pub fn is_never(self) -> bool {
        matches!(self, Threshold::Never)
    }

    /// Whether a neighbour fraction reaches this threshold.
    pub fn is_met_by(self, fraction: f64) -> bool {
        match self {
            Threshold::Value(t) => fraction >= t,
            Threshold::Never => false,
        }
    }

    /// Pointwise scaling of finite thresholds (`Never` stays `Never`).
    pub fn scaled(self, c: f64) -> Threshold {
        match self {
            Threshold::Value(t) => Threshold::Value(t * c),
            Threshold::Never => Threshold::Never,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Value(t) => write!(f, "{t}"),
            Threshold::Never => f.write_str("NEVER"),
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("NEVER") {
            return Ok(Threshold::Never);
        }
        let t: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad threshold '{s}'")))?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("threshold {t} outside [0,1]")));
        }
        Ok(Threshold::Value(t))
    }
}

/// Attribute utility: partworths dotted with the product's coded attributes.
pub fn attribute_utility(params: &IndividualParams, coding: &CodingSpec, product: &ProductProfile) -> Result<f64> {
    params.check_dims(coding)?;
    let row = coding.encode_attributes(product)?;
    Ok(row.iter().zip(&params.beta).map(|(x, b)| x * b).sum())
}

/// Threshold from status-quo utility, attribute utility and social
/// coefficient, clamped to [0, 1] with `Never` above 1 or when the social
/// signal cannot help (gamma <= 0 and the product is worse than the status quo).
pub fn threshold_from_utilities(u0: f64, attribute_utility: f64, gamma: f64) -> Threshold {
    let gap = u0 - attribute_utility;
    if gamma > 0.0 {
        let raw = gap / gamma;
        if raw < 0.0 {
            Threshold::Value(0.0)
        } else if raw > 1.0 {
            Threshold::Never
        } else {
            Threshold::Value(raw)
        }
    } else if gap <= 0.0 {
        Threshold::Value(0.0)
    } else {
        Threshold::Never
    }
}

pub fn adoption_threshold(params: &IndividualParams, coding: &CodingSpec, product: &ProductProfile) -> Result<Threshold> {
    if !params.is_finite() {
        return Err(Error::NonFinite(params.respondent_id.clone()));
    }
    let ua = attribute_utility(params, coding, product)?;
    Ok(threshold_from_utilities(params.u0, ua, params.gamma))
}

/// Normalized attribute importances of one respondent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceVector {
    pub respondent_id: String,
    /// Categorical attributes in coding order, then the social signal.
    pub attributes: Vec<String>,
    pub weights: Vec<f64>,
}

/// Range of marginal utility per attribute, normalized to sum to one.
pub fn attribute_importance(params: &IndividualParams, coding: &CodingSpec) -> Result<ImportanceVector> {
    params.check_dims(coding)?;
    if !params.is_finite() {
        return Err(Error::NonFinite(params.respondent_id.clone()));
    }
    let mut attributes = Vec::with_capacity(coding.blocks.len() + 1);
    let mut ranges = Vec::with_capacity(coding.blocks.len() + 1);
    for block in &coding.blocks {
        let levels = block.level_partworths(&params.beta);
        let max = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = levels.iter().copied().fold(f64::INFINITY, f64::min);
        attributes.push(block.attribute.clone());
        ranges.push(max - min);
    }
    let (lo, hi) = coding.social_range;
    attributes.push(coding.social_attribute.clone());
    ranges.push(params.gamma.abs() * (hi - lo));
    Ok(ImportanceVector {
        respondent_id: params.respondent_id.clone(),
        attributes,
        weights: normalize_ranges(&ranges)?,
    })
}

pub fn normalize_ranges(ranges: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = ranges.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroImportance);
    }
    Ok(ranges.iter().map(|r| r / total).collect())
}

pub fn write_importance_csv(rows: &[ImportanceVector], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if let Some(first) = rows.first() {
        let mut header = vec!["respondent_id".to_string()];
        header.extend(first.attributes.iter().cloned());
        w.write_record(&header)?;
    }
    for r in rows {
        let mut rec = vec![r.respondent_id.clone()];
        rec.extend(r.weights.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<importance csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pool {
    Human,
    Artificial,
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pool::Human => "human",
            Pool::Artificial => "artificial",
        })
    }
}

impl FromStr for Pool {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" => Ok(Pool::Human),
            "artificial" => Ok(Pool::Artificial),
            other => Err(Error::InvalidArgument(format!("unknown pool '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRow {
    pub agent_id: String,
    pub pool: Pool,
}

/// Thresholds of every agent for every product (product ids are positions
/// in the enumerated product space).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMatrix {
    pub agents: Vec<AgentRow>,
    n_products: usize,
    entries: Vec<Threshold>,
}

impl ThresholdMatrix {
    pub fn new(agents: Vec<AgentRow>, n_products: usize, entries: Vec<Threshold>) -> Result<Self> {
        if entries.len() != agents.len() * n_products {
            return Err(Error::DimensionMismatch {
                expected: agents.len() * n_products,
                actual: entries.len(),
            });
        }
        Ok(ThresholdMatrix { agents, n_products, entries })
    }

    pub fn build(params: &[IndividualParams], pool: Pool, coding: &CodingSpec, products: &[ProductProfile]) -> Result<Self> {
        let rows: Vec<Vec<Threshold>> = params
            .par_iter()
            .map(|p| products.iter().map(|prod| adoption_threshold(p, coding, prod)).collect())
            .collect::<Result<_>>()?;
        let agents = params
            .iter()
            .map(|p| AgentRow { agent_id: p.respondent_id.clone(), pool })
            .collect();
        ThresholdMatrix::new(agents, products.len(), rows.into_iter().flatten().collect())
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_products(&self) -> usize {
        self.n_products
    }

    pub fn get(&self, agent: usize, product: usize) -> Threshold {
        self.entries[agent * self.n_products + product]
    }

    pub fn row(&self, agent: usize) -> &[Threshold] {
        &self.entries[agent * self.n_products..(agent + 1) * self.n_products]
    }

    /// Column of one product across all agents.
    pub fn column(&self, product: usize) -> impl Iterator<Item = Threshold> + '_ {
        (0..self.agents.len()).map(move |a| self.get(a, product))
    }

    /// Agents of one pool only.
    pub fn pool(&self, pool: Pool) -> ThresholdMatrix {
        let keep: Vec<usize> = (0..self.agents.len()).filter(|&a| self.agents[a].pool == pool).collect();
        ThresholdMatrix {
            agents: keep.iter().map(|&a| self.agents[a].clone()).collect(),
            n_products: self.n_products,
            entries: keep.iter().flat_map(|&a| self.row(a).iter().copied()).collect(),
        }
    }

    /// Same agents with every finite threshold multiplied by `c`, relabelled.
    pub fn scaled(&self, c: f64, pool: Pool) -> ThresholdMatrix {
        ThresholdMatrix {
            agents: self
                .agents
                .iter()
                .map(|a| AgentRow { agent_id: a.agent_id.clone(), pool })
                .collect(),
            n_products: self.n_products,
            entries: self.entries.iter().map(|t| t.scaled(c)).collect(),
        }
    }

    /// Long format: agent_id, pool, product_id, tau (or NEVER).
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["agent_id", "pool", "product_id", "tau"])?;
        for (a, agent) in self.agents.iter().enumerate() {
            let pool = agent.pool.to_string();
            for p in 0..self.n_products {
                w.write_record([agent.agent_id.as_str(), &pool, &p.to_string(), &self.get(a, p).to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<threshold csv>", e))?;
        Ok(())
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            agent_id: String,
            pool: String,
            product_id: usize,
            tau: String,
        }
        let mut cells: BTreeMap<(usize, usize), Threshold> = BTreeMap::new();
        let mut agents: Vec<AgentRow> = Vec::new();
        let mut index: std::collections::HashMap<(String, Pool), usize> = Default::default();
        let mut n_products = 0;
        for row in csv::Reader::from_reader(reader).deserialize::<Row>() {
            let row = row?;
            let pool: Pool = row.pool.parse()?;
            let key = (row.agent_id.clone(), pool);
            let a = *index.entry(key).or_insert_with(|| {
                agents.push(AgentRow { agent_id: row.agent_id.clone(), pool });
                agents.len() - 1
            });
            if cells.insert((a, row.product_id), row.tau.parse()?).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate threshold for agent '{}' product {}",
                    row.agent_id, row.product_id
                )));
            }
            n_products = n_products.max(row.product_id + 1);
        }
        let mut entries = Vec::with_capacity(agents.len() * n_products);
        for a in 0..agents.len() {
            for p in 0..n_products {
                entries.push(*cells.get(&(a, p)).ok_or_else(|| {
                    Error::InvalidArgument(format!("agent '{}' lacks product {p}", agents[a].agent_id))
                })?);
            }
        }
        ThresholdMatrix::new(agents, n_products, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjoint::{enumerate_products, presets, Attribute, Study};

    fn single_attribute_coding() -> CodingSpec {
        CodingSpec::new(&Study {
            study_id: "T".into(),
            attributes: vec![
                Attribute::categorical("a", ["x", "y"]),
                Attribute::social_signal("s", &presets::SOCIAL_LEVELS),
            ],
            alts_per_task: 2,
            tasks_per_respondent: 1,
        })
        .unwrap()
    }

    fn params(beta: Vec<f64>, gamma: f64, u0: f64) -> IndividualParams {
        IndividualParams { respondent_id: "1".into(), beta, gamma, u0 }
    }

    #[test]
    fn utility_examples() {
        let coding = single_attribute_coding();
        let p = params(vec![0.8], 1.0, 0.0);
        let lvl = |l| ProductProfile { levels: vec![l], social: None };
        assert_eq!(attribute_utility(&p, &coding, &lvl(0)).unwrap(), 0.8);
        assert_eq!(attribute_utility(&p, &coding, &lvl(1)).unwrap(), -0.8);
        assert_eq!(attribute_utility(&params(vec![0.0], 1.0, 0.0), &coding, &lvl(1)).unwrap(), 0.0);
        assert!(matches!(
            attribute_utility(&params(vec![0.0, 1.0], 1.0, 0.0), &coding, &lvl(0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ps_utility_matches_hand_dot_product() {
        let study = presets::policy_support();
        let coding = CodingSpec::new(&study).unwrap();
        let beta: Vec<f64> = (0..14).map(|i| 0.1 * (i as f64) - 0.6).collect();
        let p = params(beta.clone(), 2.0, 1.0);
        // ban(0) / $19(3) / 2045(2) / 2 miles(0) / Republican Party(3)
        let product = ProductProfile { levels: vec![0, 3, 2, 0, 3], social: None };
        // Blocks: [0..2) [2..5) [5..8) [8..11) [11..14)
        let hand = beta[0]
            - (beta[2] + beta[3] + beta[4])
            + beta[7]
            + beta[8]
            - (beta[11] + beta[12] + beta[13]);
        assert!((attribute_utility(&p, &coding, &product).unwrap() - hand).abs() < 1e-12);
    }

    #[test]
    fn threshold_clamping_table() {
        assert_eq!(threshold_from_utilities(1.0, 0.5, 2.0), Threshold::Value(0.25));
        assert_eq!(threshold_from_utilities(1.0, 1.5, 2.0), Threshold::Value(0.0));
        assert_eq!(threshold_from_utilities(1.0, 1.0, 2.0), Threshold::Value(0.0));
        assert_eq!(threshold_from_utilities(1.0, 0.0, 0.5), Threshold::Never);
        assert_eq!(threshold_from_utilities(1.0, 0.0, 1.0), Threshold::Value(1.0));
        assert_eq!(threshold_from_utilities(1.0, 2.0, -1.0), Threshold::Value(0.0));
        assert_eq!(threshold_from_utilities(1.0, 0.0, 0.0), Threshold::Never);
        assert_eq!(threshold_from_utilities(1.0, 0.0, -3.0), Threshold::Never);
    }

    #[test]
    fn non_finite_params_are_rejected() {
        let coding = single_attribute_coding();
        let product = ProductProfile { levels: vec![0], social: None };
        let p = params(vec![f64::NAN], 1.0, 0.0);
        assert!(matches!(adoption_threshold(&p, &coding, &product), Err(Error::NonFinite(_))));
    }

    #[test]
    fn importance_normalization() {
        assert_eq!(normalize_ranges(&[1.0, 3.0]).unwrap(), vec![0.25, 0.75]);
        assert_eq!(normalize_ranges(&[4.2]).unwrap(), vec![1.0]);
        let w = normalize_ranges(&[2.0, 3.0, 5.0]).unwrap();
        for (a, b) in w.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(normalize_ranges(&[0.0, 0.0]), Err(Error::ZeroImportance)));
    }

    #[test]
    fn importance_uses_reconstructed_level_and_social_span() {
        let coding = single_attribute_coding();
        // levels +0.5 / -0.5 -> range 1.0 ; social |-2| * 0.97 = 1.94
        let imp = attribute_importance(&params(vec![0.5], -2.0, 0.0), &coding).unwrap();
        assert_eq!(imp.attributes, vec!["a".to_string(), "s".to_string()]);
        assert!((imp.weights[0] - 1.0 / 2.94).abs() < 1e-12);
        assert!((imp.weights[1] - 1.94 / 2.94).abs() < 1e-12);
        assert!(matches!(
            attribute_importance(&params(vec![0.0], 0.0, 1.0), &coding),
            Err(Error::ZeroImportance)
        ));
    }

    #[test]
    fn matrix_csv_round_trip() {
        let study = presets::app_adoption();
        let coding = CodingSpec::new(&study).unwrap();
        let products = enumerate_products(&study);
        let ps = vec![
            IndividualParams { respondent_id: "a".into(), beta: vec![0.3, -0.2, 0.1, 0.4, -0.1, 0.2], gamma: 2.0, u0: 0.9 },
            IndividualParams { respondent_id: "b".into(), beta: vec![0.0; 6], gamma: -1.0, u0: 0.5 },
        ];
        let m = ThresholdMatrix::build(&ps, Pool::Artificial, &coding, &products).unwrap();
        assert_eq!(m.n_products(), 36);
        assert!(m.row(1).iter().all(|t| t.is_never()));
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains(",NEVER\n"));
        assert_eq!(ThresholdMatrix::read_csv(buf.as_slice()).unwrap(), m);

        let missing = "agent_id,pool,product_id,tau\na,human,0,0.5\na,human,2,0.1\n";
        assert!(ThresholdMatrix::read_csv(missing.as_bytes()).is_err());
    }
}
