//! Study definitions, choice-task designs and the product space.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use itertools::Itertools;
use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Probability of preferring a least-used level that is not yet shown in the
/// current task. The remaining draws pick uniformly among the least-used
/// levels, which is where within-task overlap comes from.
pub const MIN_OVERLAP_WEIGHT: f64 = 0.7;

const MAX_ALTERNATIVE_ATTEMPTS: usize = 64;
const MAX_RESPONDENT_REDRAWS: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Numeric(f64),
    Label(String),
}

impl Level {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Level::Numeric(v) => Some(*v),
            Level::Label(_) => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Numeric(v) => write!(f, "{v}"),
            Level::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
    pub levels: Vec<Level>,
    #[serde(default)]
    pub is_social_signal: bool,
}

impl Attribute {
    pub fn categorical<S: Into<String>>(name: &str, levels: impl IntoIterator<Item = S>) -> Self {
        Attribute {
            name: name.to_string(),
            kind: AttributeKind::Categorical,
            levels: levels.into_iter().map(|l| Level::Label(l.into())).collect(),
            is_social_signal: false,
        }
    }

    pub fn social_signal(name: &str, fractions: &[f64]) -> Self {
        Attribute {
            name: name.to_string(),
            kind: AttributeKind::Numeric,
            levels: fractions.iter().copied().map(Level::Numeric).collect(),
            is_social_signal: true,
        }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Index of a level given its rendered label.
    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.to_string() == label)
    }

    /// Index of a social-signal level given its fraction value.
    pub fn value_index(&self, value: f64) -> Option<usize> {
        self.levels
            .iter()
            .position(|l| l.as_f64().is_some_and(|v| (v - value).abs() < 1e-12))
    }

    fn validate(&self) -> Result<()> {
        if self.levels.len() < 2 {
            return Err(Error::InvalidStudy(format!(
                "attribute '{}' has fewer than 2 levels",
                self.name
            )));
        }
        let labels: HashSet<String> = self.levels.iter().map(|l| l.to_string()).collect();
        if labels.len() != self.levels.len() {
            return Err(Error::InvalidStudy(format!(
                "attribute '{}' has duplicate level labels",
                self.name
            )));
        }
        if self.is_social_signal {
            let values: Option<Vec<f64>> = self.levels.iter().map(Level::as_f64).collect();
            let values = values.ok_or_else(|| {
                Error::InvalidStudy(format!("social signal '{}' must be numeric", self.name))
            })?;
            if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidStudy(format!(
                    "social signal '{}' levels must be fractions in [0,1]",
                    self.name
                )));
            }
            if values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidStudy(format!(
                    "social signal '{}' levels must be strictly increasing",
                    self.name
                )));
            }
        } else if self.kind == AttributeKind::Numeric {
            return Err(Error::InvalidStudy(format!(
                "numeric attribute '{}' is only supported as the social signal",
                self.name
            )));
        }
        Ok(())
    }
}

/// Study definition: the attribute set plus task layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub study_id: String,
    pub attributes: Vec<Attribute>,
    pub alts_per_task: usize,
    pub tasks_per_respondent: usize,
}

impl Study {
    /// Structural validation. Designs may be built for attribute sets without
    /// a social signal; anything that estimates or renders a study also
    /// requires [`Study::social_index`] to succeed.
    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::InvalidStudy("no attributes".into()));
        }
        for a in &self.attributes {
            a.validate()?;
        }
        let names: HashSet<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        if names.len() != self.attributes.len() {
            return Err(Error::InvalidStudy("duplicate attribute names".into()));
        }
        if self.attributes.iter().filter(|a| a.is_social_signal).count() > 1 {
            return Err(Error::InvalidStudy(
                "more than one social-signal attribute".into(),
            ));
        }
        if self.alts_per_task < 2 {
            return Err(Error::InvalidStudy("alts_per_task must be at least 2".into()));
        }
        if self.tasks_per_respondent < 1 {
            return Err(Error::InvalidStudy(
                "tasks_per_respondent must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Full validation: structure plus exactly one social-signal attribute.
    pub fn validate_complete(&self) -> Result<()> {
        self.validate()?;
        self.social_index().map(|_| ())
    }

    pub fn social_index(&self) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a.is_social_signal)
            .ok_or_else(|| Error::InvalidStudy("study has no social-signal attribute".into()))
    }

    pub fn social_attribute(&self) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.is_social_signal)
    }

    /// Attributes that define product identity (everything but the social signal).
    pub fn product_attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.attributes.iter().filter(|a| !a.is_social_signal)
    }

    pub fn product_space_size(&self) -> usize {
        self.product_attributes().map(Attribute::n_levels).product()
    }

    /// Number of distinct alternatives that can be shown, social signal included.
    pub fn profile_space_size(&self) -> usize {
        self.attributes.iter().map(Attribute::n_levels).product()
    }

    pub fn from_json_reader(reader: impl Read) -> Result<Self> {
        let study: Study = serde_json::from_reader(reader)?;
        study.validate_complete()?;
        Ok(study)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_reader(std::io::BufReader::new(file))
    }
}

/// One product alternative. `levels` holds one index per non-social
/// attribute, in study order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductProfile {
    pub levels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub social: Option<f64>,
}

impl ProductProfile {
    pub fn without_social(&self) -> ProductProfile {
        ProductProfile {
            levels: self.levels.clone(),
            social: None,
        }
    }

    /// Level indices over all study attributes (social signal included),
    /// `None` for the social slot when no signal is attached.
    pub fn full_levels(&self, study: &Study) -> Result<Vec<Option<usize>>> {
        let mut product = self.levels.iter();
        study
            .attributes
            .iter()
            .map(|a| {
                if a.is_social_signal {
                    match self.social {
                        None => Ok(None),
                        Some(v) => a.value_index(v).map(Some).ok_or_else(|| {
                            Error::InvalidDesign(format!("social value {v} is not a level"))
                        }),
                    }
                } else {
                    let idx = *product.next().ok_or_else(|| {
                        Error::InvalidDesign("profile has too few levels".into())
                    })?;
                    if idx >= a.n_levels() {
                        return Err(Error::InvalidDesign(format!(
                            "level {idx} out of range for '{}'",
                            a.name
                        )));
                    }
                    Ok(Some(idx))
                }
            })
            .collect::<Result<Vec<_>>>()
            .and_then(|v| {
                if product.next().is_some() {
                    Err(Error::InvalidDesign("profile has too many levels".into()))
                } else {
                    Ok(v)
                }
            })
    }

    /// Index of this profile in [`enumerate_products`] order.
    pub fn product_id(&self, study: &Study) -> usize {
        study
            .product_attributes()
            .zip(&self.levels)
            .fold(0, |id, (a, &l)| id * a.n_levels() + l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceTask {
    pub task_id: u32,
    /// Product alternatives; the none option is implicit and always present.
    pub alternatives: Vec<ProductProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RespondentTasks {
    pub respondent_id: String,
    pub tasks: Vec<ChoiceTask>,
}

impl RespondentTasks {
    pub fn task(&self, task_id: u32) -> Option<&ChoiceTask> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyDesign {
    pub study: Study,
    pub respondents: Vec<RespondentTasks>,
}

impl StudyDesign {
    pub fn study_id(&self) -> &str {
        &self.study.study_id
    }

    pub fn respondent(&self, id: &str) -> Option<&RespondentTasks> {
        self.respondents.iter().find(|r| r.respondent_id == id)
    }

    pub fn n_tasks(&self) -> usize {
        self.respondents.iter().map(|r| r.tasks.len()).sum()
    }

    pub fn check(&self) -> Result<()> {
        self.study.validate()?;
        let mut ids = HashSet::new();
        for r in &self.respondents {
            if !ids.insert(r.respondent_id.as_str()) {
                return Err(Error::InvalidDesign(format!(
                    "duplicate respondent '{}'",
                    r.respondent_id
                )));
            }
            for t in &r.tasks {
                if t.alternatives.len() != self.study.alts_per_task {
                    return Err(Error::InvalidDesign(format!(
                        "respondent '{}' task {} has {} alternatives, expected {}",
                        r.respondent_id,
                        t.task_id,
                        t.alternatives.len(),
                        self.study.alts_per_task
                    )));
                }
                for alt in &t.alternatives {
                    alt.full_levels(&self.study)?;
                }
            }
        }
        Ok(())
    }

    pub fn to_json_writer(&self, writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn from_json_reader(reader: impl Read) -> Result<Self> {
        let design: StudyDesign = serde_json::from_reader(reader)?;
        design.check()?;
        Ok(design)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_reader(std::io::BufReader::new(file))
    }

    /// Long format: respondent_id, task_id, alternative_id, attribute, level.
    pub fn write_long_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["respondent_id", "task_id", "alternative_id", "attribute", "level"])?;
        for r in &self.respondents {
            for t in &r.tasks {
                for (k, alt) in t.alternatives.iter().enumerate() {
                    for (attr, level) in self.study.attributes.iter().zip(alt.full_levels(&self.study)?) {
                        let Some(level) = level else { continue };
                        w.write_record([
                            r.respondent_id.as_str(),
                            &t.task_id.to_string(),
                            &(k + 1).to_string(),
                            &attr.name,
                            &attr.levels[level].to_string(),
                        ])?;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io("<design csv>", e))?;
        Ok(())
    }

    pub fn read_long_csv(study: Study, reader: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            respondent_id: String,
            task_id: u32,
            alternative_id: usize,
            attribute: String,
            level: String,
        }
        study.validate()?;
        let mut respondents: Vec<RespondentTasks> = Vec::new();
        let mut rdr = csv::Reader::from_reader(reader);
        for row in rdr.deserialize::<Row>() {
            let row = row?;
            let attr_idx = study
                .attributes
                .iter()
                .position(|a| a.name == row.attribute)
                .ok_or_else(|| Error::InvalidDesign(format!("unknown attribute '{}'", row.attribute)))?;
            let attr = &study.attributes[attr_idx];
            let level = attr.level_index(&row.level).ok_or_else(|| {
                Error::InvalidDesign(format!("unknown level '{}' for '{}'", row.level, attr.name))
            })?;
            if row.alternative_id == 0 || row.alternative_id > study.alts_per_task {
                return Err(Error::InvalidDesign(format!(
                    "alternative {} out of range",
                    row.alternative_id
                )));
            }
            if respondents.last().map(|r| &r.respondent_id) != Some(&row.respondent_id) {
                respondents.push(RespondentTasks {
                    respondent_id: row.respondent_id.clone(),
                    tasks: Vec::new(),
                });
            }
            let resp = respondents.last_mut().expect("pushed above");
            if resp.tasks.last().map(|t| t.task_id) != Some(row.task_id) {
                resp.tasks.push(ChoiceTask {
                    task_id: row.task_id,
                    alternatives: Vec::new(),
                });
            }
            let task = resp.tasks.last_mut().expect("pushed above");
            while task.alternatives.len() < row.alternative_id {
                task.alternatives.push(ProductProfile {
                    levels: Vec::new(),
                    social: None,
                });
            }
            let alt = &mut task.alternatives[row.alternative_id - 1];
            if attr.is_social_signal {
                alt.social = attr.levels[level].as_f64();
            } else {
                let pos = study.attributes[..attr_idx]
                    .iter()
                    .filter(|a| !a.is_social_signal)
                    .count();
                if alt.levels.len() <= pos {
                    alt.levels.resize(pos + 1, usize::MAX);
                }
                alt.levels[pos] = level;
            }
        }
        let design = StudyDesign { study, respondents };
        design.check()?;
        Ok(design)
    }
}

/// Full Cartesian product of the non-social attribute levels, first
/// attribute most significant.
pub fn enumerate_products(study: &Study) -> Vec<ProductProfile> {
    study
        .product_attributes()
        .map(|a| 0..a.n_levels())
        .multi_cartesian_product()
        .map(|levels| ProductProfile {
            levels,
            social: None,
        })
        .collect()
}

/// Generate per-respondent choice tasks with a balanced-overlap heuristic.
///
/// For every alternative and attribute, the level is drawn from the levels
/// this respondent has seen least often. With probability
/// [`MIN_OVERLAP_WEIGHT`] the draw prefers least-used levels not yet present
/// in the task; otherwise any least-used level is allowed, so repeats within
/// a task can occur. Alternatives within a task are always distinct.
pub fn build_design(study: &Study, n_respondents: usize, seed: u64) -> Result<StudyDesign> {
    study.validate()?;
    if n_respondents < 1 {
        return Err(Error::InvalidArgument("n_respondents must be at least 1".into()));
    }
    if study.alts_per_task > study.profile_space_size() {
        return Err(Error::InvalidStudy(format!(
            "alts_per_task {} exceeds the {} distinct profiles",
            study.alts_per_task,
            study.profile_space_size()
        )));
    }

    let mut respondents: Vec<RespondentTasks> = Vec::with_capacity(n_respondents);
    let mut seen: HashSet<Vec<ChoiceTask>> = HashSet::new();
    for r in 0..n_respondents {
        let mut tasks = Vec::new();
        for redraw in 0..MAX_RESPONDENT_REDRAWS {
            let mut rng = rng::rng_for(seed, &[r as u64, redraw]);
            tasks = respondent_tasks(study, &mut rng);
            if !seen.contains(&tasks) {
                break;
            }
        }
        seen.insert(tasks.clone());
        respondents.push(RespondentTasks {
            respondent_id: (r + 1).to_string(),
            tasks,
        });
    }
    Ok(StudyDesign {
        study: study.clone(),
        respondents,
    })
}

impl std::hash::Hash for ChoiceTask {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.task_id.hash(state);
        for alt in &self.alternatives {
            alt.levels.hash(state);
            alt.social.map(f64::to_bits).hash(state);
        }
    }
}

impl Eq for ChoiceTask {}

fn respondent_tasks(study: &Study, rng: &mut rng::Rng) -> Vec<ChoiceTask> {
    let mut counts: Vec<Vec<usize>> = study.attributes.iter().map(|a| vec![0; a.n_levels()]).collect();
    (0..study.tasks_per_respondent)
        .map(|t| {
            let mut shown: Vec<Vec<usize>> = Vec::with_capacity(study.alts_per_task);
            for _ in 0..study.alts_per_task {
                let alt = (0..MAX_ALTERNATIVE_ATTEMPTS)
                    .map(|_| draw_balanced(&counts, &shown, rng))
                    .find(|cand| !shown.contains(cand))
                    .unwrap_or_else(|| draw_any_distinct(study, &shown, rng));
                for (c, &l) in counts.iter_mut().zip(&alt) {
                    c[l] += 1;
                }
                shown.push(alt);
            }
            ChoiceTask {
                task_id: t as u32 + 1,
                alternatives: shown.iter().map(|full| to_profile(study, full)).collect(),
            }
        })
        .collect()
}

fn draw_balanced(counts: &[Vec<usize>], shown: &[Vec<usize>], rng: &mut rng::Rng) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .map(|(a, c)| {
            let min = *c.iter().min().expect("attributes have levels");
            let least: Vec<usize> = (0..c.len()).filter(|&l| c[l] == min).collect();
            if rng.random::<f64>() < MIN_OVERLAP_WEIGHT {
                let fresh: Vec<usize> = least
                    .iter()
                    .copied()
                    .filter(|&l| shown.iter().all(|s| s[a] != l))
                    .collect();
                if let Some(&l) = fresh.choose(rng) {
                    return l;
                }
            }
            *least.choose(rng).expect("non-empty")
        })
        .collect()
}

// Fallback when the balance constraint cannot produce a distinct alternative.
fn draw_any_distinct(study: &Study, shown: &[Vec<usize>], rng: &mut rng::Rng) -> Vec<usize> {
    let space: Vec<Vec<usize>> = study
        .attributes
        .iter()
        .map(|a| 0..a.n_levels())
        .multi_cartesian_product()
        .filter(|cand| !shown.contains(cand))
        .collect();
    space
        .choose(rng)
        .cloned()
        .expect("alts_per_task checked against profile space")
}

fn to_profile(study: &Study, full: &[usize]) -> ProductProfile {
    let mut levels = Vec::with_capacity(full.len());
    let mut social = None;
    for (a, &l) in study.attributes.iter().zip(full) {
        if a.is_social_signal {
            social = a.levels[l].as_f64();
        } else {
            levels.push(l);
        }
    }
    ProductProfile { levels, social }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmptyCell {
    pub attribute: String,
    pub level: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCooccurrence {
    pub first: String,
    pub second: String,
    /// counts[i][j]: alternatives showing level i of `first` with level j of `second`.
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeSummary {
    pub attribute: String,
    /// Level frequencies over all respondents and alternatives.
    pub frequencies: Vec<usize>,
    /// Largest per-respondent (max count - min count) for this attribute.
    pub max_respondent_imbalance: usize,
    /// Repeated levels within tasks: sum over tasks of (alternatives - distinct levels).
    pub overlap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub attributes: Vec<AttributeSummary>,
    pub cooccurrence: Vec<PairCooccurrence>,
    pub empty_cells: Vec<EmptyCell>,
}

impl DesignReport {
    pub fn total_overlap(&self) -> usize {
        self.attributes.iter().map(|a| a.overlap).sum()
    }

    pub fn max_imbalance(&self) -> usize {
        self.attributes
            .iter()
            .map(|a| a.max_respondent_imbalance)
            .max()
            .unwrap_or(0)
    }
}

/// Tally level frequencies, within-task overlap and pairwise co-occurrence.
pub fn validate_design(design: &StudyDesign) -> Result<DesignReport> {
    let study = &design.study;
    let n_attr = study.attributes.len();
    let mut freq: Vec<Vec<usize>> = study.attributes.iter().map(|a| vec![0; a.n_levels()]).collect();
    let mut imbalance = vec![0usize; n_attr];
    let mut overlap = vec![0usize; n_attr];
    let mut pairs: Vec<Vec<Vec<Vec<usize>>>> = (0..n_attr)
        .map(|i| {
            (0..n_attr)
                .map(|j| vec![vec![0; study.attributes[j].n_levels()]; study.attributes[i].n_levels()])
                .collect()
        })
        .collect();

    for r in &design.respondents {
        let mut local: Vec<Vec<usize>> = study.attributes.iter().map(|a| vec![0; a.n_levels()]).collect();
        for t in &r.tasks {
            let rows: Vec<Vec<Option<usize>>> = t
                .alternatives
                .iter()
                .map(|alt| alt.full_levels(study))
                .collect::<Result<_>>()?;
            for a in 0..n_attr {
                let levels: Vec<usize> = rows.iter().filter_map(|row| row[a]).collect();
                let distinct: HashSet<usize> = levels.iter().copied().collect();
                overlap[a] += levels.len() - distinct.len();
                for &l in &levels {
                    local[a][l] += 1;
                    freq[a][l] += 1;
                }
            }
            for row in &rows {
                for i in 0..n_attr {
                    for j in (i + 1)..n_attr {
                        if let (Some(li), Some(lj)) = (row[i], row[j]) {
                            pairs[i][j][li][lj] += 1;
                        }
                    }
                }
            }
        }
        for (a, c) in local.iter().enumerate() {
            let spread = c.iter().max().unwrap_or(&0) - c.iter().min().unwrap_or(&0);
            imbalance[a] = imbalance[a].max(spread);
        }
    }

    let mut empty_cells = Vec::new();
    for (attr, f) in study.attributes.iter().zip(&freq) {
        for (l, &count) in f.iter().enumerate() {
            if count == 0 {
                empty_cells.push(EmptyCell {
                    attribute: attr.name.clone(),
                    level: attr.levels[l].to_string(),
                });
            }
        }
    }

    let attributes = study
        .attributes
        .iter()
        .enumerate()
        .map(|(a, attr)| AttributeSummary {
            attribute: attr.name.clone(),
            frequencies: freq[a].clone(),
            max_respondent_imbalance: imbalance[a],
            overlap: overlap[a],
        })
        .collect();
    let mut cooccurrence = Vec::new();
    for i in 0..n_attr {
        for j in (i + 1)..n_attr {
            cooccurrence.push(PairCooccurrence {
                first: study.attributes[i].name.clone(),
                second: study.attributes[j].name.clone(),
                counts: std::mem::take(&mut pairs[i][j]),
            });
        }
    }
    Ok(DesignReport {
        attributes,
        cooccurrence,
        empty_cells,
    })
}

/// Built-in study definitions matching the two published experiments.
pub mod presets {
    use super::{Attribute, Study};

    pub const SOCIAL_LEVELS: [f64; 5] = [0.01, 0.23, 0.45, 0.76, 0.98];

    /// Energy-policy support study (3 alternatives + none, 15 tasks).
    pub fn policy_support() -> Study {
        Study {
            study_id: "PS".into(),
            attributes: vec![
                Attribute::categorical("Policy type", ["ban", "subsidy", "tax"]),
                Attribute::categorical("Policy cost", ["$4", "$9", "$14", "$19"]),
                Attribute::categorical("Implementation year", ["2025", "2035", "2045", "2055"]),
                Attribute::categorical(
                    "Distance to residential areas",
                    ["2 miles", "5 miles", "10 miles", "50 miles"],
                ),
                Attribute::categorical(
                    "Policy endorsement",
                    [
                        "Carbon Capture Coalition",
                        "Greenpeace",
                        "Democratic Party",
                        "Republican Party",
                    ],
                ),
                Attribute::social_signal("Friends endorsing", &SOCIAL_LEVELS),
            ],
            alts_per_task: 3,
            tasks_per_respondent: 15,
        }
    }

    /// Messaging-app adoption study (3 alternatives + none, 14 tasks).
    pub fn app_adoption() -> Study {
        Study {
            study_id: "AA".into(),
            attributes: vec![
                Attribute::categorical("Accessibility", ["Mobile only", "Web accessible"]),
                Attribute::categorical("Authentication", ["Simple", "Two-factor", "Multi-factor"]),
                Attribute::categorical("Customisation level", ["Low", "Medium", "High"]),
                Attribute::categorical("Video calls", ["One-on-one", "Multi-person"]),
                Attribute::social_signal("Friends using", &SOCIAL_LEVELS),
            ],
            alts_per_task: 3,
            tasks_per_respondent: 14,
        }
    }

    pub fn by_id(id: &str) -> Option<Study> {
        match id.to_ascii_uppercase().as_str() {
            "PS" => Some(policy_support()),
            "AA" => Some(app_adoption()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    fn two_level_study(alts: usize) -> Study {
        Study {
            study_id: "T".into(),
            attributes: vec![Attribute::categorical("a", ["x", "y"])],
            alts_per_task: alts,
            tasks_per_respondent: 1,
        }
    }

    #[test]
    fn product_space_sizes() {
        assert_eq!(enumerate_products(&policy_support()).len(), 768);
        assert_eq!(enumerate_products(&app_adoption()).len(), 36);
        assert_eq!(enumerate_products(&two_level_study(2)).len(), 2);
    }

    #[test]
    fn products_are_lexicographic_and_ids_match_positions() {
        let study = app_adoption();
        let products = enumerate_products(&study);
        assert_eq!(products[0].levels, vec![0, 0, 0, 0]);
        assert_eq!(products[1].levels, vec![0, 0, 0, 1]);
        assert_eq!(products[35].levels, vec![1, 2, 2, 1]);
        for (i, p) in products.iter().enumerate() {
            assert_eq!(p.product_id(&study), i);
            assert!(p.social.is_none());
        }
    }

    #[test]
    fn single_attribute_design_shows_both_levels() {
        let design = build_design(&two_level_study(2), 1, 0).unwrap();
        let task = &design.respondents[0].tasks[0];
        let mut levels: Vec<usize> = task.alternatives.iter().map(|a| a.levels[0]).collect();
        levels.sort();
        assert_eq!(levels, vec![0, 1]);
    }

    #[test]
    fn rejects_bad_attributes_and_oversized_tasks() {
        let mut study = two_level_study(2);
        study.attributes[0].levels.pop();
        assert!(matches!(build_design(&study, 1, 0), Err(Error::InvalidStudy(_))));
        assert!(matches!(build_design(&two_level_study(3), 1, 0), Err(Error::InvalidStudy(_))));

        let mut dup = two_level_study(2);
        dup.attributes[0].levels[1] = Level::Label("x".into());
        assert!(dup.validate().is_err());

        let mut social = policy_support();
        social.attributes[5].levels.swap(0, 1);
        assert!(social.validate().is_err());
    }

    #[test]
    fn design_shape_and_balance() {
        let study = policy_support();
        let design = build_design(&study, 277, 7).unwrap();
        assert_eq!(design.respondents.len(), 277);
        for r in &design.respondents {
            assert_eq!(r.tasks.len(), 15);
            for t in &r.tasks {
                assert_eq!(t.alternatives.len(), 3);
            }
        }
        design.check().unwrap();

        // Independent tally: per respondent, count each attribute's levels.
        for r in &design.respondents {
            for (a, attr) in study.attributes.iter().enumerate() {
                let mut counts = vec![0usize; attr.n_levels()];
                for t in &r.tasks {
                    for alt in &t.alternatives {
                        let l = if attr.is_social_signal {
                            attr.value_index(alt.social.unwrap()).unwrap()
                        } else {
                            alt.levels[a]
                        };
                        counts[l] += 1;
                    }
                }
                let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
                assert!(spread <= 1, "respondent {} attribute {}: {counts:?}", r.respondent_id, attr.name);
            }
        }
        let distinct: HashSet<&Vec<ChoiceTask>> = design.respondents.iter().map(|r| &r.tasks).collect();
        assert_eq!(distinct.len(), 277);

        let report = validate_design(&design).unwrap();
        assert!(report.empty_cells.is_empty());
        assert!(report.attributes.iter().all(|a| a.frequencies.iter().all(|&f| f > 0)));
        assert!(report.max_imbalance() <= 1);
    }

    #[test]
    fn design_is_reproducible() {
        let study = app_adoption();
        let a = serde_json::to_vec(&build_design(&study, 20, 3).unwrap()).unwrap();
        let b = serde_json::to_vec(&build_design(&study, 20, 3).unwrap()).unwrap();
        let c = serde_json::to_vec(&build_design(&study, 20, 4).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn overlap_and_empty_cells() {
        let study = Study {
            study_id: "T".into(),
            attributes: vec![
                Attribute::categorical("a", ["x", "y", "z"]),
                Attribute::categorical("b", ["p", "q", "r"]),
            ],
            alts_per_task: 2,
            tasks_per_respondent: 1,
        };
        let task = |rows: [[usize; 2]; 2]| ChoiceTask {
            task_id: 1,
            alternatives: rows
                .iter()
                .map(|r| ProductProfile { levels: r.to_vec(), social: None })
                .collect(),
        };
        let design = StudyDesign {
            study: study.clone(),
            respondents: vec![RespondentTasks {
                respondent_id: "1".into(),
                tasks: vec![task([[0, 0], [1, 1]])],
            }],
        };
        let report = validate_design(&design).unwrap();
        assert_eq!(report.total_overlap(), 0);
        assert_eq!(report.empty_cells.len(), 2);
        assert_eq!(report.empty_cells[0], EmptyCell { attribute: "a".into(), level: "z".into() });
        assert_eq!(report.cooccurrence[0].counts[1][1], 1);

        let repeated = StudyDesign {
            study,
            respondents: vec![RespondentTasks {
                respondent_id: "1".into(),
                tasks: vec![task([[0, 0], [0, 1]])],
            }],
        };
        assert_eq!(validate_design(&repeated).unwrap().attributes[0].overlap, 1);
    }

    #[test]
    fn long_csv_round_trip() {
        let study = app_adoption();
        let design = build_design(&study, 3, 11).unwrap();
        let mut buf = Vec::new();
        design.write_long_csv(&mut buf).unwrap();
        let header = String::from_utf8(buf.clone()).unwrap();
        assert!(header.starts_with("respondent_id,task_id,alternative_id,attribute,level\n"));
        let back = StudyDesign::read_long_csv(study, buf.as_slice()).unwrap();
        assert_eq!(back, design);
    }

    #[test]
    fn study_json_schema() {
        let json = r#"{
            "study_id": "X",
            "attributes": [
                {"name": "color", "kind": "categorical", "levels": ["red", "blue"]},
                {"name": "friends", "kind": "numeric", "levels": [0.1, 0.5, 0.9], "is_social_signal": true}
            ],
            "alts_per_task": 2,
            "tasks_per_respondent": 4
        }"#;
        let study = Study::from_json_reader(json.as_bytes()).unwrap();
        assert_eq!(study.product_space_size(), 2);
        assert_eq!(study.social_index().unwrap(), 1);

        let no_social = json.replace("\"is_social_signal\": true", "\"is_social_signal\": false");
        assert!(Study::from_json_reader(no_social.as_bytes()).is_err());
    }
}
