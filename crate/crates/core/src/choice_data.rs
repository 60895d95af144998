//! Respondent profiles, observed choices, ingestion and synthetic choice data.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::coding::{encode_design, CodingSpec};
use crate::conjoint::StudyDesign;
use crate::error::{Error, Result};
use crate::logit;
use crate::params::GroundTruthParams;
use crate::rng;

/// A respondent's answer to one task. Alternatives are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Selection {
    Alternative(usize),
    NoneOption,
}

impl Selection {
    /// CSV code: 1..K for alternatives, 0 for none.
    pub fn code(self) -> usize {
        match self {
            Selection::Alternative(k) => k,
            Selection::NoneOption => 0,
        }
    }

    pub fn from_code(code: usize, alts_per_task: usize) -> Result<Self> {
        match code {
            0 => Ok(Selection::NoneOption),
            k if k <= alts_per_task => Ok(Selection::Alternative(k)),
            k => Err(Error::InvalidChoices(format!(
                "alternative {k} out of range 1..={alts_per_task}"
            ))),
        }
    }

    /// Zero-based index into a coded task's rows (none row last).
    pub fn row_index(self, alts_per_task: usize) -> usize {
        match self {
            Selection::Alternative(k) => k - 1,
            Selection::NoneOption => alts_per_task,
        }
    }

    pub fn from_row_index(i: usize, alts_per_task: usize) -> Self {
        if i == alts_per_task {
            Selection::NoneOption
        } else {
            Selection::Alternative(i + 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub respondent_id: String,
    pub task_id: u32,
    pub selection: Selection,
}

/// Demographics stored as written in prompts.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RespondentProfile {
    pub respondent_id: String,
    pub age_bracket: String,
    pub gender: String,
    pub education_level: String,
    pub education_subject: Option<String>,
    pub income_bracket: String,
    pub political_orientation: Option<String>,
    pub social_media_connections: Option<String>,
}

/// Which demographic fields a study needs. The policy-support study adds
/// education subject, political orientation and social-media connections;
/// the first two are required, the last is optional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileSchema {
    Base,
    Extended,
}

impl ProfileSchema {
    pub fn for_study(study_id: &str) -> Self {
        if study_id.eq_ignore_ascii_case("PS") {
            ProfileSchema::Extended
        } else {
            ProfileSchema::Base
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceDataset {
    pub study_id: String,
    pub design: StudyDesign,
    pub choices: Vec<Choice>,
    pub profiles: Vec<RespondentProfile>,
}

impl ChoiceDataset {
    /// Validates that every choice refers to an existing task, is in range,
    /// and that no (respondent, task) pair appears twice.
    pub fn new(design: StudyDesign, choices: Vec<Choice>, profiles: Vec<RespondentProfile>) -> Result<Self> {
        let alts = design.study.alts_per_task;
        let mut seen = HashSet::new();
        for c in &choices {
            let resp = design.respondent(&c.respondent_id).ok_or_else(|| {
                Error::InvalidChoices(format!("unknown respondent '{}'", c.respondent_id))
            })?;
            if resp.task(c.task_id).is_none() {
                return Err(Error::InvalidChoices(format!(
                    "respondent '{}' has no task {}",
                    c.respondent_id, c.task_id
                )));
            }
            if let Selection::Alternative(k) = c.selection {
                if k == 0 || k > alts {
                    return Err(Error::InvalidChoices(format!("alternative {k} out of range")));
                }
            }
            if !seen.insert((c.respondent_id.as_str(), c.task_id)) {
                return Err(Error::InvalidChoices(format!(
                    "duplicate choice for respondent '{}' task {}",
                    c.respondent_id, c.task_id
                )));
            }
        }
        let mut ids = HashSet::new();
        for p in &profiles {
            if !ids.insert(p.respondent_id.as_str()) {
                return Err(Error::InvalidChoices(format!(
                    "duplicate profile '{}'",
                    p.respondent_id
                )));
            }
        }
        Ok(ChoiceDataset {
            study_id: design.study.study_id.clone(),
            design,
            choices,
            profiles,
        })
    }

    /// Respondents with at least one choice, in design order.
    pub fn respondent_ids(&self) -> Vec<&str> {
        let present: HashSet<&str> = self.choices.iter().map(|c| c.respondent_id.as_str()).collect();
        self.design
            .respondents
            .iter()
            .map(|r| r.respondent_id.as_str())
            .filter(|id| present.contains(id))
            .collect()
    }

    pub fn choices_of<'a>(&'a self, respondent_id: &'a str) -> impl Iterator<Item = &'a Choice> + 'a {
        self.choices.iter().filter(move |c| c.respondent_id == respondent_id)
    }

    pub fn profile(&self, respondent_id: &str) -> Option<&RespondentProfile> {
        self.profiles.iter().find(|p| p.respondent_id == respondent_id)
    }

    /// (respondent, task) cells in the design that have no recorded choice,
    /// restricted to respondents present in the dataset.
    pub fn missing_cells(&self) -> Vec<(String, u32)> {
        let have: HashSet<(&str, u32)> = self
            .choices
            .iter()
            .map(|c| (c.respondent_id.as_str(), c.task_id))
            .collect();
        let mut respondents: BTreeSet<&str> = self.choices.iter().map(|c| c.respondent_id.as_str()).collect();
        respondents.extend(self.profiles.iter().map(|p| p.respondent_id.as_str()));
        self.design
            .respondents
            .iter()
            .filter(|r| respondents.contains(r.respondent_id.as_str()))
            .flat_map(|r| {
                r.tasks
                    .iter()
                    .filter(|t| !have.contains(&(r.respondent_id.as_str(), t.task_id)))
                    .map(|t| (r.respondent_id.clone(), t.task_id))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn write_choices_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["respondent_id", "task_id", "chosen"])?;
        for c in &self.choices {
            w.write_record([
                c.respondent_id.as_str(),
                &c.task_id.to_string(),
                &c.selection.code().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<choices csv>", e))?;
        Ok(())
    }

    pub fn write_profiles_csv(&self, writer: impl Write) -> Result<()> {
        write_profiles_csv(&self.profiles, writer)
    }
}

const PROFILE_COLUMNS: [&str; 8] = [
    "respondent_id",
    "age_bracket",
    "gender",
    "education_level",
    "education_subject",
    "income_bracket",
    "political_orientation",
    "social_media_connections",
];

pub fn write_profiles_csv(profiles: &[RespondentProfile], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PROFILE_COLUMNS)?;
    for p in profiles {
        let opt = |o: &Option<String>| o.clone().unwrap_or_default();
        w.write_record([
            p.respondent_id.clone(),
            p.age_bracket.clone(),
            p.gender.clone(),
            p.education_level.clone(),
            opt(&p.education_subject),
            p.income_bracket.clone(),
            opt(&p.political_orientation),
            opt(&p.social_media_connections),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<profiles csv>", e))?;
    Ok(())
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn present(value: Option<&str>) -> Option<String> {
    value
        .map(str::trim)
        .filter(|v| !v.is_empty() && !v.eq_ignore_ascii_case("NA"))
        .map(str::to_string)
}

/// Parse a profiles CSV. Rows missing a required field are returned as
/// dropped ids rather than as errors.
pub fn read_profiles_csv(reader: impl Read, schema: ProfileSchema) -> Result<(Vec<RespondentProfile>, Vec<String>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut required = vec!["respondent_id", "age_bracket", "gender", "education_level", "income_bracket"];
    if schema == ProfileSchema::Extended {
        required.extend(["education_subject", "political_orientation"]);
    }
    let mut idx = HashMap::new();
    for name in PROFILE_COLUMNS {
        if let Some(i) = column_index(&headers, name) {
            idx.insert(name, i);
        } else if required.contains(&name) {
            return Err(Error::InvalidChoices(format!("profiles file lacks column '{name}'")));
        }
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |name: &str| present(idx.get(name).and_then(|&i| rec.get(i)));
        let Some(id) = get("respondent_id") else {
            return Err(Error::InvalidChoices("profile row without respondent_id".into()));
        };
        if required.iter().any(|f| get(f).is_none()) {
            dropped.push(id);
            continue;
        }
        let extended = schema == ProfileSchema::Extended;
        kept.push(RespondentProfile {
            respondent_id: id,
            age_bracket: get("age_bracket").unwrap_or_default(),
            gender: get("gender").unwrap_or_default(),
            education_level: get("education_level").unwrap_or_default(),
            education_subject: get("education_subject").filter(|_| extended),
            income_bracket: get("income_bracket").unwrap_or_default(),
            political_orientation: get("political_orientation").filter(|_| extended),
            social_media_connections: get("social_media_connections").filter(|_| extended),
        });
    }
    Ok((kept, dropped))
}

pub fn read_choices_csv(reader: impl Read, alts_per_task: usize) -> Result<Vec<Choice>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        column_index(&headers, name)
            .ok_or_else(|| Error::InvalidChoices(format!("choices file lacks column '{name}'")))
    };
    let (ri, ti, ci) = (col("respondent_id")?, col("task_id")?, col("chosen")?);
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("").trim();
            let task_id = field(ti)
                .parse::<u32>()
                .map_err(|_| Error::InvalidChoices(format!("bad task_id '{}'", field(ti))))?;
            let code = field(ci)
                .parse::<usize>()
                .map_err(|_| Error::InvalidChoices(format!("bad chosen value '{}'", field(ci))))?;
            Ok(Choice {
                respondent_id: field(ri).to_string(),
                task_id,
                selection: Selection::from_code(code, alts_per_task)?,
            })
        })
        .collect()
}

/// Load choices (and optionally profiles) recorded against `design`.
///
/// Respondents with missing required demographics are dropped together with
/// their choices; the count is logged.
pub fn ingest_choices_from(
    design: &StudyDesign,
    choices: impl Read,
    profiles: Option<impl Read>,
) -> Result<ChoiceDataset> {
    let mut rows = read_choices_csv(choices, design.study.alts_per_task)?;
    if rows.is_empty() {
        return Err(Error::NoChoices);
    }
    let mut kept_profiles = Vec::new();
    if let Some(reader) = profiles {
        let schema = ProfileSchema::for_study(design.study_id());
        let (kept, dropped) = read_profiles_csv(reader, schema)?;
        if !dropped.is_empty() {
            log::info!(
                "dropped {} respondents with missing demographics ({} kept)",
                dropped.len(),
                kept.len()
            );
        }
        let keep: HashSet<&str> = kept.iter().map(|p| p.respondent_id.as_str()).collect();
        let before = rows.len();
        rows.retain(|c| keep.contains(c.respondent_id.as_str()));
        if rows.len() < before {
            log::info!("dropped {} choices of respondents without a usable profile", before - rows.len());
        }
        kept_profiles = kept;
        if rows.is_empty() {
            return Err(Error::NoChoices);
        }
    }
    ChoiceDataset::new(design.clone(), rows, kept_profiles)
}

pub fn ingest_choices(design: &StudyDesign, choices_file: &Path, profiles_file: Option<&Path>) -> Result<ChoiceDataset> {
    let open = |p: &Path| {
        std::fs::File::open(p)
            .map(std::io::BufReader::new)
            .map_err(|e| Error::io(p, e))
    };
    let choices = open(choices_file)?;
    let profiles = profiles_file.map(open).transpose()?;
    ingest_choices_from(design, choices, profiles)
}

/// Logit utilities of every option in a coded task (none last).
pub(crate) fn option_utilities(rows: &[Vec<f64>], coef: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|row| row.iter().zip(coef).map(|(x, b)| x * b).sum())
        .collect()
}

/// Draw one choice per task from the logit model implied by `ground_truth`.
pub fn simulate_choices(design: &StudyDesign, ground_truth: &[GroundTruthParams], seed: u64) -> Result<ChoiceDataset> {
    let coded = encode_design(design)?;
    let by_id: HashMap<&str, &GroundTruthParams> =
        ground_truth.iter().map(|p| (p.respondent_id.as_str(), p)).collect();
    let alts = design.study.alts_per_task;
    let mut choices = Vec::with_capacity(design.n_tasks());
    for r in &coded.respondents {
        let params = by_id
            .get(r.respondent_id.as_str())
            .ok_or_else(|| Error::MissingParams(r.respondent_id.clone()))?;
        let coef = params.coefficients(&coded.spec)?;
        let mut rng = rng::rng(rng::derive_str(seed, &r.respondent_id));
        for t in &r.tasks {
            let probs = logit::choice_probabilities(&option_utilities(&t.rows, &coef));
            let pick = sample_index(&probs, rng.random::<f64>());
            choices.push(Choice {
                respondent_id: r.respondent_id.clone(),
                task_id: t.task_id,
                selection: Selection::from_row_index(pick, alts),
            });
        }
    }
    ChoiceDataset::new(design.clone(), choices, Vec::new())
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Hold out `holdout` randomly chosen tasks per respondent.
pub fn split_holdout(dataset: &ChoiceDataset, holdout: usize, seed: u64) -> Result<(ChoiceDataset, ChoiceDataset)> {
    if holdout >= dataset.design.study.tasks_per_respondent {
        return Err(Error::InvalidArgument(format!(
            "holdout {holdout} must be below tasks_per_respondent {}",
            dataset.design.study.tasks_per_respondent
        )));
    }
    let mut test_keys: HashSet<(String, u32)> = HashSet::new();
    for id in dataset.respondent_ids() {
        let tasks: Vec<u32> = dataset.choices_of(id).map(|c| c.task_id).collect();
        let k = holdout.min(tasks.len());
        let mut rng = rng::rng(rng::derive_str(seed, id));
        for i in index::sample(&mut rng, tasks.len(), k) {
            test_keys.insert((id.to_string(), tasks[i]));
        }
    }
    let (test, train): (Vec<Choice>, Vec<Choice>) = dataset
        .choices
        .iter()
        .cloned()
        .partition(|c| test_keys.contains(&(c.respondent_id.clone(), c.task_id)));
    Ok((
        ChoiceDataset::new(dataset.design.clone(), train, dataset.profiles.clone())?,
        ChoiceDataset::new(dataset.design.clone(), test, dataset.profiles.clone())?,
    ))
}

/// Population distribution for synthetic ground-truth parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub beta_mean: Vec<f64>,
    pub beta_sd: f64,
    pub gamma_mean: f64,
    pub gamma_sd: f64,
    pub u0_mean: f64,
    pub u0_sd: f64,
}

impl PopulationSpec {
    /// Level partworths evenly spaced in [-0.75, 0.75] within each attribute
    /// (direction alternating by attribute), positive social sensitivity,
    /// and a status quo that puts most thresholds inside (0, 1).
    pub fn default_for(coding: &CodingSpec) -> Self {
        let mut beta_mean = Vec::with_capacity(coding.n_partworths());
        for (b, block) in coding.blocks.iter().enumerate() {
            let sign = if b % 2 == 0 { 1.0 } else { -1.0 };
            let last = (block.n_levels - 1) as f64;
            for l in 0..block.width() {
                beta_mean.push(sign * 0.75 * (1.0 - 2.0 * l as f64 / last));
            }
        }
        PopulationSpec {
            beta_mean,
            beta_sd: 0.3,
            gamma_mean: 3.0,
            gamma_sd: 1.5,
            u0_mean: 1.5,
            u0_sd: 0.6,
        }
    }

    pub fn sample(&self, respondent_ids: &[&str], seed: u64) -> Result<Vec<GroundTruthParams>> {
        let normal = |m: f64, s: f64| {
            Normal::new(m, s).map_err(|e| Error::InvalidArgument(format!("population spec: {e}")))
        };
        respondent_ids
            .iter()
            .map(|id| {
                let mut rng = rng::rng(rng::derive_str(seed, id));
                let beta = self
                    .beta_mean
                    .iter()
                    .map(|&m| Ok(normal(m, self.beta_sd)?.sample(&mut rng)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(GroundTruthParams {
                    respondent_id: id.to_string(),
                    beta,
                    gamma: normal(self.gamma_mean, self.gamma_sd)?.sample(&mut rng),
                    u0: normal(self.u0_mean, self.u0_sd)?.sample(&mut rng),
                })
            })
            .collect()
    }
}
