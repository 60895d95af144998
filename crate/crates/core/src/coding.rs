//! Effects coding of conjoint alternatives.
//!
//! Column layout: one block of `L - 1` effects-coded columns per categorical
//! attribute (in study order), then one column for the social signal, then
//! one constant column that is 1 only for the none option.

use serde::{Deserialize, Serialize};

use crate::conjoint::{ProductProfile, Study, StudyDesign};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalBlock {
    pub attribute: String,
    /// Position of the attribute among the non-social attributes.
    pub product_position: usize,
    pub start: usize,
    pub n_levels: usize,
}

impl CategoricalBlock {
    pub fn width(&self) -> usize {
        self.n_levels - 1
    }

    /// Partworth of every level, reconstructing the omitted last level as
    /// minus the sum of the coded ones.
    pub fn level_partworths(&self, beta: &[f64]) -> Vec<f64> {
        let coded = &beta[self.start..self.start + self.width()];
        let mut out = coded.to_vec();
        out.push(-coded.iter().sum::<f64>());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingSpec {
    pub columns: Vec<String>,
    pub blocks: Vec<CategoricalBlock>,
    pub social_column: usize,
    pub none_column: usize,
    /// Coded social value = fraction * social_scale.
    pub social_scale: f64,
    pub social_attribute: String,
    /// Smallest and largest social-signal levels shown to respondents.
    pub social_range: (f64, f64),
}

impl CodingSpec {
    pub fn new(study: &Study) -> Result<Self> {
        Self::with_social_scale(study, 1.0)
    }

    pub fn with_social_scale(study: &Study, social_scale: f64) -> Result<Self> {
        study.validate_complete()?;
        if !(social_scale.is_finite() && social_scale > 0.0) {
            return Err(Error::InvalidArgument("social_scale must be positive".into()));
        }
        let mut columns = Vec::new();
        let mut blocks = Vec::new();
        for (pos, attr) in study.product_attributes().enumerate() {
            blocks.push(CategoricalBlock {
                attribute: attr.name.clone(),
                product_position: pos,
                start: columns.len(),
                n_levels: attr.n_levels(),
            });
            for level in &attr.levels[..attr.n_levels() - 1] {
                columns.push(format!("{}:{}", attr.name, level));
            }
        }
        let social = study.social_attribute().expect("validated");
        let values: Vec<f64> = social.levels.iter().filter_map(|l| l.as_f64()).collect();
        let social_column = columns.len();
        columns.push(social.name.clone());
        let none_column = columns.len();
        columns.push("none".into());
        Ok(CodingSpec {
            columns,
            blocks,
            social_column,
            none_column,
            social_scale,
            social_attribute: social.name.clone(),
            social_range: (values[0], values[values.len() - 1]),
        })
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Number of partworth columns (everything before the social column).
    pub fn n_partworths(&self) -> usize {
        self.social_column
    }

    pub fn partworth_names(&self) -> &[String] {
        &self.columns[..self.social_column]
    }

    /// Coded partworth part of a product (social and none columns excluded).
    pub fn encode_attributes(&self, profile: &ProductProfile) -> Result<Vec<f64>> {
        if profile.levels.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                actual: profile.levels.len(),
            });
        }
        let mut row = vec![0.0; self.n_partworths()];
        for (block, &level) in self.blocks.iter().zip(&profile.levels) {
            if level >= block.n_levels {
                return Err(Error::InvalidDesign(format!(
                    "level {level} out of range for '{}'",
                    block.attribute
                )));
            }
            let cols = &mut row[block.start..block.start + block.width()];
            if level == block.n_levels - 1 {
                cols.iter_mut().for_each(|c| *c = -1.0);
            } else {
                cols[level] = 1.0;
            }
        }
        Ok(row)
    }

    pub fn encode(&self, profile: &ProductProfile) -> Result<Vec<f64>> {
        let mut row = self.encode_attributes(profile)?;
        row.push(profile.social.unwrap_or(0.0) * self.social_scale);
        row.push(0.0);
        Ok(row)
    }

    pub fn none_row(&self) -> Vec<f64> {
        let mut row = vec![0.0; self.n_columns()];
        row[self.none_column] = 1.0;
        row
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedTask {
    pub task_id: u32,
    /// One row per product alternative followed by the none row.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedRespondent {
    pub respondent_id: String,
    pub tasks: Vec<CodedTask>,
}

impl CodedRespondent {
    pub fn task(&self, task_id: u32) -> Option<&CodedTask> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedDesign {
    pub spec: CodingSpec,
    pub respondents: Vec<CodedRespondent>,
}

impl CodedDesign {
    pub fn respondent(&self, id: &str) -> Option<&CodedRespondent> {
        self.respondents.iter().find(|r| r.respondent_id == id)
    }
}

pub fn encode_design(design: &StudyDesign) -> Result<CodedDesign> {
    let spec = CodingSpec::new(&design.study)?;
    encode_design_with(design, spec)
}

pub fn encode_design_with(design: &StudyDesign, spec: CodingSpec) -> Result<CodedDesign> {
    let respondents = design
        .respondents
        .iter()
        .map(|r| {
            let tasks = r
                .tasks
                .iter()
                .map(|t| {
                    let mut rows = t
                        .alternatives
                        .iter()
                        .map(|alt| spec.encode(alt))
                        .collect::<Result<Vec<_>>>()?;
                    rows.push(spec.none_row());
                    Ok(CodedTask {
                        task_id: t.task_id,
                        rows,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CodedRespondent {
                respondent_id: r.respondent_id.clone(),
                tasks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CodedDesign { spec, respondents })
}
