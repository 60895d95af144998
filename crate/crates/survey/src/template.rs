use serde::{Deserialize, Serialize};

use amplifier_core::choice_data::RespondentProfile;
use amplifier_core::conjoint::{ChoiceTask, Study};

use crate::error::{Result, SurveyError};
use crate::texts;

/// Survey prompt for one study. `persona` takes demographic slots such as
/// `{age}`; `option` takes `{0}`, `{1}`, ... for the product attributes in
/// study order and `{social}` for the friends percentage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub study_id: String,
    pub persona: String,
    pub briefing: String,
    pub attribute_explanations: String,
    pub task_intro: String,
    pub option: String,
    pub none_option: String,
    /// Wording of each level, one list per product attribute.
    pub level_phrases: Vec<Vec<String>>,
    pub instruction: String,
}

fn strings<const N: usize>(xs: [&str; N]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl PromptTemplate {
    pub fn policy_support() -> Self {
        use texts::policy_support as t;
        PromptTemplate {
            study_id: "PS".into(),
            persona: t::PERSONA.into(),
            briefing: t::BRIEFING.into(),
            attribute_explanations: t::ATTRIBUTES.into(),
            task_intro: t::TASK_INTRO.into(),
            option: t::OPTION.into(),
            none_option: t::NONE_OPTION.into(),
            level_phrases: vec![
                strings(["ban", "subsidies", "tax"]),
                strings(["$4", "$9", "$14", "$19"]),
                strings(["2025", "2035", "2045", "2055"]),
                strings(["2 miles", "5 miles", "10 miles", "50 miles"]),
                strings(["ccc", "greenpeace", "dp", "rp"]),
            ],
            instruction: texts::INSTRUCTION.into(),
        }
    }

    pub fn app_adoption() -> Self {
        use texts::app_adoption as t;
        PromptTemplate {
            study_id: "AA".into(),
            persona: t::PERSONA.into(),
            briefing: t::BRIEFING.into(),
            attribute_explanations: t::ATTRIBUTES.into(),
            task_intro: t::TASK_INTRO.into(),
            option: t::OPTION.into(),
            none_option: t::NONE_OPTION.into(),
            level_phrases: vec![
                strings(["mobile only", "web accessible"]),
                strings(["simple", "two-factor", "multi-factor"]),
                strings(["low", "medium", "high"]),
                strings(["one-on-one", "multi-person"]),
            ],
            instruction: texts::INSTRUCTION.into(),
        }
    }

    pub fn for_study(study_id: &str) -> Option<Self> {
        match study_id.to_ascii_uppercase().as_str() {
            "PS" => Some(Self::policy_support()),
            "AA" => Some(Self::app_adoption()),
            _ => None,
        }
    }

    /// Check that level phrases cover every product attribute of `study`.
    pub fn check(&self, study: &Study) -> Result<()> {
        let attrs: Vec<_> = study.product_attributes().collect();
        if attrs.len() != self.level_phrases.len() {
            return Err(SurveyError::InvalidTemplate(format!(
                "{} phrase lists for {} attributes",
                self.level_phrases.len(),
                attrs.len()
            )));
        }
        for (a, phrases) in attrs.iter().zip(&self.level_phrases) {
            if a.levels.len() != phrases.len() {
                return Err(SurveyError::InvalidTemplate(format!(
                    "attribute '{}' has {} levels but {} phrases",
                    a.name,
                    a.levels.len(),
                    phrases.len()
                )));
            }
        }
        Ok(())
    }
}

/// Replace every `{name}` in `template` using `lookup`. Returns the first
/// slot without a value as the error.
fn fill(template: &str, lookup: impl Fn(&str) -> Option<String>) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else { break };
        let slot = &rest[open + 1..open + close];
        out.push_str(&rest[..open]);
        out.push_str(&lookup(slot).ok_or_else(|| slot.to_string())?);
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn profile_slot(profile: &RespondentProfile, slot: &str) -> Option<String> {
    let nonempty = |s: &str| (!s.is_empty()).then(|| s.to_string());
    match slot {
        "age" => nonempty(&profile.age_bracket),
        "gender" => nonempty(&profile.gender),
        "education_level" => nonempty(&profile.education_level),
        "education_subject" => profile.education_subject.clone(),
        "income" => nonempty(&profile.income_bracket),
        "political_orientation" => profile.political_orientation.clone(),
        "social_media_connections" => profile.social_media_connections.clone(),
        _ => None,
    }
}

pub fn render_persona(template: &PromptTemplate, profile: &RespondentProfile) -> Result<String> {
    fill(&template.persona, |slot| profile_slot(profile, slot)).map_err(|slot| SurveyError::MissingSlot {
        slot,
        respondent_id: profile.respondent_id.clone(),
    })
}

/// The numbered option lines, the none option last.
pub fn render_options(template: &PromptTemplate, task: &ChoiceTask) -> Result<Vec<String>> {
    let mut lines = Vec::with_capacity(task.alternatives.len() + 1);
    for (k, alt) in task.alternatives.iter().enumerate() {
        let body = fill(&template.option, |slot| {
            if slot == "social" {
                return alt.social.map(|s| format!("{}", (s * 100.0).round() as i64));
            }
            let i: usize = slot.parse().ok()?;
            template.level_phrases.get(i)?.get(*alt.levels.get(i)?).cloned()
        })
        .map_err(|slot| SurveyError::InvalidTemplate(format!("option slot '{slot}' has no value in task {}", task.task_id)))?;
        lines.push(format!("Option {} {}", k + 1, body));
    }
    lines.push(format!("Option {} {}", task.alternatives.len() + 1, template.none_option));
    Ok(lines)
}

/// Full prompt for one choice task: persona, study briefing, attribute
/// explanations, the options and the closing instruction.
pub fn render_prompt(template: &PromptTemplate, profile: &RespondentProfile, task: &ChoiceTask) -> Result<String> {
    let persona = render_persona(template, profile)?;
    let options = render_options(template, task)?;
    Ok([
        persona.as_str(),
        &template.briefing,
        &template.attribute_explanations,
        &template.task_intro,
        &options.join("\n"),
        &template.instruction,
    ]
    .join("\n\n"))
}
