use std::time::Duration;

use amplifier_core::choice_data::{RespondentProfile, Selection};
use amplifier_core::conjoint::{build_design, presets, Study, StudyDesign};
use amplifier_survey::{
    administer_survey, parse_choice, render_prompt, BackendError, MockBackend, ParsedChoice, PromptTemplate,
    ScriptedBackend, SurveyError, SurveyOptions, TranscriptRecord,
};
use proptest::prelude::*;

fn profile(id: &str) -> RespondentProfile {
    RespondentProfile {
        respondent_id: id.into(),
        age_bracket: "25-34".into(),
        gender: "female".into(),
        education_level: "Bachelor’s degree".into(),
        education_subject: Some("Arts".into()),
        income_bracket: "50,000 to 74,999".into(),
        political_orientation: Some("moderate".into()),
        social_media_connections: None,
    }
}

fn small_design(study: Study, n: usize, tasks: usize) -> StudyDesign {
    let mut study = study;
    study.tasks_per_respondent = tasks;
    build_design(&study, n, 3).unwrap()
}

fn quick() -> SurveyOptions {
    SurveyOptions {
        max_retries: 2,
        concurrency: 3,
        backoff_base: Duration::from_millis(1),
        backoff_max: Duration::from_millis(2),
        ..Default::default()
    }
}

fn profiles(design: &StudyDesign) -> Vec<RespondentProfile> {
    design.respondents.iter().map(|r| profile(&r.respondent_id)).collect()
}

#[test]
fn constant_mock_fills_every_cell() {
    let design = small_design(presets::policy_support(), 2, 3);
    let backend = MockBackend::constant("Option 1");
    let out = administer_survey(&backend, &PromptTemplate::policy_support(), &profiles(&design), &design, &quick(), None)
        .unwrap();
    assert_eq!(out.dataset.choices.len(), 6);
    assert!(out.dataset.choices.iter().all(|c| c.selection == Selection::Alternative(1)));
    assert!(out.dataset.missing_cells().is_empty());
    assert_eq!((out.requests, backend.calls()), (6, 6));
    assert!(out.errors.is_empty());
}

#[test]
fn garbage_then_answer_retries_once_with_clarification() {
    let design = small_design(presets::app_adoption(), 1, 2);
    let id = design.respondents[0].respondent_id.clone();
    let backend = ScriptedBackend::new(Ok("Option 2".into()))
        .on(&id, 1, 0, Ok("hmm, hard to say".into()))
        .on(&id, 1, 1, Ok("Option 3".into()));
    let mut transcript = Vec::new();
    let out = administer_survey(
        &backend,
        &PromptTemplate::app_adoption(),
        &profiles(&design),
        &design,
        &quick(),
        Some(&mut transcript),
    )
    .unwrap();
    let first = out.dataset.choices.iter().find(|c| c.task_id == 1).unwrap();
    assert_eq!(first.selection, Selection::Alternative(3));
    assert_eq!(out.errors.len(), 1);
    assert_eq!(out.errors[0].message, "unparseable reply");
    assert_eq!(out.requests, 3);

    let records: Vec<TranscriptRecord> = String::from_utf8(transcript)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 3);
    assert!(!records[0].prompt.contains("Please reply"));
    assert!(records[1].prompt.ends_with("for example \"Option 1\"."));
    assert_eq!(records[1].reply.as_deref(), Some("Option 3"));
}

#[test]
fn rate_limited_forever_leaves_cells_missing() {
    let design = small_design(presets::app_adoption(), 3, 2);
    let id = design.respondents[1].respondent_id.clone();
    let backend = MockBackend::new(move |req| {
        if req.respondent_id == id {
            Err(BackendError::RateLimited { retry_after: None })
        } else {
            Ok("option 4".into())
        }
    });
    let out = administer_survey(&backend, &PromptTemplate::app_adoption(), &profiles(&design), &design, &quick(), None)
        .unwrap();
    assert_eq!(out.dataset.choices.len(), 4);
    assert!(out.dataset.choices.iter().all(|c| c.selection == Selection::NoneOption));
    assert_eq!(out.dataset.missing_cells().len(), 2);
    // Three attempts per missing cell, each logged.
    assert_eq!(out.errors.len(), 6);
    assert_eq!(out.responses.iter().filter(|r| r.parsed_choice == ParsedChoice::Unparseable).count(), 2);
}

#[test]
fn auth_failure_is_fatal() {
    let design = small_design(presets::app_adoption(), 4, 2);
    let backend = MockBackend::new(|_| Err(BackendError::Auth("bad key".into())));
    let err = administer_survey(&backend, &PromptTemplate::app_adoption(), &profiles(&design), &design, &quick(), None)
        .unwrap_err();
    assert!(matches!(err, SurveyError::Auth(_)));
}

#[test]
fn missing_profile_is_rejected() {
    let design = small_design(presets::app_adoption(), 2, 1);
    let backend = MockBackend::constant("Option 1");
    let one = vec![profile(&design.respondents[0].respondent_id)];
    assert!(matches!(
        administer_survey(&backend, &PromptTemplate::app_adoption(), &one, &design, &quick(), None),
        Err(SurveyError::MissingProfile(_))
    ));
}

#[test]
fn concurrent_runs_reproduce_and_keep_transcripts_grouped() {
    let design = small_design(presets::policy_support(), 12, 4);
    // Reply depends only on the request, so any schedule gives the same data.
    let backend = MockBackend::new(|req| Ok(format!("Option {}", (req.task_id as usize + req.respondent_id.len()) % 4 + 1)));
    let opts = SurveyOptions { concurrency: 5, ..quick() };
    let mut t1 = Vec::new();
    let a = administer_survey(&backend, &PromptTemplate::policy_support(), &profiles(&design), &design, &opts, Some(&mut t1))
        .unwrap();
    let b = administer_survey(&backend, &PromptTemplate::policy_support(), &profiles(&design), &design, &opts, None)
        .unwrap();
    assert_eq!(a.dataset, b.dataset);
    assert_eq!(a.responses, b.responses);

    let records: Vec<TranscriptRecord> =
        String::from_utf8(t1).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 48);
    for block in records.chunks(4) {
        assert!(block.iter().all(|r| r.respondent_id == block[0].respondent_id));
        assert_eq!(block.iter().map(|r| r.task_id).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    }
}

fn option_lines(text: &str) -> Vec<usize> {
    text.lines()
        .filter_map(|l| l.strip_prefix("Option "))
        .filter_map(|rest| rest.split_whitespace().next()?.parse().ok())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prompts_list_every_option_once(seed in any::<u64>(), ps in any::<bool>()) {
        let (study, template) = if ps {
            (presets::policy_support(), PromptTemplate::policy_support())
        } else {
            (presets::app_adoption(), PromptTemplate::app_adoption())
        };
        let design = build_design(&study, 1, seed).unwrap();
        let p = profile("1");
        for task in &design.respondents[0].tasks {
            let text = render_prompt(&template, &p, task).unwrap();
            let n = study.alts_per_task + 1;
            prop_assert_eq!(option_lines(&text), (1..=n).collect::<Vec<_>>());
            for k in 1..=n {
                prop_assert_eq!(parse_choice(&format!("Option {k}"), n), ParsedChoice::Option(k));
            }
        }
    }
}
