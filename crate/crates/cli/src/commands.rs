use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

use amplifier_core::choice_data::{
    ingest_choices, read_profiles_csv, simulate_choices, split_holdout, PopulationSpec, ProfileSchema,
};
use amplifier_core::coding::CodingSpec;
use amplifier_core::conjoint::{build_design, enumerate_products, presets, validate_design, Study, StudyDesign};
use amplifier_core::experiment::{
    self, emit_report, plan_row_keys, read_results_csv, run_sweep, GroupKey, ProductSampling, SweepConfig,
};
use amplifier_core::hb::{fit_hb, hit_rate, point_estimates, McmcConfig};
use amplifier_core::network::{self, NetworkSummary, SeedingPolicy};
use amplifier_core::params::{read_params_csv, write_params_csv};
use amplifier_core::threshold::{attribute_importance, write_importance_csv, Pool, ThresholdMatrix};
use amplifier_survey::{administer_survey, BackendConfig, PromptTemplate, SurveyOptions, Vendor};

use crate::{default_path, output_parent, StudyArg};

fn load_study(spec: &str) -> Result<Study> {
    if let Some(s) = presets::by_id(spec) {
        return Ok(s);
    }
    Study::from_json_file(Path::new(spec)).with_context(|| format!("'{spec}' is neither a preset nor a study file"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    output_parent(path)?;
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn load_design(path: &Path) -> Result<StudyDesign> {
    Ok(StudyDesign::from_json_file(path)?)
}

#[derive(Args)]
pub struct DesignArgs {
    #[command(flatten)]
    study: StudyArg,
    #[arg(long)]
    respondents: usize,
    /// Design JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the long CSV layout.
    #[arg(long)]
    long_csv: Option<PathBuf>,
    /// Write the balance and overlap report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn design(a: DesignArgs, seed: Option<u64>) -> Result<()> {
    let study = load_study(&a.study.study)?;
    let design = build_design(&study, a.respondents, seed.unwrap_or(0))?;
    let out = default_path(a.out, "design.json");
    design.to_json_writer(create(&out)?)?;
    if let Some(p) = a.long_csv {
        design.write_long_csv(create(&p)?)?;
    }
    let report = validate_design(&design)?;
    log::info!(
        "{} respondents x {} tasks, max level imbalance {}, overlap {}",
        design.respondents.len(),
        study.tasks_per_respondent,
        report.max_imbalance(),
        report.total_overlap()
    );
    if let Some(p) = a.report {
        serde_json::to_writer_pretty(create(&p)?, &report)?;
    }
    println!("{}", out.display());
    Ok(())
}

#[derive(Args)]
pub struct SurveyArgs {
    #[arg(long)]
    design: PathBuf,
    /// Respondent demographics CSV.
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long, default_value = "openai")]
    vendor: Vendor,
    #[arg(long, default_value = "gpt-3.5-turbo")]
    model: String,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    api_key_env: String,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    /// Request rate cap per second.
    #[arg(long)]
    rps: Option<f64>,
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    /// Prompt template JSON; the study preset otherwise.
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines transcript of every request.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

pub fn survey(a: SurveyArgs, _seed: Option<u64>) -> Result<()> {
    let design = load_design(&a.design)?;
    let study_id = design.study.study_id.clone();
    let (profiles, dropped) = read_profiles_csv(open(&a.profiles)?, ProfileSchema::for_study(&study_id))?;
    if !dropped.is_empty() {
        log::warn!("{} profiles dropped for missing fields", dropped.len());
    }
    let template = match a.template {
        Some(p) => serde_json::from_reader(open(&p)?)?,
        None => PromptTemplate::for_study(&study_id).ok_or_else(|| anyhow!("no built-in template for {study_id}"))?,
    };
    let backend_cfg = BackendConfig {
        vendor: a.vendor,
        endpoint: a.endpoint,
        model: a.model.clone(),
        temperature: a.temperature,
        api_key_env: a.api_key_env,
        max_retries: a.max_retries,
        timeout_secs: a.timeout_secs,
    };
    let backend = backend_cfg.build()?;
    let options = SurveyOptions {
        model: a.model,
        temperature: a.temperature,
        max_retries: a.max_retries,
        concurrency: a.concurrency,
        requests_per_second: a.rps,
        ..Default::default()
    };
    let mut transcript = a.transcript.as_deref().map(create).transpose()?;
    let outcome = administer_survey(
        &backend,
        &template,
        &profiles,
        &design,
        &options,
        transcript.as_mut().map(|w| w as &mut (dyn std::io::Write + Send)),
    )?;
    let out = default_path(a.out, "choices.csv");
    outcome.dataset.write_choices_csv(create(&out)?)?;
    log::info!(
        "{} requests, {} choices, {} missing cells, {} logged errors",
        outcome.requests,
        outcome.dataset.choices.len(),
        outcome.dataset.missing_cells().len(),
        outcome.errors.len()
    );
    println!("{}", out.display());
    Ok(())
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ground-truth parameters CSV.
    #[arg(long)]
    truth: Option<PathBuf>,
}

pub fn simulate(a: SimulateArgs, seed: Option<u64>) -> Result<()> {
    let seed = seed.unwrap_or(0);
    let design = load_design(&a.design)?;
    let coding = CodingSpec::new(&design.study)?;
    let ids: Vec<&str> = design.respondents.iter().map(|r| r.respondent_id.as_str()).collect();
    let truth = PopulationSpec::default_for(&coding).sample(&ids, seed)?;
    let dataset = simulate_choices(&design, &truth, seed.wrapping_add(1))?;
    let out = default_path(a.out, "choices.csv");
    dataset.write_choices_csv(create(&out)?)?;
    let truth_path = default_path(a.truth, "truth.csv");
    write_params_csv(&truth, coding.partworth_names(), create(&truth_path)?)?;
    println!("{}\n{}", out.display(), truth_path.display());
    Ok(())
}

#[derive(Args)]
pub struct EstimateArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    choices: PathBuf,
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long, default_value_t = 30_000)]
    iterations: usize,
    #[arg(long, default_value_t = 10_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    #[arg(long, default_value_t = 0.3)]
    step: f64,
    /// Hold out this many tasks per respondent and report the hit rate.
    #[arg(long)]
    holdout: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep all retained draws here.
    #[arg(long)]
    draws_dir: Option<PathBuf>,
}

pub fn estimate(a: EstimateArgs, seed: Option<u64>) -> Result<()> {
    let seed = seed.unwrap_or(0);
    let design = load_design(&a.design)?;
    let dataset = ingest_choices(&design, &a.choices, a.profiles.as_deref())?;
    let coding = CodingSpec::new(&design.study)?;
    let (train, test) = match a.holdout {
        Some(k) if k > 0 => {
            let (tr, te) = split_holdout(&dataset, k, seed)?;
            (tr, Some(te))
        }
        _ => (dataset, None),
    };
    let config = McmcConfig {
        total_iterations: a.iterations,
        burn_in: a.burn_in,
        thinning: a.thin,
        proposal_step_init: a.step,
        seed,
    };
    let draws = fit_hb(&train, &coding, &config)?;
    let params = point_estimates(&draws)?;
    if let Some(test) = test {
        println!("holdout hit rate {:.4}", hit_rate(&params, &test)?);
    }
    if let Some(dir) = a.draws_dir {
        draws.write(&dir)?;
    }
    let out = default_path(a.out, "params.csv");
    write_params_csv(&params, coding.partworth_names(), create(&out)?)?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    study: StudyArg,
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value = "human")]
    pool: Pool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn thresholds(a: ThresholdArgs) -> Result<()> {
    let study = load_study(&a.study.study)?;
    let coding = CodingSpec::new(&study)?;
    let params = read_params_csv(open(&a.params)?)?;
    let products = enumerate_products(&study);
    let matrix = ThresholdMatrix::build(&params, a.pool, &coding, &products)?;
    let out = default_path(a.out, "thresholds.csv");
    matrix.write_csv(create(&out)?)?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Args)]
pub struct ImportanceArgs {
    #[command(flatten)]
    study: StudyArg,
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn importance(a: ImportanceArgs) -> Result<()> {
    let study = load_study(&a.study.study)?;
    let coding = CodingSpec::new(&study)?;
    let params = read_params_csv(open(&a.params)?)?;
    let rows = params.iter().map(|p| attribute_importance(p, &coding)).collect::<Result<Vec<_>, _>>()?;
    let out = default_path(a.out, "importance.csv");
    write_importance_csv(&rows, create(&out)?)?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Args)]
pub struct SampleProductsArgs {
    /// Human threshold matrix CSV.
    #[arg(long)]
    thresholds: PathBuf,
    #[arg(long, default_value_t = 6)]
    intervals: usize,
    #[arg(long, default_value_t = 6)]
    per_interval: usize,
    /// JSON list of product ids.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn sample_products(a: SampleProductsArgs, seed: Option<u64>) -> Result<()> {
    let human = ThresholdMatrix::read_csv(open(&a.thresholds)?)?;
    let sample = experiment::sample_products_by_threshold(&human, a.intervals, a.per_interval, seed.unwrap_or(0));
    let out = default_path(a.out, "products.json");
    serde_json::to_writer(create(&out)?, &sample.products)?;
    println!("{} products -> {}", sample.products.len(), out.display());
    Ok(())
}

#[derive(Args)]
pub struct NetworkSampleArgs {
    #[arg(long)]
    network_dir: PathBuf,
    /// JSON with per-cell members and selections.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn network_sample(a: NetworkSampleArgs, seed: Option<u64>) -> Result<()> {
    let mut summaries = Vec::new();
    for (id, path) in experiment::list_networks(&a.network_dir)? {
        let m = network::network_metrics(&network::load_network(&path)?);
        summaries.push(NetworkSummary { network_id: id, n_nodes: m.n_nodes, transitivity: m.global_transitivity });
    }
    if summaries.is_empty() {
        bail!("no network files in {}", a.network_dir.display());
    }
    let sample = network::stratified_network_sample(&summaries, seed.unwrap_or(0));
    let out = default_path(a.out, "network_sample.json");
    serde_json::to_writer_pretty(create(&out)?, &sample)?;
    println!("{}", sample.selected().join("\n"));
    Ok(())
}

#[derive(Args)]
pub struct SweepArgs {
    /// Sweep config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    study_id: Option<String>,
    #[arg(long)]
    llm_label: Option<String>,
    #[arg(long)]
    human_thresholds: Option<PathBuf>,
    #[arg(long)]
    artificial_thresholds: Option<PathBuf>,
    #[arg(long)]
    network_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    networks: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    products: Option<Vec<usize>>,
    /// Sample products as INTERVALSxPER_INTERVAL, e.g. 6x6.
    #[arg(long)]
    sample_products: Option<String>,
    #[arg(long, value_delimiter = ',')]
    q_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<SeedingPolicy>>,
    #[arg(long)]
    seed_rate: Option<f64>,
    #[arg(long)]
    repetitions: Option<u32>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Count the rows only.
    #[arg(long)]
    dry_run: bool,
}

fn sweep_config(a: SweepArgs, seed: Option<u64>) -> Result<(SweepConfig, bool)> {
    let mut value = match &a.config {
        Some(p) => serde_json::from_reader(open(p)?)?,
        None => serde_json::json!({}),
    };
    let obj = value.as_object_mut().ok_or_else(|| anyhow!("sweep config must be a JSON object"))?;
    let mut set = |k: &str, v: Option<serde_json::Value>| {
        if let Some(v) = v {
            obj.insert(k.to_string(), v);
        }
    };
    use serde_json::to_value as j;
    set("study_id", a.study_id.map(j).transpose()?);
    set("llm_label", a.llm_label.map(j).transpose()?);
    set("human_thresholds", a.human_thresholds.map(j).transpose()?);
    set("artificial_thresholds", a.artificial_thresholds.map(j).transpose()?);
    set("network_dir", a.network_dir.map(j).transpose()?);
    set("networks", a.networks.map(j).transpose()?);
    set("products", a.products.map(j).transpose()?);
    set("q_values", a.q_values.map(j).transpose()?);
    set("policies", a.policies.map(j).transpose()?);
    set("seed_rate", a.seed_rate.map(j).transpose()?);
    set("repetitions", a.repetitions.map(j).transpose()?);
    set("output", a.output.map(j).transpose()?);
    set("master_seed", seed.map(j).transpose()?);
    if let Some(s) = &a.sample_products {
        let (n, per) = s.split_once(['x', 'X']).ok_or_else(|| anyhow!("--sample-products expects NxM"))?;
        set("product_sampling", Some(j(ProductSampling { n_intervals: n.parse()?, per_interval: per.parse()? })?));
    }
    let config: SweepConfig = serde_json::from_value(value).context("incomplete sweep configuration")?;
    Ok((config, a.dry_run))
}

pub fn sweep(a: SweepArgs, seed: Option<u64>) -> Result<()> {
    let (config, dry_run) = sweep_config(a, seed)?;
    if dry_run {
        let keys = plan_row_keys(&config)?;
        println!("{} rows", keys.len());
        return Ok(());
    }
    let rows = run_sweep(&config)?;
    println!("{} rows in {}", rows.len(), config.output.display());
    Ok(())
}

#[derive(Args)]
pub struct SummarizeArgs {
    /// Sweep result CSVs.
    #[arg(long, required = true, num_args = 1..)]
    results: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "study,llm_label,q,policy")]
    group_by: Vec<GroupKey>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn summarize(a: SummarizeArgs) -> Result<()> {
    let mut rows = Vec::new();
    for p in &a.results {
        rows.extend(read_results_csv(open(p)?)?);
    }
    let summary = experiment::summarize(&rows, &a.group_by)?;
    let out = default_path(a.out, "summary.csv");
    experiment::write_summary_csv(&summary, create(&out)?)?;
    println!("{} groups -> {}", summary.len(), out.display());
    Ok(())
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    summary: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn report(a: ReportArgs) -> Result<()> {
    let summary = experiment::read_summary_csv(open(&a.summary)?)?;
    for p in emit_report(&summary, &a.out_dir)? {
        println!("{}", p.display());
    }
    Ok(())
}
