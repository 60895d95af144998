//! Hierarchical Bayes multinomial logit.
//!
//! Respondent coefficients are drawn from a population normal `N(mu, Sigma)`.
//! One Gibbs sweep updates every respondent's coefficients with a random-walk
//! Metropolis step against the logit likelihood times the population prior,
//! then draws `mu` from its normal conditional and `Sigma` from its
//! inverse-Wishart conditional.
//!
//! Priors: `mu ~ N(0, 100 I)`, `Sigma ~ IW(K + 3, I)` for `K` coded columns.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng as _;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choice_data::{option_utilities, ChoiceDataset};
use crate::coding::{encode_design, CodedDesign, CodingSpec};
use crate::error::{Error, Result};
use crate::logit;
use crate::params::IndividualParams;
use crate::rng;

/// Acceptance band the burn-in adaptation steers towards.
pub const TARGET_ACCEPTANCE: (f64, f64) = (0.23, 0.44);
const STEP_SHRINK: f64 = 0.9;
const STEP_GROW: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub total_iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub proposal_step_init: f64,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            total_iterations: 30_000,
            burn_in: 10_000,
            thinning: 10,
            proposal_step_init: 0.3,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.total_iterations {
            return Err(Error::InvalidMcmcConfig(format!(
                "burn_in ({}) must be below total_iterations ({})",
                self.burn_in, self.total_iterations
            )));
        }
        if self.thinning < 1 {
            return Err(Error::InvalidMcmcConfig("thinning must be at least 1".into()));
        }
        if !(self.proposal_step_init.is_finite() && self.proposal_step_init > 0.0) {
            return Err(Error::InvalidMcmcConfig("proposal_step_init must be positive".into()));
        }
        Ok(())
    }

    pub fn retained_draws(&self) -> usize {
        (self.total_iterations - self.burn_in).div_ceil(self.thinning)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbPriors {
    /// Prior variance of each population-mean component.
    pub mu_variance: f64,
    /// Inverse-Wishart degrees of freedom beyond the column count.
    pub extra_df: usize,
    /// Inverse-Wishart scale is `scale * I`.
    pub scale: f64,
}

impl Default for HbPriors {
    fn default() -> Self {
        HbPriors {
            mu_variance: 100.0,
            extra_df: 3,
            scale: 1.0,
        }
    }
}

/// Retained MCMC draws plus per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub coding: CodingSpec,
    pub config: McmcConfig,
    pub respondent_ids: Vec<String>,
    n_draws: usize,
    /// Draw-major: draw, respondent, column.
    betas: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
    /// Row-major `K x K` matrices.
    pub sigma: Vec<Vec<f64>>,
    pub acceptance: Vec<f64>,
    pub log_likelihood: Vec<f64>,
    pub step_size: Vec<f64>,
}

impl PosteriorDraws {
    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn n_columns(&self) -> usize {
        self.coding.n_columns()
    }

    pub fn beta(&self, draw: usize, respondent: usize) -> &[f64] {
        let k = self.n_columns();
        let start = (draw * self.respondent_ids.len() + respondent) * k;
        &self.betas[start..start + k]
    }

    /// Respondent parameters at a single retained draw.
    pub fn params_at(&self, draw: usize) -> Result<Vec<IndividualParams>> {
        self.respondent_ids
            .iter()
            .enumerate()
            .map(|(n, id)| IndividualParams::from_coefficients(id, self.beta(draw, n), &self.coding))
            .collect()
    }

    /// Build draws directly from coefficient vectors, one inner vector per
    /// respondent for each draw. Useful for post-processing stored draws.
    pub fn from_coefficients(
        coding: CodingSpec,
        config: McmcConfig,
        respondent_ids: Vec<String>,
        draws: &[Vec<Vec<f64>>],
    ) -> Result<Self> {
        let k = coding.n_columns();
        let mut betas = Vec::with_capacity(draws.len() * respondent_ids.len() * k);
        for d in draws {
            if d.len() != respondent_ids.len() {
                return Err(Error::DimensionMismatch {
                    expected: respondent_ids.len(),
                    actual: d.len(),
                });
            }
            for b in d {
                if b.len() != k {
                    return Err(Error::DimensionMismatch { expected: k, actual: b.len() });
                }
                betas.extend_from_slice(b);
            }
        }
        Ok(PosteriorDraws {
            coding,
            config,
            respondent_ids,
            n_draws: draws.len(),
            betas,
            mu: Vec::new(),
            sigma: Vec::new(),
            acceptance: Vec::new(),
            log_likelihood: Vec::new(),
            step_size: Vec::new(),
        })
    }

    /// Write `draws.csv` (draw, respondent_id, one column per coefficient)
    /// and a `draws.json` sidecar with column names, config and traces.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join("draws.csv");
        let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        let mut header = vec!["draw".to_string(), "respondent_id".to_string()];
        header.extend(self.coding.columns.iter().cloned());
        w.write_record(&header)?;
        for d in 0..self.n_draws {
            for (n, id) in self.respondent_ids.iter().enumerate() {
                let mut rec = vec![d.to_string(), id.clone()];
                rec.extend(self.beta(d, n).iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io(&csv_path, e))?;

        #[derive(Serialize)]
        struct Sidecar<'a> {
            columns: &'a [String],
            respondent_ids: &'a [String],
            config: &'a McmcConfig,
            seed: u64,
            n_draws: usize,
            coding: &'a CodingSpec,
            mu: &'a [Vec<f64>],
            sigma: &'a [Vec<f64>],
            acceptance: &'a [f64],
            log_likelihood: &'a [f64],
            step_size: &'a [f64],
        }
        let json_path = dir.join("draws.json");
        let mut file = std::fs::File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
        serde_json::to_writer_pretty(
            &mut file,
            &Sidecar {
                columns: &self.coding.columns,
                respondent_ids: &self.respondent_ids,
                config: &self.config,
                seed: self.config.seed,
                n_draws: self.n_draws,
                coding: &self.coding,
                mu: &self.mu,
                sigma: &self.sigma,
                acceptance: &self.acceptance,
                log_likelihood: &self.log_likelihood,
                step_size: &self.step_size,
            },
        )?;
        file.flush().map_err(|e| Error::io(&json_path, e))?;
        Ok(())
    }
}

/// Choices of one respondent with the coded rows laid out contiguously.
struct RespondentData {
    rows: Vec<f64>,
    /// (offset into rows in units of options, number of options, chosen option)
    tasks: Vec<(usize, usize, usize)>,
}

impl RespondentData {
    fn log_likelihood(&self, coef: &[f64], utilities: &mut Vec<f64>) -> f64 {
        let k = coef.len();
        let mut total = 0.0;
        for &(offset, n_opts, chosen) in &self.tasks {
            utilities.clear();
            for o in 0..n_opts {
                let row = &self.rows[(offset + o) * k..(offset + o + 1) * k];
                utilities.push(row.iter().zip(coef).map(|(x, b)| x * b).sum());
            }
            total += logit::log_choice_probability(utilities, chosen);
        }
        total
    }
}

fn collect_data(dataset: &ChoiceDataset, coded: &CodedDesign) -> Result<(Vec<String>, Vec<RespondentData>)> {
    let k = coded.spec.n_columns();
    let alts = dataset.design.study.alts_per_task;
    let ids: Vec<String> = dataset.respondent_ids().into_iter().map(String::from).collect();
    let mut grouped: HashMap<&str, Vec<&crate::choice_data::Choice>> = HashMap::new();
    for c in &dataset.choices {
        grouped.entry(c.respondent_id.as_str()).or_default().push(c);
    }
    let data = ids
        .iter()
        .map(|id| {
            let resp = coded
                .respondent(id)
                .ok_or_else(|| Error::InvalidChoices(format!("respondent '{id}' not in design")))?;
            let mut rows = Vec::new();
            let mut tasks = Vec::new();
            let mut offset = 0;
            for c in &grouped[id.as_str()] {
                let task = resp.task(c.task_id).ok_or_else(|| {
                    Error::InvalidChoices(format!("respondent '{id}' has no task {}", c.task_id))
                })?;
                for row in &task.rows {
                    if row.len() != k || row.iter().any(|x| !x.is_finite()) {
                        return Err(Error::Sampler(format!(
                            "malformed coded row for respondent '{id}' task {}",
                            c.task_id
                        )));
                    }
                    rows.extend_from_slice(row);
                }
                tasks.push((offset, task.rows.len(), c.selection.row_index(alts)));
                offset += task.rows.len();
            }
            Ok(RespondentData { rows, tasks })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ids, data))
}

fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::Sampler(format!("{what} is not positive definite")))
}

fn standard_normal_vector(k: usize, rng: &mut rng::Rng) -> DVector<f64> {
    DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(rng)))
}

/// Draw from inverse-Wishart(df, scale) via a Bartlett-decomposed Wishart
/// draw on the inverse scale.
pub fn sample_inverse_wishart(df: f64, scale: &DMatrix<f64>, rng: &mut rng::Rng) -> Result<DMatrix<f64>> {
    let k = scale.nrows();
    if df <= (k - 1) as f64 {
        return Err(Error::Sampler(format!("inverse-Wishart df {df} too small for dimension {k}")));
    }
    let inv_scale = cholesky(scale, "inverse-Wishart scale")?.inverse();
    let l = cholesky(&inv_scale, "inverse-Wishart scale inverse")?.l();
    let mut a = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let chi = ChiSquared::new(df - i as f64).map_err(|e| Error::Sampler(e.to_string()))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = l * a;
    let wishart = &la * la.transpose();
    let mut sigma = cholesky(&wishart, "Wishart draw")?.inverse();
    symmetrize(&mut sigma);
    Ok(sigma)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m = (&*m + t) * 0.5;
}

pub fn is_symmetric_positive_definite(m: &DMatrix<f64>) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= 1e-10 * m.amax().max(1.0) && Cholesky::new(m.clone()).is_some()
}

/// Run the sampler with default priors.
pub fn fit_hb(dataset: &ChoiceDataset, coding: &CodingSpec, config: &McmcConfig) -> Result<PosteriorDraws> {
    fit_hb_with_priors(dataset, coding, config, &HbPriors::default())
}

pub fn fit_hb_with_priors(
    dataset: &ChoiceDataset,
    coding: &CodingSpec,
    config: &McmcConfig,
    priors: &HbPriors,
) -> Result<PosteriorDraws> {
    config.validate()?;
    let coded = crate::coding::encode_design_with(&dataset.design, coding.clone())?;
    let (ids, data) = collect_data(dataset, &coded)?;
    if ids.len() < 2 {
        return Err(Error::InvalidChoices("hierarchical estimation needs at least 2 respondents".into()));
    }

    let k = coding.n_columns();
    let n = ids.len();
    let nf = n as f64;
    let mut betas: Vec<DVector<f64>> = vec![DVector::zeros(k); n];
    let mut mu = DVector::<f64>::zeros(k);
    let mut sigma = DMatrix::<f64>::identity(k, k);
    let mut step = config.proposal_step_init;
    let mu_prior_precision = DMatrix::<f64>::identity(k, k) / priors.mu_variance;
    let iw_df = (k + priors.extra_df) as f64;
    let iw_scale = DMatrix::<f64>::identity(k, k) * priors.scale;

    let mut loglik: Vec<f64> = data
        .iter()
        .map(|d| d.log_likelihood(betas[0].as_slice(), &mut Vec::new()))
        .collect();
    if loglik.iter().any(|l| !l.is_finite()) {
        return Err(Error::Sampler("non-finite initial log-likelihood".into()));
    }

    let retained = config.retained_draws();
    let mut out_betas = Vec::with_capacity(retained * n * k);
    let mut out_mu = Vec::with_capacity(retained);
    let mut out_sigma = Vec::with_capacity(retained);
    let mut acceptance = Vec::with_capacity(config.total_iterations);
    let mut ll_trace = Vec::with_capacity(config.total_iterations);
    let mut step_trace = Vec::with_capacity(config.total_iterations);

    for iter in 0..config.total_iterations {
        let chol = cholesky(&sigma, "Sigma")?;
        let l = chol.l();
        let sigma_inv = chol.inverse();

        // Respondent-level Metropolis steps are independent given (mu, Sigma).
        let results: Vec<(DVector<f64>, f64, bool)> = betas
            .par_iter()
            .zip(&data)
            .zip(&loglik)
            .enumerate()
            .map(|(r, ((beta, d), &ll))| {
                let mut rng = rng::rng_for(config.seed, &[iter as u64, r as u64]);
                let z = standard_normal_vector(k, &mut rng);
                let proposal = beta + &l * z * step;
                let mut scratch = Vec::with_capacity(8);
                let ll_prop = d.log_likelihood(proposal.as_slice(), &mut scratch);
                let prior = |x: &DVector<f64>| {
                    let diff = x - &mu;
                    -0.5 * diff.dot(&(&sigma_inv * &diff))
                };
                let log_ratio = ll_prop + prior(&proposal) - ll - prior(beta);
                let u: f64 = rng.random();
                if ll_prop.is_finite() && u.ln() < log_ratio {
                    (proposal, ll_prop, true)
                } else {
                    (beta.clone(), ll, false)
                }
            })
            .collect();
        let mut accepted = 0usize;
        for (r, (b, ll, acc)) in results.into_iter().enumerate() {
            betas[r] = b;
            loglik[r] = ll;
            accepted += usize::from(acc);
        }
        let rate = accepted as f64 / nf;

        let mut rng = rng::rng_for(config.seed, &[iter as u64, u64::MAX]);

        // mu | betas, Sigma
        let sum_beta = betas.iter().fold(DVector::<f64>::zeros(k), |acc, b| acc + b);
        let precision = &sigma_inv * nf + &mu_prior_precision;
        let prec_chol = cholesky(&precision, "mu posterior precision")?;
        let mean = prec_chol.solve(&(&sigma_inv * sum_beta));
        let z = standard_normal_vector(k, &mut rng);
        let noise = prec_chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::Sampler("singular mu precision".into()))?;
        mu = mean + noise;

        // Sigma | betas, mu
        let mut scatter = iw_scale.clone();
        for b in &betas {
            let d = b - &mu;
            scatter += &d * d.transpose();
        }
        sigma = sample_inverse_wishart(iw_df + nf, &scatter, &mut rng)?;

        if iter < config.burn_in {
            if rate < TARGET_ACCEPTANCE.0 {
                step *= STEP_SHRINK;
            } else if rate > TARGET_ACCEPTANCE.1 {
                step *= STEP_GROW;
            }
        }

        let total_ll: f64 = loglik.iter().sum();
        if !total_ll.is_finite() {
            return Err(Error::Sampler(format!("non-finite log-likelihood at iteration {iter}")));
        }
        acceptance.push(rate);
        ll_trace.push(total_ll);
        step_trace.push(step);

        if iter >= config.burn_in && (iter - config.burn_in) % config.thinning == 0 {
            for b in &betas {
                out_betas.extend_from_slice(b.as_slice());
            }
            out_mu.push(mu.as_slice().to_vec());
            out_sigma.push(sigma.transpose().as_slice().to_vec());
        }
    }

    Ok(PosteriorDraws {
        coding: coding.clone(),
        config: config.clone(),
        respondent_ids: ids,
        n_draws: out_mu.len(),
        betas: out_betas,
        mu: out_mu,
        sigma: out_sigma,
        acceptance,
        log_likelihood: ll_trace,
        step_size: step_trace,
    })
}

/// Posterior mean of every respondent's coefficients.
pub fn point_estimates(draws: &PosteriorDraws) -> Result<Vec<IndividualParams>> {
    if draws.n_draws == 0 {
        return Err(Error::Empty("posterior draws"));
    }
    let k = draws.n_columns();
    draws
        .respondent_ids
        .iter()
        .enumerate()
        .map(|(n, id)| {
            let mut mean = vec![0.0; k];
            for d in 0..draws.n_draws {
                for (m, b) in mean.iter_mut().zip(draws.beta(d, n)) {
                    *m += b;
                }
            }
            mean.iter_mut().for_each(|m| *m /= draws.n_draws as f64);
            IndividualParams::from_coefficients(id, &mean, &draws.coding)
        })
        .collect()
}

/// Share of holdout tasks where the highest-utility option (alternatives in
/// order, then none; ties to the lowest index) matches the observed choice.
pub fn hit_rate(params: &[IndividualParams], holdout: &ChoiceDataset) -> Result<f64> {
    if holdout.choices.is_empty() {
        return Err(Error::Empty("holdout choices"));
    }
    let coded = encode_design(&holdout.design)?;
    let alts = holdout.design.study.alts_per_task;
    let by_id: HashMap<&str, &IndividualParams> = params.iter().map(|p| (p.respondent_id.as_str(), p)).collect();
    let mut hits = 0usize;
    for c in &holdout.choices {
        let p = by_id
            .get(c.respondent_id.as_str())
            .ok_or_else(|| Error::MissingParams(c.respondent_id.clone()))?;
        let coef = p.coefficients(&coded.spec)?;
        let task = coded
            .respondent(&c.respondent_id)
            .and_then(|r| r.task(c.task_id))
            .ok_or_else(|| Error::InvalidChoices(format!("unknown task {}", c.task_id)))?;
        let predicted = logit::argmax(&option_utilities(&task.rows, &coef));
        hits += usize::from(predicted == c.selection.row_index(alts));
    }
    Ok(hits as f64 / holdout.choices.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice_data::{simulate_choices, PopulationSpec};
    use crate::conjoint::{build_design, presets};

    fn small_problem(n: usize, seed: u64) -> (ChoiceDataset, CodingSpec, Vec<IndividualParams>) {
        let design = build_design(&presets::app_adoption(), n, seed).unwrap();
        let coding = CodingSpec::new(&design.study).unwrap();
        let ids: Vec<&str> = design.respondents.iter().map(|r| r.respondent_id.as_str()).collect();
        let truth = PopulationSpec::default_for(&coding).sample(&ids, seed).unwrap();
        let ds = simulate_choices(&design, &truth, seed).unwrap();
        (ds, coding, truth)
    }

    fn short_config(seed: u64) -> McmcConfig {
        McmcConfig {
            total_iterations: 400,
            burn_in: 200,
            thinning: 2,
            proposal_step_init: 0.3,
            seed,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = short_config(0);
        c.burn_in = c.total_iterations;
        assert!(matches!(c.validate(), Err(Error::InvalidMcmcConfig(_))));
        let (ds, coding, _) = small_problem(3, 1);
        assert!(fit_hb(&ds, &coding, &c).is_err());
        c.burn_in = 10;
        c.thinning = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn retained_draw_counts() {
        let (ds, coding, _) = small_problem(4, 2);
        let c = short_config(3);
        let d1 = fit_hb(&ds, &coding, &c).unwrap();
        assert_eq!(d1.n_draws(), 100);
        let d2 = fit_hb(&ds, &coding, &McmcConfig { thinning: 4, ..c }).unwrap();
        assert_eq!(d2.n_draws(), 50);
    }

    #[test]
    fn deterministic_given_seed() {
        let (ds, coding, _) = small_problem(5, 4);
        let a = fit_hb(&ds, &coding, &short_config(9)).unwrap();
        let b = fit_hb(&ds, &coding, &short_config(9)).unwrap();
        assert_eq!(a, b);
        let c = fit_hb(&ds, &coding, &short_config(10)).unwrap();
        assert_ne!(a.betas, c.betas);
    }

    #[test]
    fn sigma_draws_are_spd() {
        let (ds, coding, _) = small_problem(6, 5);
        let draws = fit_hb(&ds, &coding, &short_config(1)).unwrap();
        let k = coding.n_columns();
        for s in &draws.sigma {
            let m = DMatrix::from_row_slice(k, k, s);
            assert!(is_symmetric_positive_definite(&m));
        }
    }

    #[test]
    fn needs_two_respondents() {
        let (ds, coding, _) = small_problem(1, 5);
        assert!(fit_hb(&ds, &coding, &short_config(1)).is_err());
    }

    #[test]
    fn inverse_wishart_mean_matches_closed_form() {
        // E[Sigma] = scale / (df - k - 1)
        let k = 3;
        let df = 12.0;
        let scale = DMatrix::from_row_slice(k, k, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 1.5]);
        let mut rng = rng::rng(42);
        let n = 20_000;
        let mut acc = DMatrix::<f64>::zeros(k, k);
        for _ in 0..n {
            acc += sample_inverse_wishart(df, &scale, &mut rng).unwrap();
        }
        let mean = acc / n as f64;
        let expected = &scale / (df - k as f64 - 1.0);
        assert!((mean - expected).amax() < 0.01);
    }

    #[test]
    fn point_estimates_are_posterior_means() {
        let design = build_design(&presets::app_adoption(), 2, 0).unwrap();
        let coding = CodingSpec::new(&design.study).unwrap();
        let ids = vec!["1".to_string(), "2".to_string()];
        let v: Vec<f64> = (0..8).map(|i| i as f64 * 0.5 - 1.0).collect();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();

        let constant = PosteriorDraws::from_coefficients(
            coding.clone(),
            McmcConfig::default(),
            ids.clone(),
            &[vec![v.clone(), v.clone()], vec![v.clone(), v.clone()]],
        )
        .unwrap();
        let est = point_estimates(&constant).unwrap();
        assert_eq!(est[0].coefficients(&coding).unwrap(), v);

        let sym = PosteriorDraws::from_coefficients(
            coding.clone(),
            McmcConfig::default(),
            ids.clone(),
            &[vec![v.clone(), v.clone()], vec![neg.clone(), neg]],
        )
        .unwrap();
        let est = point_estimates(&sym).unwrap();
        assert!(est[1].coefficients(&coding).unwrap().iter().all(|x| *x == 0.0));

        let empty = PosteriorDraws::from_coefficients(coding, McmcConfig::default(), ids, &[]).unwrap();
        assert!(matches!(point_estimates(&empty), Err(Error::Empty(_))));
    }

    #[test]
    fn hit_rate_of_generating_params_with_dominant_utilities() {
        let (_, coding, truth) = small_problem(20, 6);
        let design = build_design(&presets::app_adoption(), 20, 6).unwrap();
        // Scale utilities up so the logit becomes effectively deterministic.
        let sharp: Vec<_> = truth.iter().map(|p| p.scaled(1e4)).collect();
        let ds = simulate_choices(&design, &sharp, 7).unwrap();
        assert_eq!(hit_rate(&sharp, &ds).unwrap(), 1.0);
        let _ = coding;
        assert!(matches!(hit_rate(&sharp[1..], &ds), Err(Error::MissingParams(_))));
    }

    #[test]
    fn hit_rate_of_random_params_is_near_chance() {
        // Chance-level oracle: params independent of the choices.
        let (ds, coding, _) = small_problem(400, 8);
        let ids: Vec<&str> = ds.design.respondents.iter().map(|r| r.respondent_id.as_str()).collect();
        let mut spec = PopulationSpec::default_for(&coding);
        spec.beta_mean.iter_mut().for_each(|b| *b = 0.0);
        spec.beta_sd = 1.0;
        spec.gamma_mean = 0.0;
        spec.gamma_sd = 1.0;
        spec.u0_mean = 0.0;
        spec.u0_sd = 1.0;
        let random = spec.sample(&ids, 999).unwrap();
        let rate = hit_rate(&random, &ds).unwrap();
        assert!((rate - 0.25).abs() < 0.03, "hit rate {rate}");
    }

    #[test]
    fn draws_persist_with_sidecar() {
        let (ds, coding, _) = small_problem(3, 1);
        let draws = fit_hb(&ds, &coding, &McmcConfig { total_iterations: 20, burn_in: 10, thinning: 5, ..short_config(1) }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        draws.write(dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("draws.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 3);
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("draws.json")).unwrap()).unwrap();
        assert_eq!(sidecar["columns"].as_array().unwrap().len(), 8);
        assert_eq!(sidecar["seed"], 1);
    }
}
