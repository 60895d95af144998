use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sweep::ResultRow;
use crate::error::{Error, Result};
use crate::network::SeedingPolicy;
use crate::stats;

const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Study,
    LlmLabel,
    NetworkId,
    ProductId,
    Q,
    Policy,
}

impl GroupKey {
    pub const DEFAULT: [GroupKey; 4] = [GroupKey::Study, GroupKey::LlmLabel, GroupKey::Q, GroupKey::Policy];
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKey::Study => "study",
            GroupKey::LlmLabel => "llm_label",
            GroupKey::NetworkId => "network_id",
            GroupKey::ProductId => "product_id",
            GroupKey::Q => "q",
            GroupKey::Policy => "policy",
        })
    }
}

impl FromStr for GroupKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "study" => GroupKey::Study,
            "llm_label" | "llm" => GroupKey::LlmLabel,
            "network_id" | "network" => GroupKey::NetworkId,
            "product_id" | "product" => GroupKey::ProductId,
            "q" => GroupKey::Q,
            "policy" => GroupKey::Policy,
            other => return Err(Error::InvalidArgument(format!("unknown group key '{other}'"))),
        })
    }
}

/// Mean adoption rate of one group. Columns not used for grouping are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub study: Option<String>,
    pub llm_label: Option<String>,
    pub network_id: Option<String>,
    pub product_id: Option<usize>,
    pub q: Option<f64>,
    pub policy: Option<SeedingPolicy>,
    pub mean: f64,
    /// Half-width of the normal 95% interval.
    pub ci95: f64,
    pub n: usize,
    /// Set when n = 1 and the interval is undefined (reported as 0).
    pub single: bool,
}

type Group = (
    Option<String>,
    Option<String>,
    Option<String>,
    Option<usize>,
    Option<u64>,
    Option<SeedingPolicy>,
);

fn group_of(row: &ResultRow, keys: &[GroupKey]) -> Group {
    let has = |k| keys.contains(&k);
    (
        has(GroupKey::Study).then(|| row.study.clone()),
        has(GroupKey::LlmLabel).then(|| row.llm_label.clone()),
        has(GroupKey::NetworkId).then(|| row.network_id.clone()),
        has(GroupKey::ProductId).then_some(row.product_id),
        // q >= 0, so the bit pattern orders like the value.
        has(GroupKey::Q).then(|| (row.q + 0.0).to_bits()),
        has(GroupKey::Policy).then_some(row.policy),
    )
}

/// Group rows and report mean, 95% CI half-width and size per group,
/// ordered by the group values.
pub fn summarize(rows: &[ResultRow], keys: &[GroupKey]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::Empty("result rows"));
    }
    let mut groups: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
    for row in rows {
        groups.entry(group_of(row, keys)).or_default().push(row.adoption_rate);
    }
    Ok(groups
        .into_iter()
        .map(|((study, llm_label, network_id, product_id, q, policy), mut rates)| {
            // Sorting first makes the sums independent of row order.
            rates.sort_by(f64::total_cmp);
            let n = rates.len();
            let ci95 = if n > 1 { Z95 * stats::sample_sd(&rates) / (n as f64).sqrt() } else { 0.0 };
            SummaryRow {
                study,
                llm_label,
                network_id,
                product_id,
                q: q.map(f64::from_bits),
                policy,
                mean: stats::mean(&rates),
                ci95,
                n,
                single: n == 1,
            }
        })
        .collect())
}

pub fn write_summary_csv(summary: &[SummaryRow], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in summary {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<summary>", e))?;
    Ok(())
}

pub fn read_summary_csv(reader: impl std::io::Read) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let rows = r.deserialize().collect::<Result<Vec<SummaryRow>, _>>()?;
    Ok(rows)
}

/// Long-format row for plotting adoption against q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub panel: String,
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

fn plot_rows(summary: &[SummaryRow]) -> Result<Vec<PlotRow>> {
    summary
        .iter()
        .map(|s| {
            let x = s.q.ok_or_else(|| Error::InvalidArgument("summary is not grouped by q".into()))?;
            let panel: Vec<&str> = [s.study.as_deref(), s.llm_label.as_deref(), s.network_id.as_deref()]
                .into_iter()
                .flatten()
                .collect();
            let mut series = s.policy.map(|p| p.to_string()).unwrap_or_else(|| "all".into());
            if let Some(p) = s.product_id {
                series = format!("{series}/{p}");
            }
            Ok(PlotRow { panel: if panel.is_empty() { "all".into() } else { panel.join("/") }, series, x, y: s.mean, err: s.ci95 })
        })
        .collect()
}

/// Write `summary.csv` and `plot.csv` into `out_dir`; returns both paths.
pub fn emit_report(summary: &[SummaryRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if out_dir.as_os_str().is_empty() {
        return Err(Error::InvalidArgument("empty output directory".into()));
    }
    if summary.is_empty() {
        return Err(Error::Empty("summary"));
    }
    let plot = plot_rows(summary)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let summary_path = out_dir.join("summary.csv");
    let plot_path = out_dir.join("plot.csv");
    write_summary_csv(summary, File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?)?;
    let mut w = csv::Writer::from_writer(File::create(&plot_path).map_err(|e| Error::io(&plot_path, e))?);
    for row in &plot {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(&plot_path, e))?;
    Ok(vec![summary_path, plot_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    fn row(q: f64, policy: SeedingPolicy, product: usize, rate: f64) -> ResultRow {
        ResultRow {
            study: "PS".into(),
            llm_label: "mock".into(),
            network_id: "n".into(),
            product_id: product,
            q,
            policy,
            repetition: 0,
            adoption_rate: rate,
            steps: 1,
            seed_count: 1,
        }
    }

    #[test]
    fn constant_rates_have_zero_ci() {
        let rows: Vec<_> = (0..5).map(|p| row(0.0, SeedingPolicy::Random, p, 0.5)).collect();
        let s = summarize(&rows, &GroupKey::DEFAULT).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean, s[0].ci95, s[0].n, s[0].single), (0.5, 0.0, 5, false));
    }

    #[test]
    fn two_point_ci() {
        let rows = [row(0.0, SeedingPolicy::Random, 0, 0.0), row(0.0, SeedingPolicy::Random, 1, 1.0)];
        let s = summarize(&rows, &GroupKey::DEFAULT).unwrap();
        // sd of {0, 1} is 1/sqrt(2); half-width 1.96 * sd / sqrt(2) = 0.98.
        assert_eq!(s[0].mean, 0.5);
        assert!((s[0].ci95 - 0.98).abs() < 1e-12);
    }

    #[test]
    fn singletons_are_flagged() {
        let s = summarize(&[row(0.2, SeedingPolicy::Degree, 0, 0.3)], &GroupKey::DEFAULT).unwrap();
        assert!(s[0].single);
        assert_eq!(s[0].ci95, 0.0);
        assert!(summarize(&[], &GroupKey::DEFAULT).is_err());
    }

    #[test]
    fn groups_are_ordered_and_keyed() {
        let mut rows = Vec::new();
        for &q in &[0.4, 0.0, 0.2] {
            for policy in [SeedingPolicy::Degree, SeedingPolicy::Random] {
                for p in 0..3 {
                    rows.push(row(q, policy, p, q + p as f64 * 0.01));
                }
            }
        }
        let s = summarize(&rows, &[GroupKey::Q, GroupKey::Policy]).unwrap();
        assert_eq!(s.len(), 6);
        assert!(s.windows(2).all(|w| w[0].q <= w[1].q));
        assert!(s.iter().all(|r| r.study.is_none() && r.n == 3));
        let means: Vec<f64> = summarize(&rows, &[GroupKey::Q]).unwrap().iter().map(|r| r.mean).collect();
        assert!(means.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn report_files_are_deterministic() {
        let mut rows = Vec::new();
        for (i, &q) in super::super::DEFAULT_Q_VALUES.iter().enumerate() {
            for policy in [SeedingPolicy::Random, SeedingPolicy::Degree] {
                rows.push(row(q, policy, 0, i as f64 / 10.0));
                rows.push(row(q, policy, 1, i as f64 / 9.0));
            }
        }
        let s = summarize(&rows, &GroupKey::DEFAULT).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&s, &mut buf).unwrap();
        assert_eq!(read_summary_csv(buf.as_slice()).unwrap(), s);
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&s, dir.path()).unwrap();
        let first: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        emit_report(&s, dir.path()).unwrap();
        let second: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
        let plot = String::from_utf8(first[1].clone()).unwrap();
        assert_eq!(plot.lines().count(), 1 + 12);
        assert!(plot.starts_with("panel,series,x,y,err\n"));
        assert!(emit_report(&s, Path::new("")).is_err());
    }

    proptest! {
        #[test]
        fn permutation_invariant(rates in prop::collection::vec(0.0f64..=1.0, 1..40), seed in any::<u64>()) {
            let rows: Vec<_> = rates
                .iter()
                .enumerate()
                .map(|(i, &r)| row([0.0, 0.5][i % 2], SeedingPolicy::Random, i, r))
                .collect();
            let mut shuffled = rows.clone();
            shuffled.shuffle(&mut crate::rng::rng(seed));
            prop_assert_eq!(
                summarize(&rows, &GroupKey::DEFAULT).unwrap(),
                summarize(&shuffled, &GroupKey::DEFAULT).unwrap()
            );
        }
    }
}
