use std::collections::HashSet;
use std::fs;
use std::path::Path;

use amplifier_core::experiment::{read_results_csv, run_sweep, SweepConfig};
use amplifier_core::network::{load_network, network_metrics, SeedingPolicy};
use amplifier_core::threshold::{AgentRow, Pool, Threshold, ThresholdMatrix};

fn write_pool(path: &Path, pool: Pool, scale: f64) {
    let agents = (0..6).map(|i| AgentRow { agent_id: format!("a{i}"), pool }).collect();
    let entries = (0..6 * 4)
        .map(|i| match i % 9 {
            8 => Threshold::Never,
            k => Threshold::Value(scale * k as f64 / 8.0),
        })
        .collect();
    let m = ThresholdMatrix::new(agents, 4, entries).unwrap();
    m.write_csv(fs::File::create(path).unwrap()).unwrap();
}

fn write_ring(path: &Path, n: usize) {
    let mut text = String::from("# ring with chords\n");
    for i in 0..n {
        text.push_str(&format!("{} {}\n{},{}\n", i, (i + 1) % n, i, (i + 3) % n));
    }
    fs::write(path, text).unwrap();
}

fn config(dir: &Path) -> SweepConfig {
    let nets = dir.join("nets");
    fs::create_dir_all(&nets).unwrap();
    write_ring(&nets.join("r20.txt"), 20);
    write_ring(&nets.join("r33.txt"), 33);
    write_pool(&dir.join("human.csv"), Pool::Human, 1.0);
    write_pool(&dir.join("artificial.csv"), Pool::Artificial, 0.5);
    serde_json::from_value(serde_json::json!({
        "study_id": "AA",
        "llm_label": "mock",
        "human_thresholds": dir.join("human.csv"),
        "artificial_thresholds": dir.join("artificial.csv"),
        "network_dir": nets,
        "products": [0, 2, 3],
        "repetitions": 2,
        "seed_rate": 0.05,
        "master_seed": 99,
        "output": dir.join("out/results.csv"),
    }))
    .unwrap()
}

#[test]
fn sweep_writes_every_row_once_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let full = run_sweep(&cfg).unwrap();
    assert_eq!(full.len(), 2 * 3 * 6 * 2 * 2);
    let text = fs::read_to_string(&cfg.output).unwrap();

    // Keep the header and the first 50 rows, then resume.
    let partial: String = text.lines().take(51).map(|l| format!("{l}\n")).collect();
    fs::write(&cfg.output, partial).unwrap();
    let resumed = run_sweep(&cfg).unwrap();
    assert_eq!(resumed, full);

    let on_disk = read_results_csv(fs::File::open(&cfg.output).unwrap()).unwrap();
    assert_eq!(on_disk.len(), full.len());
    let ids: HashSet<String> = on_disk.iter().map(|r| r.key().id()).collect();
    assert_eq!(ids.len(), full.len());

    // A completed sweep has nothing left to run.
    assert_eq!(run_sweep(&cfg).unwrap(), full);
    assert_eq!(fs::read_to_string(&cfg.output).unwrap().lines().count(), full.len() + 1);
}

#[test]
fn sweep_means_rise_with_q_under_half_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let rows = run_sweep(&config(dir.path())).unwrap();
    for policy in [SeedingPolicy::Random, SeedingPolicy::Degree] {
        let means: Vec<f64> = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
            .iter()
            .map(|&q| {
                let sel: Vec<f64> =
                    rows.iter().filter(|r| r.q == q && r.policy == policy).map(|r| r.adoption_rate).collect();
                sel.iter().sum::<f64>() / sel.len() as f64
            })
            .collect();
        assert!(means.windows(2).all(|w| w[0] <= w[1]), "{policy}: {means:?}");
    }
}

#[test]
fn missing_inputs_fail() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.human_thresholds = dir.path().join("nope.csv");
    assert!(run_sweep(&cfg).is_err());
    let mut cfg = config(dir.path());
    cfg.networks = Some(vec!["absent".into()]);
    assert!(run_sweep(&cfg).is_err());
}

/// Independent count: split each line, drop comments and loops, put the
/// sorted pair in a set.
fn oracle_counts(text: &str) -> (usize, usize) {
    let mut nodes = HashSet::new();
    let mut edges = HashSet::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<i64> = line.replace(',', " ").split_whitespace().map(|p| p.parse().unwrap()).collect();
        nodes.extend(parts.iter().copied());
        if parts.len() >= 2 && parts[0] != parts[1] {
            edges.insert((parts[0].min(parts[1]), parts[0].max(parts[1])));
        }
    }
    (nodes.len(), edges.len())
}

#[test]
fn loader_matches_line_count_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let dir = tempfile::tempdir().unwrap();
    for trial in 0..20 {
        let mut text = String::from("# generated\n");
        for _ in 0..rng.random_range(1..200) {
            let a = rng.random_range(1..60);
            let b = if rng.random::<f64>() < 0.05 { a } else { rng.random_range(1..60) };
            let sep = if rng.random::<bool>() { " " } else { "," };
            text.push_str(&format!("{a}{sep}{b}\n"));
        }
        text.push_str("500\n");
        let path = dir.path().join(format!("g{trial}.txt"));
        fs::write(&path, &text).unwrap();
        let net = load_network(&path).unwrap();
        let m = network_metrics(&net);
        assert_eq!((m.n_nodes, m.n_edges), oracle_counts(&text));
        assert_eq!(m.degrees.iter().sum::<usize>(), 2 * m.n_edges);
    }
}

#[test]
fn dry_run_counts_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let keys = amplifier_core::experiment::plan_row_keys(&cfg).unwrap();
    assert_eq!(keys.len(), 2 * 3 * 6 * 2 * 2);
    assert!(!cfg.output.exists());
}
