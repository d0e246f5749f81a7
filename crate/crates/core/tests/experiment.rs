use std::path::Path;

use oce_rl::experiment::{
    format_sig, run_experiment, DeltaSetting, ExperimentConfig, InstanceSource, MEAN_HEADER, SEED_HEADER,
};
use oce_rl::mdp::TabularMDP;

fn config(dir: &Path, name: &str, workers: usize) -> ExperimentConfig {
    ExperimentConfig {
        instance: InstanceSource::Random { states: 6, actions: 3, horizon: 3, gen_seed: 0 },
        utility: "entropic:beta=-0.6".into(),
        episodes: 2000,
        delta: DeltaSetting::default(),
        seeds: vec![0, 1, 2],
        base_seed: 0,
        record_every: Some(100),
        output: dir.join(name),
        risk_seeking_bonus: false,
        workers: Some(workers),
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn three_seeds_and_a_mean_series() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&config(dir.path(), "a.csv", 1)).unwrap();
    let rows = read(&outcome.seed_csv);
    let mut lines = rows.lines();
    assert_eq!(lines.next(), Some(SEED_HEADER));
    assert_eq!(lines.count(), 3 * 21);
    let mean = read(&outcome.mean_csv);
    assert_eq!(mean.lines().next(), Some(MEAN_HEADER));
    assert_eq!(mean.lines().count(), 1 + 21);
    for trace in &outcome.traces {
        let mut previous = 0.0;
        for r in &trace.records {
            assert!(r.instant >= -1e-9);
            assert!(r.cumulative >= previous - 1e-9);
            assert!(r.cumulative <= (r.episode * 3) as f64);
            previous = r.cumulative;
        }
    }
}

#[test]
fn reruns_are_byte_identical_and_order_free() {
    let dir = tempfile::tempdir().unwrap();
    let serial = run_experiment(&config(dir.path(), "serial.csv", 1)).unwrap();
    let again = run_experiment(&config(dir.path(), "again.csv", 1)).unwrap();
    let parallel = run_experiment(&config(dir.path(), "parallel.csv", 3)).unwrap();
    for other in [&again, &parallel] {
        assert_eq!(read(&serial.seed_csv), read(&other.seed_csv));
        assert_eq!(read(&serial.mean_csv), read(&other.mean_csv));
    }
}

#[test]
fn mean_series_is_the_exact_seed_average() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&config(dir.path(), "m.csv", 2)).unwrap();
    let mean_rows = read(&outcome.mean_csv);
    for ((&episode, &mean), line) in outcome.episodes.iter().zip(&outcome.mean).zip(mean_rows.lines().skip(1)) {
        let mut total = 0.0;
        for trace in &outcome.traces {
            total += trace.records[episode - 1].cumulative;
        }
        let recomputed = total / outcome.traces.len() as f64;
        assert_eq!(mean, recomputed);
        assert_eq!(line, format!("OCE-VI,entropic:beta=-0.6,{episode},{},3", format_sig(recomputed)));
    }
}

#[test]
fn single_action_instance_has_no_regret() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.json");
    let p = vec![vec![vec![vec![0.3, 0.7]], vec![vec![1.0, 0.0]]]; 3];
    let r = vec![vec![vec![0.2], vec![0.9]]; 3];
    std::fs::write(&file, TabularMDP::new(p, r, 0).unwrap().to_json()).unwrap();
    let mut c = config(dir.path(), "one.csv", 1);
    c.instance = InstanceSource::File { path: file };
    c.episodes = 50;
    c.record_every = Some(10);
    let outcome = run_experiment(&c).unwrap();
    for line in read(&outcome.seed_csv).lines().skip(1) {
        assert!(line.ends_with(",0,0"), "{line}");
    }
    assert!(outcome.mean.iter().all(|&m| m == 0.0));
}

#[test]
fn invalid_configurations_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), "x.csv", 1);
    c.instance = InstanceSource::Hard {
        actions: 2,
        d: 2,
        horizon: 12,
        c1: 3.0,
        c2: 3.0,
        episodes: Some(2000),
        target: None,
    };
    assert!(run_experiment(&c).is_err());
    let mut c = config(dir.path(), "x.csv", 1);
    c.record_every = Some(5000);
    assert!(run_experiment(&c).is_err());
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let c = config(&blocker, "x.csv", 1);
    assert!(run_experiment(&c).is_err());
}
