use std::path::Path;

use roughmix::mixing::TimeGrid;
use roughmix::xlab::config::{FlowSpec, Tolerances};
use roughmix::xlab::{execute, run, run_file, ExperimentConfig, ExperimentKind};

fn config(kind: ExperimentKind, m: Option<u32>, out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        flow: FlowSpec {
            p: 3,
            q: 3,
            m,
            phase_tol: None,
        },
        seed: 1,
        output_dir: Some(out.to_path_buf()),
        times: None,
        fit_window: None,
        levels: None,
        trials: None,
        n_max: None,
        deltas: None,
        sweep: None,
        tolerances: Tolerances::default(),
    }
}

#[test]
fn config_survives_a_json_round_trip() {
    let mut c = config(ExperimentKind::Mixing, Some(4), Path::new("out"));
    c.times = Some(TimeGrid::log(5.0, 50.0, 12));
    c.fit_window = Some((10.0, 50.0));
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
}

#[test]
fn unknown_fields_are_rejected() {
    let err = ExperimentConfig::from_json(r#"{"kind": "mixing", "flow": {"p": 3, "q": 3}, "tmax": 4}"#).unwrap_err();
    assert!(err.to_string().contains("tmax"), "{err}");
}

#[test]
fn mixing_bundle_is_written_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Mixing, Some(4), dir.path());
    c.times = Some(TimeGrid::log(5.0, 100.0, 16));
    let o = run(&c).unwrap();
    assert_eq!(o.files.len(), 3);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&o.files[1]).unwrap()).unwrap();
    assert_eq!(summary["kind"], "mixing");
    assert_eq!(summary["pass"], o.summary.pass);
    let csv = std::fs::read_to_string(&o.files[0]).unwrap();
    assert!(csv.starts_with("t,norm,k,norm_k\n"));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&o.files[2]).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn identical_configs_give_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::OscillatoryBound, None, dir.path());
    c.levels = Some((0, 2));
    c.trials = Some(3);
    c.times = Some(TimeGrid {
        start: 1.0,
        stop: 1e3,
        n: 20,
        log: true,
        inject_special: false,
    });
    let r = c.resolve().unwrap();
    let a = execute(&r).unwrap();
    let b = execute(&r).unwrap();
    assert_eq!(a, b);
    assert!(a.summary.pass);
}

#[test]
fn fast_and_sharp_times_pass_at_moderate_level() {
    let dir = tempfile::tempdir().unwrap();
    let fast = execute(&config(ExperimentKind::FastTimes, Some(5), dir.path()).resolve().unwrap()).unwrap();
    assert!(fast.summary.pass, "{:?}", fast.summary.checks);
    let sharp = execute(&config(ExperimentKind::Sharpness, Some(5), dir.path()).resolve().unwrap()).unwrap();
    assert!(sharp.summary.pass, "{:?}", sharp.summary.checks);
}

#[test]
fn sweep_rejects_a_fixed_level() {
    let dir = tempfile::tempdir().unwrap();
    let err = config(ExperimentKind::DissipationSweep, Some(3), dir.path()).resolve().unwrap_err();
    assert!(err.to_string().contains("flow.m"), "{err}");
}

#[test]
fn run_file_prefixes_errors_with_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, "{ not json").unwrap();
    let err = run_file(&path).unwrap_err().to_string();
    assert!(err.starts_with(&path.display().to_string()), "{err}");
}

#[test]
fn shipped_configs_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{e}"));
            n += 1;
        }
    }
    assert_eq!(n, 6);
}
