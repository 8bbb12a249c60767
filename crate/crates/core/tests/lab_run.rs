use bblab::lab::{run, verify_manifest, ExperimentConfig, ExperimentKind, MANIFEST};
use bblab::Error;

fn config(json: &str, out: &std::path::Path, threads: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_json(json).unwrap();
    c.out = out.to_path_buf();
    c.threads = Some(threads);
    c
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for json in [
        r#"{"schema":1,"kind":"dichotomy","depth":3,"samples":200,"seed":7}"#,
        r#"{"schema":1,"kind":"metric-audit","depth":2,"samples":100,"seed":3}"#,
        r#"{"schema":1,"kind":"modulus","modulus":{"family":{"type":"product","base_res":8,"fiber_res":8}}}"#,
    ] {
        let mut manifests = Vec::new();
        for (i, threads) in [1, 4, 1].into_iter().enumerate() {
            let out = dir.path().join(format!("run{i}"));
            let r = run(&config(json, &out, threads)).unwrap();
            assert!(verify_manifest(&out).unwrap().is_empty());
            assert!(r.files.contains_key("config.json"));
            manifests.push(std::fs::read_to_string(out.join(MANIFEST)).unwrap());
        }
        assert_eq!(manifests[0], manifests[1], "{json}");
        assert_eq!(manifests[0], manifests[2], "{json}");
    }
}

#[test]
fn tampered_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    run(&config(r#"{"schema":1,"kind":"build-tree","depth":1}"#, &out, 1)).unwrap();
    std::fs::write(out.join("tree.obj"), "o nothing\n").unwrap();
    assert_eq!(verify_manifest(&out).unwrap(), vec!["tree.obj".to_string()]);
}

#[test]
fn negative_control_diverges() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"schema":1,"kind":"metric-audit","lambda":0.9,"negative_control":true,"depth":3,"samples":100}"#;
    let r = run(&config(json, dir.path(), 2)).unwrap();
    assert_eq!(r.summary["divergent"], true);
    let growth = r.summary["level_growth"].as_array().unwrap();
    assert!(growth.last().unwrap().as_f64().unwrap() > 3.0);
    let ok = run(&config(r#"{"schema":1,"kind":"metric-audit","depth":3,"samples":100}"#, dir.path(), 2)).unwrap();
    assert_eq!(ok.summary["divergent"], false);
}

#[test]
fn point_singularity_samples_every_tree() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"schema":1,"kind":"point-singularity","depth":3,"ambient_pitch":0.1}"#;
    let r = run(&config(json, dir.path(), 2)).unwrap();
    assert_eq!(r.summary["sampled_trees"], serde_json::json!([0, 1, 2]));
    assert_eq!(r.summary["tree_measures"].as_array().unwrap().len(), 3);
}

#[test]
fn bad_configs_are_rejected() {
    for json in [
        r#"{"schema":1,"kind":"dichotomy","lambdaa":0.4}"#,
        r#"{"schema":1,"kind":"point-singularity","lambda":0.8}"#,
        r#"{"schema":1,"kind":"shrink","depth_cap":41}"#,
        r#"{"schema":1,"kind":"dichotomy","negative_control":true}"#,
    ] {
        assert!(matches!(ExperimentConfig::from_json(json), Err(Error::ConfigInvalid { .. })), "{json}");
    }
    assert_eq!(ExperimentConfig::new(ExperimentKind::Intersect).lambda, 0.4);
}
