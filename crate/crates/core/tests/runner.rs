mod common;

use std::path::Path;
use std::process::Command;

use rmt_core::runner::{execute_with, load_manifest, parse_config, run, EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_PASS};

#[test]
fn outputs_are_identical_across_worker_counts() {
    for cfg in common::reduced_configs() {
        let a = execute_with(&cfg, 1).unwrap().digests();
        let b = execute_with(&cfg, 3).unwrap().digests();
        let c = execute_with(&cfg, 3).unwrap().digests();
        assert_eq!(a, b, "{}", cfg.experiment.tag());
        assert_eq!(b, c, "{}", cfg.experiment.tag());
        assert!(!a.is_empty());
    }
}

#[test]
fn csv_outputs_carry_versioned_schema_header() {
    for cfg in common::reduced_configs() {
        let out = execute_with(&cfg, 2).unwrap();
        for (name, bytes) in &out.files {
            if name.ends_with(".csv") {
                let text = std::str::from_utf8(bytes).unwrap();
                let schema = format!("# rmt-locallaw v1 schema={}", cfg.experiment.tag());
                assert!(text.starts_with(&schema), "{name}: {}", text.lines().next().unwrap_or(""));
            }
        }
        assert!(!out.clauses.is_empty(), "{}", cfg.experiment.tag());
    }
}

#[test]
fn manifest_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(r#"{"experiment": "edge", "sizes": [50], "samples": 2, "seed": 4}"#).unwrap();
    let m = run(&cfg, dir.path()).unwrap();
    let back = load_manifest(&dir.path().join("edge.manifest.json")).unwrap();
    assert_eq!(back.outputs, m.outputs);
    assert_eq!(back.config, m.config);
    for o in &m.outputs {
        assert_eq!(std::fs::metadata(dir.path().join(&o.file)).unwrap().len() as usize, o.bytes);
    }
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with('.'))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

fn rmt(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rmt"))
        .args(args)
        .current_dir(dir)
        .env("RMT_WORKERS", "2")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let write = |name: &str, text: &str| std::fs::write(d.join(name), text).unwrap();

    write("ok.json", r#"{"experiment": "rigidity", "sizes": [60], "samples": 2, "seed": 1}"#);
    let (code, stdout, _) = rmt(&["rigidity", "-c", "ok.json", "-o", "out"], d);
    assert_eq!(code, EXIT_PASS, "{stdout}");
    assert!(stdout.contains("PASS"));
    assert!(d.join("out/rigidity.manifest.json").exists());

    write(
        "strict.json",
        r#"{"experiment": "rigidity", "sizes": [60], "samples": 2, "seed": 1, "thresholds": {"rigidity_exponent": 10.0}}"#,
    );
    let (code, stdout, _) = rmt(&["run", "-c", "strict.json", "-o", "strict"], d);
    assert_eq!(code, EXIT_ACCEPTANCE, "{stdout}");
    assert!(stdout.contains("FAIL"));

    let (code, stdout, _) = rmt(&["report", "out/rigidity.manifest.json"], d);
    assert_eq!(code, EXIT_PASS);
    assert!(stdout.contains("overall: PASS"));
    let (code, stdout, _) = rmt(&["report", "out/rigidity.manifest.json", "strict/rigidity.manifest.json"], d);
    assert_eq!(code, EXIT_ACCEPTANCE);
    assert!(stdout.contains("overall: FAIL"));

    write("typo.json", r#"{"experiment": "rigidity", "sizes": [60], "samplse": 2, "seed": 1}"#);
    let (code, _, stderr) = rmt(&["rigidity", "-c", "typo.json"], d);
    assert_eq!(code, EXIT_CONFIG);
    assert!(stderr.contains("samplse"), "{stderr}");

    write("domain.json", r#"{"experiment": "locallaw-scan", "sizes": [100], "samples": 2, "seed": 1, "z_grid": [{"e": 0.0, "eta": 0.005}]}"#);
    let (code, _, stderr) = rmt(&["locallaw-scan", "-c", "domain.json"], d);
    assert_eq!(code, EXIT_CONFIG);
    assert!(stderr.contains("domain"), "{stderr}");

    let (code, _, stderr) = rmt(&["edge", "-c", "ok.json"], d);
    assert_eq!(code, EXIT_CONFIG);
    assert!(stderr.contains("does not match"), "{stderr}");

    let (code, _, _) = rmt(&["rigidity", "-c", "missing.json"], d);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn worker_env_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.json"), r#"{"experiment": "counting", "sizes": [60], "samples": 4, "seed": 3}"#).unwrap();
    let mut digests = Vec::new();
    for w in ["1", "4"] {
        let out = format!("out{w}");
        let status = Command::new(env!("CARGO_BIN_EXE_rmt"))
            .args(["counting", "-c", "c.json", "-o", &out])
            .current_dir(d)
            .env("RMT_WORKERS", w)
            .output()
            .unwrap()
            .status;
        assert_eq!(status.code(), Some(EXIT_PASS));
        let m = load_manifest(&d.join(&out).join("counting.manifest.json")).unwrap();
        assert_eq!(m.workers.to_string(), w);
        digests.push(m.outputs);
    }
    assert_eq!(digests[0], digests[1]);
}
