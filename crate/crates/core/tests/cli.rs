use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn regimelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regimelab"))
        .args(args)
        .env_remove("REGIMELAB_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn synth_corpus(dir: &Path) -> String {
    let out = dir.join("synth");
    let o = regimelab(&["synth", "--seed", "11", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("corpus.json").to_string_lossy().into_owned()
}

#[test]
fn probs_emits_one_row_per_grid_point() {
    let o = regimelab(&["probs", "--grid", "-2:2:5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "gap,p_np,p_fr,p_mn,p_fr_lat,p_mn_lat,z_mn");
    assert_eq!(lines.len(), 6);
    for row in &lines[1..] {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] + v[2] + v[3] - 1.0).abs() < 1e-10);
    }
    assert!(lines[3].starts_with("0,"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(regimelab(&["probs", "--grid", "1:2"]).status.code(), Some(2));
    assert_eq!(regimelab(&["probs", "--grid", "-1:1:3", "--beta", "0"]).status.code(), Some(2));
    assert_eq!(regimelab(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    let o = regimelab(&["dynamics", "--corpus", "/nonexistent/corpus.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_corpus_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"[{"turn": 2, "user": "", "assistant": "", "label": "NP"},
        {"turn": 1, "user": "", "assistant": "", "label": "FR"}]"#)
        .unwrap();
    let o = regimelab(&["dynamics", "--corpus", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(&bad, r#"[{"turn": 1, "user": "", "assistant": "", "label": "XX"}]"#).unwrap();
    assert_eq!(regimelab(&["dynamics", "--corpus", bad.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn dynamics_on_focal_file() {
    let focal = data("toc_focus18.json");
    let o = regimelab(&["dynamics", "--corpus", focal.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 19);

    let o = regimelab(&["dynamics", "--corpus", focal.to_str().unwrap(), "--window", "1"]);
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let cols: Vec<usize> = ["win_np", "win_fr", "win_mn"]
        .iter()
        .map(|c| header.iter().position(|h| h == c).unwrap())
        .collect();
    for row in text.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        let mut vals: Vec<&str> = cols.iter().map(|&c| f[c]).collect();
        vals.sort();
        assert_eq!(vals, ["0.000000", "0.000000", "1.000000"], "row {row}");
    }
}

#[test]
fn fit_writes_consistent_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(tmp.path());
    let out = tmp.path().join("fit");
    let o = regimelab(&["fit", "--corpus", &corpus, "--lambda", "2", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let printed: f64 = stdout(&o).trim().parse().unwrap();

    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("fit.json")).unwrap()).unwrap();
    let obj = &fit["objective"];
    let parts: f64 = ["neg_loglik", "pen_rw", "gauge_pen", "pen_l2"].iter().map(|k| obj[k].as_f64().unwrap()).sum();
    let total = obj["neg_logpost"].as_f64().unwrap();
    assert!((parts - total).abs() <= 1e-9 * total.abs().max(1.0));
    assert!((printed - total).abs() <= 1e-9 * total.abs());
    assert_eq!(fit["config"]["lambda"].as_f64(), Some(2.0));

    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 87);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "fit");
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);

    let sens = regimelab(&["sens", "--fit", out.join("fit.json").to_str().unwrap()]);
    assert!(sens.status.success());
    assert_eq!(stdout(&sens).lines().count(), 87);
}

#[test]
fn sens_rejects_non_fit_json() {
    let focal = data("toc_focus18.json");
    assert_eq!(regimelab(&["sens", "--fit", focal.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn sweep_rows_and_selection() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(tmp.path());
    let out = tmp.path().join("sweep");
    let o = regimelab(&["sweep", "--corpus", &corpus, "--grid-log", "0.5:5:4", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1].split(',').nth(1), Some(""));
    let selected: f64 = stdout(&o).trim().parse().unwrap();
    assert!(lines[1..].iter().any(|l| l.split(',').next().unwrap().parse::<f64>().unwrap() == selected));
}

#[test]
fn sweep_without_mn_turns() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("nomn.json");
    let turns: Vec<String> = (1..=8)
        .map(|t| format!(r#"{{"turn": {t}, "user": "", "assistant": "", "label": "{}"}}"#, if t % 2 == 0 { "FR" } else { "NP" }))
        .collect();
    std::fs::write(&corpus, format!("[{}]", turns.join(","))).unwrap();
    let c = corpus.to_str().unwrap();
    let out = tmp.path().join("s");
    let o = regimelab(&["sweep", "--corpus", c, "--grid-log", "0.5:5:3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(std::fs::read_to_string(out.join("sweep.csv")).unwrap().lines().count(), 4);

    let o = regimelab(&["sweep", "--corpus", c, "--grid-log", "0.5:5:3", "--lambda", "1.5", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1.5");
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(tmp.path());
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"lambda": 3.0, "gauge_w": 50.0}"#).unwrap();
    let out = tmp.path().join("fit");
    let run = |extra: &[&str]| {
        let mut args = vec!["fit", "--corpus", &corpus, "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(regimelab(&args).status.success());
        let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("fit.json")).unwrap()).unwrap();
        (fit["config"]["lambda"].as_f64().unwrap(), fit["config"]["gauge_w"].as_f64().unwrap())
    };
    assert_eq!(run(&[]), (3.0, 50.0));
    assert_eq!(run(&["--lambda", "0.7"]), (0.7, 50.0));

    std::fs::write(&cfg, r#"{"lamda": 3.0}"#).unwrap();
    let o = regimelab(&["fit", "--corpus", &corpus, "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_uses_seed_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, env_seed: Option<&str>, flag: Option<&str>| {
        let out = tmp.path().join(dir);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_regimelab"));
        cmd.args(["synth", "--out-dir", out.to_str().unwrap()]).env_remove("REGIMELAB_SEED");
        if let Some(s) = env_seed {
            cmd.env("REGIMELAB_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.status().unwrap().success());
        std::fs::read(out.join("corpus.json")).unwrap()
    };
    let env5 = run("a", Some("5"), None);
    assert_eq!(env5, run("b", None, Some("5")));
    assert_eq!(run("c", Some("9"), Some("5")), env5);
    assert_ne!(run("d", None, Some("6")), env5);
}

#[test]
fn checkgrad_reports_pass() {
    let o = regimelab(&["checkgrad", "--draws", "200", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("derivative_failures 0 zero_sum_failures 0"));
}
