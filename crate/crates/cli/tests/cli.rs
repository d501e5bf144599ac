use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &[&str] = &["--n", "64", "--b-dis", "8"];

fn zzbwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zzbwave")).args(args).env_remove("ZZBWAVE_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn design(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["design", "--snr-d-db", "10", "--out", s(out)];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    zzbwave(&args)
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(code(&zzbwave(&["--help"])), 0);
    assert_eq!(code(&zzbwave(&["--version"])), 0);
    assert_eq!(code(&zzbwave(&[])), 1);
    assert_eq!(code(&zzbwave(&["design", "--snr-d-db", "10"])), 1);
    assert_eq!(code(&zzbwave(&["design", "--snr-d-db", "ten", "--out", "x"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    assert_eq!(code(&design(&out, &["--init", "gaussian"])), 1);
    assert_eq!(code(&design(&out, &["--init", "file:/nonexistent.json"])), 1);
    assert!(!out.exists());
}

#[test]
fn design_resume_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = design(&first, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let w = json(&first.join("waveform.json"));
    assert_eq!(w["meta"]["converged"], true);
    let trace = fs::read_to_string(first.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iter,objective,alpha,pg_norm\n"));
    let m = json(&first.join("manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["outputs"], serde_json::json!(["waveform.json", "trace.csv"]));

    let again = dir.path().join("again");
    let init = format!("file:{}", s(&first.join("waveform.json")));
    let o = design(&again, &["--init", &init]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let w2 = json(&again.join("waveform.json"));
    assert!(w2["meta"]["iterations"].as_u64().unwrap() <= 1);
    let (f1, f2) = (w["meta"]["objective"].as_f64().unwrap(), w2["meta"]["objective"].as_f64().unwrap());
    assert!((f1 - f2).abs() <= 1e-9 * f1);

    let wrong_grid = dir.path().join("wrong");
    let o = zzbwave(&["design", "--snr-d-db", "10", "--n", "32", "--b-dis", "8", "--init", &init, "--out", s(&wrong_grid)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("n = 64"), "{}", stderr(&o));

    let budget = dir.path().join("budget");
    let o = design(&budget, &["--max-iters", "1"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(json(&budget.join("waveform.json"))["meta"]["converged"], false);
    assert_eq!(json(&budget.join("manifest.json"))["exit_code"], 2);
}

#[test]
fn eval_writes_bounds_and_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eval");
    let mut args = vec!["eval", "--waveform", "sinc", "--waveform", "tone", "--snr-db-range", "0:10:20"];
    args.extend_from_slice(&["--trials", "300", "--seed", "5", "--cdf-at-db", "10", "--out", s(&out)]);
    args.extend_from_slice(SMALL);
    let o = zzbwave(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let mse = fs::read_to_string(out.join("mse.csv")).unwrap();
    let mut lines = mse.lines();
    assert_eq!(lines.next().unwrap(), "snr_db,waveform_id,mse,ci_lo,ci_hi,trials,seed,zzb,crb");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let (zzb, crb): (f64, f64) = (r[7].parse().unwrap(), r[8].parse().unwrap());
        assert!(zzb > 0.0 && crb > 0.0);
        assert_eq!(r[5], "300");
        assert_eq!(r[6], "5");
    }
    assert!(fs::read_to_string(out.join("cdf.csv")).unwrap().starts_with("waveform_id,abs_error,cum_prob\n"));

    let replayed = dir.path().join("replayed");
    let o = zzbwave(&["replay", s(&out.join("manifest.json")), "--out", s(&replayed)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["mse.csv", "cdf.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(replayed.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn eval_seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path, seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_zzbwave"));
        c.args(["eval", "--waveform", "sinc", "--snr-db-range", "10:1:10", "--trials", "50", "--out", s(out)]);
        c.args(SMALL).env_remove("ZZBWAVE_SEED");
        if let Some(v) = seed {
            c.env("ZZBWAVE_SEED", v);
        }
        c.output().unwrap()
    };
    assert_eq!(code(&run(&dir.path().join("none"), None)), 1);
    assert_eq!(code(&run(&dir.path().join("bad"), Some("x"))), 1);
    let out = dir.path().join("env");
    let o = run(&out, Some("11"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&out.join("manifest.json"))["seed"], 11);
}

#[test]
fn eval_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let base = ["eval", "--snr-db-range", "10:1:12", "--seed", "1", "--out", s(&out)];
    let with = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        a.extend_from_slice(SMALL);
        zzbwave(&a)
    };
    assert_eq!(code(&with(&["--waveform", "sinc", "--trials", "0"])), 1);
    assert_eq!(code(&with(&["--waveform", "/no/such/file.json"])), 1);
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"r\": 3}").unwrap();
    assert_eq!(code(&with(&["--waveform", s(&junk)])), 1);
    assert_eq!(code(&with(&["--waveform", "sinc", "--waveform", "sinc"])), 1);
    assert!(!out.join("mse.csv").exists());
}

#[test]
fn adaptive_bank_envelope_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bank");
    let common = ["--snr-db-range", "0:5:20", "--trials", "200", "--seed", "3", "--out", s(&out)];
    let mut args = vec!["adaptive", "--snr-d-list", "10,13,18"];
    args.extend_from_slice(&common);
    args.extend_from_slice(SMALL);
    let o = zzbwave(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["bank/entry_000.json", "bank/entry_002.json", "bank/bank.json", "bank/mse_table.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let env = fs::read_to_string(out.join("adaptive_envelope.csv")).unwrap();
    let mut lines = env.lines();
    assert_eq!(lines.next().unwrap(), "snr_db,entry,snr_d_db,mse,ci_lo,ci_hi,sinc_mse,sinc_ci_lo,sinc_ci_hi");
    assert_eq!(lines.count(), 5);
    let outputs = json(&out.join("manifest.json"))["outputs"].clone();
    assert!(outputs.as_array().unwrap().iter().any(|v| v == "bank/mse_table.csv"));

    let replayed = dir.path().join("replayed");
    let o = zzbwave(&["replay", s(&out.join("manifest.json")), "--out", s(&replayed)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["adaptive_envelope.csv", "bank/mse_table.csv", "bank/entry_001.json", "bank/bank.json"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(replayed.join(f)).unwrap(), "{f}");
    }

    let mut empty = vec!["adaptive", "--snr-d-list", ""];
    empty.extend_from_slice(&common);
    assert_eq!(code(&zzbwave(&empty)), 1);

    let svg = dir.path().join("env.svg");
    let o = zzbwave(&["plot", "--kind", "envelope", "--input", s(&out.join("adaptive_envelope.csv")), "--out", s(&svg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 2);
    assert!(dir.path().join("env.manifest.json").exists());

    let psd = dir.path().join("psd.svg");
    let o = zzbwave(&[
        "plot",
        "--kind",
        "psd",
        "--input",
        s(&out.join("bank/entry_000.json")),
        "--input",
        s(&out.join("bank/entry_002.json")),
        "--out",
        s(&psd),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&psd).unwrap().matches("fill-opacity").count(), 16);
}

#[test]
fn plot_checks_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eval");
    let mut args = vec!["eval", "--waveform", "sinc", "--snr-db-range", "0:10:20", "--trials", "50"];
    args.extend_from_slice(&["--seed", "2", "--cdf-at-db", "0", "--out", s(&out)]);
    args.extend_from_slice(SMALL);
    assert_eq!(code(&zzbwave(&args)), 0);

    let svg = dir.path().join("mse.svg");
    let o = zzbwave(&["plot", "--kind", "mse", "--input", s(&out.join("mse.csv")), "--out", s(&svg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 3);
    for name in ["sinc mse", "sinc zzb", "sinc crb"] {
        assert!(text.contains(name), "{name}");
    }

    let cdf_svg = dir.path().join("cdf.svg");
    let o = zzbwave(&["plot", "--kind", "cdf", "--input", s(&out.join("cdf.csv")), "--out", s(&cdf_svg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let bad = dir.path().join("bad.svg");
    let o = zzbwave(&["plot", "--kind", "mse", "--input", s(&out.join("cdf.csv")), "--out", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("`snr_db`"), "{}", stderr(&o));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(code(&zzbwave(&["plot", "--kind", "cdf", "--input", s(&empty), "--out", s(&bad)])), 1);
    fs::write(&empty, "waveform_id,abs_error,cum_prob\n").unwrap();
    assert_eq!(code(&zzbwave(&["plot", "--kind", "cdf", "--input", s(&empty), "--out", s(&bad)])), 1);
    assert_eq!(code(&zzbwave(&["plot", "--kind", "acf", "--input", s(&empty), "--out", s(&bad)])), 1);
    assert!(!bad.exists());
}
