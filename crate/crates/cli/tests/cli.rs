mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::{run, synthetic_corpus, write, HEADER};
use namefit::config::SuiteFile;
use namefit::io::load_distribution;
use namefit::manifest::RunManifest;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn fixture() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write(dir.path(), "corpus.csv", &synthetic_corpus(1));
    (dir, corpus)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dice_smoke_test() {
    let (code, out, _) = run(&["gof", "--observed", "5,8,9,8,10,20", "--uniform", "6"]);
    assert_eq!(code, 0);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "13.4");
    let p: f64 = row[2].parse().unwrap();
    assert!((p - 0.0199).abs() < 5e-4);
}

#[test]
fn power_smoke_test() {
    let (code, out, _) = run(&["--format", "json", "power", "--null", "u6", "--alt", ".133,.133,.133,.2,.2,.2", "--n", "60"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["power"].as_f64().unwrap() - 0.189).abs() < 0.003);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["gof", "--observed", "1,2"]).0, 1);
    assert_eq!(run(&["--format", "xml", "power"]).0, 1);
    assert_eq!(run(&["--alpha", "2", "ci", "--count", "1", "--n", "2"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn numeric_and_data_errors() {
    // a cell with zero expected count is a data error
    assert_eq!(run(&["gof", "--observed", "1,2", "--probs", "1,0"]).0, 2);
    assert_eq!(run(&["bins", "/nonexistent/file.csv"]).0, 2);
}

#[test]
fn validate_reports_rows() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.csv", &format!("{HEADER}p1,Simon,male,palestine,-4,73,false,false,,Biblical,Ilan-1\n"));
    let (code, _, err) = run(&["validate", s(&good)]);
    assert_eq!(code, 0, "{err}");

    let bad = write(
        dir.path(),
        "bad.csv",
        &format!("{HEADER}p1,Simon,male,palestine,70,20,false,false,,Biblical,GA\np2,Judah,male,palestine,,,false,false,,Norse,GA\n"),
    );
    let (code, out, _) = run(&["validate", s(&bad)]);
    assert_eq!(code, 2);
    assert!(out.contains("bad.csv,2,inverted date range"), "{out}");
    assert!(out.contains("Semitic-Greek"), "{out}");

    let missing = write(dir.path(), "missing.csv", "person_id,name\np1,Simon\n");
    let (code, _, err) = run(&["validate", s(&missing)]);
    assert_eq!(code, 2);
    assert!(err.contains("missing columns"), "{err}");
}

#[test]
fn distribution_export_round_trips() {
    let (dir, corpus) = fixture();
    let (code, out, _) = run(&["distribution", s(&corpus), "--source", "GA"]);
    assert_eq!(code, 0);
    let path = write(dir.path(), "ga.csv", &out);
    let dist = load_distribution(&path).unwrap();
    assert!(dist.total() >= 82);
    let (_, again, _) = run(&["distribution", s(&path)]);
    assert_eq!(again, out);
}

#[test]
fn filters_shrink_the_reference() {
    let (_dir, corpus) = fixture();
    let total = |extra: &[&str]| {
        let mut args = vec!["--format", "json", "distribution", s(&corpus), "--source", "Ilan-1"];
        args.extend_from_slice(extra);
        let (code, out, err) = run(&args);
        assert_eq!(code, 0, "{err}");
        serde_json::from_str::<serde_json::Value>(&out).unwrap()["total"].as_u64().unwrap()
    };
    let all = total(&[]);
    let inclusive = total(&["--window", "-4:73"]);
    let exclusive = total(&["--window", "-4:73", "--dating", "exclusive"]);
    let no_fict = total(&["--window", "-4:73", "--dating", "exclusive", "--exclude-fictitious"]);
    assert!(all > inclusive && inclusive >= exclusive && exclusive > no_fict);
}

#[test]
fn bins_export() {
    let (_dir, corpus) = fixture();
    let (code, out, _) = run(&["--format", "json", "--bins", "6", "bins", s(&corpus), "--source", "Ilan-1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["k"], 6);
    let bins = v["bins"].as_array().unwrap();
    assert_eq!(bins[0]["lo"], 1);
    assert!(bins[5]["hi"].is_null());
    let mass: u64 = bins.iter().map(|b| b["reference_mass"].as_u64().unwrap()).sum();
    assert_eq!(mass, v["reference_total"].as_u64().unwrap());
}

#[test]
fn gof_from_files() {
    let (_dir, corpus) = fixture();
    let c = s(&corpus);
    let args = ["--format", "json", "gof", "--test", c, "--reference", c, "--test-source", "GA", "--reference-source", "Ilan-1"];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let plain: serde_json::Value = serde_json::from_str(&out).unwrap();
    let mut sub = args.to_vec();
    sub.push("--subtract");
    let (_, out, _) = run(&sub);
    let subtracted: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(subtracted["reference_adjusted"], true);
    assert_ne!(plain["p_value"], subtracted["p_value"]);

    let mut origin = args.to_vec();
    origin.push("--origin");
    let (code, out, err) = run(&origin);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["labels"].as_array().unwrap().iter().any(|l| l == "Biblical"));
}

#[test]
fn independence_modes() {
    let (code, out, _) = run(&["independence", "--table", "10,20,30;20,40,60"]);
    assert_eq!(code, 0);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    assert_eq!(row[1], "2");

    let (_dir, corpus) = fixture();
    let c = s(&corpus);
    let (code, _, err) =
        run(&["independence", "--test", c, "--reference", c, "--test-source", "Josephus", "--reference-source", "Ilan-1"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn rare_modes() {
    let (code, out, _) = run(&["rare", "--n", "53", "--k", "4", "--pool", "2582", "--rare-occ", "520", "--ks", "4"]);
    assert_eq!(code, 0);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 4.0);
    assert!((row[1] - 0.011).abs() < 0.001);
    assert!((row[1] - row[2]).abs() < 0.01);

    let (code, out, _) = run(&["rare", "--n", "53", "--k", "4", "--calibrate", "0.011"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 55);

    let (_dir, corpus) = fixture();
    let c = s(&corpus);
    let (code, out, err) = run(&[
        "--format", "json", "rare", "--test", c, "--reference", c, "--test-source", "GB-53", "--reference-source", "Ilan-1",
    ]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["draw_size"], 53);
}

#[test]
fn bootstrap_is_independent_of_jobs() {
    let (_dir, corpus) = fixture();
    let c = s(&corpus);
    let go = |jobs: &str, seed: &str| {
        let (code, out, err) =
            run(&["--seed", seed, "--jobs", jobs, "bootstrap-ci", c, "--source", "Ilan-1", "--draw", "52", "--replicates", "500"]);
        assert_eq!(code, 0, "{err}");
        out
    };
    let a = go("1", "7");
    assert_eq!(a, go("4", "7"));
    assert_ne!(a, go("1", "8"));
    assert_eq!(a.lines().count(), 7);
}

#[test]
fn suite_writes_matrix_and_manifest() {
    let (dir, corpus) = fixture();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let config = configs_dir().join("main-suite.json");
    let go = |out: &Path, jobs: &str| {
        let (code, stdout, err) =
            run(&["--jobs", jobs, "suite", s(&config), "--out", s(out), "--corpus", s(&corpus)]);
        assert_eq!(code, 0, "{err}");
        assert!(err.contains("of 18 tests matched"), "{err}");
        assert!(err.contains("0.002777"), "{err}");
        stdout
    };
    let stdout = go(&out_a, "1");
    go(&out_b, "3");
    for f in ["matrix.csv", "matrix.json", "scenarios.csv", "report.json"] {
        assert_eq!(fs::read(out_a.join(f)).unwrap(), fs::read(out_b.join(f)).unwrap(), "{f}");
    }
    let matrix = fs::read_to_string(out_a.join("matrix.csv")).unwrap();
    assert_eq!(stdout, matrix);
    let lines: Vec<&str> = matrix.lines().collect();
    assert_eq!(lines[0], "reference,variable,GA,Josephus,Novels,Ilan-1F,Uniform");
    assert_eq!(lines.len(), 5);
    assert_eq!(matrix.matches("NA").count(), 2);

    let m: RunManifest = serde_json::from_str(&fs::read_to_string(out_a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.corpora.len(), 1);
    assert_eq!(m.corpora[0].sha256.len(), 64);
    assert!(m.config.is_some());
}

#[test]
fn figures_are_written() {
    let (dir, corpus) = fixture();
    let out = dir.path().join("fig");
    let config = configs_dir().join("main-suite.json");
    let (code, _, err) = run(&["--seed", "3", "figures", s(&config), "--out", s(&out), "--corpus", s(&corpus)]);
    assert_eq!(code, 0, "{err}");
    let pop = fs::read_to_string(out.join("popularity-ilan1.csv")).unwrap();
    assert!(pop.starts_with("series,bin_label,center,lower,upper,defined\n"));
    assert!(pop.lines().any(|l| l.starts_with("Uniform,")));
    assert_eq!(pop.lines().filter(|l| l.starts_with("reference,")).count(), 6);
    let top = fs::read_to_string(out.join("top-names-ilan1.csv")).unwrap();
    assert_eq!(top.lines().filter(|l| l.starts_with("reference,")).count(), 13);
    assert!(out.join("origin-ilan3.json").exists());
}

#[test]
fn every_preset_runs_on_the_fixture() {
    let (dir, corpus) = fixture();
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = SuiteFile::load(&path).unwrap();
        assert!(!cfg.scenarios.is_empty());
        let out = dir.path().join(path.file_stem().unwrap());
        let (code, _, err) = run(&["suite", s(&path), "--out", s(&out), "--corpus", s(&corpus)]);
        assert_eq!(code, 0, "{}: {err}", path.display());
    }
}

#[test]
fn unknown_source_is_a_data_error() {
    let (dir, corpus) = fixture();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"[{"test_source":"Qumran","reference_source":"Ilan-1","variable":"frequency","expected_fit":"fit"}]"#,
    );
    let (code, _, err) = run(&["suite", s(&cfg), "--out", s(&dir.path().join("o")), "--corpus", s(&corpus)]);
    assert_eq!(code, 2);
    assert!(err.contains("Qumran"));
}
