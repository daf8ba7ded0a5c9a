use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_screenkit"));
    c.env_remove("SCREENKIT_THREADS").env_remove("RUST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn screenkit")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "json" | "svg")))
        .filter(|p| p.file_name().unwrap() != "timing.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn simulate_into(dir: &Path, threads: &str, extra: &[&str]) {
    let mut args = vec![
        "simulate", "--study", "S1", "--replicates", "5", "--seed", "7", "--n", "50", "--p", "40", "--threads", threads,
        "--out",
    ];
    args.push(dir.to_str().unwrap());
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn simulate_is_byte_identical_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for t in ["1", "4", "8", "1"] {
        let dir = tmp.path().join(format!("t{t}_{}", outputs.len()));
        simulate_into(&dir, t, &["--methods", "SIS,DC-SIS,BCor,WD"]);
        outputs.push(read_outputs(&dir));
    }
    assert_eq!(outputs[0].len(), 6);
    for o in &outputs[1..] {
        assert_eq!(o, &outputs[0]);
    }
}

#[test]
fn multivariate_study_rejects_sis() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--study", "S3", "--methods", "SIS", "--replicates", "1", "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let e = stderr(&o);
    assert!(e.contains("SIS") && e.contains("multivariate"), "{e}");
    assert!(fs::read_dir(tmp.path()).unwrap().next().is_none());
}

#[test]
fn report_regenerates_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    simulate_into(&a, "2", &["--methods", "SIRS"]);
    let b = tmp.path().join("b");
    let o = run(&["report", a.join("report.json").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_outputs(&a), read_outputs(&b));
    let criteria = fs::read_to_string(b.join("criteria.csv")).unwrap();
    assert_eq!(criteria.lines().count(), 2);
    assert!(criteria.lines().nth(1).unwrap().starts_with("SIRS,"));
}

#[test]
fn corrupted_report_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("report.json");
    fs::write(&bad, "{\"config\": [1, 2").unwrap();
    let o = run(&["report", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("report.json"));
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"study": "S2", "replicates": 2, "seed": 3, "methods": ["SIS", "RRCS"],
            "simulation": {"n": 40, "p": 30}, "measures": {"sc_transform": "identity"}}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--replicates", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["study"], "S2");
    assert_eq!(report["config"]["replicates"], 3);
    assert_eq!(report["config"]["n"], 40);
    assert_eq!(report["methods"], serde_json::json!(["SIS", "RRCS"]));

    fs::write(&cfg, r#"{"replicate": 2}"#).unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("replicate"));
}

#[test]
fn unknown_flags_are_errors_and_help_lists_flags() {
    let o = run(&["simulate", "--bogus"]);
    assert!(!o.status.success());
    let help = String::from_utf8(run(&["simulate", "--help"]).stdout).unwrap();
    for flag in [
        "--study", "--replicates", "--seed", "--methods", "--cutoff-override", "--wd-solver", "--wd-preprocess",
        "--wd-epsilon", "--sc-transform", "--out", "--threads", "--config",
    ] {
        assert!(help.contains(flag), "missing {flag}");
    }
    let help = String::from_utf8(run(&["screen", "--help"]).stdout).unwrap();
    assert!(help.contains("--impute") && help.contains("--profile"));
}

#[test]
fn threads_env_var_is_validated() {
    let o = bin().env("SCREENKIT_THREADS", "many").args(["selftest", "--seeds", "1", "--assignment-cases", "1"]).output().unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("SCREENKIT_THREADS"));
    let o = bin()
        .env("SCREENKIT_THREADS", "many")
        .args(["--threads", "2", "selftest", "--seeds", "1", "--assignment-cases", "1"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest", "--seeds", "5", "--assignment-cases", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 12);
}

/// Two platforms of 30 genes over 25 samples; `PLANT` equals TMB on both.
fn write_planted(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let n = 25;
    let tmb: Vec<f64> = (0..n).map(|i| ((i * 11) % n) as f64 * 0.5 + 0.25).collect();
    let mut clinical = String::from("#Patient Identifier\tSample Identifier\tTMB\n#STRING\tSTRING\tNUMBER\nPATIENT_ID\tSAMPLE_ID\tTMB_NONSYNONYMOUS\n");
    for (i, t) in tmb.iter().enumerate() {
        writeln!(clinical, "P{i}\tTCGA-{i:02}\t{t}").unwrap();
    }
    let mut paths = Vec::new();
    for (k, name) in ["data_cna.txt", "data_mrna.txt"].iter().enumerate() {
        let mut s = String::from("Hugo_Symbol\tEntrez_Gene_Id");
        for i in (0..n).rev() {
            write!(s, "\tTCGA-{i:02}").unwrap();
        }
        s.push('\n');
        for g in 0..30 {
            let sym = if g == 13 { "PLANT".to_string() } else { format!("GENE{g}") };
            write!(s, "{sym}\t{g}").unwrap();
            for i in (0..n).rev() {
                let v = if g == 13 {
                    tmb[i] * (k + 1) as f64
                } else {
                    (((g * 37 + i * 13 + k * 7) % 17) as f64 - 8.0) / 4.0
                };
                write!(s, "\t{v}").unwrap();
            }
            s.push('\n');
        }
        let p = dir.join(name);
        fs::write(&p, s).unwrap();
        paths.push(p);
    }
    let c = dir.join("data_clinical_sample.txt");
    fs::write(&c, clinical).unwrap();
    (paths[0].clone(), paths[1].clone(), c)
}

#[test]
fn screen_finds_planted_gene_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let (cna, mrna, clin) = write_planted(tmp.path());
    let mut outs = Vec::new();
    for t in ["1", "4", "8"] {
        let out = tmp.path().join(format!("out{t}"));
        let o = run(&[
            "screen", "--profile", cna.to_str().unwrap(), "--profile", mrna.to_str().unwrap(), "--clinical",
            clin.to_str().unwrap(), "--threads", t, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outs.push(read_outputs(&out));
    }
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
    let names: Vec<&str> = outs[0].iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        ["intersection.csv", "real_study.json", "selection_DC-SIS.csv", "selection_PC-Screen.csv", "selection_WD-Screen.csv"]
    );
    let inter = String::from_utf8(outs[0][0].1.clone()).unwrap();
    assert!(inter.lines().any(|l| l == "PLANT"), "{inter}");
    for (name, body) in &outs[0][2..] {
        let second = String::from_utf8(body.clone()).unwrap().lines().nth(1).unwrap().to_string();
        assert!(second.starts_with("PLANT,"), "{name}: {second}");
    }
}

#[test]
fn screen_missing_tmb_column_lists_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let (cna, _, clin) = write_planted(tmp.path());
    let o = run(&[
        "screen", "--profile", cna.to_str().unwrap(), "--clinical", clin.to_str().unwrap(), "--tmb-column", "TMB_TOTAL",
        "--out", tmp.path().join("o").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let e = stderr(&o);
    assert!(e.contains("TMB_TOTAL") && e.contains("PATIENT_ID, SAMPLE_ID, TMB_NONSYNONYMOUS"), "{e}");
}

#[test]
fn screen_rejects_univariate_method_on_two_platforms() {
    let tmp = tempfile::tempdir().unwrap();
    let (cna, mrna, clin) = write_planted(tmp.path());
    let o = run(&[
        "screen", "--profile", cna.to_str().unwrap(), "--profile", mrna.to_str().unwrap(), "--clinical",
        clin.to_str().unwrap(), "--methods", "SIS", "--out", tmp.path().join("o").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("multivariate"));
}
