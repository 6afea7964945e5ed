use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hazardbench::cox::CoxFit;
use hazardbench::ensemble::ModelBundle;
use hazardbench::screening::ScreeningReport;

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hazardbench"))
        .args(args)
        .env("HAZARDBENCH_LOG", "error")
        .output()
        .unwrap()
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

/// A small synthetic cohort written by `simulate`.
fn simulated(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let spec = dir.join("spec.json");
    let mut json: serde_json::Value =
        serde_json::from_str(&hazardbench::data::GeneratorSpec::readmission_cohort(seed).to_json()).unwrap();
    json["n"] = n.into();
    json["risk_form"]["Linear"]["beta_true"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .take(3)
        .for_each(|b| *b = 1.0.into());
    fs::write(&spec, json.to_string()).unwrap();
    let out = dir.join("sim");
    let o = run(&["simulate", "--input", &p(&spec), "--out", &p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("cohort.csv")
}

#[test]
fn fit_cox_reproduces_golden_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fit-cox", "--input", &p(&data_file("golden_four_rows.csv")), "--out", &p(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = CoxFit::from_json(&fs::read_to_string(dir.path().join("cox_fit.json")).unwrap()).unwrap();
    let expected: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(data_file("golden_four_rows.expected.json")).unwrap()).unwrap();
    assert_eq!(fit.variable_names, vec![expected["variable"].as_str().unwrap()]);
    assert!((fit.beta[0] - expected["beta"].as_f64().unwrap()).abs() < 1e-5);
    let baseline = fs::read_to_string(dir.path().join("baseline_hazard.csv")).unwrap();
    assert!(baseline.starts_with("time,cumulative_hazard\n"));
    assert_eq!(baseline.lines().count(), 4);
}

#[test]
fn screen_json_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = simulated(dir.path(), 400, 2);
    let out = dir.path().join("screen");
    let o = run(&["screen", "--input", &p(&cohort), "--alpha", "0.05", "--out", &p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("screening.json")).unwrap();
    let report: ScreeningReport = serde_json::from_str(&text).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
    let selected_in_json = raw["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["selected"].as_bool().unwrap())
        .count();
    assert_eq!(selected_in_json, report.selected_count());
    assert!(report.selected_count() >= 3);
    let csv = fs::read_to_string(out.join("screening.csv")).unwrap();
    assert_eq!(csv.lines().count(), 52);
}

#[test]
fn km_curve_and_survival_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = dir.path().join("km.csv");
    fs::write(&cohort, "time,event,x\n1,1,0.5\n2,1,0.1\n3,0,0.9\n").unwrap();
    let out = dir.path().join("km");
    assert!(run(&["km", "--input", &p(&cohort), "--out", &p(&out)]).status.success());
    let km = fs::read_to_string(out.join("km.csv")).unwrap();
    let lines: Vec<&str> = km.lines().collect();
    assert_eq!(lines[0], "time,survival,at_risk,events");
    assert!(lines[1].starts_with("1,0.6666666666666666,"));
    assert!(lines[2].starts_with("2,0.3333333333333333,"));

    let fit_dir = dir.path().join("fit");
    let golden = data_file("golden_four_rows.csv");
    assert!(run(&["fit-cox", "--input", &p(&golden), "--out", &p(&fit_dir)]).status.success());
    let profiles = dir.path().join("profiles.csv");
    fs::write(&profiles, "profile,x\nlow,0\nhigh,1\n").unwrap();
    let curves = dir.path().join("curves");
    let o = run(&[
        "curves",
        "--input",
        &p(&fit_dir.join("cox_fit.json")),
        "--input",
        &p(&fit_dir.join("baseline_hazard.csv")),
        "--input",
        &p(&profiles),
        "--out",
        &p(&curves),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(curves.join("survival_curves.csv")).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    // high-risk profile never survives better than the low-risk one
    for k in 0..4 {
        let low: f64 = rows[k][2].parse().unwrap();
        let high: f64 = rows[4 + k][2].parse().unwrap();
        assert!(high <= low);
    }
}

#[test]
fn ensemble_then_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = simulated(dir.path(), 300, 4);
    let ens = dir.path().join("ens");
    let o = run(&[
        "ensemble", "--input", &p(&cohort), "--seed", "4", "--epochs", "300", "--hidden", "4", "--lr", "1e-2",
        "--mode", "average", "--out", &p(&ens),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(ens.join("evaluation.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "Dataset,CoxPH,DeepSurv,Ensembled(nEpochs=300)");
    assert!(lines[1].starts_with("Training,") && lines[2].starts_with("Validation,"));
    let bundle = ModelBundle::from_json(&fs::read_to_string(ens.join("model.json")).unwrap()).unwrap();
    assert_eq!(bundle.ensemble.network.input_dim(), bundle.ensemble.n_selected());

    let eval = dir.path().join("eval");
    let model = ens.join("model.json");
    let o = run(&["evaluate", "--input", &p(&model), "--input", &p(&cohort), "--out", &p(&eval)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(eval.join("evaluation.json")).unwrap(), fs::read(ens.join("evaluation.json")).unwrap());
}

#[test]
fn fit_deepsurv_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = simulated(dir.path(), 200, 6);
    let out = dir.path().join("ds");
    let o = run(&["fit-deepsurv", "--input", &p(&cohort), "--epochs", "120", "--hidden", "", "--out", &p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    assert!(out.join("network.json").exists() && out.join("standardization.json").exists());
}

#[test]
fn artifacts_stay_inside_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let input_dir = dir.path().join("inputs");
    fs::create_dir(&input_dir).unwrap();
    let cohort = input_dir.join("c.csv");
    fs::copy(data_file("golden_four_rows.csv"), &cohort).unwrap();
    let out = dir.path().join("out");
    assert!(run(&["fit-cox", "--input", &p(&cohort), "--out", &p(&out)]).status.success());
    let mut top: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    top.sort();
    assert_eq!(top, vec!["inputs", "out"]);
    assert_eq!(fs::read_dir(&input_dir).unwrap().count(), 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(&dir.path().join("out"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["km", "--bogus", "--out", &out]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let missing = run(&["km", "--input", "/nonexistent/cohort.csv", "--out", &out]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
    assert_eq!(
        run(&["screen", "--input", &p(&data_file("golden_four_rows.csv")), "--alpha", "2", "--out", &out]).status.code(),
        Some(1)
    );

    // two identical columns make the Hessian singular
    let collinear = dir.path().join("collinear.csv");
    fs::write(&collinear, "time,event,a,b\n1,1,0.1,0.1\n2,0,1.3,1.3\n3,1,0.4,0.4\n4,1,2.0,2.0\n5,0,0.7,0.7\n").unwrap();
    let o = run(&["fit-cox", "--input", &p(&collinear), "--out", &out]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cox:"));
}
