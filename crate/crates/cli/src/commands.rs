use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hazardbench::cox::{breslow_baseline, fit_cox, predict_survival, BaselineHazard, CoxConfig, CoxFit};
use hazardbench::data::{
    generate_synthetic, impute, load_csv_path, split, write_dataset_csv, GeneratorSpec, ImputeStrategy,
};
use hazardbench::dataset::SurvivalDataset;
use hazardbench::deepsurv::TrainTrace;
use hazardbench::ensemble::{fit_deepsurv, fit_ensemble, ModelBundle};
use hazardbench::metrics::kaplan_meier;
use hazardbench::screening::{multivariate_refit, univariate_screen};
use log::{info, warn};

use crate::args::{Command, RunArgs};
use crate::error::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Screen(a) => screen(&a),
        Command::FitCox(a) => fit_cox_cmd(&a),
        Command::FitDeepsurv(a) => fit_deepsurv_cmd(&a),
        Command::Ensemble(a) => ensemble(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Km(a) => km(&a),
        Command::Curves(a) => curves(&a),
    }
}

/// Output directory guard: every artifact goes through here.
struct OutDir(PathBuf);

impl OutDir {
    fn create(path: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self(path.to_path_buf()))
    }

    fn write_with<F>(&self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let path = self.0.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.0.join(name);
        self.write_with(name, |w| w.write_all(text.as_bytes()).map_err(|e| CliError::io(&path, e)))
    }
}

fn inputs<'a>(args: &'a RunArgs, names: &[&str]) -> Result<Vec<&'a Path>, CliError> {
    if args.inputs.len() != names.len() {
        return Err(CliError::Usage(format!(
            "expected {} --input file(s) in this order: {}; got {}",
            names.len(),
            names.join(", "),
            args.inputs.len()
        )));
    }
    Ok(args.inputs.iter().map(PathBuf::as_path).collect())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Load a cohort CSV; rows with missing cells are dropped.
fn load_cohort(path: &Path, args: &RunArgs) -> Result<SurvivalDataset, CliError> {
    let table = load_csv_path(path, &args.time_col, &args.event_col)?;
    let table = if table.missing_count() > 0 {
        let kept = impute(&table, ImputeStrategy::CaseDeletion)?;
        warn!(
            "{}: {} missing cells; case deletion kept {} of {} rows",
            path.display(),
            table.missing_count(),
            kept.n_rows(),
            table.n_rows()
        );
        kept
    } else {
        table
    };
    let data = table.to_dataset()?;
    info!(
        "{}: {} subjects, {} events, {} covariates",
        path.display(),
        data.n_subjects(),
        data.n_events(),
        data.n_covariates()
    );
    Ok(data)
}

/// The training part when `--split` is given, otherwise everything.
fn training_part(data: SurvivalDataset, args: &RunArgs) -> Result<SurvivalDataset, CliError> {
    match args.split {
        Some(f) => Ok(split(&data, f, args.seed())?.0),
        None => Ok(data),
    }
}

fn cox_config(args: &RunArgs) -> CoxConfig {
    CoxConfig {
        tie_method: args.tie,
        ..CoxConfig::default()
    }
}

fn write_trace(out: &OutDir, name: &str, trace: &TrainTrace) -> Result<(), CliError> {
    out.write_with(name, |w| Ok(trace.write_csv(w)?))
}

fn simulate(args: &RunArgs) -> Result<(), CliError> {
    args.validate()?;
    let mut spec = match args.inputs.as_slice() {
        [] => GeneratorSpec::readmission_cohort(args.seed()),
        [path] => GeneratorSpec::from_json(&read_text(path)?)?,
        _ => return Err(CliError::Usage("simulate takes at most one --input (a generator spec JSON)".into())),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let cohort = generate_synthetic(&spec)?;
    let out = OutDir::create(&args.out)?;
    out.write_with("cohort.csv", |w| {
        Ok(write_dataset_csv(&cohort.dataset, w, &args.time_col, &args.event_col)?)
    })?;
    out.write_with("true_log_risk.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["row", "true_log_risk"])?;
        for (i, h) in cohort.true_log_risk.iter().enumerate() {
            c.write_record([(i + 1).to_string(), h.to_string()])?;
        }
        c.flush().map_err(csv::Error::from)?;
        Ok(())
    })?;
    out.write_text("generator_spec.json", &spec.to_json())?;
    eprintln!(
        "simulated {} subjects ({} events) with {} covariates",
        cohort.dataset.n_subjects(),
        cohort.dataset.n_events(),
        cohort.dataset.n_covariates()
    );
    Ok(())
}

fn screen(args: &RunArgs) -> Result<(), CliError> {
    args.validate()?;
    let [path] = inputs(args, &["cohort CSV"])?[..] else { unreachable!() };
    let data = training_part(load_cohort(path, args)?, args)?;
    let cfg = cox_config(args);
    let report = univariate_screen(&data, args.alpha, &cfg)?;
    let (report, fit) = multivariate_refit(&data, &report, &cfg)?;
    let out = OutDir::create(&args.out)?;
    out.write_text("screening.json", &report.to_json())?;
    out.write_with("screening.csv", |w| Ok(report.write_csv(w)?))?;
    out.write_text("multivariate_fit.json", &fit.to_json())?;
    eprintln!(
        "selected {} of {} variables at alpha = {}",
        report.selected_count(),
        report.rows.len(),
        args.alpha
    );
    Ok(())
}

fn fit_cox_cmd(args: &RunArgs) -> Result<(), CliError> {
    args.validate()?;
    let [path] = inputs(args, &["cohort CSV"])?[..] else { unreachable!() };
    let data = training_part(load_cohort(path, args)?, args)?;
    let fit = fit_cox(&data, &cox_config(args))?;
    if !fit.converged {
        warn!("fit-cox: Newton-Raphson did not converge after {} iterations", fit.iterations);
    }
    let baseline = breslow_baseline(&data, &fit)?;
    let out = OutDir::create(&args.out)?;
    out.write_text("cox_fit.json", &fit.to_json())?;
    out.write_with("baseline_hazard.csv", |w| Ok(baseline.write_csv(w)?))?;
    eprintln!(
        "fitted {} coefficients, log-likelihood {:.6}, converged {}",
        fit.n_coefficients(),
        fit.log_likelihood,
        fit.converged
    );
    Ok(())
}

fn fit_deepsurv_cmd(args: &RunArgs) -> Result<(), CliError> {
    args.validate()?;
    let [path] = inputs(args, &["cohort CSV"])?[..] else { unreachable!() };
    let data = load_cohort(path, args)?;
    let (train, val) = split(&data, args.split_fraction(), args.seed())?;
    let (model, trace) = fit_deepsurv(&train, &val, &args.train_config()?)?;
    let out = OutDir::create(&args.out)?;
    out.write_text("network.json", &model.network.to_json())?;
    out.write_text(
        "standardization.json",
        &serde_json::to_string_pretty(&model.standardization).expect("serializes"),
    )?;
    write_trace(&out, "trace.csv", &trace)?;
    if let Some(r) = trace.last() {
        eprintln!(
            "trained {} epochs: loss {:.6}, train c-index {:?}, validation c-index {:?}",
            r.epoch, r.train_loss, r.train_c_index, r.validation_c_index
        );
    }
    Ok(())
}

fn write_report(out: &OutDir, report: &hazardbench::ensemble::EvaluationReport) -> Result<(), CliError> {
    out.write_text("evaluation.txt", &report.to_string())?;
    out.write_with("evaluation.csv", |w| Ok(report.write_csv(w)?))?;
    out.write_text("evaluation.json", &report.to_json())?;
    print!("{report}");
    Ok(())
}

fn ensemble(args: &RunArgs) -> Result<(), CliError> {
    args.validate()?;
    let [path] = inputs(args, &["cohort CSV"])?[..] else { unreachable!() };
    let data = load_cohort(path, args)?;
    let fraction = args.split_fraction();
    let (train, val) = split(&data, fraction, args.seed())?;
    let config = args.train_config()?;
    let (model, ensemble_trace) =
        fit_ensemble(&train, &val, args.alpha, &cox_config(args), &config, args.mode)?;
    let (deepsurv, deepsurv_trace) = fit_deepsurv(&train, &val, &config)?;
    let bundle = ModelBundle {
        ensemble: model,
        deepsurv,
        seed: args.seed(),
        split_fraction: fraction,
    };
    let report = bundle.evaluate(&train, &val)?;

    let out = OutDir::create(&args.out)?;
    out.write_text("model.json", &bundle.to_json())?;
    out.write_text("screening.json", &bundle.ensemble.screening.to_json())?;
    out.write_with("screening.csv", |w| Ok(bundle.ensemble.screening.write_csv(w)?))?;
    write_trace(&out, "ensemble_trace.csv", &ensemble_trace)?;
    write_trace(&out, "deepsurv_trace.csv", &deepsurv_trace)?;
    write_report(&out, &report)
}

fn evaluate(args: &RunArgs) -> Result<(), CliError> {
    args.validate()?;
    let [bundle_path, cohort_path] = inputs(args, &["model bundle JSON", "cohort CSV"])?[..] else {
        unreachable!()
    };
    let bundle = ModelBundle::from_json(&read_text(bundle_path)?)?;
    let data = load_cohort(cohort_path, args)?;
    let fraction = args.split.unwrap_or(bundle.split_fraction);
    let seed = args.seed.unwrap_or(bundle.seed);
    let (train, val) = split(&data, fraction, seed)?;
    let report = bundle.evaluate(&train, &val)?;
    let out = OutDir::create(&args.out)?;
    write_report(&out, &report)
}

fn km(args: &RunArgs) -> Result<(), CliError> {
    args.validate()?;
    let [path] = inputs(args, &["cohort CSV"])?[..] else { unreachable!() };
    let data = training_part(load_cohort(path, args)?, args)?;
    let curve = kaplan_meier(data.times(), data.events())?;
    let out = OutDir::create(&args.out)?;
    out.write_with("km.csv", |w| Ok(curve.write_csv(w)?))
}

/// Covariate profiles: one row per profile, one column per fitted variable
/// (any order), plus an optional `profile` label column.
fn read_profiles(path: &Path, fit: &CoxFit) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let bad = |m: String| CliError::Usage(format!("{}: {m}", path.display()));
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label = header.iter().position(|h| h == "profile");
    let columns = fit
        .variable_names
        .iter()
        .map(|v| {
            header
                .iter()
                .position(|h| h == v)
                .ok_or_else(|| bad(format!("missing column `{v}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut profiles = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let name = label
            .map(|c| record[c].to_string())
            .unwrap_or_else(|| format!("profile_{}", r + 1));
        let x = columns
            .iter()
            .map(|&c| {
                record[c]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("row {}: `{}` is not a number", r + 1, &record[c])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        profiles.push((name, x));
    }
    if profiles.is_empty() {
        return Err(bad("no profiles".into()));
    }
    Ok(profiles)
}

fn curves(args: &RunArgs) -> Result<(), CliError> {
    args.validate()?;
    let [fit_path, baseline_path, profile_path] =
        inputs(args, &["Cox fit JSON", "baseline hazard CSV", "profiles CSV"])?[..]
    else {
        unreachable!()
    };
    let fit = CoxFit::from_json(&read_text(fit_path)?)?;
    let baseline_file = File::open(baseline_path).map_err(|e| CliError::io(baseline_path, e))?;
    let baseline = BaselineHazard::read_csv(baseline_file)?;
    let profiles = read_profiles(profile_path, &fit)?;

    let out = OutDir::create(&args.out)?;
    out.write_with("survival_curves.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["profile", "time", "survival"])?;
        for (name, x) in &profiles {
            c.write_record([name.as_str(), "0", "1"])?;
            for &t in &baseline.event_times {
                let s = predict_survival(&fit, &baseline, x, t)?;
                c.write_record([name.clone(), t.to_string(), s.to_string()])?;
            }
        }
        c.flush().map_err(csv::Error::from)?;
        Ok(())
    })
}
