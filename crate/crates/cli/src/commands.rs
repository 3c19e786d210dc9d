use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::CommandFactory;

use nfseer::bank::{self, BankSettings, BankTrainOptions, EpochLoss, NfBank};
use nfseer::dataset::{self, Format, LoadOptions, LoadOutcome, ProjectRecord};
use nfseer::error::{Error, Result};
use nfseer::eval::{cross_validate, emit_plot_data, BaselineBuilder, Builder, CandidateBuilder, CvOptions};
use nfseer::rating::{write_log_csv, MappingTable, Rosetta};

use crate::config::RunConfig;
use crate::{CandidateKind, Cli, Command, ConvertArgs, DataArgs, EvaluateArgs, PredictArgs, TrainArgs, TrainingArgs};

const DEFAULT_K: usize = 10;

pub fn run(cli: Cli) -> Result<ExitCode> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Convert(args) => convert(args, &config),
        Command::Train(args) => train(args, &config),
        Command::Evaluate(args) => evaluate(args, &config),
        Command::Predict(args) => predict(args, &config),
    }
}

fn usage(sub: &str) -> String {
    let mut cmd = Cli::command();
    cmd.find_subcommand_mut(sub)
        .map(|c| c.render_usage().to_string())
        .unwrap_or_default()
}

fn required(value: Option<PathBuf>, flag: &str, sub: &str) -> Result<PathBuf> {
    value.ok_or_else(|| Error::Argument(format!("--{flag} is required\n\n{}", usage(sub))))
}

fn existing(path: PathBuf) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::io(
            &path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ))
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct Inputs {
    data: PathBuf,
    format: Format,
    options: LoadOptions,
}

fn inputs(args: &DataArgs, config: &RunConfig, sub: &str, default_format: Format) -> Result<Inputs> {
    let data = existing(required(args.data.clone().or(config.paths.data.clone()), "data", sub)?)?;
    let format = match args.format.as_deref().or(config.paths.format.as_deref()) {
        Some(f) => f.parse()?,
        None if data.extension().is_some_and(|e| e.eq_ignore_ascii_case("arff")) => Format::PromiseArff,
        None => default_format,
    };
    let rosetta = match args.rosetta.clone().or(config.paths.rosetta.clone()) {
        Some(p) => Rosetta::from_path(&existing(p)?)?,
        None => Rosetta::shipped(),
    };
    let table = match args.mapping.clone().or(config.paths.mapping.clone()) {
        Some(p) => MappingTable::from_path(&existing(p)?)?,
        None => MappingTable::shipped(),
    };
    Ok(Inputs {
        data,
        format,
        options: LoadOptions {
            rosetta,
            table,
            strict: args.strict,
            ..LoadOptions::default()
        },
    })
}

/// Loads the dataset and reports rejected rows; in strict mode any rejection
/// is an error.
fn load(inputs: &Inputs, strict: bool) -> Result<LoadOutcome> {
    let outcome = dataset::load_projects(&inputs.data, inputs.format, &inputs.options)?;
    for r in &outcome.rejected {
        eprintln!("warning: row {} (`{}`) rejected: {}", r.row, r.id, r.reason);
    }
    if strict && !outcome.rejected.is_empty() {
        return Err(Error::Argument(format!(
            "{} record(s) rejected in strict mode",
            outcome.rejected.len()
        )));
    }
    Ok(outcome)
}

fn convert(args: ConvertArgs, config: &RunConfig) -> Result<ExitCode> {
    let inputs = inputs(&args.data, config, "convert", Format::CocomoCsv)?;
    let out = required(args.out.or(config.paths.out.clone()), "out", "convert")?;
    let outcome = load(&inputs, args.data.strict)?;
    dataset::save_seer_csv(&outcome.records, &out)?;
    let log = args.log.unwrap_or_else(|| with_suffix(&out, ".log.csv"));
    write_log_csv(&outcome.log, &log)?;
    println!(
        "converted {} record(s), rejected {}; wrote {} and {}",
        outcome.records.len(),
        outcome.rejected.len(),
        out.display(),
        log.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn bank_settings(config: &RunConfig) -> BankSettings {
    let base = BankSettings::default();
    BankSettings {
        ctb: config.model.ctb.unwrap_or(base.ctb),
        d: config.model.d.unwrap_or(base.d),
        constants: config.model.constants(),
        ..base
    }
}

fn initial_bank(training: &TrainingArgs, config: &RunConfig) -> Result<NfBank> {
    let specs = match training.specs.clone().or(config.paths.specs.clone()) {
        Some(p) => bank::load_specs(&existing(p)?)?,
        None => bank::default_specs(),
    };
    NfBank::init_from_anchors(specs, &bank_settings(config))
}

fn train_options(training: &TrainingArgs, config: &RunConfig) -> BankTrainOptions {
    let mut opts = BankTrainOptions::default();
    let t = &config.train;
    opts.train.epochs = training.epochs.or(t.epochs).unwrap_or(opts.train.epochs);
    opts.train.learning_rate = training.lr.or(t.learning_rate).unwrap_or(opts.train.learning_rate);
    opts.train.tolerance = t.tolerance.unwrap_or(opts.train.tolerance);
    opts.train.seed = training.seed.or(config.cv.seed).unwrap_or(opts.train.seed);
    opts.curve_prior = t.curve_prior.unwrap_or(opts.curve_prior);
    opts.enforce_monotone = !training.no_monotone && t.enforce_monotone.unwrap_or(opts.enforce_monotone);
    opts
}

fn roster(bank: &NfBank) -> BTreeSet<String> {
    bank.parameters().map(str::to_string).collect()
}

fn write_history(path: &Path, history: &[EpochLoss]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
    for h in history {
        w.serialize(h)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn train(args: TrainArgs, config: &RunConfig) -> Result<ExitCode> {
    let mut inputs = inputs(&args.data, config, "train", Format::SeerCsv)?;
    let out = required(args.out.or(config.paths.out.clone()), "out", "train")?;
    let start = initial_bank(&args.training, config)?;
    inputs.options.roster = Some(roster(&start));
    let projects = load(&inputs, args.data.strict)?.records;
    let opts = train_options(&args.training, config);
    let (bank, history) = start.train(&projects, &opts)?;
    bank.save(&out)?;
    let history_path = args.history.unwrap_or_else(|| with_suffix(&out, ".history.csv"));
    write_history(&history_path, &history)?;
    let final_loss = bank.loss(&projects)?;
    println!(
        "trained on {} project(s) for {} epoch(s); final loss {:.6e} (mean squared relative error {:.6e}); ctb {:.6}",
        projects.len(),
        history.len(),
        final_loss,
        final_loss / projects.len() as f64,
        bank.ctb()
    );
    println!("wrote {} and {}", out.display(), history_path.display());
    Ok(ExitCode::SUCCESS)
}

fn evaluate(args: EvaluateArgs, config: &RunConfig) -> Result<ExitCode> {
    let mut inputs = inputs(&args.data, config, "evaluate", Format::SeerCsv)?;
    let seed = args
        .training
        .seed
        .or(config.cv.seed)
        .ok_or_else(|| Error::Argument(format!("--seed is required for evaluate\n\n{}", usage("evaluate"))))?;
    let k = args.k.or(config.cv.k).unwrap_or(DEFAULT_K);
    let start = initial_bank(&args.training, config)?;
    inputs.options.roster = Some(roster(&start));
    let projects = load(&inputs, args.data.strict)?.records;
    let plan = dataset::split_kfold(&projects, k, seed, args.stratify || config.cv.stratify.unwrap_or(false))?;
    let opts = train_options(&args.training, config);
    let cv = CvOptions {
        parallel: !args.sequential && config.cv.parallel.unwrap_or(true),
        ..CvOptions::default()
    };
    let baseline = BaselineBuilder { bank: start.clone() };
    let trained = CandidateBuilder {
        bank: start.clone(),
        options: opts,
    };
    let candidate: &dyn Builder = match args.candidate {
        CandidateKind::Trained => &trained,
        CandidateKind::Baseline => &baseline,
    };
    let report = cross_validate(&projects, &plan, &baseline, candidate, &cv)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", report.summary_table());
    if let Some(path) = args.report.or(config.paths.report.clone()) {
        std::fs::write(&path, report.to_json()).map_err(|e| Error::io(&path, e))?;
        println!("wrote {}", path.display());
    }
    if let Some(dir) = args.plots.or(config.paths.plots.clone()) {
        emit_plot_data(&report.mre_samples()?, &dir)?;
        println!("wrote plot data to {}", dir.display());
    }
    if let Some(path) = args.out.or(config.paths.out.clone()) {
        let bank = match args.candidate {
            CandidateKind::Trained => start.calibrate_ctb(&projects)?.train(&projects, &opts)?.0,
            CandidateKind::Baseline => start.calibrate_ctb(&projects)?,
        };
        bank.save(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn predict(args: PredictArgs, config: &RunConfig) -> Result<ExitCode> {
    let inputs = inputs(&args.data, config, "predict", Format::SeerCsv)?;
    let bank = NfBank::load(&existing(args.model)?)?;
    let out = required(args.out.or(config.paths.out.clone()), "out", "predict")?;
    let outcome = load(&inputs, args.data.strict)?;
    let mut w = csv::Writer::from_path(&out).map_err(|e| Error::Argument(format!("{}: {e}", out.display())))?;
    w.write_record(["id", "predicted_pm", "actual_pm", "status"])?;
    let mut failed = 0;
    for p in &outcome.records {
        match predict_one(&bank, p) {
            Ok(v) => w.write_record([p.id.clone(), v.to_string(), p.actual_effort_pm.to_string(), "ok".into()])?,
            Err(e) => {
                failed += 1;
                eprintln!("warning: {e}");
                w.write_record([
                    p.id.clone(),
                    String::new(),
                    p.actual_effort_pm.to_string(),
                    e.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&out, e))?;
    println!(
        "predicted {} of {} record(s); wrote {}",
        outcome.records.len() - failed,
        outcome.records.len(),
        out.display()
    );
    if failed > 0 && args.data.strict {
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn predict_one(bank: &NfBank, project: &ProjectRecord) -> Result<f64> {
    bank.predict(project)
}
