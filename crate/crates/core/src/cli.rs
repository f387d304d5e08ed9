//! The `f2b` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audit::{build_audit_pairs, run_audit, AuditSpec, GroupAttr, PoolKind};
use crate::error::{Error, Result};
use crate::eval::{
    answer_pairs, check_trained_on, evaluate_regression, export_questionnaire, generate_pairs,
    key_path_for, score_human_answers, EvalReport,
};
use crate::ingest::{load_dataset, read_embeddings, Dataset};
use crate::split::{
    read_split, split_across_people_with, split_within_person, write_split, SplitPlan, TestQuota,
};
use crate::svr::{load_model, save_model, train_detailed, KernelSpec, SvrHyperParams, SvrModel};
use crate::synthetic::{generate, SynthConfig};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "f2b",
    version,
    about = "Estimate BMI from face embeddings and audit the estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition records into train and test sets.
    Split(SplitArgs),
    /// Fit an epsilon-SVR on the training side of a split.
    Train(TrainArgs),
    /// Predict BMI for every vector in an embeddings file.
    Predict(PredictArgs),
    /// Pearson correlation on the test side of a split.
    Eval(EvalArgs),
    /// Build the pairwise comparison task and score it.
    Pairs(PairsArgs),
    /// Matched-pair bias audit between two groups.
    Bias(BiasArgs),
    /// Write a synthetic cohort (metadata.csv and embeddings.f2be).
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Metadata CSV.
    #[arg(long)]
    metadata: PathBuf,
    /// F2BE embeddings file.
    #[arg(long)]
    embeddings: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    AcrossPeople,
    WithinPerson,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    protocol: ProtocolArg,
    /// Test share of records (across-people).
    #[arg(long, conflicts_with = "n_test")]
    test_fraction: Option<f64>,
    /// Test record count (either protocol).
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Split CSV; without it every record is used for training.
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelArg,
    /// RBF width; defaults to 1/dim.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    #[arg(long)]
    max_passes: Option<usize>,
    /// Use raw embeddings instead of unit-normalized ones.
    #[arg(long)]
    no_normalize: bool,
    /// Accepted for uniformity; the solver itself is deterministic.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long)]
    per_gender: bool,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairsArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Pairs are drawn from this split's test side; all records otherwise.
    #[arg(long)]
    split: Option<PathBuf>,
    /// Score the pairs with this model.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    per_category: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the questionnaire here and its answer key alongside.
    #[arg(long)]
    export_questionnaire: Option<PathBuf>,
    /// Rater answers (`pair_id,answer`) to score against the key.
    #[arg(long)]
    answers: Option<PathBuf>,
    /// Answer key; defaults to the one next to --export-questionnaire.
    #[arg(long)]
    key: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GroupAttrArg {
    Gender,
    Race,
}

#[derive(Debug, Args)]
struct BiasArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long, value_enum)]
    group_attr: GroupAttrArg,
    /// The two groups, comma separated (e.g. F,M).
    #[arg(long, value_delimiter = ',', required = true)]
    groups: Vec<String>,
    #[arg(long, default_value_t = 2000)]
    n_pairs: usize,
    /// Draw pairs from training records too.
    #[arg(long)]
    include_train: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    persons: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 0.42)]
    female_fraction: f64,
    #[arg(long, default_value_t = 0.5)]
    noise_sigma: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Split(a) => cmd_split(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Pairs(a) => cmd_pairs(a),
        Command::Bias(a) => cmd_bias(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn load(data: &DataArgs, normalize: bool) -> Result<Dataset> {
    let (ds, report) = load_dataset(&data.metadata, &data.embeddings, normalize)?;
    if !report.is_clean() {
        eprintln!(
            "note: excluded {} records without embeddings, {} embeddings without records, {} incomplete persons",
            report.orphan_records.len(),
            report.orphan_embeddings.len(),
            report.incomplete_persons.len()
        );
    }
    Ok(ds)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_split_for(ds: &Dataset, path: &Path) -> Result<SplitPlan> {
    let plan = read_split(path)?;
    plan.check(ds)?;
    Ok(plan)
}

fn cmd_split(a: SplitArgs) -> Result<()> {
    let ds = load(&a.data, false)?;
    let plan = match a.protocol {
        ProtocolArg::AcrossPeople => {
            let quota = match (a.test_fraction, a.n_test) {
                (Some(f), None) => TestQuota::Fraction(f),
                (None, Some(n)) => TestQuota::Records(n),
                (None, None) => TestQuota::Fraction(0.2),
                (Some(_), Some(_)) => unreachable!("clap rejects both"),
            };
            split_across_people_with(&ds, quota, a.seed)?
        }
        ProtocolArg::WithinPerson => {
            if a.test_fraction.is_some() {
                return Err(Error::validation(
                    "within-person splits take --n-test, not --test-fraction",
                ));
            }
            let n = a
                .n_test
                .ok_or_else(|| Error::validation("within-person splits require --n-test"))?;
            split_within_person(&ds, n, a.seed)?
        }
    };
    write_split(&a.out, &plan)?;
    println!(
        "{} split: {} train, {} test records -> {}",
        plan.protocol.as_str(),
        plan.train_ids.len(),
        plan.test_ids.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let ds = load(&a.data, !a.no_normalize)?;
    let ids: Vec<String> = match &a.split {
        Some(p) => load_split_for(&ds, p)?.train_vec(),
        None => ds.record_ids().map(str::to_string).collect(),
    };
    let kernel = match (a.kernel, a.gamma) {
        (KernelArg::Linear, None) => KernelSpec::linear(),
        (KernelArg::Linear, Some(_)) => {
            return Err(Error::validation("--gamma only applies to the rbf kernel"))
        }
        (KernelArg::Rbf, Some(g)) => KernelSpec::rbf(g)?,
        (KernelArg::Rbf, None) => KernelSpec::rbf_default(ds.dim())?,
    };
    let params = SvrHyperParams {
        c: a.c,
        epsilon: a.epsilon,
        tolerance: a.tolerance,
        max_passes: a.max_passes,
    };
    let summary = train_detailed(&ds, &ids, kernel, params)?;
    save_model(&a.out, &summary.model)?;
    println!(
        "trained on {} records: {} support vectors, {} iterations, KKT gap {:.3e} -> {}",
        ids.len(),
        summary.model.support.len(),
        summary.iterations,
        summary.kkt_gap,
        a.out.display()
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let vectors = read_embeddings(&a.embeddings)?;
    let mut out = String::from("record_id,predicted_bmi\n");
    for (id, v) in &vectors {
        let y = model.predict_raw(&v.values)?;
        out.push_str(&format!("{id},{y}\n"));
    }
    match &a.out {
        Some(p) => write_text(p, &out),
        None => std::io::stdout()
            .write_all(out.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn model_and_data(data: &DataArgs, model: &Path) -> Result<(SvrModel, Dataset)> {
    let model = load_model(model)?;
    let ds = load(data, model.normalize)?;
    Ok((model, ds))
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let (model, ds) = model_and_data(&a.data, &a.model)?;
    let plan = load_split_for(&ds, &a.split)?;
    check_trained_on(&model, &plan)?;
    let report = EvalReport {
        regression: Some(evaluate_regression(&model, &ds, &plan)?),
        ..EvalReport::default()
    };
    finish_report(&report, a.per_gender, a.out.as_deref())
}

fn finish_report(report: &EvalReport, per_gender: bool, out: Option<&Path>) -> Result<()> {
    print!("{}", report.render(per_gender));
    if let Some(p) = out {
        write_text(p, &(report.to_json()? + "\n"))?;
    }
    Ok(())
}

fn cmd_pairs(a: PairsArgs) -> Result<()> {
    let (model, ds) = match &a.model {
        Some(m) => {
            let (model, ds) = model_and_data(&a.data, m)?;
            (Some(model), ds)
        }
        None => (None, load(&a.data, false)?),
    };
    let pool = match &a.split {
        Some(p) => {
            let plan = load_split_for(&ds, p)?;
            if let Some(m) = &model {
                check_trained_on(m, &plan)?;
            }
            plan.test_ids
        }
        None => ds.record_ids().map(str::to_string).collect(),
    };
    let pairs = generate_pairs(&ds, &pool, a.per_category, a.seed)?;
    let mut report = EvalReport::default();
    if let Some(m) = &model {
        report.machine_pairs = Some(answer_pairs(m, &ds, &pairs)?);
    }
    let mut key = a.key.clone();
    if let Some(q) = &a.export_questionnaire {
        let k = export_questionnaire(&pairs, &ds, q, a.seed)?;
        println!(
            "questionnaire with {} pairs -> {} (key {})",
            pairs.len(),
            q.display(),
            k.display()
        );
        key.get_or_insert(k);
    }
    if let Some(answers) = &a.answers {
        let key = key
            .or_else(|| a.export_questionnaire.as_deref().map(key_path_for))
            .ok_or_else(|| Error::validation("--answers needs --key or --export-questionnaire"))?;
        report.human_pairs = Some(score_human_answers(&key, answers)?);
    }
    if report.machine_pairs.is_none() && report.human_pairs.is_none() {
        println!("generated {} pairs", pairs.len());
    }
    finish_report(&report, false, a.out.as_deref())
}

fn cmd_bias(a: BiasArgs) -> Result<()> {
    let [group_x, group_y] = <[String; 2]>::try_from(a.groups).map_err(|g| {
        Error::validation(format!(
            "--groups takes exactly two labels, got {}",
            g.len()
        ))
    })?;
    let (model, ds) = model_and_data(&a.data, &a.model)?;
    let plan = load_split_for(&ds, &a.split)?;
    check_trained_on(&model, &plan)?;
    let (pool_ids, pool) = if a.include_train {
        (
            ds.record_ids().map(str::to_string).collect(),
            PoolKind::TestAndTrain,
        )
    } else {
        (plan.test_vec(), PoolKind::Test)
    };
    let spec = AuditSpec {
        attr: match a.group_attr {
            GroupAttrArg::Gender => GroupAttr::Gender,
            GroupAttrArg::Race => GroupAttr::Race,
        },
        group_x,
        group_y,
        n_pairs: a.n_pairs,
        seed: a.seed,
        pool,
    };
    let set = build_audit_pairs(&ds, &pool_ids, &spec)?;
    let report = run_audit(&model, &ds, &set)?;
    println!("{}", report.summary());
    if let Some(p) = &a.out {
        write_text(p, &(report.to_json()? + "\n"))?;
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        persons: a.persons,
        dim: a.dim,
        seed: a.seed,
        female_fraction: a.female_fraction,
        noise_sigma: a.noise_sigma,
        ..SynthConfig::default()
    };
    generate(&cfg)?.write(&a.out_dir)?;
    println!(
        "{} persons, dim {} -> {}",
        a.persons,
        a.dim,
        a.out_dir.display()
    );
    Ok(())
}
