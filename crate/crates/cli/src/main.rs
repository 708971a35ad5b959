//! `anchoragg`: generate synthetic tournaments, train and cross-validate
//! aggregators, run the forecaster-id ablation and compare methods.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or config error, 3 data
//! validation error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use anchor_agg::domain::{read_tournament, validate, write_tournament, Tournament};
use anchor_agg::model::attention_report;
use anchor_agg::report::{
    write_attention_csv, write_calibration_csv, write_daily_briers_csv, write_question_scores_csv,
    write_rank_percentiles_csv, write_roc_csv, write_summary_csv, write_time_profile_csv, SummaryRow,
};
use anchor_agg::scoring::{one_sided_z, ZTest};
use anchor_agg::synthdata::{generate_with_truth, manifest, SynthConfig};
use anchor_agg::training::{
    ablation_table, cross_validate, train, write_history_csv, Aggregator, CvOptions, TrainConfig,
};

const USAGE: u8 = 2;
const INVALID_DATA: u8 = 3;
const INTERNAL: u8 = 1;

#[derive(Parser)]
#[command(
    name = "anchoragg",
    version,
    about = "Aggregate human and machine probabilistic forecasts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic tournament and its manifest
    Generate {
        /// JSON generator config; missing fields take their defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the config
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the attention model on every question of a tournament
    Train {
        /// Tournament directory holding questions.json, forecasters.json and forecasts.jsonl
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Output directory for model.json and training_history.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate one aggregator and write its report and CSVs
    Evaluate {
        /// Tournament directory holding questions.json, forecasters.json and forecasts.jsonl
        #[arg(long)]
        data: PathBuf,
        /// One of m0, m1, m2, attention
        #[arg(long, default_value = "attention")]
        aggregator: Aggregator,
        #[command(flatten)]
        run: RunArgs,
        /// Output directory for report.json and the CSV exports
        #[arg(long)]
        report: PathBuf,
    },
    /// Run the 2x3 ablation of forecaster ids and forecaster kinds
    Ablate {
        /// Tournament directory holding questions.json, forecasters.json and forecasts.jsonl
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Output CSV with columns feature, forecaster_type, brier
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate all four aggregators and test attention against the
    /// best baseline
    Compare {
        /// Tournament directory holding questions.json, forecasters.json and forecasts.jsonl
        #[arg(long, required_unless_present = "from_summary")]
        data: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        /// JSON array of summary rows to test instead of running on data
        #[arg(long, conflicts_with = "data")]
        from_summary: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    /// JSON training config merged over the desk-scale defaults
    #[arg(long)]
    train_config: Option<PathBuf>,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: INTERNAL,
            error: e.into(),
        }
    }
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Generate { config, seed, out } => cmd_generate(config.as_deref(), seed, &out),
        Command::Train { data, run, out } => cmd_train(&data, &run, &out),
        Command::Evaluate {
            data,
            aggregator,
            run,
            report,
        } => cmd_evaluate(&data, aggregator, &run, &report),
        Command::Ablate { data, run, out } => cmd_ablate(&data, &run, &out),
        Command::Compare {
            data,
            run,
            from_summary,
        } => match (data, from_summary) {
            (_, Some(path)) => cmd_compare_summary(&path),
            (Some(data), None) => cmd_compare(&data, &run),
            (None, None) => Err(fail(USAGE, anyhow!("compare needs --data or --from-summary"))),
        },
    }
}

fn read_json(path: &Path) -> Outcome<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()));
    let text = text.map_err(|e| fail(USAGE, e))?;
    serde_json::from_str(&text).map_err(|e| fail(USAGE, anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

/// Recursively overlays `over` onto `base`, object keys by key.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

fn train_config(run: &RunArgs) -> Outcome<TrainConfig> {
    let mut config = TrainConfig::desk_scale();
    if let Some(path) = &run.train_config {
        let mut base = serde_json::to_value(&config)?;
        merge(&mut base, read_json(path)?);
        config = serde_json::from_value(base).map_err(|e| fail(USAGE, anyhow!("{}: {e}", path.display())))?;
    }
    config.seed = run.seed;
    config.validate().map_err(|e| fail(USAGE, e.into()))?;
    Ok(config)
}

fn cv_options(run: &RunArgs, tournament: &Tournament) -> Outcome<CvOptions> {
    let mut opts = CvOptions::new(run.seed);
    opts.k = run.folds as usize;
    opts.train = train_config(run)?;
    if tournament.questions().len() < opts.k {
        return Err(fail(
            USAGE,
            anyhow!(
                "{} questions cannot fill {} folds",
                tournament.questions().len(),
                opts.k
            ),
        ));
    }
    Ok(opts)
}

fn load_data(dir: &Path) -> Outcome<Tournament> {
    let t = read_tournament(dir)
        .with_context(|| format!("reading tournament from {}", dir.display()))
        .map_err(|e| fail(INVALID_DATA, e))?;
    let report = validate(&t);
    if !report.is_valid() {
        return Err(fail(
            INVALID_DATA,
            anyhow!("{} validation errors:\n{report}", report.violations.len()),
        ));
    }
    Ok(t)
}

fn distinct(input: &Path, output: &Path) -> Outcome {
    let same = match (input.canonicalize(), output.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => input == output,
    };
    if same {
        return Err(fail(
            USAGE,
            anyhow!("output path {} is the input path", output.display()),
        ));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn cmd_generate(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Outcome {
    let mut cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(|e| fail(USAGE, e))?;
            serde_json::from_str::<SynthConfig>(&text)
                .map_err(|e| fail(USAGE, anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| fail(USAGE, e.into()))?;
    let (tournament, truth) = generate_with_truth(&cfg)?;
    write_tournament(out, &tournament).with_context(|| format!("writing {}", out.display()))?;
    let mut m = manifest(&cfg, &tournament, &truth);
    m.created_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    write_json(&out.join("manifest.json"), &m)?;
    println!(
        "wrote {} questions, {} forecasters and {} forecasts to {}",
        m.n_questions,
        m.n_forecasters,
        m.n_forecasts,
        out.display()
    );
    Ok(())
}

fn cmd_train(data: &Path, run: &RunArgs, out: &Path) -> Outcome {
    distinct(data, out)?;
    let t = load_data(data)?;
    let config = train_config(run)?;
    let words = anchor_agg::features::WordVectorTable::builtin();
    let (model, history) = train(&t, &config, &words)?;
    create_dir(out)?;
    model.save(&out.join("model.json"))?;
    write_history_csv(&out.join("training_history.csv"), std::slice::from_ref(&history))?;
    println!(
        "best validation loss {:.6} at epoch {} of {}",
        history.best_val_loss,
        history.best_epoch,
        history.epochs.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct BaselineRow {
    fold: usize,
    variant: String,
    decay_lambda: f64,
    gamma: f64,
    alpha: f64,
    subset_latest: bool,
}

fn cmd_evaluate(data: &Path, aggregator: Aggregator, run: &RunArgs, dir: &Path) -> Outcome {
    distinct(data, dir)?;
    let t = load_data(data)?;
    let mut opts = cv_options(run, &t)?;
    opts.aggregators = vec![aggregator];
    let cv = cross_validate(&t, &opts)?;
    let r = cv.run(aggregator).ok_or_else(|| anyhow!("no run for {aggregator}"))?;
    create_dir(dir)?;
    write_json(&dir.join("report.json"), &r.report)?;
    let mut rows = vec![SummaryRow::new(aggregator.name(), "all", &r.report.summary)];
    rows.extend(
        r.fold_reports
            .iter()
            .enumerate()
            .map(|(i, f)| SummaryRow::new(aggregator.name(), i.to_string(), &f.summary)),
    );
    write_summary_csv(&dir.join("brier_summary.csv"), &rows)?;
    write_calibration_csv(&dir.join("calibration.csv"), &r.report.calibration)?;
    write_roc_csv(&dir.join("roc.csv"), &r.report.roc)?;
    write_rank_percentiles_csv(&dir.join("rank_percentiles.csv"), &r.report.rank_percentiles)?;
    write_time_profile_csv(&dir.join("time_profile.csv"), &r.report.time_profile)?;
    write_question_scores_csv(&dir.join("question_scores.csv"), &r.report.question_scores)?;
    write_daily_briers_csv(&dir.join("daily_briers.csv"), &r.report.daily_briers)?;
    write_history_csv(&dir.join("training_history.csv"), &r.histories)?;
    let mut line = format!(
        "{aggregator}: MMDB {:.6} over {} questions ({} folds)",
        r.report.mmdb, r.report.summary.n, opts.k
    );
    if aggregator == Aggregator::Attention {
        write_attention_csv(&dir.join("attention_vs_brier.csv"), &r.attention_pairs)?;
        if let Ok(c) = attention_report(&r.attention_pairs) {
            line += &format!("; attention-Brier r = {:.4}", c.r);
        }
    } else {
        let mut w = csv::Writer::from_path(dir.join("baseline_configs.csv"))?;
        for (fold, c) in r.baseline_configs.iter().enumerate() {
            w.serialize(BaselineRow {
                fold,
                variant: format!("{:?}", c.variant).to_lowercase(),
                decay_lambda: c.decay_lambda,
                gamma: c.gamma,
                alpha: c.alpha,
                subset_latest: c.subset_latest,
            })?;
        }
        w.flush()?;
    }
    println!("{line}");
    Ok(())
}

fn cmd_ablate(data: &Path, run: &RunArgs, out: &Path) -> Outcome {
    distinct(data, out)?;
    let t = load_data(data)?;
    let opts = cv_options(run, &t)?;
    let rows = ablation_table(&t, &opts)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    for row in rows.iter().filter(|r| r.brier.is_none()) {
        eprintln!(
            "warning: cell ({}, {}) unavailable: too few questions with those forecasts",
            row.feature, row.forecaster_type
        );
    }
    for row in &rows {
        let brier = row.brier.map_or("unavailable".to_string(), |b| format!("{b:.6}"));
        println!("{:<14} {:<16} {brier}", row.feature, row.forecaster_type);
    }
    Ok(())
}

/// The baseline with the lowest mean, and the test of attention against it.
fn best_baseline_test(rows: &[SummaryRow]) -> anyhow::Result<(String, ZTest)> {
    let attention = rows
        .iter()
        .find(|r| r.aggregator == Aggregator::Attention.name())
        .ok_or_else(|| anyhow!("no attention row"))?;
    let best = rows
        .iter()
        .filter(|r| r.aggregator != Aggregator::Attention.name())
        .min_by(|a, b| a.mean.total_cmp(&b.mean))
        .ok_or_else(|| anyhow!("no baseline rows"))?;
    let n = attention.n.min(best.n);
    let z = one_sided_z(best.mean, best.variance, attention.mean, attention.variance, n)?;
    Ok((best.aggregator.clone(), z))
}

fn print_comparison(rows: &[SummaryRow]) -> anyhow::Result<()> {
    println!(
        "{:<10} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "method", "n", "mean", "variance", "q25", "q50", "q75"
    );
    for r in rows {
        println!(
            "{:<10} {:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            r.aggregator, r.n, r.mean, r.variance, r.q25, r.q50, r.q75
        );
    }
    let (best, t) = best_baseline_test(rows)?;
    println!("attention vs {best}: z = {:.4}, p = {:.6}", t.z, t.p);
    Ok(())
}

fn cmd_compare(data: &Path, run: &RunArgs) -> Outcome {
    let t = load_data(data)?;
    let opts = cv_options(run, &t)?;
    let cv = cross_validate(&t, &opts)?;
    let rows: Vec<SummaryRow> = cv
        .runs
        .iter()
        .map(|r| SummaryRow::new(r.aggregator.name(), "all", &r.report.summary))
        .collect();
    print_comparison(&rows)?;
    Ok(())
}

fn cmd_compare_summary(path: &Path) -> Outcome {
    let rows: Vec<SummaryRow> =
        serde_json::from_value(read_json(path)?).map_err(|e| fail(USAGE, anyhow!("{}: {e}", path.display())))?;
    print_comparison(&rows).map_err(|e| fail(USAGE, e))?;
    Ok(())
}
