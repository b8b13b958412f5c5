use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fcomb_cli::config::ExperimentConfig;
use fcomb_cli::corpus::load_corpus;
use fcomb_cli::error::HarnessError;
use fcomb_cli::experiment::{load_records, run_experiment, scores_csv_path};
use fcomb_cli::report::{bayes_pair, emit_report, ReportOptions};
use fcomb_cli::synth::{generate_suite, write_corpus, SynthOptions};
use fcomb_core::evaluation::ScoreMatrix;

/// Dynamic forecast combination benchmarks with ensemble compression.
#[derive(Parser)]
#[command(name = "fcomb", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML experiment configuration; omitted fields use defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus directory (overrides the config file).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Output directory (overrides the config file).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Holdout repetitions per series.
    #[arg(long)]
    reps: Option<usize>,
    /// Embedding lag order p.
    #[arg(long)]
    lag: Option<usize>,
    /// Loss window size lambda.
    #[arg(long)]
    lambda: Option<usize>,
    /// Root RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum accepted series length.
    #[arg(long)]
    min_length: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.corpus {
            config.corpus_path = v.clone();
        }
        if let Some(v) = &self.output {
            config.output_dir = v.clone();
        }
        if let Some(v) = self.reps {
            config.repetitions = v;
        }
        if let Some(v) = self.lag {
            config.lag_order = v;
        }
        if let Some(v) = self.lambda {
            config.lambda_window = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.min_length {
            config.min_series_length = v;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args, Clone)]
struct BayesArgs {
    /// ROPE interval in percent, e.g. "-1,1".
    #[arg(long, default_value = "-1,1")]
    rope: String,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Prior pseudo-observations on the ROPE category.
    #[arg(long, default_value_t = 1.0)]
    prior_strength: f64,
    /// Sampler seed.
    #[arg(long, default_value_t = 17)]
    seed: u64,
}

impl BayesArgs {
    fn options(&self) -> Result<ReportOptions, HarnessError> {
        let parts: Vec<&str> = self.rope.split(',').collect();
        if parts.len() != 2 {
            return Err(HarnessError::Config("rope must be 'lo,hi'".into()));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|e| HarnessError::Config(format!("bad rope: {e}")))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|e| HarnessError::Config(format!("bad rope: {e}")))?;
        Ok(ReportOptions {
            rope: (lo, hi),
            mc_samples: self.samples,
            prior_strength: self.prior_strength,
            seed: self.seed,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus directory and print per-file diagnostics.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1000)]
        min_length: usize,
    },
    /// Execute the experiment matrix described by a config.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Emit the report bundle (rank tables/charts, Bayes matrix, cost
    /// ratios) from a completed run.
    Report {
        /// Output directory of a completed run.
        #[arg(long)]
        output: PathBuf,
        /// Where to write the bundle (default: <output>/report).
        #[arg(long)]
        report_dir: Option<PathBuf>,
        #[command(flatten)]
        bayes: BayesArgs,
    },
    /// Bayes sign test between two method labels of a completed run.
    Bayes {
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        method_a: String,
        #[arg(long)]
        method_b: String,
        #[command(flatten)]
        bayes: BayesArgs,
    },
    /// Cost-only view: run (or resume) the experiment and print the cost
    /// table path plus a per-method summary.
    Profile {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a synthetic corpus (AR(2) regimes + seasonality).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        series: usize,
        #[arg(long, default_value_t = 1100)]
        length: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Ingest { corpus, min_length } => {
            let (series, report) = load_corpus(&corpus, min_length)?;
            print!("{}", report.describe());
            println!("corpus ok: {} series usable", series.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config } => {
            let config = config.resolve()?;
            let summary = run_experiment(&config)?;
            println!(
                "run complete: {} records ({} groups computed, {} groups resumed), {} quarantined",
                summary.records.len(),
                summary.computed_groups,
                summary.skipped_groups,
                summary.quarantined.len()
            );
            println!("scores: {}", scores_csv_path(&config.output_dir).display());
            for q in &summary.quarantined {
                eprintln!("quarantined {}/{}: {}", q.series, q.repetition, q.reason);
            }
            if summary.quarantined.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Report {
            output,
            report_dir,
            bayes,
        } => {
            let records = load_records(&output)?;
            if records.is_empty() {
                return Err(HarnessError::Config(format!(
                    "no records under {}",
                    output.display()
                )));
            }
            let dir = report_dir.unwrap_or_else(|| output.join("report"));
            emit_report(&records, &dir, &bayes.options()?)?;
            println!("report written to {}", dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bayes {
            output,
            method_a,
            method_b,
            bayes,
        } => {
            let scores = std::fs::read_to_string(scores_csv_path(&output))?;
            let matrix = ScoreMatrix::from_long_csv(&scores)?;
            let result = bayes_pair(&matrix, &method_a, &method_b, &bayes.options()?)?;
            println!("{}", serde_json::to_string_pretty(&result)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile { config } => {
            let config = config.resolve()?;
            let summary = run_experiment(&config)?;
            let mut by_method: std::collections::BTreeMap<String, (Vec<f64>, Vec<usize>)> =
                Default::default();
            for r in &summary.records {
                let entry = by_method.entry(r.method.clone()).or_default();
                entry.0.push(r.cost.predict_seconds);
                entry.1.push(r.cost.size_bytes);
            }
            println!("method,median_predict_seconds,median_size_bytes");
            for (method, (mut secs, mut sizes)) in by_method {
                secs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                sizes.sort_unstable();
                println!(
                    "{method},{},{}",
                    secs[secs.len() / 2],
                    sizes[sizes.len() / 2]
                );
            }
            eprintln!(
                "cost table: {}",
                fcomb_cli::experiment::costs_csv_path(&config.output_dir).display()
            );
            if summary.quarantined.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Synth {
            out,
            series,
            length,
            seed,
        } => {
            let suite = generate_suite(&SynthOptions {
                n_series: series,
                length,
                seed,
            });
            write_corpus(&out, &suite)?;
            println!("wrote {} series to {}", suite.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
