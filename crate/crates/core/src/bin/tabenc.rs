use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tabenc::bench::{report_dir, run, PreparedDataset, RunConfig};
use tabenc::dataset::{dataset_names, fetch_dataset, load_dataset, FetchOptions, SplitSpec};
use tabenc::discretizer::DiscretizerConfig;
use tabenc::encoders::{EncoderKind, EncoderSpec};
use tabenc::models::{train, ModelConfig, ModelKind};

/// Tree discretization, categorical encoders and embedding classifiers for
/// tabular data.
///
/// Datasets are cached under TABENC_CACHE_DIR (default ~/.cache/tabenc).
/// TABENC_MIRROR names a directory or base URL to fetch from instead of the
/// upstream archives; TABENC_OFFLINE=1 forbids downloads; TABENC_WORKERS caps
/// the grid worker threads. RUST_LOG controls logging (default: info).
#[derive(Parser)]
#[command(name = "tabenc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Prep {
    /// Registry dataset name
    dataset: String,
    /// Split and model seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deepest tree considered by the discretizer
    #[arg(long, default_value_t = 7)]
    max_depth: usize,
    /// Cross-validation folds of the discretizer
    #[arg(long, default_value_t = 5)]
    folds: usize,
}

impl Prep {
    fn prepare(&self) -> tabenc::Result<PreparedDataset> {
        let table = load_dataset(&self.dataset, &FetchOptions::from_env())?;
        let split = SplitSpec {
            seed: self.seed,
            ..SplitSpec::default()
        };
        let disc = DiscretizerConfig {
            max_depth: self.max_depth,
            folds: self.folds,
            seed: self.seed,
        };
        PreparedDataset::new(&self.dataset, &table, &split, &disc)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Download a dataset (or `all`) into the cache and print its path
    Fetch { dataset: String },
    /// Split 70/15/15 (stratified), fit bins on train, write the discretized parts
    Discretize {
        #[command(flatten)]
        prep: Prep,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Discretize, then fit an encoder on train and write the encoded parts
    Encode {
        #[command(flatten)]
        prep: Prep,
        /// label, ordinal, rarelabel, onehot, binary, basen, frequency, target, summary, string_similarity
        #[arg(long, default_value = "ordinal")]
        encoder: EncoderKind,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Discretize, encode and train one model; prints and writes its report
    Train {
        #[command(flatten)]
        prep: Prep,
        #[arg(long, default_value = "ordinal")]
        encoder: EncoderKind,
        /// entity or context
        #[arg(long, default_value = "entity")]
        model: ModelKind,
        /// Training epochs
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the benchmark grid described by a TOML file. Keys (defaults):
    /// datasets (all), encoders (ordinal onehot rarelabel string_similarity
    /// summary target), models (entity context), repetitions (5), seed (0),
    /// output_dir ("results"), epochs (10), learning_rate (0.001), workers,
    /// cache_dir, offline (false), [split] train_fraction/validation_fraction/
    /// test_fraction/seed (0.7/0.15/0.15/0), [discretizer] max_depth/folds/seed
    /// (7/5/0), [encoder] rare_threshold (0.05), base (3), smoothing (1.0),
    /// quantiles ([0.5]), quantile_weight (1.0), winkler (false)
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output_dir from the file
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Summarize DIR/records.jsonl into CSV and text tables
    Report { dir: PathBuf },
}

fn execute(cli: Cli) -> tabenc::Result<()> {
    match cli.command {
        Command::Fetch { dataset } => {
            let names = if dataset == "all" { dataset_names() } else { vec![dataset] };
            let opts = FetchOptions::from_env();
            let mut failed = Vec::new();
            for name in names {
                match fetch_dataset(&name, &opts) {
                    Ok(path) => println!("{name}\t{}", path.display()),
                    Err(e) => {
                        eprintln!("{name}\t{e}");
                        failed.push(name);
                    }
                }
            }
            if !failed.is_empty() {
                return Err(tabenc::Error::Config(format!("could not fetch {}", failed.join(", "))));
            }
        }
        Command::Discretize { prep, out } => {
            let p = prep.prepare()?;
            std::fs::create_dir_all(&out).map_err(|e| tabenc::Error::Io { path: out.clone(), source: e })?;
            for (name, t) in [("train", &p.train), ("validation", &p.validation), ("test", &p.test)] {
                t.write_csv(&out.join(format!("{name}.csv")))?;
            }
            p.write_sidecars(&out)?;
            for b in &p.discretizer.bins {
                println!("{}\t{} bins\t{:?}", b.column, b.n_bins(), b.edges);
            }
        }
        Command::Encode { prep, encoder, out } => {
            let p = prep.prepare()?;
            let (enc, parts) = p.encode(&EncoderSpec::new(encoder))?;
            std::fs::create_dir_all(&out).map_err(|e| tabenc::Error::Io { path: out.clone(), source: e })?;
            enc.write_json(&out.join("encoder.json"))?;
            for (name, t) in ["train", "validation", "test"].iter().zip(&parts) {
                t.write_csv(&out.join(format!("{name}.encoded.csv")))?;
            }
            println!("{} output columns, target width {}", parts[0].width(), parts[0].target_width());
        }
        Command::Train {
            prep,
            encoder,
            model,
            epochs,
            out,
        } => {
            let p = prep.prepare()?;
            let (_, [tr, va, te]) = p.encode(&EncoderSpec::new(encoder))?;
            let config = ModelConfig {
                epochs,
                ..ModelConfig::for_kind(model)
            };
            let (_, report) = train::<f32>(&config, &tr, &va, &te, prep.seed)?;
            std::fs::create_dir_all(&out).map_err(|e| tabenc::Error::Io { path: out.clone(), source: e })?;
            report.write_json(&out.join("report.json"))?;
            report.write_curves_csv(&out.join("curves.csv"))?;
            let f1 = report.test_f1.map_or("undefined".to_string(), |f| format!("{f:.4}"));
            println!(
                "test F1 {f1}  BCE {:.4}  training {:.2}s",
                report.test_bce, report.train_seconds
            );
        }
        Command::Run { config, output_dir } => {
            let mut c = RunConfig::load(&config)?;
            if let Some(dir) = output_dir {
                c.output_dir = dir;
            }
            let records = run(&c)?;
            let failed = records.iter().filter(|r| r.failed()).count();
            println!("{} records ({failed} failed) in {}", records.len(), c.output_dir.display());
            for p in report_dir(&c.output_dir)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Report { dir } => {
            for p in report_dir(&dir)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
