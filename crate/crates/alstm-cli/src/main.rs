//! Command-line driver: series generation, training, evaluation, and the
//! benchmark suites, all behind declarative config files.

mod bench;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use alstm::config::{DatasetConfig, ExperimentConfig, PreparedData};
use alstm::error::{Error, Result};
use alstm::eval::{metrics_csv, metrics_table, predict_dataset, PredictionSet};
use alstm::model::AlstmParams;
use alstm::optim::{history_csv, train_model};
use alstm::serialize::{parse_model, write_model_string};

#[derive(Parser)]
#[command(name = "alstm", version, about = "Augmented-LSTM time series forecasting engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Split {
    Train,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a configured series and write it as CSV.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Override the training seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory from the config file.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Train a model on the configured dataset.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Evaluate a trained model and write predictions and metrics.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Model file; defaults to `<out>/model.txt`.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Evaluate on this part of the split.
        #[arg(long, value_enum, default_value = "test")]
        split: Split,
        /// Also emit inverse-scaled target/prediction columns.
        #[arg(long)]
        inverse: bool,
    },
    /// Run a canned benchmark suite end to end and write a comparison report.
    Bench {
        /// One of: mackey, lorenz, rossler, power, all.
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "DIR", default_value = "bench_out")]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            let config = load_config(&config, seed, out)?;
            cmd_generate(&config)
        }
        Command::Train { config, seed, out } => {
            let config = load_config(&config, seed, out)?;
            cmd_train(&config)?;
            Ok(())
        }
        Command::Evaluate {
            config,
            model,
            out,
            split,
            inverse,
        } => {
            let config = load_config(&config, None, out)?;
            cmd_evaluate(&config, model.as_deref(), split, inverse)?;
            Ok(())
        }
        Command::Bench { suite, seed, out } => bench::cmd_bench(&suite, seed, &out),
    }
}

fn load_config(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(seed) = seed {
        config.training.seed = seed;
    }
    if let Some(out) = out {
        config.output_dir = out;
    }
    Ok(config)
}

fn ensure_out_dir(config: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&config.output_dir)?;
    Ok(())
}

fn cmd_generate(config: &ExperimentConfig) -> Result<()> {
    let spec = match &config.dataset {
        DatasetConfig::Generated(spec) => spec,
        DatasetConfig::Csv(_) => {
            return Err(Error::Config(
                "generate needs a generated dataset kind (mackey_glass, lorenz, rossler)".into(),
            ))
        }
    };
    let series = config.load_series()?;
    ensure_out_dir(config)?;
    let mut out = String::new();
    out.push_str(&format!("# spec: {}\n", spec.describe()));
    out.push_str("index,value\n");
    for (i, v) in series.values.iter().enumerate() {
        out.push_str(&format!("{i},{v:.16e}\n"));
    }
    let path = config.output_dir.join("series.csv");
    fs::write(&path, out)?;
    println!("wrote {} points to {}", series.len(), path.display());
    Ok(())
}

fn cmd_train(config: &ExperimentConfig) -> Result<(AlstmParams, PreparedData)> {
    let data = config.prepare_data()?;
    let (model, history) = train_model(&config.model, &config.training, &data.train)?;
    ensure_out_dir(config)?;
    let model_path = config.output_dir.join("model.txt");
    fs::write(&model_path, write_model_string(&model))?;
    fs::write(config.output_dir.join("loss_history.csv"), history_csv(&history))?;
    let final_loss = history.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} epochs, final training loss {:.6e}, model at {}",
        history.len(),
        final_loss,
        model_path.display()
    );
    Ok((model, data))
}

fn cmd_evaluate(
    config: &ExperimentConfig,
    model_path: Option<&Path>,
    split: Split,
    inverse: bool,
) -> Result<PredictionSet> {
    let default_path = config.output_dir.join("model.txt");
    let model_path = model_path.unwrap_or(&default_path);
    let text = fs::read_to_string(model_path)
        .map_err(|e| Error::Config(format!("cannot read model {}: {e}", model_path.display())))?;
    let model = parse_model(&text)?;
    if model.config().horizon != config.window.horizon {
        return Err(Error::Config(format!(
            "model horizon {} does not match window horizon {}",
            model.config().horizon,
            config.window.horizon
        )));
    }
    let data = config.prepare_data()?;
    let (ds, offset) = match split {
        Split::Train => (&data.train, 0usize),
        Split::Test => (&data.test, data.n_train),
    };
    let pset = predict_dataset(&model, ds)?;
    ensure_out_dir(config)?;

    // One row per predicted scalar; `index` addresses the target's position
    // in the full scaled series.
    let band = pset.confidence_band(0.95)?;
    let mut rows = String::new();
    if inverse {
        rows.push_str("index,target,prediction,low,high,target_raw,prediction_raw\n");
    } else {
        rows.push_str("index,target,prediction,low,high\n");
    }
    let span = ds.spec.input_span();
    let horizon = pset.horizon();
    for (w, (targets, preds)) in pset.targets().iter().zip(pset.predictions()).enumerate() {
        for j in 0..horizon {
            let idx = offset + span + w + 1 + j;
            let (lo, hi) = band[w * horizon + j];
            if inverse {
                let t_raw = data.scaled.unscale(targets[j])?;
                let p_raw = data.scaled.unscale(preds[j])?;
                rows.push_str(&format!(
                    "{idx},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    targets[j], preds[j], lo, hi, t_raw, p_raw
                ));
            } else {
                rows.push_str(&format!(
                    "{idx},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    targets[j], preds[j], lo, hi
                ));
            }
        }
    }
    fs::write(config.output_dir.join("predictions.csv"), rows)?;
    fs::write(config.output_dir.join("metrics.csv"), metrics_csv(&pset)?)?;
    let table = metrics_table(&pset)?;
    fs::write(config.output_dir.join("metrics.txt"), &table)?;
    print!("{table}");
    Ok(pset)
}
