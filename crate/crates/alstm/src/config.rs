//! Declarative experiment configuration.
//!
//! Plain-text `key = value` lines grouped under `[section]` headers; sections
//! are `dataset`, `window`, `model`, `training`, and `output`. Unknown
//! sections or keys are configuration errors.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::datagen::{
    generate, make_windows, scale_unit, split_train_test, Component, Series, SeriesSpec, SystemSpec,
    WindowSpec, WindowedDataset,
};
use crate::error::{Error, Result};
use crate::ingest::{ingest, ColumnSel, CsvSpec};
use crate::model::{CellVariant, Mode, ModelConfig};
use crate::optim::TrainConfig;

/// Where the series comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetConfig {
    Generated(SeriesSpec),
    Csv(CsvSpec),
}

/// One experiment: data source, windowing, model, training, output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    /// Contiguous training prefix length; scaling is fitted on it.
    pub n_train: usize,
    pub window: WindowSpec,
    pub model: ModelConfig,
    pub training: TrainConfig,
    pub output_dir: PathBuf,
}

/// Scaled train/test windows ready for the model, plus the scaled series for
/// inverse transforms and provenance.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub scaled: Series,
    pub train: WindowedDataset,
    pub test: WindowedDataset,
    pub n_train: usize,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::parse_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse_str(text: &str) -> Result<ExperimentConfig> {
        let sections = parse_sections(text)?;
        for name in sections.keys() {
            if !["dataset", "window", "model", "training", "output"].contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
        }
        let dataset_kv = sections
            .get("dataset")
            .ok_or_else(|| Error::Config("missing [dataset] section".into()))?;
        let window_kv = sections
            .get("window")
            .ok_or_else(|| Error::Config("missing [window] section".into()))?;
        let empty = HashMap::new();
        let model_kv = sections.get("model").unwrap_or(&empty);
        let training_kv = sections.get("training").unwrap_or(&empty);
        let output_kv = sections.get("output").unwrap_or(&empty);

        let (dataset, n_train) = parse_dataset(dataset_kv)?;
        let window = parse_window(window_kv)?;
        let model = parse_model_block(model_kv, &window)?;
        let training = parse_training(training_kv)?;
        let output_dir = PathBuf::from(
            output_kv
                .get("dir")
                .cloned()
                .unwrap_or_else(|| "out".to_string()),
        );
        if let Some(extra) = output_kv.keys().find(|k| k.as_str() != "dir") {
            return Err(Error::Config(format!("unknown key {extra:?} in [output]")));
        }

        let config = ExperimentConfig {
            dataset,
            n_train,
            window,
            model,
            training,
            output_dir,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.model.validate()?;
        if self.model.horizon != self.window.horizon {
            return Err(Error::Config(format!(
                "horizon mismatch: window block has {}, model block has {}",
                self.window.horizon, self.model.horizon
            )));
        }
        if self.model.d_in != 1 {
            return Err(Error::Config(
                "series pipelines are univariate; model d_in must be 1".into(),
            ));
        }
        if self.n_train == 0 {
            return Err(Error::Config("n_train must be >= 1".into()));
        }
        Ok(())
    }

    /// Resolve the raw series from the configured source.
    pub fn load_series(&self) -> Result<Series> {
        match &self.dataset {
            DatasetConfig::Generated(spec) => generate(spec),
            DatasetConfig::Csv(spec) => ingest(spec),
        }
    }

    /// Full data pipeline: source, [0,1] scaling fitted on the training
    /// prefix, contiguous split, and windowing of both parts.
    pub fn prepare_data(&self) -> Result<PreparedData> {
        let raw = self.load_series()?;
        if self.n_train >= raw.len() {
            return Err(Error::Config(format!(
                "n_train {} out of range for series of length {}",
                self.n_train,
                raw.len()
            )));
        }
        let scaled = scale_unit(&raw, 0..self.n_train)?;
        let (train, test) = split_train_test(&scaled, self.n_train)?;
        let train = make_windows(&train, self.window)?;
        let test = make_windows(&test, self.window)?;
        Ok(PreparedData {
            scaled,
            train,
            test,
            n_train: self.n_train,
        })
    }
}

type Sections = HashMap<String, HashMap<String, String>>;

fn parse_sections(text: &str) -> Result<Sections> {
    let mut sections: Sections = HashMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got {line:?}", lineno + 1))
        })?;
        let section = current
            .as_ref()
            .ok_or_else(|| Error::Config(format!("line {}: key before any [section]", lineno + 1)))?;
        sections
            .get_mut(section)
            .unwrap()
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(sections)
}

fn parse_f64(value: &str, key: &str) -> Result<f64> {
    // Accept simple fractions like 8/3 for readability.
    if let Some((num, den)) = value.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| bad_number(key, value))?;
        let d: f64 = den.trim().parse().map_err(|_| bad_number(key, value))?;
        if d == 0.0 {
            return Err(bad_number(key, value));
        }
        return Ok(n / d);
    }
    value.parse().map_err(|_| bad_number(key, value))
}

fn bad_number(key: &str, value: &str) -> Error {
    Error::Config(format!("key {key:?} has non-numeric value {value:?}"))
}

fn parse_usize(value: &str, key: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key {key:?} has non-integer value {value:?}")))
}

fn check_keys(kv: &HashMap<String, String>, allowed: &[&str], section: &str) -> Result<()> {
    for key in kv.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key {key:?} in [{section}]")));
        }
    }
    Ok(())
}

fn parse_dataset(kv: &HashMap<String, String>) -> Result<(DatasetConfig, usize)> {
    let kind = kv
        .get("kind")
        .ok_or_else(|| Error::Config("[dataset] needs a `kind` key".into()))?
        .as_str();
    let n_train = match kv.get("n_train") {
        Some(v) => parse_usize(v, "n_train")?,
        None => 1000,
    };
    let get_f64 = |key: &str, default: f64| -> Result<f64> {
        match kv.get(key) {
            Some(v) => parse_f64(v, key),
            None => Ok(default),
        }
    };
    let get_usize = |key: &str, default: usize| -> Result<usize> {
        match kv.get(key) {
            Some(v) => parse_usize(v, key),
            None => Ok(default),
        }
    };
    let component = match kv.get("component").map(String::as_str) {
        None | Some("x") => Component::X,
        Some("y") => Component::Y,
        Some("z") => Component::Z,
        Some(other) => return Err(Error::Config(format!("unknown component {other:?}"))),
    };

    let dataset = match kind {
        "mackey_glass" => {
            check_keys(
                kv,
                &["kind", "n_train", "alpha", "beta", "delta", "init", "dt", "n_points", "transient", "component"],
                "dataset",
            )?;
            let base = SeriesSpec::mackey_glass();
            let (alpha0, beta0, delta0, init0) = match base.system {
                SystemSpec::MackeyGlass { alpha, beta, delta, init } => (alpha, beta, delta, init),
                _ => unreachable!(),
            };
            DatasetConfig::Generated(SeriesSpec {
                system: SystemSpec::MackeyGlass {
                    alpha: get_f64("alpha", alpha0)?,
                    beta: get_f64("beta", beta0)?,
                    delta: get_f64("delta", delta0)?,
                    init: get_f64("init", init0)?,
                },
                dt: get_f64("dt", base.dt)?,
                n_points: get_usize("n_points", base.n_points)?,
                transient: get_usize("transient", base.transient)?,
                component,
            })
        }
        "lorenz" => {
            check_keys(
                kv,
                &["kind", "n_train", "sigma", "rho", "beta", "init_x", "init_y", "init_z", "dt", "n_points", "transient", "component"],
                "dataset",
            )?;
            let base = SeriesSpec::lorenz();
            let (sigma0, rho0, beta0, init0) = match base.system {
                SystemSpec::Lorenz { sigma, rho, beta, init } => (sigma, rho, beta, init),
                _ => unreachable!(),
            };
            DatasetConfig::Generated(SeriesSpec {
                system: SystemSpec::Lorenz {
                    sigma: get_f64("sigma", sigma0)?,
                    rho: get_f64("rho", rho0)?,
                    beta: get_f64("beta", beta0)?,
                    init: [
                        get_f64("init_x", init0[0])?,
                        get_f64("init_y", init0[1])?,
                        get_f64("init_z", init0[2])?,
                    ],
                },
                dt: get_f64("dt", base.dt)?,
                n_points: get_usize("n_points", base.n_points)?,
                transient: get_usize("transient", base.transient)?,
                component,
            })
        }
        "rossler" => {
            check_keys(
                kv,
                &["kind", "n_train", "a", "b", "c", "init_x", "init_y", "init_z", "dt", "n_points", "transient", "component"],
                "dataset",
            )?;
            let base = SeriesSpec::rossler();
            let (a0, b0, c0, init0) = match base.system {
                SystemSpec::Rossler { a, b, c, init } => (a, b, c, init),
                _ => unreachable!(),
            };
            DatasetConfig::Generated(SeriesSpec {
                system: SystemSpec::Rossler {
                    a: get_f64("a", a0)?,
                    b: get_f64("b", b0)?,
                    c: get_f64("c", c0)?,
                    init: [
                        get_f64("init_x", init0[0])?,
                        get_f64("init_y", init0[1])?,
                        get_f64("init_z", init0[2])?,
                    ],
                },
                dt: get_f64("dt", base.dt)?,
                n_points: get_usize("n_points", base.n_points)?,
                transient: get_usize("transient", base.transient)?,
                component,
            })
        }
        "csv" => {
            check_keys(
                kv,
                &["kind", "n_train", "path", "delimiter", "column", "missing", "downsample", "max_rows"],
                "dataset",
            )?;
            let path = kv
                .get("path")
                .ok_or_else(|| Error::Config("csv dataset needs a `path` key".into()))?;
            let column = match kv.get("column") {
                Some(v) => match v.parse::<usize>() {
                    Ok(idx) => ColumnSel::Index(idx),
                    Err(_) => ColumnSel::Name(v.clone()),
                },
                None => ColumnSel::Index(0),
            };
            let delimiter = match kv.get("delimiter").map(String::as_str) {
                None => b';',
                Some(s) if s.len() == 1 => s.as_bytes()[0],
                Some(other) => {
                    return Err(Error::Config(format!("delimiter must be one character, got {other:?}")))
                }
            };
            let max_rows = match kv.get("max_rows") {
                Some(v) => Some(parse_usize(v, "max_rows")?),
                None => None,
            };
            DatasetConfig::Csv(CsvSpec {
                path: PathBuf::from(path),
                delimiter,
                column,
                missing_token: kv.get("missing").cloned().unwrap_or_else(|| "?".into()),
                downsample: get_usize("downsample", 1)?,
                max_rows,
            })
        }
        other => return Err(Error::Config(format!("unknown dataset kind {other:?}"))),
    };
    Ok((dataset, n_train))
}

fn parse_window(kv: &HashMap<String, String>) -> Result<WindowSpec> {
    check_keys(kv, &["n_samples", "stride", "horizon"], "window")?;
    let get = |key: &str, default: usize| -> Result<usize> {
        match kv.get(key) {
            Some(v) => parse_usize(v, key),
            None => Ok(default),
        }
    };
    Ok(WindowSpec {
        n_samples: get("n_samples", 5)?,
        stride: get("stride", 6)?,
        horizon: get("horizon", 1)?,
    })
}

fn parse_model_block(kv: &HashMap<String, String>, window: &WindowSpec) -> Result<ModelConfig> {
    check_keys(
        kv,
        &["mode", "cell_variant", "d_in", "d_fx", "d_z", "d_fz", "n_h", "horizon", "beta", "loss_over_all_steps"],
        "model",
    )?;
    let defaults = ModelConfig::default();
    let get_usize = |key: &str, default: usize| -> Result<usize> {
        match kv.get(key) {
            Some(v) => parse_usize(v, key),
            None => Ok(default),
        }
    };
    let mode = match kv.get("mode").map(String::as_str) {
        None | Some("alstm") => Mode::Alstm,
        Some("lstm_baseline") => Mode::LstmBaseline,
        Some(other) => return Err(Error::Config(format!("unknown mode {other:?}"))),
    };
    let cell_variant = match kv.get("cell_variant").map(String::as_str) {
        None | Some("standard") => CellVariant::Standard,
        Some("paper_literal") => CellVariant::PaperLiteral,
        Some(other) => return Err(Error::Config(format!("unknown cell_variant {other:?}"))),
    };
    let loss_over_all_steps = match kv.get("loss_over_all_steps").map(String::as_str) {
        None | Some("false") => false,
        Some("true") => true,
        Some(other) => return Err(Error::Config(format!("bad loss_over_all_steps {other:?}"))),
    };
    // The horizon is defined by the window block; an explicit model horizon
    // must agree with it.
    let horizon = get_usize("horizon", window.horizon)?;
    Ok(ModelConfig {
        d_in: get_usize("d_in", 1)?,
        d_fx: get_usize("d_fx", defaults.d_fx)?,
        d_z: get_usize("d_z", defaults.d_z)?,
        d_fz: get_usize("d_fz", defaults.d_fz)?,
        n_h: get_usize("n_h", defaults.n_h)?,
        horizon,
        beta: match kv.get("beta") {
            Some(v) => parse_f64(v, "beta")?,
            None => defaults.beta,
        },
        cell_variant,
        mode,
        loss_over_all_steps,
    })
}

fn parse_training(kv: &HashMap<String, String>) -> Result<TrainConfig> {
    check_keys(
        kv,
        &["epochs", "batch_size", "seed", "alpha", "beta1", "beta2", "eps", "patience"],
        "training",
    )?;
    let defaults = TrainConfig::default();
    let get_usize = |key: &str, default: usize| -> Result<usize> {
        match kv.get(key) {
            Some(v) => parse_usize(v, key),
            None => Ok(default),
        }
    };
    let get_f64 = |key: &str, default: f64| -> Result<f64> {
        match kv.get(key) {
            Some(v) => parse_f64(v, key),
            None => Ok(default),
        }
    };
    Ok(TrainConfig {
        epochs: get_usize("epochs", defaults.epochs)?,
        batch_size: get_usize("batch_size", defaults.batch_size)?,
        seed: match kv.get("seed") {
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("seed {v:?} is not an unsigned integer")))?,
            None => defaults.seed,
        },
        alpha: get_f64("alpha", defaults.alpha)?,
        beta1: get_f64("beta1", defaults.beta1)?,
        beta2: get_f64("beta2", defaults.beta2)?,
        eps: get_f64("eps", defaults.eps)?,
        patience: get_usize("patience", defaults.patience)?,
    })
}
