//! Prediction metrics: RMSE, per-step RMSE, residual variance, and
//! residual-based confidence bands.

use crate::datagen::WindowedDataset;
use crate::error::{Error, Result};
use crate::model::{AlstmParams, ModelConfig};
use crate::optim::to_samples;

/// Aligned predictions and targets, one `horizon`-vector per window.
#[derive(Debug, Clone)]
pub struct PredictionSet {
    predictions: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    horizon: usize,
}

impl PredictionSet {
    pub fn new(predictions: Vec<Vec<f64>>, targets: Vec<Vec<f64>>, horizon: usize) -> Result<PredictionSet> {
        if predictions.len() != targets.len() {
            return Err(Error::Config(format!(
                "{} predictions vs {} targets",
                predictions.len(),
                targets.len()
            )));
        }
        if predictions.is_empty() {
            return Err(Error::Config("prediction set is empty".into()));
        }
        if horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        for row in predictions.iter().chain(targets.iter()) {
            if row.len() != horizon {
                return Err(Error::Config(format!(
                    "row of length {} in a horizon-{} prediction set",
                    row.len(),
                    horizon
                )));
            }
        }
        Ok(PredictionSet {
            predictions,
            targets,
            horizon,
        })
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn predictions(&self) -> &[Vec<f64>] {
        &self.predictions
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.targets
            .iter()
            .zip(&self.predictions)
            .flat_map(|(t, p)| t.iter().zip(p).map(|(a, b)| a - b))
    }

    /// RMSE over every scalar entry.
    pub fn rmse(&self) -> f64 {
        let (sum, n) = self
            .residuals()
            .fold((0.0, 0usize), |(s, n), r| (s + r * r, n + 1));
        (sum / n as f64).sqrt()
    }

    /// RMSE computed separately per output position 1..=horizon.
    pub fn per_step_rmse(&self) -> Vec<f64> {
        (0..self.horizon)
            .map(|j| {
                let sum: f64 = self
                    .targets
                    .iter()
                    .zip(&self.predictions)
                    .map(|(t, p)| (t[j] - p[j]).powi(2))
                    .sum();
                (sum / self.len() as f64).sqrt()
            })
            .collect()
    }

    /// Unbiased sample variance of the residuals over all scalar entries.
    pub fn residual_variance(&self) -> Result<f64> {
        let res: Vec<f64> = self.residuals().collect();
        if res.len() < 2 {
            return Err(Error::Config("residual variance needs at least 2 residuals".into()));
        }
        let mean = res.iter().sum::<f64>() / res.len() as f64;
        let ss: f64 = res.iter().map(|r| (r - mean).powi(2)).sum();
        Ok(ss / (res.len() - 1) as f64)
    }

    /// Per-point symmetric band: prediction ± z(level) · residual stddev.
    /// Supported levels: 0.90, 0.95, 0.99.
    pub fn confidence_band(&self, level: f64) -> Result<Vec<(f64, f64)>> {
        let z = z_for_level(level)?;
        let sd = self.residual_variance()?.sqrt();
        Ok(self
            .predictions
            .iter()
            .flatten()
            .map(|&p| (p - z * sd, p + z * sd))
            .collect())
    }
}

fn z_for_level(level: f64) -> Result<f64> {
    // Standard normal quantiles for the usual two-sided levels.
    let table = [(0.90, 1.645), (0.95, 1.96), (0.99, 2.576)];
    table
        .iter()
        .find(|(l, _)| (l - level).abs() < 1e-12)
        .map(|(_, z)| *z)
        .ok_or_else(|| Error::Config(format!("unsupported confidence level {level}")))
}

/// RMSE between two flat slices.
pub fn rmse(targets: &[f64], predictions: &[f64]) -> Result<f64> {
    if targets.is_empty() || targets.len() != predictions.len() {
        return Err(Error::Config(format!(
            "rmse needs equal non-empty inputs, got {} and {}",
            targets.len(),
            predictions.len()
        )));
    }
    let sum: f64 = targets
        .iter()
        .zip(predictions)
        .map(|(t, p)| (t - p).powi(2))
        .sum();
    Ok((sum / targets.len() as f64).sqrt())
}

/// Run a model over a windowed dataset and collect predictions next to the
/// dataset's targets.
pub fn predict_dataset(model: &AlstmParams, ds: &WindowedDataset) -> Result<PredictionSet> {
    let samples = to_samples(model.config(), ds)?;
    let predictions = model
        .predict_samples(&samples)?
        .into_iter()
        .map(|t| t.data().to_vec())
        .collect();
    PredictionSet::new(predictions, ds.targets.clone(), model.config().horizon)
}

/// Metric rows as `metric,step,value` CSV. Overall metrics use step 0.
pub fn metrics_csv(pset: &PredictionSet) -> Result<String> {
    let mut out = String::from("metric,step,value\n");
    out.push_str(&format!("rmse,0,{:.16e}\n", pset.rmse()));
    for (j, v) in pset.per_step_rmse().iter().enumerate() {
        out.push_str(&format!("per_step_rmse,{},{:.16e}\n", j + 1, v));
    }
    out.push_str(&format!("residual_variance,0,{:.16e}\n", pset.residual_variance()?));
    Ok(out)
}

/// Aligned plain-text metric table.
pub fn metrics_table(pset: &PredictionSet) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("{:<22} {:>14}\n", "metric", "value"));
    out.push_str(&format!("{:<22} {:>14.6}\n", "rmse", pset.rmse()));
    for (j, v) in pset.per_step_rmse().iter().enumerate() {
        out.push_str(&format!("{:<22} {:>14.6}\n", format!("rmse step {}", j + 1), v));
    }
    out.push_str(&format!(
        "{:<22} {:>14.6}\n",
        "residual variance",
        pset.residual_variance()?
    ));
    Ok(out)
}

/// Shape check shared by the CLI: the dataset horizon must match the model.
pub fn check_horizon(config: &ModelConfig, ds: &WindowedDataset) -> Result<()> {
    if config.horizon != ds.spec.horizon {
        return Err(Error::Config(format!(
            "model horizon {} vs window horizon {}",
            config.horizon, ds.spec.horizon
        )));
    }
    Ok(())
}
