//! ADAM optimizer and the mini-batch training loop.

use crate::datagen::WindowedDataset;
use crate::error::{Error, Result};
use crate::model::{AlstmParams, ModelConfig, WindowSample};
use crate::params::ParamSet;
use crate::rng::SeededRng;
use crate::tensor::Tensor;

/// Loss must improve by at least this much to reset the early-stop counter.
pub const MIN_IMPROVEMENT: f64 = 1e-7;

/// Training hyperparameters. ADAM defaults follow the standard
/// bias-corrected form with the experiment learning rate 0.0005.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Epochs without improvement before stopping early.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            batch_size: 32,
            seed: 42,
            alpha: 0.0005,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            patience: 25,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, dataset_len: usize) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > dataset_len {
            return Err(Error::Config(format!(
                "batch_size {} out of range for dataset of {} windows",
                self.batch_size, dataset_len
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 || !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::Config("alpha and eps must be > 0".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        Ok(())
    }
}

/// Per-parameter first/second moment accumulators with a step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    pub t: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(set: &ParamSet, config: &TrainConfig) -> AdamState {
        AdamState {
            m: set.iter().map(|(_, _, t)| Tensor::zeros_like(t)).collect(),
            v: set.iter().map(|(_, _, t)| Tensor::zeros_like(t)).collect(),
            t: 0,
            alpha: config.alpha,
            beta1: config.beta1,
            beta2: config.beta2,
            eps: config.eps,
        }
    }
}

/// One bias-corrected ADAM update using the gradients stored in `set`:
/// t+=1; m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2;
/// p -= alpha * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
pub fn adam_step(set: &mut ParamSet, state: &mut AdamState) -> Result<()> {
    if state.m.len() != set.len() {
        return Err(Error::shape(
            "adam_step",
            format!("{} moment buffers vs {} params", state.m.len(), set.len()),
        ));
    }
    state.t += 1;
    let bc1 = 1.0 - state.beta1.powi(state.t as i32);
    let bc2 = 1.0 - state.beta2.powi(state.t as i32);
    for (idx, id) in set.ids().collect::<Vec<_>>().into_iter().enumerate() {
        if !set.grad(id).is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite gradient for parameter {}",
                set.name(id)
            )));
        }
        let m = &mut state.m[idx];
        let v = &mut state.v[idx];
        if m.shape() != set.grad(id).shape() {
            return Err(Error::shape(
                "adam_step",
                format!("moment shape {:?} vs grad {:?} for {}", m.shape(), set.grad(id).shape(), set.name(id)),
            ));
        }
        for k in 0..m.len() {
            let g = set.grad(id).data()[k];
            let mk = state.beta1 * m.data()[k] + (1.0 - state.beta1) * g;
            let vk = state.beta2 * v.data()[k] + (1.0 - state.beta2) * g * g;
            m.data_mut()[k] = mk;
            v.data_mut()[k] = vk;
            let m_hat = mk / bc1;
            let v_hat = vk / bc2;
            set.value_mut(id).data_mut()[k] -= state.alpha * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

/// Outcome of a training run: the fitted model and per-epoch mean loss.
pub type Trained = (AlstmParams, Vec<f64>);

/// Initialize a model from the training seed and fit it with shuffled
/// mini-batches of mean-gradient ADAM steps. Stops early once the epoch loss
/// has failed to improve by `MIN_IMPROVEMENT` for `patience` epochs. The
/// whole run is a deterministic function of (config, tconfig, train_set).
pub fn train_model(
    config: &ModelConfig,
    tconfig: &TrainConfig,
    train_set: &WindowedDataset,
) -> Result<Trained> {
    if train_set.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    tconfig.validate(train_set.len())?;
    let mut model = AlstmParams::init(config.clone(), tconfig.seed)?;
    let samples = to_samples(config, train_set)?;
    let mut state = AdamState::new(model.params(), tconfig);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = SeededRng::new(tconfig.seed);

    let mut history = Vec::with_capacity(tconfig.epochs);
    let mut best = f64::INFINITY;
    let mut stale = 0usize;
    for epoch in 0..tconfig.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(tconfig.batch_size) {
            let batch: Vec<&WindowSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let (loss, grads) = model
                .batch_grads(&batch, config.beta)
                .map_err(|e| annotate_epoch(e, epoch))?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("loss diverged at epoch {epoch}")));
            }
            model.params_mut().zero_grads();
            model.params_mut().accumulate_grads(&grads, 1.0)?;
            adam_step(model.params_mut(), &mut state).map_err(|e| annotate_epoch(e, epoch))?;
            epoch_loss += loss;
            batches += 1;
        }
        let mean_loss = epoch_loss / batches as f64;
        if !mean_loss.is_finite() {
            return Err(Error::Numeric(format!("loss diverged at epoch {epoch}")));
        }
        history.push(mean_loss);
        if mean_loss < best - MIN_IMPROVEMENT {
            best = mean_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= tconfig.patience {
                break;
            }
        }
    }
    Ok((model, history))
}

fn annotate_epoch(e: Error, epoch: usize) -> Error {
    match e {
        Error::Numeric(msg) => Error::Numeric(format!("{msg} (epoch {epoch})")),
        other => other,
    }
}

/// Convert a scalar windowed dataset into per-step column tensors for a
/// univariate model.
pub fn to_samples(config: &ModelConfig, ds: &WindowedDataset) -> Result<Vec<WindowSample>> {
    if config.d_in != 1 {
        return Err(Error::Config(format!(
            "scalar windowed datasets require d_in = 1, model has d_in = {}",
            config.d_in
        )));
    }
    if ds.spec.horizon != config.horizon {
        return Err(Error::Config(format!(
            "window horizon {} does not match model horizon {}",
            ds.spec.horizon, config.horizon
        )));
    }
    Ok(ds
        .inputs
        .iter()
        .zip(&ds.targets)
        .map(|(input, target)| WindowSample {
            steps: input.iter().map(|&v| Tensor::column(&[v])).collect(),
            target: Tensor::column(target),
        })
        .collect())
}

/// Write a `epoch,loss` CSV for a loss history.
pub fn history_csv(history: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    for (epoch, loss) in history.iter().enumerate() {
        out.push_str(&format!("{},{:.16e}\n", epoch, loss));
    }
    out
}
