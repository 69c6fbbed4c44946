//! The augmented LSTM: feature extractors, recurrent encoder, memory cell,
//! decoder, window forward pass, training objective, and the matching
//! backward-through-time gradients.
//!
//! Per step t the model computes
//!   f_x = feat_x(x_t)
//!   z   = encode(f_x, m_{t-1})
//!   f_z = feat_z(z)
//!   y_t = decode(f_z, m_{t-1})
//!   h_t = cell_step(f_x, f_z, h_{t-1})
//! and predicts with the final step's decoder output. The baseline mode
//! drops the extractors and encoder: gates read x_t directly and the decoder
//! reads the current hidden output m_t.

use crate::error::{Error, Result};
use crate::nn::{Act, TwoLayerCache, TwoLayerNet};
use crate::params::{GradBuffer, ParamId, ParamKind, ParamSet};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

/// How the cell's hidden output m is formed from the gate activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellVariant {
    /// m' = o ∘ tanh(c'), the conventional update.
    Standard,
    /// m' = s ∘ o, which bypasses the cell state on the output path.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Alstm,
    LstmBaseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Input dimension per step.
    pub d_in: usize,
    /// Input feature extractor output dimension.
    pub d_fx: usize,
    /// Latent dimension of the encoder.
    pub d_z: usize,
    /// Latent feature extractor output dimension.
    pub d_fz: usize,
    /// LSTM hidden units.
    pub n_h: usize,
    /// Outputs per prediction.
    pub horizon: usize,
    /// L2 trade-off coefficient on weight matrices.
    pub beta: f64,
    pub cell_variant: CellVariant,
    pub mode: Mode,
    /// Apply the prediction loss at every window step instead of only the
    /// final one.
    pub loss_over_all_steps: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_in: 1,
            d_fx: 16,
            d_z: 8,
            d_fz: 16,
            n_h: 32,
            horizon: 1,
            beta: 1e-4,
            cell_variant: CellVariant::Standard,
            mode: Mode::Alstm,
            loss_over_all_steps: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("d_in", self.d_in),
            ("d_fx", self.d_fx),
            ("d_z", self.d_z),
            ("d_fz", self.d_fz),
            ("n_h", self.n_h),
            ("horizon", self.horizon),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("model dimension {name} must be >= 1")));
            }
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }

    /// Gate input width: concatenated features in augmented mode, raw input
    /// in baseline mode.
    pub fn gate_input_dim(&self) -> usize {
        match self.mode {
            Mode::Alstm => self.d_fx + self.d_fz,
            Mode::LstmBaseline => self.d_in,
        }
    }

    pub fn output_dim(&self) -> usize {
        self.horizon * self.d_in
    }
}

/// Hidden width of the two-layer blocks, derived from their endpoints.
fn ff_hidden(d_in: usize, d_out: usize) -> usize {
    d_in.max(d_out)
}

/// Gate weights of the memory cell: input-side W, recurrent U, bias b for
/// the input (i), candidate (s), forget (f), and output (o) gates.
#[derive(Debug, Clone)]
pub struct LstmParams {
    pub w_i: ParamId,
    pub u_i: ParamId,
    pub b_i: ParamId,
    pub w_s: ParamId,
    pub u_s: ParamId,
    pub b_s: ParamId,
    pub w_f: ParamId,
    pub u_f: ParamId,
    pub b_f: ParamId,
    pub w_o: ParamId,
    pub u_o: ParamId,
    pub b_o: ParamId,
    pub d_x: usize,
    pub n_h: usize,
}

impl LstmParams {
    fn new(set: &mut ParamSet, d_x: usize, n_h: usize, rng: &mut SeededRng) -> Result<LstmParams> {
        let gate = |set: &mut ParamSet, tag: &str, rng: &mut SeededRng| -> Result<(ParamId, ParamId, ParamId)> {
            let w = set.insert(
                &format!("lstm.w_{tag}"),
                ParamKind::Weight,
                crate::nn::init_glorot(n_h, d_x, rng)?,
            )?;
            let u = set.insert(
                &format!("lstm.u_{tag}"),
                ParamKind::Weight,
                crate::nn::init_glorot(n_h, n_h, rng)?,
            )?;
            // Forget-gate bias starts at 1 so long-range memory survives
            // early training; all other biases start at zero.
            let bias_init = if tag == "f" { 1.0 } else { 0.0 };
            let b = set.insert(
                &format!("lstm.b_{tag}"),
                ParamKind::Bias,
                Tensor::filled(n_h, 1, bias_init),
            )?;
            Ok((w, u, b))
        };
        let (w_i, u_i, b_i) = gate(set, "i", rng)?;
        let (w_s, u_s, b_s) = gate(set, "s", rng)?;
        let (w_f, u_f, b_f) = gate(set, "f", rng)?;
        let (w_o, u_o, b_o) = gate(set, "o", rng)?;
        Ok(LstmParams {
            w_i,
            u_i,
            b_i,
            w_s,
            u_s,
            b_s,
            w_f,
            u_f,
            b_f,
            w_o,
            u_o,
            b_o,
            d_x,
            n_h,
        })
    }
}

/// Cell state `c` and hidden output `m` of the memory cell.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub c: Tensor,
    pub m: Tensor,
}

impl HiddenState {
    pub fn zeros(n_h: usize) -> HiddenState {
        HiddenState {
            c: Tensor::zeros(n_h, 1),
            m: Tensor::zeros(n_h, 1),
        }
    }
}

/// One supervised window converted to per-step column tensors.
#[derive(Debug, Clone)]
pub struct WindowSample {
    pub steps: Vec<Tensor>,
    pub target: Tensor,
}

struct CellCache {
    x_tilde: Tensor,
    m_prev: Tensor,
    c_prev: Tensor,
    i: Tensor,
    s: Tensor,
    f: Tensor,
    o: Tensor,
    c_new: Tensor,
}

struct StepCache {
    // Augmented path; absent in baseline mode.
    fx: Option<TwoLayerCache>,
    enc: Option<TwoLayerCache>,
    fz: Option<TwoLayerCache>,
    dec: TwoLayerCache,
    cell: CellCache,
}

/// All trainable tensors of one model plus its configuration.
#[derive(Debug, Clone)]
pub struct AlstmParams {
    set: ParamSet,
    config: ModelConfig,
    feat_x: Option<TwoLayerNet>,
    encoder: Option<TwoLayerNet>,
    feat_z: Option<TwoLayerNet>,
    lstm: LstmParams,
    decoder: TwoLayerNet,
}

impl AlstmParams {
    /// Initialize a fresh model with Glorot weights drawn from `seed`.
    pub fn init(config: ModelConfig, seed: u64) -> Result<AlstmParams> {
        config.validate()?;
        let mut rng = SeededRng::new(seed);
        let mut set = ParamSet::new();
        let (feat_x, encoder, feat_z) = match config.mode {
            Mode::Alstm => {
                let feat_x = TwoLayerNet::new(
                    &mut set,
                    "feat_x",
                    config.d_in,
                    ff_hidden(config.d_in, config.d_fx),
                    config.d_fx,
                    Act::Tanh,
                    Act::Tanh,
                    &mut rng,
                )?;
                let enc_in = config.d_fx + config.n_h;
                let encoder = TwoLayerNet::new(
                    &mut set,
                    "encoder",
                    enc_in,
                    ff_hidden(enc_in, config.d_z),
                    config.d_z,
                    Act::Tanh,
                    Act::Sigmoid,
                    &mut rng,
                )?;
                let feat_z = TwoLayerNet::new(
                    &mut set,
                    "feat_z",
                    config.d_z,
                    ff_hidden(config.d_z, config.d_fz),
                    config.d_fz,
                    Act::Tanh,
                    Act::Tanh,
                    &mut rng,
                )?;
                (Some(feat_x), Some(encoder), Some(feat_z))
            }
            Mode::LstmBaseline => (None, None, None),
        };
        let lstm = LstmParams::new(&mut set, config.gate_input_dim(), config.n_h, &mut rng)?;
        let dec_in = match config.mode {
            Mode::Alstm => config.d_fz + config.n_h,
            Mode::LstmBaseline => config.n_h,
        };
        let decoder = TwoLayerNet::new(
            &mut set,
            "decoder",
            dec_in,
            ff_hidden(dec_in, config.output_dim()),
            config.output_dim(),
            Act::Tanh,
            Act::Sigmoid,
            &mut rng,
        )?;
        Ok(AlstmParams {
            set,
            config,
            feat_x,
            encoder,
            feat_z,
            lstm,
            decoder,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamSet {
        &self.set
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.set
    }

    pub fn num_scalars(&self) -> usize {
        self.set.num_scalars()
    }

    fn feat_x_net(&self) -> Result<&TwoLayerNet> {
        self.feat_x
            .as_ref()
            .ok_or_else(|| Error::State("feat_x is absent in lstm_baseline mode".into()))
    }

    fn encoder_net(&self) -> Result<&TwoLayerNet> {
        self.encoder
            .as_ref()
            .ok_or_else(|| Error::State("encoder is absent in lstm_baseline mode".into()))
    }

    fn feat_z_net(&self) -> Result<&TwoLayerNet> {
        self.feat_z
            .as_ref()
            .ok_or_else(|| Error::State("feat_z is absent in lstm_baseline mode".into()))
    }

    /// Input feature extraction: f_x = φˣ(x_t).
    pub fn feat_x(&self, x: &Tensor) -> Result<Tensor> {
        self.feat_x_net()?.forward(&self.set, x)
    }

    /// Latent encoding from the input feature and previous hidden output.
    pub fn encode(&self, f_x: &Tensor, m_prev: &Tensor) -> Result<Tensor> {
        let joined = Tensor::concat_rows(f_x, m_prev)?;
        self.encoder_net()?.forward(&self.set, &joined)
    }

    /// Latent feature extraction: f_z = φᶻ(z).
    pub fn feat_z(&self, z: &Tensor) -> Result<Tensor> {
        self.feat_z_net()?.forward(&self.set, z)
    }

    /// Decode a prediction from the latent feature and previous hidden output.
    pub fn decode(&self, f_z: &Tensor, m_prev: &Tensor) -> Result<Tensor> {
        let joined = Tensor::concat_rows(f_z, m_prev)?;
        self.decoder.forward(&self.set, &joined)
    }

    /// One memory-cell transition with gate input concat(f_x, f_z).
    pub fn cell_step(&self, f_x: &Tensor, f_z: &Tensor, state: &HiddenState) -> Result<HiddenState> {
        let x_tilde = Tensor::concat_rows(f_x, f_z)?;
        let (next, _) = self.cell_step_cached(&x_tilde, state)?;
        Ok(next)
    }

    fn gate(&self, w: ParamId, u: ParamId, b: ParamId, x: &Tensor, m: &Tensor, act: Act) -> Result<Tensor> {
        let pre = self
            .set
            .value(w)
            .matvec(x)?
            .add(&self.set.value(u).matvec(m)?)?
            .add(self.set.value(b))?;
        Ok(pre.map(|v| act.apply(v)))
    }

    fn cell_step_cached(&self, x_tilde: &Tensor, state: &HiddenState) -> Result<(HiddenState, CellCache)> {
        if x_tilde.rows() != self.lstm.d_x || x_tilde.cols() != 1 {
            return Err(Error::shape(
                "cell_step",
                format!(
                    "gate input {}x{} vs expected {}x1",
                    x_tilde.rows(),
                    x_tilde.cols(),
                    self.lstm.d_x
                ),
            ));
        }
        let l = &self.lstm;
        let i = self.gate(l.w_i, l.u_i, l.b_i, x_tilde, &state.m, Act::Sigmoid)?;
        let s = self.gate(l.w_s, l.u_s, l.b_s, x_tilde, &state.m, Act::Tanh)?;
        let f = self.gate(l.w_f, l.u_f, l.b_f, x_tilde, &state.m, Act::Sigmoid)?;
        let o = self.gate(l.w_o, l.u_o, l.b_o, x_tilde, &state.m, Act::Sigmoid)?;
        let c_new = state.c.hadamard(&f)?.add(&s.hadamard(&i)?)?;
        let m_new = match self.config.cell_variant {
            CellVariant::Standard => o.hadamard(&c_new.map(f64::tanh))?,
            CellVariant::PaperLiteral => s.hadamard(&o)?,
        };
        if !c_new.is_finite() || !m_new.is_finite() {
            return Err(Error::Numeric("non-finite cell state".into()));
        }
        let cache = CellCache {
            x_tilde: x_tilde.clone(),
            m_prev: state.m.clone(),
            c_prev: state.c.clone(),
            i,
            s,
            f,
            o,
            c_new: c_new.clone(),
        };
        Ok((HiddenState { c: c_new, m: m_new }, cache))
    }

    /// Run a full window from a zeroed state and return the final step's
    /// prediction (horizon·d_in values).
    pub fn forward_window(&self, window: &[Tensor]) -> Result<Tensor> {
        let (y_hats, _) = self.forward_window_cached(window)?;
        Ok(y_hats.into_iter().last().expect("non-empty window"))
    }

    /// Forward pass retaining per-step caches; returns every step's decoder
    /// output in order.
    fn forward_window_cached(&self, window: &[Tensor]) -> Result<(Vec<Tensor>, Vec<StepCache>)> {
        if window.is_empty() {
            return Err(Error::Config("forward_window requires a non-empty window".into()));
        }
        let mut state = HiddenState::zeros(self.config.n_h);
        let mut y_hats = Vec::with_capacity(window.len());
        let mut caches = Vec::with_capacity(window.len());
        for x in window {
            match self.config.mode {
                Mode::Alstm => {
                    let (f_x, fx_cache) = self.feat_x_net()?.forward_cached(&self.set, x)?;
                    let enc_in = Tensor::concat_rows(&f_x, &state.m)?;
                    let (z, enc_cache) = self.encoder_net()?.forward_cached(&self.set, &enc_in)?;
                    let (f_z, fz_cache) = self.feat_z_net()?.forward_cached(&self.set, &z)?;
                    let dec_in = Tensor::concat_rows(&f_z, &state.m)?;
                    let (y_hat, dec_cache) = self.decoder.forward_cached(&self.set, &dec_in)?;
                    let x_tilde = Tensor::concat_rows(&f_x, &f_z)?;
                    let (next, cell_cache) = self.cell_step_cached(&x_tilde, &state)?;
                    state = next;
                    y_hats.push(y_hat);
                    caches.push(StepCache {
                        fx: Some(fx_cache),
                        enc: Some(enc_cache),
                        fz: Some(fz_cache),
                        dec: dec_cache,
                        cell: cell_cache,
                    });
                }
                Mode::LstmBaseline => {
                    let (next, cell_cache) = self.cell_step_cached(x, &state)?;
                    let (y_hat, dec_cache) = self.decoder.forward_cached(&self.set, &next.m)?;
                    state = next;
                    y_hats.push(y_hat);
                    caches.push(StepCache {
                        fx: None,
                        enc: None,
                        fz: None,
                        dec: dec_cache,
                        cell: cell_cache,
                    });
                }
            }
        }
        Ok((y_hats, caches))
    }

    fn check_target(&self, target: &Tensor) -> Result<()> {
        if target.rows() != self.config.output_dim() || target.cols() != 1 {
            return Err(Error::shape(
                "window target",
                format!(
                    "target {}x{} vs decoder output {}x1",
                    target.rows(),
                    target.cols(),
                    self.config.output_dim()
                ),
            ));
        }
        Ok(())
    }

    /// Squared-error data loss of one window (no regularizer).
    pub fn window_loss(&self, window: &[Tensor], target: &Tensor) -> Result<f64> {
        self.check_target(target)?;
        let (y_hats, _) = self.forward_window_cached(window)?;
        self.data_loss(&y_hats, target)
    }

    fn data_loss(&self, y_hats: &[Tensor], target: &Tensor) -> Result<f64> {
        let mut loss = 0.0;
        for (t, y_hat) in y_hats.iter().enumerate() {
            if t + 1 == y_hats.len() || self.config.loss_over_all_steps {
                loss += y_hat.sub(target)?.sum_squares();
            }
        }
        Ok(loss)
    }

    /// Backward-through-time over one window. Accumulates parameter gradients
    /// of the squared-error data loss into `grads` and returns that loss.
    pub fn window_grads(&self, window: &[Tensor], target: &Tensor, grads: &mut GradBuffer) -> Result<f64> {
        self.check_target(target)?;
        let (y_hats, caches) = self.forward_window_cached(window)?;
        let loss = self.data_loss(&y_hats, target)?;

        let n_h = self.config.n_h;
        let mut dm = Tensor::zeros(n_h, 1);
        let mut dc = Tensor::zeros(n_h, 1);
        for t in (0..caches.len()).rev() {
            let sc = &caches[t];
            let at_loss_step = t + 1 == caches.len() || self.config.loss_over_all_steps;

            // Decoder contribution. In augmented mode it read (f_z, m_{t-1});
            // in baseline mode it read m_t, so its gradient joins dm before
            // the cell backward.
            let mut df_z_dec: Option<Tensor> = None;
            let mut dm_prev_extra = Tensor::zeros(n_h, 1);
            if at_loss_step {
                let dy = y_hats[t].sub(target)?.scale(2.0);
                let d_dec_in = self.decoder.backward(&self.set, &sc.dec, &dy, grads)?;
                match self.config.mode {
                    Mode::Alstm => {
                        let (dfz, dmprev) = d_dec_in.split_rows(self.config.d_fz)?;
                        df_z_dec = Some(dfz);
                        dm_prev_extra = dmprev;
                    }
                    Mode::LstmBaseline => {
                        dm.add_scaled(&d_dec_in, 1.0)?;
                    }
                }
            }

            let (dx_tilde, dm_prev_cell, dc_prev) = self.cell_backward(&sc.cell, &dm, &dc, grads)?;

            let (dm_prev, dc_next) = match self.config.mode {
                Mode::Alstm => {
                    let (df_x_cell, df_z_cell) = dx_tilde.split_rows(self.config.d_fx)?;
                    let mut df_z = df_z_cell;
                    if let Some(dfz) = df_z_dec {
                        df_z.add_scaled(&dfz, 1.0)?;
                    }
                    let fz_cache = sc.fz.as_ref().expect("alstm cache");
                    let dz = self.feat_z_net()?.backward(&self.set, fz_cache, &df_z, grads)?;
                    let enc_cache = sc.enc.as_ref().expect("alstm cache");
                    let d_enc_in = self.encoder_net()?.backward(&self.set, enc_cache, &dz, grads)?;
                    let (df_x_enc, dm_prev_enc) = d_enc_in.split_rows(self.config.d_fx)?;
                    let mut df_x = df_x_cell;
                    df_x.add_scaled(&df_x_enc, 1.0)?;
                    let fx_cache = sc.fx.as_ref().expect("alstm cache");
                    self.feat_x_net()?.backward(&self.set, fx_cache, &df_x, grads)?;
                    let mut dm_prev = dm_prev_cell;
                    dm_prev.add_scaled(&dm_prev_enc, 1.0)?;
                    dm_prev.add_scaled(&dm_prev_extra, 1.0)?;
                    (dm_prev, dc_prev)
                }
                Mode::LstmBaseline => (dm_prev_cell, dc_prev),
            };
            dm = dm_prev;
            dc = dc_next;
        }
        Ok(loss)
    }

    /// Backward through one cell transition given gradients at (m', c').
    /// Returns (d x̃, d m_prev, d c_prev).
    fn cell_backward(
        &self,
        cache: &CellCache,
        dm: &Tensor,
        dc: &Tensor,
        grads: &mut GradBuffer,
    ) -> Result<(Tensor, Tensor, Tensor)> {
        let (d_o, mut ds, dc_total) = match self.config.cell_variant {
            CellVariant::Standard => {
                let tanh_c = cache.c_new.map(f64::tanh);
                let d_o = dm.hadamard(&tanh_c)?;
                let dc_total = dc.add(&dm.hadamard(&cache.o)?.hadamard(&tanh_c.map(|y| 1.0 - y * y))?)?;
                (d_o, Tensor::zeros_like(&cache.s), dc_total)
            }
            CellVariant::PaperLiteral => {
                let d_o = dm.hadamard(&cache.s)?;
                let ds = dm.hadamard(&cache.o)?;
                (d_o, ds, dc.clone())
            }
        };
        let di = dc_total.hadamard(&cache.s)?;
        ds.add_scaled(&dc_total.hadamard(&cache.i)?, 1.0)?;
        let df = dc_total.hadamard(&cache.c_prev)?;
        let dc_prev = dc_total.hadamard(&cache.f)?;

        let da_i = di.hadamard(&cache.i.map(|y| y * (1.0 - y)))?;
        let da_s = ds.hadamard(&cache.s.map(|y| 1.0 - y * y))?;
        let da_f = df.hadamard(&cache.f.map(|y| y * (1.0 - y)))?;
        let da_o = d_o.hadamard(&cache.o.map(|y| y * (1.0 - y)))?;

        let l = &self.lstm;
        let mut dx_tilde = Tensor::zeros(l.d_x, 1);
        let mut dm_prev = Tensor::zeros(l.n_h, 1);
        for (w, u, b, da) in [
            (l.w_i, l.u_i, l.b_i, &da_i),
            (l.w_s, l.u_s, l.b_s, &da_s),
            (l.w_f, l.u_f, l.b_f, &da_f),
            (l.w_o, l.u_o, l.b_o, &da_o),
        ] {
            grads.get_mut(w).add_outer(da, &cache.x_tilde, 1.0)?;
            grads.get_mut(u).add_outer(da, &cache.m_prev, 1.0)?;
            grads.get_mut(b).add_scaled(da, 1.0)?;
            dx_tilde.add_scaled(&self.set.value(w).matvec_t(da)?, 1.0)?;
            dm_prev.add_scaled(&self.set.value(u).matvec_t(da)?, 1.0)?;
        }
        Ok((dx_tilde, dm_prev, dc_prev))
    }

    /// Mean data loss over the samples plus `beta` times the summed squared
    /// weight-matrix entries (biases exempt).
    pub fn batch_loss_samples(&self, samples: &[WindowSample], beta: f64) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::Config("batch_loss requires a non-empty batch".into()));
        }
        let mut total = 0.0;
        for sample in samples {
            total += self.window_loss(&sample.steps, &sample.target)?;
        }
        let loss = total / samples.len() as f64 + beta * self.set.weight_sum_squares();
        if !loss.is_finite() {
            return Err(Error::Numeric("non-finite batch loss".into()));
        }
        Ok(loss)
    }

    /// Gradients of `batch_loss_samples` over a batch: mean of the per-window
    /// data gradients plus the regularizer term. Per-window work fans out
    /// across threads when the `parallel` feature is active; the reduction
    /// order is fixed, so results are identical either way. Returns the batch
    /// loss alongside the filled gradient buffer.
    pub fn batch_grads(&self, samples: &[&WindowSample], beta: f64) -> Result<(f64, GradBuffer)> {
        if samples.is_empty() {
            return Err(Error::Config("batch_grads requires a non-empty batch".into()));
        }
        let per_window = crate::parallel::map_collect(samples, |sample| {
            let mut grads = self.set.grad_scratch();
            let loss = self.window_grads(&sample.steps, &sample.target, &mut grads)?;
            Ok::<_, Error>((loss, grads))
        });
        let scale = 1.0 / samples.len() as f64;
        let mut total_loss = 0.0;
        let mut acc = self.set.grad_scratch();
        for item in per_window {
            let (loss, grads) = item?;
            total_loss += loss;
            acc.add(&grads)?;
        }
        acc.scale(scale);
        // d/dw of beta * sum(w^2) = 2*beta*w on weight matrices only.
        if beta != 0.0 {
            for id in self.set.ids() {
                if self.set.kind(id) == ParamKind::Weight {
                    let w = self.set.value(id).clone();
                    acc.get_mut(id).add_scaled(&w, 2.0 * beta)?;
                }
            }
        }
        let loss = total_loss * scale + beta * self.set.weight_sum_squares();
        if !loss.is_finite() {
            return Err(Error::Numeric("non-finite batch loss".into()));
        }
        Ok((loss, acc))
    }

    /// Sequential twin of `batch_grads`, kept callable regardless of feature
    /// flags for benchmarking the parallel speedup.
    pub fn batch_grads_seq(&self, samples: &[&WindowSample], beta: f64) -> Result<(f64, GradBuffer)> {
        if samples.is_empty() {
            return Err(Error::Config("batch_grads requires a non-empty batch".into()));
        }
        let scale = 1.0 / samples.len() as f64;
        let mut total_loss = 0.0;
        let mut acc = self.set.grad_scratch();
        for sample in samples {
            let mut grads = self.set.grad_scratch();
            total_loss += self.window_grads(&sample.steps, &sample.target, &mut grads)?;
            acc.add(&grads)?;
        }
        acc.scale(scale);
        if beta != 0.0 {
            for id in self.set.ids() {
                if self.set.kind(id) == ParamKind::Weight {
                    let w = self.set.value(id).clone();
                    acc.get_mut(id).add_scaled(&w, 2.0 * beta)?;
                }
            }
        }
        let loss = total_loss * scale + beta * self.set.weight_sum_squares();
        if !loss.is_finite() {
            return Err(Error::Numeric("non-finite batch loss".into()));
        }
        Ok((loss, acc))
    }

    /// Predictions for every sample; data-parallel when enabled.
    pub fn predict_samples(&self, samples: &[WindowSample]) -> Result<Vec<Tensor>> {
        crate::parallel::map_collect(samples, |s| self.forward_window(&s.steps))
            .into_iter()
            .collect()
    }
}
