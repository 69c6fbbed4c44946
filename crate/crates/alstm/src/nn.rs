//! Two-layer feedforward blocks and parameter initialization.

use crate::error::{Error, Result};
use crate::params::{GradBuffer, ParamId, ParamKind, ParamSet};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activation applied elementwise after an affine stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Act {
    Tanh,
    Sigmoid,
    Identity,
}

impl Act {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Act::Tanh => x.tanh(),
            Act::Sigmoid => sigmoid(x),
            Act::Identity => x,
        }
    }

    /// Derivative expressed through the activation output y = act(x).
    #[inline]
    pub fn deriv_from_output(self, y: f64) -> f64 {
        match self {
            Act::Tanh => 1.0 - y * y,
            Act::Sigmoid => y * (1.0 - y),
            Act::Identity => 1.0,
        }
    }
}

/// Glorot-uniform tensor: entries i.i.d. on [-r, r] with
/// r = sqrt(6 / (fan_in + fan_out)), fan_in = cols, fan_out = rows.
pub fn init_glorot(rows: usize, cols: usize, rng: &mut SeededRng) -> Result<Tensor> {
    if rows == 0 || cols == 0 {
        return Err(Error::shape("init_glorot", format!("zero-sized shape {rows}x{cols}")));
    }
    let r = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.uniform(-r, r)).collect();
    Tensor::from_vec(rows, cols, data)
}

/// Two affine stages with elementwise nonlinearities:
/// `out_act(W2 · hidden_act(W1·x + b1) + b2)`.
///
/// Holds handles into a `ParamSet` rather than owning its tensors.
#[derive(Debug, Clone)]
pub struct TwoLayerNet {
    pub w1: ParamId,
    pub b1: ParamId,
    pub w2: ParamId,
    pub b2: ParamId,
    pub hidden_act: Act,
    pub out_act: Act,
    pub d_in: usize,
    pub d_hidden: usize,
    pub d_out: usize,
}

/// Forward intermediates kept for the backward pass.
#[derive(Debug, Clone)]
pub struct TwoLayerCache {
    pub x: Tensor,
    pub hidden: Tensor,
    pub out: Tensor,
}

impl TwoLayerNet {
    /// Create with Glorot weights and zero biases, registering parameters as
    /// `{prefix}.w1`, `{prefix}.b1`, `{prefix}.w2`, `{prefix}.b2`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        set: &mut ParamSet,
        prefix: &str,
        d_in: usize,
        d_hidden: usize,
        d_out: usize,
        hidden_act: Act,
        out_act: Act,
        rng: &mut SeededRng,
    ) -> Result<TwoLayerNet> {
        let w1 = set.insert(&format!("{prefix}.w1"), ParamKind::Weight, init_glorot(d_hidden, d_in, rng)?)?;
        let b1 = set.insert(&format!("{prefix}.b1"), ParamKind::Bias, Tensor::zeros(d_hidden, 1))?;
        let w2 = set.insert(&format!("{prefix}.w2"), ParamKind::Weight, init_glorot(d_out, d_hidden, rng)?)?;
        let b2 = set.insert(&format!("{prefix}.b2"), ParamKind::Bias, Tensor::zeros(d_out, 1))?;
        Ok(TwoLayerNet {
            w1,
            b1,
            w2,
            b2,
            hidden_act,
            out_act,
            d_in,
            d_hidden,
            d_out,
        })
    }

    fn check_input(&self, set: &ParamSet, x: &Tensor) -> Result<()> {
        if x.cols() != 1 || x.rows() != self.d_in {
            return Err(Error::shape(
                "two_layer_forward",
                format!(
                    "input {}x{} does not match {} (expects {}x1)",
                    x.rows(),
                    x.cols(),
                    set.name(self.w1),
                    self.d_in
                ),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, set: &ParamSet, x: &Tensor) -> Result<Tensor> {
        Ok(self.forward_cached(set, x)?.0)
    }

    pub fn forward_cached(&self, set: &ParamSet, x: &Tensor) -> Result<(Tensor, TwoLayerCache)> {
        self.check_input(set, x)?;
        let a1 = set.value(self.w1).matvec(x)?.add(set.value(self.b1))?;
        let hidden = a1.map(|v| self.hidden_act.apply(v));
        let a2 = set.value(self.w2).matvec(&hidden)?.add(set.value(self.b2))?;
        let out = a2.map(|v| self.out_act.apply(v));
        if !out.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite output from layer {}",
                set.name(self.w2)
            )));
        }
        let cache = TwoLayerCache {
            x: x.clone(),
            hidden,
            out: out.clone(),
        };
        Ok((out, cache))
    }

    /// Backpropagate `d_out` (gradient at the output) through the block,
    /// accumulating parameter gradients into `grads` and returning the
    /// gradient with respect to the input.
    pub fn backward(
        &self,
        set: &ParamSet,
        cache: &TwoLayerCache,
        d_out: &Tensor,
        grads: &mut GradBuffer,
    ) -> Result<Tensor> {
        let da2 = d_out.hadamard(&cache.out.map(|y| self.out_act.deriv_from_output(y)))?;
        grads.get_mut(self.w2).add_outer(&da2, &cache.hidden, 1.0)?;
        grads.get_mut(self.b2).add_scaled(&da2, 1.0)?;
        let dh = set.value(self.w2).matvec_t(&da2)?;
        let da1 = dh.hadamard(&cache.hidden.map(|y| self.hidden_act.deriv_from_output(y)))?;
        grads.get_mut(self.w1).add_outer(&da1, &cache.x, 1.0)?;
        grads.get_mut(self.b1).add_scaled(&da1, 1.0)?;
        set.value(self.w1).matvec_t(&da1)
    }
}
