//! Ordered parameter storage with parallel gradient buffers.
//!
//! All trainable tensors of a model live in one `ParamSet`, keyed by name in
//! insertion order. Layers hold `ParamId` handles instead of owning tensors,
//! which keeps optimizer updates, gradient checking, and serialization working
//! over a single flat, deterministic view.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Handle to one parameter tensor inside a `ParamSet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(usize);

/// Weight matrices are subject to L2 regularization; biases are exempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Weight,
    Bias,
}

#[derive(Debug, Clone)]
struct Entry {
    name: String,
    kind: ParamKind,
    value: Tensor,
}

/// Insertion-ordered map from parameter name to tensor, with one gradient
/// buffer per parameter.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    entries: Vec<Entry>,
    grads: Vec<Tensor>,
    index: HashMap<String, usize>,
}

impl ParamSet {
    pub fn new() -> ParamSet {
        ParamSet::default()
    }

    pub fn insert(&mut self, name: &str, kind: ParamKind, value: Tensor) -> Result<ParamId> {
        if self.index.contains_key(name) {
            return Err(Error::State(format!("duplicate parameter name {name:?}")));
        }
        let id = self.entries.len();
        self.index.insert(name.to_string(), id);
        self.grads.push(Tensor::zeros_like(&value));
        self.entries.push(Entry {
            name: name.to_string(),
            kind,
            value,
        });
        Ok(ParamId(id))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar entries across all parameters.
    pub fn num_scalars(&self) -> usize {
        self.entries.iter().map(|e| e.value.len()).sum()
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied().map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn kind(&self, id: ParamId) -> ParamKind {
        self.entries[id.0].kind
    }

    #[inline]
    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.entries[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.entries[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Tensor {
        &self.grads[id.0]
    }

    /// Iterate `(name, kind, value)` in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, ParamKind, &Tensor)> {
        self.entries.iter().map(|e| (e.name.as_str(), e.kind, &e.value))
    }

    /// Iterate `(id, value, grad)` in insertion order.
    pub fn iter_with_grads(&self) -> impl Iterator<Item = (ParamId, &Tensor, &Tensor)> {
        self.entries
            .iter()
            .zip(&self.grads)
            .enumerate()
            .map(|(i, (e, g))| (ParamId(i), &e.value, g))
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grads {
            g.fill(0.0);
        }
    }

    /// Fresh zeroed gradient buffer matching this set's shapes.
    pub fn grad_scratch(&self) -> GradBuffer {
        GradBuffer {
            tensors: self.entries.iter().map(|e| Tensor::zeros_like(&e.value)).collect(),
        }
    }

    /// Accumulate `scale * buffer` into the canonical gradient buffers.
    pub fn accumulate_grads(&mut self, buffer: &GradBuffer, scale: f64) -> Result<()> {
        if buffer.tensors.len() != self.grads.len() {
            return Err(Error::shape(
                "accumulate_grads",
                format!("{} buffers vs {} params", buffer.tensors.len(), self.grads.len()),
            ));
        }
        for (g, b) in self.grads.iter_mut().zip(&buffer.tensors) {
            g.add_scaled(b, scale)?;
        }
        Ok(())
    }

    /// Sum of squared entries over weight matrices only.
    pub fn weight_sum_squares(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.kind == ParamKind::Weight)
            .map(|e| e.value.sum_squares())
            .sum()
    }

    /// Update values in place: `value[id] += scale * delta[id]` over all params.
    pub fn step_values(&mut self, deltas: &GradBuffer, scale: f64) -> Result<()> {
        for (e, d) in self.entries.iter_mut().zip(&deltas.tensors) {
            e.value.add_scaled(d, scale)?;
        }
        Ok(())
    }
}

/// A detached set of gradient tensors, shape-parallel to a `ParamSet`.
///
/// Backward passes write here, so independent windows can be differentiated
/// concurrently and reduced in a fixed order afterwards.
#[derive(Debug, Clone)]
pub struct GradBuffer {
    tensors: Vec<Tensor>,
}

impl GradBuffer {
    #[inline]
    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    #[inline]
    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn add(&mut self, other: &GradBuffer) -> Result<()> {
        if self.tensors.len() != other.tensors.len() {
            return Err(Error::shape("GradBuffer::add", "buffer length mismatch"));
        }
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.add_scaled(b, 1.0)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for t in &mut self.tensors {
            for v in t.data_mut() {
                *v *= s;
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tensor> {
        self.tensors.iter()
    }
}
