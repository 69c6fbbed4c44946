//! Forecasting engine built around an autoencoder-augmented LSTM.
//!
//! The crate covers the full experimental loop: chaotic benchmark generators
//! (Mackey-Glass, Lorenz, Rossler), a CSV ingestion pipeline for real load
//! data, the augmented LSTM model with hand-derived backward-through-time
//! gradients, ADAM training, and evaluation metrics with residual-based
//! confidence bands.
//!
//! Batch gradient accumulation, test-set prediction, and benchmark fan-out
//! run data-parallel through rayon by default; build with
//! `--no-default-features` for a fully sequential engine. Both paths reduce
//! in a fixed order and produce bit-identical results.

pub mod config;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod ingest;
pub mod model;
pub mod nn;
pub mod optim;
pub mod parallel;
pub mod params;
pub mod rng;
pub mod serialize;
pub mod tensor;

pub use error::{Error, Result};
