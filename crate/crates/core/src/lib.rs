//! Multimodal sentiment analysis at desk scale: a matrix kernel with analytic
//! gradients, multimodal corpora with a synthetic generator, DTW forced
//! alignment and pivot resampling, cross-attention and late-fusion LSTM models,
//! and the accuracy / macro-F1 / MAE evaluation protocol.

pub mod alignment;
pub mod error;
pub mod exec;
pub mod fusion;
pub mod numkernel;
pub mod pipeline;
pub mod sequences;
pub mod training;

pub use error::{Error, Result};
pub use exec::Exec;
