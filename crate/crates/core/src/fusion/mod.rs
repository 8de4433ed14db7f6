//! Cross-attention transformer and late-fusion LSTM classifiers.

mod attention;
mod checkpoint;
mod lf_lstm;
mod lstm;
mod model;
mod mult;

pub use attention::{cab, cab_weights, modality_latent, project_qkv, self_attention, AttentionWeights};
pub use checkpoint::{load_checkpoint, parse_checkpoint, render_checkpoint, save_checkpoint};
pub use lf_lstm::{lf_lstm_forward, lf_lstm_unimodal_forward, LfLstmConfig, LfLstmModel};
pub use lstm::{lstm_cell, LstmWeights};
pub use model::{AnyModel, FusionMode, FusionModel, ModalInputs, Mode, ModelSpec, CLASSES};
pub use mult::{cab_sources, mult_forward, mult_unimodal_forward, MultConfig, MultModel};

use crate::error::{Error, Result};
use crate::numkernel::{Matrix, Tape, Var};

/// A recorded inference pass: the tape and the `1 x 3` logits on it.
#[derive(Debug)]
pub struct ForwardPass {
    pub tape: Tape,
    pub output: Var,
}

impl ForwardPass {
    pub fn run(model: &dyn FusionModel, inputs: &ModalInputs<'_>) -> Result<Self> {
        let mut tape = Tape::new();
        let output = model.forward(&mut tape, inputs, Mode::Eval)?;
        Ok(ForwardPass { tape, output })
    }

    /// Runs a single-modality model on its one input matrix.
    pub fn run_unimodal(model: &dyn FusionModel, x: &Matrix) -> Result<Self> {
        let mods = model.modalities();
        if mods.len() != 1 {
            return Err(Error::invalid(format!(
                "unimodal forward needs a single-modality model, got \"{mods}\""
            )));
        }
        let empty = Matrix::empty(0);
        let mut feats = [&empty; 3];
        feats[mods.iter().next().unwrap().index()] = x;
        Self::run(model, &ModalInputs::new(feats[0], feats[1], feats[2]))
    }

    pub fn logits(&self) -> [f64; CLASSES] {
        let v = self.tape.value(self.output);
        [v.get(0, 0), v.get(0, 1), v.get(0, 2)]
    }
}
