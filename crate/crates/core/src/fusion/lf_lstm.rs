use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::lstm::LstmIds;
use crate::fusion::model::{
    dropout_mask, init_weight, model_rng, FusionModel, ModalInputs, Mode, ModelSpec, CLASSES,
};
use crate::fusion::ForwardPass;
use crate::numkernel::{Matrix, ParamId, ParamSet, Tape, Var, LAYER_NORM_EPS};
use crate::sequences::{Dims, Modality, ModalitySet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LfLstmConfig {
    pub modalities: ModalitySet,
    pub hidden: usize,
    pub head_hidden: usize,
    pub dropout: f64,
}

impl Default for LfLstmConfig {
    fn default() -> Self {
        LfLstmConfig { modalities: ModalitySet::ALL, hidden: 16, head_hidden: 32, dropout: 0.1 }
    }
}

impl LfLstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.head_hidden == 0 {
            return Err(Error::invalid("hidden sizes must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    lstm1: LstmIds,
    gain: ParamId,
    bias: ParamId,
    lstm2: LstmIds,
}

/// Late fusion: per modality two stacked LSTMs with layer norm between them,
/// final hidden states concatenated as `[h2; h1]` per modality in t, a, v
/// order, then a ReLU hidden layer with dropout and a linear classifier.
#[derive(Debug, Clone)]
pub struct LfLstmModel {
    config: LfLstmConfig,
    dims: Dims,
    params: ParamSet,
    branches: BTreeMap<Modality, Branch>,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
}

fn add_lstm(params: &mut ParamSet, rng: &mut ChaCha8Rng, name: &str, input: usize, h: usize) -> LstmIds {
    let w = ["i", "f", "o", "c"]
        .map(|g| params.add(format!("{name}.w_{g}"), init_weight(rng, input + h, h)));
    let b = ["i", "f", "o", "c"].map(|g| params.add(format!("{name}.b_{g}"), Matrix::zeros(1, h)));
    LstmIds { w, b }
}

impl LfLstmModel {
    pub fn new(config: LfLstmConfig, dims: Dims, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = model_rng(seed);
        let mut params = ParamSet::new();
        let h = config.hidden;
        let mut branches = BTreeMap::new();
        for m in config.modalities.iter() {
            let c = m.code();
            let lstm1 = add_lstm(&mut params, &mut rng, &format!("lstm1.{c}"), dims.get(m), h);
            let gain = params.add(format!("ln.{c}.gain"), Matrix::filled(1, h, 1.0));
            let bias = params.add(format!("ln.{c}.bias"), Matrix::zeros(1, h));
            let lstm2 = add_lstm(&mut params, &mut rng, &format!("lstm2.{c}"), h, h);
            branches.insert(m, Branch { lstm1, gain, bias, lstm2 });
        }
        let fused = 2 * h * config.modalities.len();
        let w1 = params.add("head.w1", init_weight(&mut rng, fused, config.head_hidden));
        let b1 = params.add("head.b1", Matrix::zeros(1, config.head_hidden));
        let w2 = params.add("head.w2", init_weight(&mut rng, config.head_hidden, CLASSES));
        let b2 = params.add("head.b2", Matrix::zeros(1, CLASSES));
        Ok(LfLstmModel { config, dims, params, branches, w1, b1, w2, b2 })
    }

    pub fn config(&self) -> &LfLstmConfig {
        &self.config
    }
}

impl FusionModel for LfLstmModel {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn modalities(&self) -> ModalitySet {
        self.config.modalities
    }

    fn dims(&self) -> Dims {
        self.dims
    }

    fn spec(&self) -> ModelSpec {
        ModelSpec::LfLstm(self.config.clone())
    }

    fn forward(&self, tape: &mut Tape, inputs: &ModalInputs<'_>, mode: Mode) -> Result<Var> {
        let len = inputs.check(self.config.modalities, &self.dims)?;
        let p = &self.params;
        let mut finals = Vec::with_capacity(2 * self.branches.len());
        for (&m, br) in &self.branches {
            let x = tape.input(inputs.get(m).clone());
            let h1 = br.lstm1.run(tape, p, x, len)?;
            let gain = tape.param(p, br.gain);
            let bias = tape.param(p, br.bias);
            let normed = tape.layer_norm(h1, gain, bias, LAYER_NORM_EPS)?;
            let h2 = br.lstm2.run(tape, p, normed, len)?;
            finals.push(tape.slice_rows(h2, len - 1, len)?);
            finals.push(tape.slice_rows(h1, len - 1, len)?);
        }
        let z = tape.concat_cols(&finals)?;
        let w1 = tape.param(p, self.w1);
        let b1 = tape.param(p, self.b1);
        let hidden = tape.matmul(z, w1)?;
        let hidden = tape.add_row(hidden, b1)?;
        let mut hidden = tape.relu(hidden);
        if let Mode::Train { dropout_seed } = mode {
            if self.config.dropout > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(dropout_seed);
                let mask = dropout_mask(&mut rng, 1, self.config.head_hidden, self.config.dropout);
                hidden = tape.mul_const(hidden, mask)?;
            }
        }
        let w2 = tape.param(p, self.w2);
        let b2 = tape.param(p, self.b2);
        let out = tape.matmul(hidden, w2)?;
        tape.add_row(out, b2)
    }
}

pub fn lf_lstm_forward(model: &LfLstmModel, x_t: &Matrix, x_a: &Matrix, x_v: &Matrix) -> Result<ForwardPass> {
    if model.modalities() != ModalitySet::ALL {
        return Err(Error::invalid(format!(
            "model uses modalities \"{}\"; trimodal forward needs \"tav\"",
            model.modalities()
        )));
    }
    ForwardPass::run(model, &ModalInputs::new(x_t, x_a, x_v))
}

pub fn lf_lstm_unimodal_forward(model: &LfLstmModel, x: &Matrix) -> Result<ForwardPass> {
    ForwardPass::run_unimodal(model, x)
}
