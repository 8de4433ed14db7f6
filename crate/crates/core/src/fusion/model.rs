use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::lf_lstm::{LfLstmConfig, LfLstmModel};
use crate::fusion::mult::{MultConfig, MultModel};
use crate::numkernel::{Matrix, ParamSet, Tape, Var};
use crate::sequences::{Dims, Modality, ModalitySet, Segment};

/// Feature matrices for one segment, indexed by modality.
#[derive(Debug, Clone, Copy)]
pub struct ModalInputs<'a> {
    feats: [&'a Matrix; 3],
}

impl<'a> ModalInputs<'a> {
    pub fn new(text: &'a Matrix, audio: &'a Matrix, video: &'a Matrix) -> Self {
        ModalInputs { feats: [text, audio, video] }
    }

    pub fn from_segment(seg: &'a Segment) -> Self {
        ModalInputs::new(seg.text.features(), seg.audio.features(), seg.video.features())
    }

    pub fn get(&self, m: Modality) -> &'a Matrix {
        self.feats[m.index()]
    }

    /// Checks widths and that the used modalities share a non-zero length.
    pub(crate) fn check(&self, modalities: ModalitySet, dims: &Dims) -> Result<usize> {
        let mut len = None;
        for m in modalities.iter() {
            let x = self.get(m);
            if x.cols() != dims.get(m) {
                return Err(Error::dim(format!(
                    "{m} input has width {}, model expects {}",
                    x.cols(),
                    dims.get(m)
                )));
            }
            match len {
                None => len = Some(x.rows()),
                Some(l) if l != x.rows() => {
                    return Err(Error::invalid(format!(
                        "modality lengths differ ({l} vs {} for {m}); run align_corpus first",
                        x.rows()
                    )))
                }
                Some(_) => {}
            }
        }
        match len {
            Some(0) | None => Err(Error::invalid("cannot run a model on zero-length sequences")),
            Some(l) => Ok(l),
        }
    }
}

/// Whether a forward pass samples dropout masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Eval,
    /// Training with dropout masks drawn from this seed.
    Train { dropout_seed: u64 },
}

/// How pooled per-modality latents are combined before the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    #[default]
    Concat,
    Sum,
}

impl std::str::FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(FusionMode::Concat),
            "sum" => Ok(FusionMode::Sum),
            _ => Err(Error::invalid(format!("unknown fusion mode \"{s}\""))),
        }
    }
}

/// Number of output classes (-1, 0, +1).
pub const CLASSES: usize = 3;

/// A trainable sentiment classifier over aligned multimodal input.
pub trait FusionModel: Send + Sync {
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;
    fn modalities(&self) -> ModalitySet;
    fn dims(&self) -> Dims;
    fn spec(&self) -> ModelSpec;

    /// Records the forward pass on `tape` and returns the 1 x 3 logits.
    fn forward(&self, tape: &mut Tape, inputs: &ModalInputs<'_>, mode: Mode) -> Result<Var>;

    /// Inference-only logits.
    fn predict_logits(&self, inputs: &ModalInputs<'_>) -> Result<[f64; CLASSES]> {
        let mut tape = Tape::new();
        let out = self.forward(&mut tape, inputs, Mode::Eval)?;
        let v = tape.value(out);
        if !v.is_finite() {
            return Err(Error::Numeric("non-finite logits".into()));
        }
        Ok([v.get(0, 0), v.get(0, 1), v.get(0, 2)])
    }
}

/// Architecture plus hyperparameters; enough to rebuild a model's parameter layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Mult(MultConfig),
    LfLstm(LfLstmConfig),
}

impl ModelSpec {
    pub fn modalities(&self) -> ModalitySet {
        match self {
            ModelSpec::Mult(c) => c.modalities,
            ModelSpec::LfLstm(c) => c.modalities,
        }
    }

    /// Short architecture name used in report labels.
    pub fn arch_name(&self) -> &'static str {
        match self {
            ModelSpec::Mult(_) => "Mult",
            ModelSpec::LfLstm(_) => "LFLSTM",
        }
    }

    pub fn build(&self, dims: Dims, seed: u64) -> Result<AnyModel> {
        Ok(match self {
            ModelSpec::Mult(c) => AnyModel::Mult(MultModel::new(c.clone(), dims, seed)?),
            ModelSpec::LfLstm(c) => AnyModel::LfLstm(LfLstmModel::new(c.clone(), dims, seed)?),
        })
    }
}

/// Either architecture behind one type.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Mult(MultModel),
    LfLstm(LfLstmModel),
}

impl FusionModel for AnyModel {
    fn params(&self) -> &ParamSet {
        match self {
            AnyModel::Mult(m) => m.params(),
            AnyModel::LfLstm(m) => m.params(),
        }
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        match self {
            AnyModel::Mult(m) => m.params_mut(),
            AnyModel::LfLstm(m) => m.params_mut(),
        }
    }

    fn modalities(&self) -> ModalitySet {
        match self {
            AnyModel::Mult(m) => m.modalities(),
            AnyModel::LfLstm(m) => m.modalities(),
        }
    }

    fn dims(&self) -> Dims {
        match self {
            AnyModel::Mult(m) => m.dims(),
            AnyModel::LfLstm(m) => m.dims(),
        }
    }

    fn spec(&self) -> ModelSpec {
        match self {
            AnyModel::Mult(m) => m.spec(),
            AnyModel::LfLstm(m) => m.spec(),
        }
    }

    fn forward(&self, tape: &mut Tape, inputs: &ModalInputs<'_>, mode: Mode) -> Result<Var> {
        match self {
            AnyModel::Mult(m) => m.forward(tape, inputs, mode),
            AnyModel::LfLstm(m) => m.forward(tape, inputs, mode),
        }
    }
}

/// Uniform in `[-1/sqrt(rows), 1/sqrt(rows)]`.
pub(crate) fn init_weight(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let bound = 1.0 / (rows.max(1) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-bound..=bound)).collect();
    Matrix::new(rows, cols, data).expect("shape")
}

pub(crate) fn model_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inverted-dropout mask: entries are 0 with probability `rate`, else `1/(1-rate)`.
pub(crate) fn dropout_mask(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rate: f64) -> Matrix {
    let keep = 1.0 - rate;
    let data = (0..rows * cols)
        .map(|_| if rng.random_bool(keep) { 1.0 / keep } else { 0.0 })
        .collect();
    Matrix::new(rows, cols, data).expect("shape")
}
