use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::attention::AttentionIds;
use crate::fusion::model::{
    init_weight, model_rng, FusionMode, FusionModel, ModalInputs, Mode, ModelSpec, CLASSES,
};
use crate::fusion::ForwardPass;
use crate::numkernel::{Matrix, ParamId, ParamSet, Tape, Var};
use crate::sequences::{Dims, Modality, ModalitySet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultConfig {
    pub modalities: ModalitySet,
    pub d_k: usize,
    /// Stacked cross-attention layers per direction.
    pub layers: usize,
    pub fusion: FusionMode,
    /// Add each cross-attention output to its query stream.
    pub residual: bool,
}

impl Default for MultConfig {
    fn default() -> Self {
        MultConfig {
            modalities: ModalitySet::ALL,
            d_k: 32,
            layers: 1,
            fusion: FusionMode::Concat,
            residual: false,
        }
    }
}

impl MultConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_k == 0 {
            return Err(Error::invalid("d_k must be at least 1"));
        }
        if self.layers == 0 {
            return Err(Error::invalid("layers must be at least 1"));
        }
        Ok(())
    }
}

/// Key/value sources of query modality `x`, in t < a < v order.
///
/// A source outside the active set is replaced by `x` itself, so a unimodal
/// model runs self-attention in place of both cross-attention blocks.
pub fn cab_sources(x: Modality, active: ModalitySet) -> [Modality; 2] {
    let mut out = [x; 2];
    for (slot, s) in out.iter_mut().zip(Modality::ALL.into_iter().filter(|&s| s != x)) {
        if active.contains(s) {
            *slot = s;
        }
    }
    out
}

/// Cross-attention transformer: input self-attention per modality, directed
/// cross-attention blocks, concatenated per-modality latents, output
/// self-attention, temporal mean pooling and a linear classifier.
#[derive(Debug, Clone)]
pub struct MultModel {
    config: MultConfig,
    dims: Dims,
    params: ParamSet,
    input: BTreeMap<Modality, AttentionIds>,
    /// One map per layer, keyed by (query, source).
    cab: Vec<BTreeMap<(Modality, Modality), AttentionIds>>,
    output: BTreeMap<Modality, AttentionIds>,
    head_w: ParamId,
    head_b: ParamId,
}

impl MultModel {
    /// Builds a model with seeded uniform weights and zero biases.
    pub fn new(config: MultConfig, dims: Dims, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = model_rng(seed);
        let mut params = ParamSet::new();
        let dk = config.d_k;
        let mods = config.modalities;
        let mut attn = |params: &mut ParamSet, name: String, din: usize, dv: usize| AttentionIds {
            wq: params.add(format!("{name}.wq"), init_weight(&mut rng, din, dk)),
            wk: params.add(format!("{name}.wk"), init_weight(&mut rng, din, dk)),
            wv: params.add(format!("{name}.wv"), init_weight(&mut rng, din, dv)),
        };
        let mut input = BTreeMap::new();
        for m in mods.iter() {
            input.insert(m, attn(&mut params, format!("in.{}", m.code()), dims.get(m), dk));
        }
        let mut cab = Vec::with_capacity(config.layers);
        for layer in 0..config.layers {
            let mut map = BTreeMap::new();
            for x in mods.iter() {
                for s in cab_sources(x, mods) {
                    if let std::collections::btree_map::Entry::Vacant(e) = map.entry((x, s)) {
                        let name = format!("cab{layer}.{}{}", x.code(), s.code());
                        e.insert(attn(&mut params, name, dk, dk));
                    }
                }
            }
            cab.push(map);
        }
        let mut output = BTreeMap::new();
        for m in mods.iter() {
            output.insert(m, attn(&mut params, format!("out.{}", m.code()), 2 * dk, 2 * dk));
        }
        let fused = match config.fusion {
            FusionMode::Concat => 2 * dk * mods.len(),
            FusionMode::Sum => 2 * dk,
        };
        let head_w = params.add("head.w", init_weight(&mut rng, fused, CLASSES));
        let head_b = params.add("head.b", Matrix::zeros(1, CLASSES));
        Ok(MultModel { config, dims, params, input, cab, output, head_w, head_b })
    }

    pub fn config(&self) -> &MultConfig {
        &self.config
    }
}

impl FusionModel for MultModel {
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
        ModelSpec::Mult(self.config.clone())
    }

    fn forward(&self, tape: &mut Tape, inputs: &ModalInputs<'_>, _mode: Mode) -> Result<Var> {
        let mods = self.config.modalities;
        inputs.check(mods, &self.dims)?;
        let p = &self.params;
        let mut states = BTreeMap::new();
        for m in mods.iter() {
            let x = tape.input(inputs.get(m).clone());
            states.insert(m, self.input[&m].attend(tape, p, x, x)?);
        }
        let mut pooled = Vec::with_capacity(mods.len());
        for x in mods.iter() {
            let mut parts = [states[&x]; 2];
            for (part, s) in parts.iter_mut().zip(cab_sources(x, mods)) {
                let src = states[&s];
                for layer in &self.cab {
                    let z = layer[&(x, s)].attend(tape, p, *part, src)?;
                    *part = if self.config.residual { tape.add(*part, z)? } else { z };
                }
            }
            let latent = tape.concat_cols(&parts)?;
            let out = self.output[&x].attend(tape, p, latent, latent)?;
            pooled.push(tape.mean_rows(out)?);
        }
        let fused = match self.config.fusion {
            FusionMode::Concat => tape.concat_cols(&pooled)?,
            FusionMode::Sum => {
                let mut acc = pooled[0];
                for &v in &pooled[1..] {
                    acc = tape.add(acc, v)?;
                }
                acc
            }
        };
        let w = tape.param(p, self.head_w);
        let b = tape.param(p, self.head_b);
        let z = tape.matmul(fused, w)?;
        tape.add_row(z, b)
    }
}

/// Trimodal forward pass on pivot-aligned feature matrices.
pub fn mult_forward(model: &MultModel, x_t: &Matrix, x_a: &Matrix, x_v: &Matrix) -> Result<ForwardPass> {
    if model.modalities() != ModalitySet::ALL {
        return Err(Error::invalid(format!(
            "model uses modalities \"{}\"; trimodal forward needs \"tav\"",
            model.modalities()
        )));
    }
    ForwardPass::run(model, &ModalInputs::new(x_t, x_a, x_v))
}

/// Unimodal forward pass: self-attention replaces both cross-attention blocks.
pub fn mult_unimodal_forward(model: &MultModel, x: &Matrix) -> Result<ForwardPass> {
    ForwardPass::run_unimodal(model, x)
}
