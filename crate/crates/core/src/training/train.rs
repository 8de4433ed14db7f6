use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fusion::{AnyModel, FusionModel, ModalInputs, Mode, ModelSpec};
use crate::numkernel::{Gradients, ParamSet, Tape};
use crate::sequences::{Corpus, Segment, Split};

/// Applies a gradient step to a parameter set.
pub trait Optimizer {
    fn step(&mut self, params: &mut ParamSet, grads: &Gradients) -> Result<()>;
}

/// Plain stochastic gradient descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sgd {
    pub lr: f64,
}

impl Optimizer for Sgd {
    fn step(&mut self, params: &mut ParamSet, grads: &Gradients) -> Result<()> {
        sgd_step(params, grads, self.lr)
    }
}

/// `p <- p - lr * g` for every parameter.
pub fn sgd_step(params: &mut ParamSet, grads: &Gradients, lr: f64) -> Result<()> {
    if grads.len() != params.len() {
        return Err(Error::dim(format!(
            "{} gradients for {} parameters",
            grads.len(),
            params.len()
        )));
    }
    for (id, g) in grads.iter() {
        if params.get(id).shape() != g.shape() {
            return Err(Error::dim(format!(
                "gradient for {} is {:?}, parameter is {:?}",
                params.name(id),
                g.shape(),
                params.get(id).shape()
            )));
        }
    }
    for (id, g) in grads.iter() {
        for (p, d) in params.get_mut(id).data_mut().iter_mut().zip(g.data()) {
            *p -= lr * d;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    /// Architecture, modality mask and fusion mode.
    pub model: ModelSpec,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate {} must be positive", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AnyModel,
    /// Mean training loss of each epoch.
    pub loss_history: Vec<f64>,
}

/// Builds a model from `config.model` seeded with `config.seed` and trains it.
pub fn train(corpus: &Corpus, config: &TrainConfig, exec: Exec) -> Result<TrainOutcome> {
    config.validate()?;
    let mut model = config.model.build(corpus.dims(), config.seed)?;
    let loss_history = train_model(&mut model, corpus, config, exec)?;
    Ok(TrainOutcome { model, loss_history })
}

/// Loss and gradients of one example.
pub fn example_gradients(
    model: &dyn FusionModel,
    seg: &Segment,
    mode: Mode,
) -> Result<(f64, Gradients)> {
    let mut tape = Tape::new();
    let logits = model.forward(&mut tape, &ModalInputs::from_segment(seg), mode)?;
    let loss = tape.cross_entropy(logits, seg.label.class_index())?;
    let value = tape.value(loss).get(0, 0);
    if !value.is_finite() {
        return Err(Error::Numeric(format!("non-finite loss on segment {}", seg.id)));
    }
    Ok((value, tape.backward(loss, model.params())?))
}

/// Mini-batch SGD over the train split. Per-example gradients within a batch
/// may run in parallel; they are summed in batch order, so the result does
/// not depend on `exec`.
pub fn train_model(
    model: &mut dyn FusionModel,
    corpus: &Corpus,
    config: &TrainConfig,
    exec: Exec,
) -> Result<Vec<f64>> {
    config.validate()?;
    if model.dims() != corpus.dims() {
        return Err(Error::dim(format!(
            "model dims {:?} do not match corpus dims {:?}",
            model.dims(),
            corpus.dims()
        )));
    }
    if let Some(seg) = corpus.segments().iter().find(|s| !s.is_aligned()) {
        return Err(Error::invalid(format!(
            "segment {} is not aligned; run align_corpus (mmsa align) first",
            seg.id
        )));
    }
    let train: Vec<&Segment> = corpus.split(Split::Train).collect();
    if train.is_empty() {
        return Err(Error::invalid("train split is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut opt = Sgd { lr: config.lr };
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let jobs: Vec<(&Segment, u64)> = batch.iter().map(|&i| (train[i], rng.next_u64())).collect();
            let shared: &dyn FusionModel = model;
            let results = exec.map(&jobs, |&(seg, dropout_seed)| {
                example_gradients(shared, seg, Mode::Train { dropout_seed })
            });
            let mut total = model.params().zero_gradients();
            for r in results {
                let (loss, g) = r?;
                epoch_loss += loss;
                total.merge(&g)?;
            }
            total.scale(1.0 / batch.len() as f64);
            if !total.is_finite() {
                return Err(Error::Numeric("non-finite gradient during training".into()));
            }
            opt.step(model.params_mut(), &total)?;
        }
        history.push(epoch_loss / train.len() as f64);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::Matrix;

    #[test]
    fn sgd_examples() {
        let mut p = ParamSet::new();
        let id = p.add("w", Matrix::zeros(1, 1));
        let zero = p.zero_gradients();
        sgd_step(&mut p, &zero, 0.5).unwrap();
        assert_eq!(p.get(id).data(), &[0.0]);

        let mut tape = Tape::new();
        let w = tape.param(&p, id);
        let s = tape.sum(w);
        let g = tape.backward(s, &p).unwrap();
        sgd_step(&mut p, &g, 1.0).unwrap();
        assert_eq!(p.get(id).data(), &[-1.0]);
    }

    fn quad_grad(p: &ParamSet) -> Gradients {
        // f(w) = sum(w * w)
        let mut tape = Tape::new();
        let id = p.ids().next().unwrap();
        let w = tape.param(p, id);
        let sq = tape.mul(w, w).unwrap();
        let f = tape.sum(sq);
        tape.backward(f, p).unwrap()
    }

    #[test]
    fn step_trajectories_are_not_linear() {
        let mut a = ParamSet::new();
        a.add("w", Matrix::row_vector(&[1.0, -2.0]));
        let mut b = a.clone();
        let g = quad_grad(&a);
        sgd_step(&mut a, &g, 0.4).unwrap();
        for _ in 0..2 {
            let g = quad_grad(&b);
            sgd_step(&mut b, &g, 0.2).unwrap();
        }
        let id = a.ids().next().unwrap();
        assert_ne!(a.get(id), b.get(id));
    }

    #[test]
    fn small_step_decreases_convex_quadratic() {
        let mut p = ParamSet::new();
        let id = p.add("w", Matrix::row_vector(&[0.7, -1.3, 2.0]));
        let f = |p: &ParamSet| p.get(id).data().iter().map(|x| x * x).sum::<f64>();
        let before = f(&p);
        let g = quad_grad(&p);
        sgd_step(&mut p, &g, 0.01).unwrap();
        assert!(f(&p) < before);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = ParamSet::new();
        p.add("w", Matrix::zeros(1, 2));
        let mut q = ParamSet::new();
        q.add("w", Matrix::zeros(2, 1));
        assert!(sgd_step(&mut p, &q.zero_gradients(), 0.1).is_err());
        assert!(sgd_step(&mut p, &ParamSet::new().zero_gradients(), 0.1).is_err());
    }
}
