#![allow(dead_code)]

use mmsa::fusion::{AnyModel, FusionModel, LfLstmConfig, ModalInputs, Mode, ModelSpec, MultConfig};
use mmsa::numkernel::{check_param_gradients, GradCheckReport, Matrix, Tape};
use mmsa::sequences::{Dims, Label, ModalitySet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::new(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// A random toy model of either architecture with length <= 4 and dims <= 5.
pub struct Toy {
    pub model: AnyModel,
    pub inputs: [Matrix; 3],
    pub label: Label,
}

pub fn toy(seed: u64, mult: bool) -> Toy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = Dims::new(rng.random_range(1..=5), rng.random_range(1..=5), rng.random_range(1..=5));
    let len = rng.random_range(1..=4);
    let mods = ["tva", "t", "a", "v", "tv"][rng.random_range(0..5)];
    let modalities: ModalitySet = mods.parse().unwrap();
    let spec = if mult {
        ModelSpec::Mult(MultConfig { modalities, d_k: rng.random_range(1..=5), ..MultConfig::default() })
    } else {
        ModelSpec::LfLstm(LfLstmConfig {
            modalities,
            hidden: rng.random_range(1..=5),
            head_hidden: rng.random_range(1..=5),
            dropout: 0.1,
        })
    };
    let mut model = spec.build(dims, seed).unwrap();
    // Scale weights up and give biases random values so no gradient is trivially zero.
    let ids: Vec<_> = model.params().ids().collect();
    for id in ids {
        let (r, c) = model.params().get(id).shape();
        *model.params_mut().get_mut(id) = rand_matrix(&mut rng, r, c);
    }
    let inputs = [
        rand_matrix(&mut rng, len, dims.text),
        rand_matrix(&mut rng, len, dims.audio),
        rand_matrix(&mut rng, len, dims.video),
    ];
    let label = [Label::Negative, Label::Neutral, Label::Positive][rng.random_range(0..3)];
    Toy { model, inputs, label }
}

impl Toy {
    pub fn loss(&self, model: &AnyModel, mode: Mode) -> mmsa::Result<(f64, Tape, mmsa::numkernel::Var)> {
        let mut tape = Tape::new();
        let [t, a, v] = &self.inputs;
        let logits = model.forward(&mut tape, &ModalInputs::new(t, a, v), mode)?;
        let loss = tape.cross_entropy(logits, self.label.class_index())?;
        Ok((tape.value(loss).get(0, 0), tape, loss))
    }

    /// Analytic gradients versus central differences (step 1e-5) in training
    /// mode with a fixed dropout mask.
    pub fn grad_check(&self) -> GradCheckReport {
        let mode = Mode::Train { dropout_seed: 3 };
        let (_, tape, loss) = self.loss(&self.model, mode).unwrap();
        let analytic = tape.backward(loss, self.model.params()).unwrap();
        check_param_gradients(
            self.model.params(),
            &analytic,
            |p| {
                let mut m = self.model.clone();
                *m.params_mut() = p.clone();
                Ok(self.loss(&m, mode)?.0)
            },
            1e-5,
        )
        .unwrap()
    }
}
