//! Reverse-mode gradient tape over [`Matrix`] operations.
//!
//! A forward pass records every operation with the values its backward rule
//! needs. [`Tape::backward`] replays the records in reverse and returns one
//! gradient matrix per parameter of the owning [`ParamSet`]; parameters the
//! forward pass never touched get zeros.

use crate::error::{Error, Result};
use crate::numkernel::matrix::{self as mk, Matrix, NormStats, Unary};
use crate::numkernel::{Gradients, ParamId, ParamSet};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Input,
    Param(ParamId),
    MatMul(Var, Var),
    MatMulNt(Var, Var),
    Add(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    DivScalar(Var, f64),
    MulConst(Var, Matrix),
    Unary(Unary, Var),
    Softmax(Var),
    LayerNorm { x: Var, gain: Var, stats: NormStats, bias: Var },
    ConcatCols(Vec<Var>),
    SliceCols(Var, usize),
    SliceRows(Var, usize),
    StackRows(Vec<Var>),
    MeanRows(Var),
    Sum(Var),
    CrossEntropy { logits: Var, class: usize, probs: Vec<f64> },
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Matrix,
}

/// Single-writer record of one forward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    param_vars: Vec<(ParamId, Var)>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, value: Matrix) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    /// Records a constant input (no gradient flows to it).
    pub fn input(&mut self, value: Matrix) -> Var {
        self.push(Op::Input, value)
    }

    /// Records a parameter leaf. Registering the same id twice returns the same handle.
    pub fn param(&mut self, params: &ParamSet, id: ParamId) -> Var {
        if let Some(&(_, v)) = self.param_vars.iter().find(|(p, _)| *p == id) {
            return v;
        }
        let v = self.push(Op::Param(id), params.get(id).clone());
        self.param_vars.push((id, v));
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = mk::matmul(self.value(a), self.value(b))?;
        Ok(self.push(Op::MatMul(a, b), value))
    }

    /// `a · bᵀ`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = mk::matmul_nt(self.value(a), self.value(b))?;
        Ok(self.push(Op::MatMulNt(a, b), value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = mk::binary(mk::Binary::Add, self.value(a), self.value(b))?;
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = mk::binary(mk::Binary::Mul, self.value(a), self.value(b))?;
        Ok(self.push(Op::Mul(a, b), value))
    }

    /// Adds a 1 x n row to every row of `a`.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Result<Var> {
        let value = mk::add_row(self.value(a), self.value(bias))?;
        Ok(self.push(Op::AddRow(a, bias), value))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a).scale(k);
        self.push(Op::Scale(a, k), value)
    }

    /// Divides every entry by `d`.
    pub fn div_scalar(&mut self, a: Var, d: f64) -> Var {
        let value = self.value(a).map(|x| x / d);
        self.push(Op::DivScalar(a, d), value)
    }

    /// Pointwise product with a constant matrix (dropout masks).
    pub fn mul_const(&mut self, a: Var, mask: Matrix) -> Result<Var> {
        let value = mk::binary(mk::Binary::Mul, self.value(a), &mask)?;
        Ok(self.push(Op::MulConst(a, mask), value))
    }

    pub fn unary(&mut self, op: Unary, a: Var) -> Var {
        let value = mk::unary(op, self.value(a));
        self.push(Op::Unary(op, a), value)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(Unary::Sigmoid, a)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(Unary::Tanh, a)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(Unary::Relu, a)
    }

    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let value = mk::softmax_rows(self.value(a))?;
        Ok(self.push(Op::Softmax(a), value))
    }

    /// Per-row layer norm; `gain` and `bias` are 1 x n.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, eps: f64) -> Result<Var> {
        let g = self.value(gain);
        let b = self.value(bias);
        if g.rows() != 1 || b.rows() != 1 {
            return Err(Error::dim("layer_norm gain/bias must be single rows"));
        }
        let (value, stats) = mk::layer_norm_with_stats(self.value(x), g.data(), b.data(), eps)?;
        Ok(self.push(Op::LayerNorm { x, gain, stats, bias }, value))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let mats: Vec<&Matrix> = parts.iter().map(|&p| self.value(p)).collect();
        let value = mk::concat_cols(&mats)?;
        Ok(self.push(Op::ConcatCols(parts.to_vec()), value))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let value = self.value(a).slice_cols(start, end)?;
        Ok(self.push(Op::SliceCols(a, start), value))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let value = self.value(a).slice_rows(start, end)?;
        Ok(self.push(Op::SliceRows(a, start), value))
    }

    pub fn stack_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let mats: Vec<&Matrix> = parts.iter().map(|&p| self.value(p)).collect();
        let value = mk::stack_rows(&mats)?;
        Ok(self.push(Op::StackRows(parts.to_vec()), value))
    }

    /// Temporal mean pooling to a single row.
    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).mean_rows()?;
        Ok(self.push(Op::MeanRows(a), value))
    }

    /// Sum of all entries as a 1 x 1 value.
    pub fn sum(&mut self, a: Var) -> Var {
        let value = Matrix::filled(1, 1, self.value(a).sum());
        self.push(Op::Sum(a), value)
    }

    /// Softmax cross-entropy of a 1 x k logit row against `class`.
    pub fn cross_entropy(&mut self, logits: Var, class: usize) -> Result<Var> {
        let l = self.value(logits);
        if l.rows() != 1 || class >= l.cols() {
            return Err(Error::dim(format!(
                "cross_entropy on {}x{} logits with class {class}",
                l.rows(),
                l.cols()
            )));
        }
        let (loss, probs) = softmax_xent(l.data(), class);
        Ok(self.push(Op::CrossEntropy { logits, class, probs }, Matrix::filled(1, 1, loss)))
    }

    /// Back-propagates from a scalar (1 x 1) output.
    pub fn backward(&self, loss: Var, params: &ParamSet) -> Result<Gradients> {
        if self.nodes.is_empty() {
            return Err(Error::State("backward called before any forward pass".into()));
        }
        let shape = self.value(loss).shape();
        if shape != (1, 1) {
            return Err(Error::State(format!(
                "backward needs a scalar loss, got {}x{}",
                shape.0, shape.1
            )));
        }
        self.backward_with_seed(loss, Matrix::filled(1, 1, 1.0), params)
    }

    /// Back-propagates an arbitrary upstream gradient from `out`.
    pub fn backward_with_seed(&self, out: Var, seed: Matrix, params: &ParamSet) -> Result<Gradients> {
        if out.0 >= self.nodes.len() {
            return Err(Error::State("output handle does not belong to this tape".into()));
        }
        self.value(out).ensure_same_shape(&seed, "backward seed")?;
        let mut grads: Vec<Option<Matrix>> = Vec::with_capacity(self.nodes.len());
        grads.resize_with(self.nodes.len(), || None);
        grads[out.0] = Some(seed);
        let mut result = params.zero_gradients();

        for idx in (0..=out.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {}
                Op::Param(id) => {
                    if id.0 >= result.len() {
                        return Err(Error::State(format!(
                            "tape parameter #{} is not in the supplied parameter set",
                            id.0
                        )));
                    }
                    result.accumulate(*id, &g)?;
                }
                Op::MatMul(a, b) => {
                    let ga = mk::matmul_nt(&g, self.value(*b))?;
                    let gb = mk::matmul_tn(self.value(*a), &g)?;
                    acc(&mut grads, *a, ga)?;
                    acc(&mut grads, *b, gb)?;
                }
                Op::MatMulNt(a, b) => {
                    // out = a·bᵀ: da = g·b, db = gᵀ·a
                    let ga = mk::matmul(&g, self.value(*b))?;
                    let gb = mk::matmul_tn(&g, self.value(*a))?;
                    acc(&mut grads, *a, ga)?;
                    acc(&mut grads, *b, gb)?;
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone())?;
                    acc(&mut grads, *b, g)?;
                }
                Op::Mul(a, b) => {
                    let ga = mk::binary(mk::Binary::Mul, &g, self.value(*b))?;
                    let gb = mk::binary(mk::Binary::Mul, &g, self.value(*a))?;
                    acc(&mut grads, *a, ga)?;
                    acc(&mut grads, *b, gb)?;
                }
                Op::AddRow(a, bias) => {
                    let gb = sum_rows(&g);
                    acc(&mut grads, *a, g)?;
                    acc(&mut grads, *bias, gb)?;
                }
                Op::Scale(a, k) => acc(&mut grads, *a, g.scale(*k))?,
                Op::DivScalar(a, d) => acc(&mut grads, *a, g.map(|x| x / d))?,
                Op::MulConst(a, mask) => {
                    acc(&mut grads, *a, mk::binary(mk::Binary::Mul, &g, mask)?)?
                }
                Op::Unary(op, a) => {
                    let y = &node.value;
                    let x = self.value(*a);
                    let mut ga = g;
                    for ((gv, &yv), &xv) in ga.data_mut().iter_mut().zip(y.data()).zip(x.data()) {
                        *gv *= match op {
                            Unary::Sigmoid => yv * (1.0 - yv),
                            Unary::Tanh => 1.0 - yv * yv,
                            Unary::Relu => {
                                if xv > 0.0 {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                        };
                    }
                    acc(&mut grads, *a, ga)?;
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let mut ga = g;
                    for r in 0..y.rows() {
                        let yr = y.row(r);
                        let gr = ga.row_mut(r);
                        let dot: f64 = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                        for (gv, &yv) in gr.iter_mut().zip(yr) {
                            *gv = yv * (*gv - dot);
                        }
                    }
                    acc(&mut grads, *a, ga)?;
                }
                Op::LayerNorm { x, gain, stats, bias } => {
                    let gain_v = self.value(*gain).data();
                    let xhat = &stats.normalized;
                    let n = xhat.cols() as f64;
                    let mut gx = Matrix::zeros(xhat.rows(), xhat.cols());
                    let mut ggain = Matrix::zeros(1, xhat.cols());
                    let gbias = sum_rows(&g);
                    for r in 0..xhat.rows() {
                        let gr = g.row(r);
                        let xr = xhat.row(r);
                        let dxhat: Vec<f64> = gr.iter().zip(gain_v).map(|(a, b)| a * b).collect();
                        let s1: f64 = dxhat.iter().sum();
                        let s2: f64 = dxhat.iter().zip(xr).map(|(a, b)| a * b).sum();
                        let inv = stats.inv_std[r];
                        for (c, o) in gx.row_mut(r).iter_mut().enumerate() {
                            *o = inv / n * (n * dxhat[c] - s1 - xr[c] * s2);
                        }
                        for (c, o) in ggain.row_mut(0).iter_mut().enumerate() {
                            *o += gr[c] * xr[c];
                        }
                    }
                    acc(&mut grads, *x, gx)?;
                    acc(&mut grads, *gain, ggain)?;
                    acc(&mut grads, *bias, gbias)?;
                }
                Op::ConcatCols(parts) => {
                    let mut start = 0;
                    for &p in parts {
                        let w = self.value(p).cols();
                        acc(&mut grads, p, g.slice_cols(start, start + w)?)?;
                        start += w;
                    }
                }
                Op::SliceCols(a, start) => {
                    let src = self.value(*a);
                    let mut ga = Matrix::zeros(src.rows(), src.cols());
                    for r in 0..g.rows() {
                        ga.row_mut(r)[*start..*start + g.cols()].copy_from_slice(g.row(r));
                    }
                    acc(&mut grads, *a, ga)?;
                }
                Op::SliceRows(a, start) => {
                    let src = self.value(*a);
                    let mut ga = Matrix::zeros(src.rows(), src.cols());
                    let w = src.cols();
                    ga.data_mut()[start * w..(start + g.rows()) * w].copy_from_slice(g.data());
                    acc(&mut grads, *a, ga)?;
                }
                Op::StackRows(parts) => {
                    let mut start = 0;
                    for &p in parts {
                        let h = self.value(p).rows();
                        acc(&mut grads, p, g.slice_rows(start, start + h)?)?;
                        start += h;
                    }
                }
                Op::MeanRows(a) => {
                    let src = self.value(*a);
                    let k = 1.0 / src.rows() as f64;
                    let mut ga = Matrix::zeros(src.rows(), src.cols());
                    for r in 0..src.rows() {
                        for (o, gv) in ga.row_mut(r).iter_mut().zip(g.row(0)) {
                            *o = gv * k;
                        }
                    }
                    acc(&mut grads, *a, ga)?;
                }
                Op::Sum(a) => {
                    let src = self.value(*a);
                    acc(&mut grads, *a, Matrix::filled(src.rows(), src.cols(), g.get(0, 0)))?;
                }
                Op::CrossEntropy { logits, class, probs } => {
                    let up = g.get(0, 0);
                    let mut gl: Vec<f64> = probs.iter().map(|p| p * up).collect();
                    gl[*class] -= up;
                    acc(&mut grads, *logits, Matrix::row_vector(&gl))?;
                }
            }
        }
        Ok(result)
    }
}

fn acc(grads: &mut [Option<Matrix>], v: Var, g: Matrix) -> Result<()> {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => {
            *slot = Some(g);
            Ok(())
        }
    }
}

fn sum_rows(g: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(1, g.cols());
    for r in g.iter_rows() {
        for (o, v) in out.row_mut(0).iter_mut().zip(r) {
            *o += v;
        }
    }
    out
}

/// Returns (loss, softmax probabilities) using log-sum-exp.
pub(crate) fn softmax_xent(logits: &[f64], class: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|l| (l - max).exp()).sum();
    let lse = max + sum.ln();
    let probs = logits.iter().map(|l| (l - lse).exp()).collect();
    (lse - logits[class], probs)
}
