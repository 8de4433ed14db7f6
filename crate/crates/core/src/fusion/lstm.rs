use crate::error::{Error, Result};
use crate::numkernel::{
    add_row, binary, concat_cols, matmul, unary, Binary, Matrix, ParamId, ParamSet, Tape, Unary,
    Var,
};

/// Weights of one LSTM layer; each gate maps `[x ; h_prev]` (`d + h` wide) to `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub w_i: Matrix,
    pub w_f: Matrix,
    pub w_o: Matrix,
    pub w_c: Matrix,
    pub b_i: Matrix,
    pub b_f: Matrix,
    pub b_o: Matrix,
    pub b_c: Matrix,
}

impl LstmWeights {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        let w = Matrix::zeros(input + hidden, hidden);
        let b = Matrix::zeros(1, hidden);
        LstmWeights {
            w_i: w.clone(),
            w_f: w.clone(),
            w_o: w.clone(),
            w_c: w,
            b_i: b.clone(),
            b_f: b.clone(),
            b_o: b.clone(),
            b_c: b,
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_i.cols()
    }

    pub fn input(&self) -> usize {
        self.w_i.rows() - self.hidden()
    }

    fn check(&self) -> Result<()> {
        let (r, h) = self.w_i.shape();
        for w in [&self.w_f, &self.w_o, &self.w_c] {
            if w.shape() != (r, h) {
                return Err(Error::dim("LSTM gate weights disagree in shape"));
            }
        }
        for b in [&self.b_i, &self.b_f, &self.b_o, &self.b_c] {
            if b.shape() != (1, h) {
                return Err(Error::dim(format!("LSTM bias must be 1x{h}, got {:?}", b.shape())));
            }
        }
        if r < h {
            return Err(Error::dim("LSTM gate weights have fewer rows than hidden units"));
        }
        Ok(())
    }
}

/// One LSTM step on row vectors; returns `(h, c)`.
pub fn lstm_cell(
    x: &Matrix,
    h_prev: &Matrix,
    c_prev: &Matrix,
    w: &LstmWeights,
) -> Result<(Matrix, Matrix)> {
    w.check()?;
    let h = w.hidden();
    if x.shape() != (1, w.input()) || h_prev.shape() != (1, h) || c_prev.shape() != (1, h) {
        return Err(Error::dim(format!(
            "LSTM cell expects x 1x{}, h and c 1x{h}; got {:?}, {:?}, {:?}",
            w.input(),
            x.shape(),
            h_prev.shape(),
            c_prev.shape()
        )));
    }
    let xh = concat_cols(&[x, h_prev])?;
    let gate = |wg: &Matrix, bg: &Matrix, f: Unary| -> Result<Matrix> {
        Ok(unary(f, &add_row(&matmul(&xh, wg)?, bg)?))
    };
    let i = gate(&w.w_i, &w.b_i, Unary::Sigmoid)?;
    let f = gate(&w.w_f, &w.b_f, Unary::Sigmoid)?;
    let o = gate(&w.w_o, &w.b_o, Unary::Sigmoid)?;
    let g = gate(&w.w_c, &w.b_c, Unary::Tanh)?;
    let c = binary(
        Binary::Add,
        &binary(Binary::Mul, &f, c_prev)?,
        &binary(Binary::Mul, &i, &g)?,
    )?;
    let h = binary(Binary::Mul, &o, &unary(Unary::Tanh, &c))?;
    Ok((h, c))
}

/// Parameter ids of one LSTM layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LstmIds {
    pub w: [ParamId; 4],
    pub b: [ParamId; 4],
}

impl LstmIds {
    #[cfg(test)]
    pub fn weights(&self, p: &ParamSet) -> LstmWeights {
        let g = |id: ParamId| p.get(id).clone();
        LstmWeights {
            w_i: g(self.w[0]),
            w_f: g(self.w[1]),
            w_o: g(self.w[2]),
            w_c: g(self.w[3]),
            b_i: g(self.b[0]),
            b_f: g(self.b[1]),
            b_o: g(self.b[2]),
            b_c: g(self.b[3]),
        }
    }

    /// Runs the layer over every row of `xs` (`l x d`); returns the `l x h` hidden states.
    pub fn run(&self, tape: &mut Tape, params: &ParamSet, xs: Var, len: usize) -> Result<Var> {
        let hidden = params.get(self.w[0]).cols();
        let w: Vec<Var> = self.w.iter().map(|&id| tape.param(params, id)).collect();
        let b: Vec<Var> = self.b.iter().map(|&id| tape.param(params, id)).collect();
        let mut h = tape.input(Matrix::zeros(1, hidden));
        let mut c = tape.input(Matrix::zeros(1, hidden));
        let mut hs = Vec::with_capacity(len);
        for t in 0..len {
            let x = tape.slice_rows(xs, t, t + 1)?;
            let xh = tape.concat_cols(&[x, h])?;
            let mut gates = [xh; 4];
            for (k, gate) in gates.iter_mut().enumerate() {
                let z = tape.matmul(xh, w[k])?;
                let z = tape.add_row(z, b[k])?;
                *gate = if k == 3 { tape.tanh(z) } else { tape.sigmoid(z) };
            }
            let [i, f, o, g] = gates;
            let fc = tape.mul(f, c)?;
            let ig = tape.mul(i, g)?;
            c = tape.add(fc, ig)?;
            let tc = tape.tanh(c);
            h = tape.mul(o, tc)?;
            hs.push(h);
        }
        tape.stack_rows(&hs)
    }
}
