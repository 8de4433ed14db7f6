use crate::error::{Error, Result};
use crate::numkernel::{
    concat_cols, matmul, matmul_nt, softmax_rows, Matrix, ParamId, ParamSet, Tape, Var,
};

/// Query, key and value projections of one attention block.
///
/// `wq` maps the query-side input to `d_k`; `wk` and `wv` map the source side.
/// Self-attention uses the same input for both.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
}

impl AttentionWeights {
    pub fn identity(d: usize) -> Self {
        AttentionWeights { wq: Matrix::identity(d), wk: Matrix::identity(d), wv: Matrix::identity(d) }
    }

    /// Width of the query/key space.
    pub fn d_k(&self) -> usize {
        self.wq.cols()
    }
}

/// `(x·W^Q, x·W^K, x·W^V)`, each `l x d_k` (or `l x d_v` for the values).
pub fn project_qkv(x: &Matrix, w: &AttentionWeights) -> Result<(Matrix, Matrix, Matrix)> {
    Ok((matmul(x, &w.wq)?, matmul(x, &w.wk)?, matmul(x, &w.wv)?))
}

/// Cross-attention block: queries from `x`, keys and values from `y`.
///
/// Returns `softmax_rows(Q_x·K_yᵀ / √d_k)·V_y` with `x.rows()` rows.
pub fn cab(x: &Matrix, y: &Matrix, w: &AttentionWeights) -> Result<Matrix> {
    let (a, v) = cab_weights(x, y, w)?;
    matmul(&a, &v)
}

/// The attention matrix (`l_x x l_y`, rows sum to 1) and the source values.
pub fn cab_weights(x: &Matrix, y: &Matrix, w: &AttentionWeights) -> Result<(Matrix, Matrix)> {
    if w.wq.cols() != w.wk.cols() {
        return Err(Error::dim(format!(
            "query width {} differs from key width {}",
            w.wq.cols(),
            w.wk.cols()
        )));
    }
    let q = matmul(x, &w.wq)?;
    let k = matmul(y, &w.wk)?;
    let v = matmul(y, &w.wv)?;
    let scores = matmul_nt(&q, &k)?;
    let d = (w.d_k() as f64).sqrt();
    let scaled = scores.map(|s| s / d);
    Ok((softmax_rows(&scaled)?, v))
}

pub fn self_attention(x: &Matrix, w: &AttentionWeights) -> Result<Matrix> {
    cab(x, x, w)
}

/// Latent of a query modality: `[Z from first source ; Z from second source]`.
pub fn modality_latent(z_first: &Matrix, z_second: &Matrix) -> Result<Matrix> {
    if z_first.rows() != z_second.rows() {
        return Err(Error::dim(format!(
            "latent parts have {} and {} rows",
            z_first.rows(),
            z_second.rows()
        )));
    }
    concat_cols(&[z_first, z_second])
}

/// Parameter ids of one attention block inside a [`ParamSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct AttentionIds {
    pub wq: ParamId,
    pub wk: ParamId,
    pub wv: ParamId,
}

impl AttentionIds {
    #[cfg(test)]
    pub fn weights(&self, params: &ParamSet) -> AttentionWeights {
        AttentionWeights {
            wq: params.get(self.wq).clone(),
            wk: params.get(self.wk).clone(),
            wv: params.get(self.wv).clone(),
        }
    }

    /// Records attention of `x` over `y` on the tape; same op order as [`cab`].
    pub fn attend(&self, tape: &mut Tape, params: &ParamSet, x: Var, y: Var) -> Result<Var> {
        let wq = tape.param(params, self.wq);
        let wk = tape.param(params, self.wk);
        let wv = tape.param(params, self.wv);
        let q = tape.matmul(x, wq)?;
        let k = tape.matmul(y, wk)?;
        let v = tape.matmul(y, wv)?;
        let scores = tape.matmul_nt(q, k)?;
        let d = (params.get(self.wq).cols() as f64).sqrt();
        let scaled = tape.div_scalar(scores, d);
        let a = tape.softmax_rows(scaled)?;
        tape.matmul(a, v)
    }
}
