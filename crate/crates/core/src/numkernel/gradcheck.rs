use crate::error::{Error, Result};
use crate::numkernel::{Gradients, Matrix, ParamSet};

/// Central-difference gradient of a scalar function, entry by entry.
pub fn finite_diff_grad<F>(f: F, x: &Matrix, step: f64) -> Result<Matrix>
where
    F: Fn(&Matrix) -> f64,
{
    let mut probe = x.clone();
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for i in 0..x.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + step;
        let up = f(&probe);
        probe.data_mut()[i] = orig - step;
        let down = f(&probe);
        probe.data_mut()[i] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!("non-finite evaluation at entry {i}")));
        }
        out.data_mut()[i] = (up - down) / (2.0 * step);
    }
    Ok(out)
}

/// Magnitude below which gradients are compared absolutely: central
/// differences at step 1e-5 carry roundoff near 1e-10 on losses of a few units.
pub const GRAD_FLOOR: f64 = 1e-5;

/// `|analytic - fd| / max(|analytic|, |fd|, GRAD_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

/// Worst disagreement found by [`check_param_gradients`].
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_param: String,
    pub worst_entry: usize,
    pub entries_checked: usize,
}

/// Compares analytic gradients against central differences of `loss` for every
/// entry of every parameter.
pub fn check_param_gradients<F>(
    params: &ParamSet,
    analytic: &Gradients,
    loss: F,
    step: f64,
) -> Result<GradCheckReport>
where
    F: Fn(&ParamSet) -> Result<f64>,
{
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_param: String::new(),
        worst_entry: 0,
        entries_checked: 0,
    };
    let mut probe = params.clone();
    for id in params.ids() {
        let n = params.get(id).len();
        for i in 0..n {
            let orig = params.get(id).data()[i];
            probe.get_mut(id).data_mut()[i] = orig + step;
            let up = loss(&probe)?;
            probe.get_mut(id).data_mut()[i] = orig - step;
            let down = loss(&probe)?;
            probe.get_mut(id).data_mut()[i] = orig;
            if !up.is_finite() || !down.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss perturbing {}[{i}]",
                    params.name(id)
                )));
            }
            let fd = (up - down) / (2.0 * step);
            let err = relative_error(analytic.get(id).data()[i], fd);
            report.entries_checked += 1;
            if err > report.max_relative_error || err.is_nan() {
                report.max_relative_error = err;
                report.worst_param = params.name(id).to_string();
                report.worst_entry = i;
            }
        }
    }
    Ok(report)
}
