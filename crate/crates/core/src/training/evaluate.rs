use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fusion::{FusionModel, ModalInputs};
use crate::sequences::{Corpus, Label, Segment, Split};
use crate::training::metrics::{accuracy, argmax_label, f1, mae};

/// Anything that assigns a sentiment label to a segment.
pub trait Classifier: Sync {
    fn predict(&self, seg: &Segment) -> Result<Label>;
}

impl<T: FusionModel + ?Sized> Classifier for T {
    fn predict(&self, seg: &Segment) -> Result<Label> {
        Ok(argmax_label(self.predict_logits(&ModalInputs::from_segment(seg))?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    /// Variant label such as `"TVA-Mult"` or `"T"`.
    pub model: String,
    pub accuracy: f64,
    pub f1: f64,
    /// Averaging used for `f1`; always `"macro"`.
    pub f1_average: String,
    pub mae: f64,
    pub n: usize,
}

impl MetricsReport {
    pub fn from_predictions(model: impl Into<String>, y_true: &[Label], y_pred: &[Label]) -> Result<Self> {
        Ok(MetricsReport {
            model: model.into(),
            accuracy: accuracy(y_true, y_pred)?,
            f1: f1(y_true, y_pred)?,
            f1_average: "macro".into(),
            mae: mae(y_true, y_pred)?,
            n: y_true.len(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }

    pub fn table_header() -> String {
        format!("{:<16} {:>8} {:>8} {:>8} {:>6}", "model", "accuracy", "f1", "mae", "n")
    }

    /// Fixed-width row matching [`MetricsReport::table_header`].
    pub fn table_row(&self) -> String {
        format!(
            "{:<16} {:>8.4} {:>8.4} {:>8.4} {:>6}",
            self.model, self.accuracy, self.f1, self.mae, self.n
        )
    }
}

/// Predicts every segment of `split` and scores the predictions.
pub fn evaluate<C: Classifier + ?Sized>(
    model: &C,
    corpus: &Corpus,
    split: Split,
    label: &str,
    exec: Exec,
) -> Result<MetricsReport> {
    let segs: Vec<&Segment> = corpus.split(split).collect();
    if segs.is_empty() {
        return Err(Error::invalid(format!("{split} split is empty")));
    }
    let preds = exec.map(&segs, |s| model.predict(s)).into_iter().collect::<Result<Vec<_>>>()?;
    let truth: Vec<Label> = segs.iter().map(|s| s.label).collect();
    MetricsReport::from_predictions(label, &truth, &preds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_rows_align() {
        let a = MetricsReport { model: "TVA-Mult".into(), accuracy: 0.7, f1: 0.638, f1_average: "macro".into(), mae: 0.4, n: 45 };
        let b = MetricsReport { model: "TVA-LFLSTM".into(), f1: 0.589, ..a.clone() };
        let (ra, rb) = (a.table_row(), b.table_row());
        assert_eq!(ra.len(), rb.len());
        assert_eq!(ra.len(), MetricsReport::table_header().len());
        assert!(ra.contains("0.6380") && rb.contains("0.5890"));
        let back: MetricsReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }
}
