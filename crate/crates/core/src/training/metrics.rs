use crate::error::{Error, Result};
use crate::numkernel::softmax_xent;
use crate::sequences::Label;

fn check_pair(y_true: &[Label], y_pred: &[Label]) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::invalid("metrics need at least one prediction"));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "{} labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    Ok(())
}

/// Exact-match fraction.
pub fn accuracy(y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// Mean absolute difference on the {-1, 0, +1} value scale.
pub fn mae(y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let total: i64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a.value() as i64 - b.value() as i64).abs())
        .sum();
    Ok(total as f64 / y_true.len() as f64)
}

/// `m[true][pred]` counts over class indices.
pub fn confusion_matrix(y_true: &[Label], y_pred: &[Label]) -> Result<[[usize; 3]; 3]> {
    check_pair(y_true, y_pred)?;
    let mut m = [[0usize; 3]; 3];
    for (t, p) in y_true.iter().zip(y_pred) {
        m[t.class_index()][p.class_index()] += 1;
    }
    Ok(m)
}

/// Macro-averaged F1 over the classes present in `y_true`.
///
/// A class with no true positives scores 0.
pub fn f1(y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
    let m = confusion_matrix(y_true, y_pred)?;
    let mut sum = 0.0;
    let mut present = 0;
    for c in 0..3 {
        let support: usize = m[c].iter().sum();
        if support == 0 {
            continue;
        }
        present += 1;
        let tp = m[c][c];
        if tp == 0 {
            continue;
        }
        let predicted: usize = (0..3).map(|r| m[r][c]).sum();
        let precision = tp as f64 / predicted as f64;
        let recall = tp as f64 / support as f64;
        sum += 2.0 * precision * recall / (precision + recall);
    }
    Ok(sum / present as f64)
}

/// Softmax cross-entropy of `logits` against `label` and its gradient
/// (`softmax - one_hot`).
pub fn cross_entropy_loss(logits: [f64; 3], label: Label) -> (f64, [f64; 3]) {
    let class = label.class_index();
    let (loss, probs) = softmax_xent(&logits, class);
    let mut grad = [probs[0], probs[1], probs[2]];
    grad[class] -= 1.0;
    (loss, grad)
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax_label(logits: [f64; 3]) -> Label {
    let mut best = 0;
    for k in 1..3 {
        if logits[k] > logits[best] {
            best = k;
        }
    }
    Label::from_class_index(best).expect("index < 3")
}
