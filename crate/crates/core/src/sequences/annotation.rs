use crate::error::{Error, Result};
use crate::sequences::Label;

/// Number of annotators per segment.
pub const ANNOTATORS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub segment_id: String,
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregated {
    pub label: Label,
    /// Fraction of annotators who chose `label`.
    pub agreement: f64,
}

/// Majority vote over five annotators. Without a strict majority the segment
/// is neutral, and agreement is the neutral vote share.
pub fn aggregate_annotations(a: &AnnotationSet) -> Result<Aggregated> {
    if a.labels.len() != ANNOTATORS {
        return Err(Error::invalid(format!(
            "segment {}: expected {ANNOTATORS} annotations, got {}",
            a.segment_id,
            a.labels.len()
        )));
    }
    let count = |l: Label| a.labels.iter().filter(|&&x| x == l).count();
    let label = Label::ALL
        .into_iter()
        .find(|&l| 2 * count(l) > ANNOTATORS)
        .unwrap_or(Label::Neutral);
    Ok(Aggregated { label, agreement: count(label) as f64 / ANNOTATORS as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    fn agg(labels: &[Label]) -> Result<Aggregated> {
        aggregate_annotations(&AnnotationSet { segment_id: "s".into(), labels: labels.to_vec() })
    }

    #[test]
    fn unanimous() {
        let a = agg(&[Negative; 5]).unwrap();
        assert_eq!(a, Aggregated { label: Negative, agreement: 1.0 });
    }

    #[test]
    fn three_of_five() {
        let a = agg(&[Negative, Negative, Neutral, Positive, Negative]).unwrap();
        assert_eq!(a, Aggregated { label: Negative, agreement: 0.6 });
    }

    #[test]
    fn tie_goes_neutral() {
        let a = agg(&[Positive, Positive, Negative, Negative, Neutral]).unwrap();
        assert_eq!(a, Aggregated { label: Neutral, agreement: 0.2 });
    }

    #[test]
    fn wrong_count_rejected() {
        assert!(matches!(agg(&[Positive; 4]), Err(Error::Validation(_))));
        assert!(agg(&[Positive; 6]).is_err());
    }
}
