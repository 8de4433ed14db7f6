use serde::Serialize;

use crate::sequences::{Corpus, Dims, Label};

/// Summary counts for a corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub total_segments: usize,
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
    /// `None` for an empty corpus.
    pub mean_duration_s: Option<f64>,
    pub dims: Dims,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let count = |l: Label| corpus.segments().iter().filter(|s| s.label == l).count();
    let n = corpus.len();
    let mean_duration_s = (n > 0)
        .then(|| corpus.segments().iter().map(|s| s.duration_s).sum::<f64>() / n as f64);
    CorpusStats {
        total_segments: n,
        positive: count(Label::Positive),
        negative: count(Label::Negative),
        neutral: count(Label::Neutral),
        mean_duration_s,
        dims: corpus.dims(),
    }
}

/// Expected shape of a labeled corpus, checked by [`CorpusStats::check_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetProfile {
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
    /// Mean segment length in seconds, compared at 0.005 s (two reported decimals).
    pub mean_duration_s: f64,
    pub text_dim: usize,
}

/// The 318 labeled subjective segments of the reference Arabic video-blog corpus.
///
/// Its "total segments" figure (540) also counts unlabeled objective segments and
/// is not reconciled here.
pub const REFERENCE_PROFILE: DatasetProfile = DatasetProfile {
    positive: 130,
    negative: 129,
    neutral: 59,
    mean_duration_s: 17.46,
    text_dim: 768,
};

impl DatasetProfile {
    pub fn subjective_segments(&self) -> usize {
        self.positive + self.negative + self.neutral
    }
}

impl CorpusStats {
    /// Lists every field that disagrees with `profile`; empty when it matches.
    pub fn check_profile(&self, profile: &DatasetProfile) -> Vec<String> {
        let mut bad = Vec::new();
        let mut cmp = |name: &str, got: usize, want: usize| {
            if got != want {
                bad.push(format!("{name}: {got} != {want}"));
            }
        };
        cmp("positive", self.positive, profile.positive);
        cmp("negative", self.negative, profile.negative);
        cmp("neutral", self.neutral, profile.neutral);
        cmp("segments", self.total_segments, profile.subjective_segments());
        cmp("text_dim", self.dims.text, profile.text_dim);
        match self.mean_duration_s {
            Some(d) if (d - profile.mean_duration_s).abs() < 0.005 => {}
            other => bad.push(format!("mean_duration_s: {other:?} != {}", profile.mean_duration_s)),
        }
        bad
    }
}
