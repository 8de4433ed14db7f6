use crate::alignment::dtw::dtw_align_rows;
use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::sequences::FeatureSequence;

/// A transcript word with an acoustic prototype in the audio feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct WordPrototype {
    pub word: String,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordTiming {
    pub word: String,
    pub start_s: f64,
    pub end_s: f64,
}

/// Times each word by aligning word prototypes to audio frames with DTW.
///
/// A word spans from its first matched frame to its last. When several words
/// share one frame the frame's interval is split evenly between them in word
/// order, so timings are ordered, non-overlapping and jointly cover the
/// matched audio span.
pub fn forced_align_text_audio(
    words: &[WordPrototype],
    audio: &FeatureSequence,
) -> Result<Vec<WordTiming>> {
    if words.is_empty() {
        return Err(Error::invalid("forced alignment needs at least one word"));
    }
    if audio.is_empty() {
        return Err(Error::invalid("forced alignment needs non-empty audio"));
    }
    if let Some(w) = words.iter().find(|w| w.features.len() != audio.dim()) {
        return Err(Error::invalid(format!(
            "word \"{}\" has {} features, audio has {}",
            w.word,
            w.features.len(),
            audio.dim()
        )));
    }
    let rows: Vec<&[f64]> = words.iter().map(|w| w.features.as_slice()).collect();
    let word_matrix = Matrix::from_rows(&rows)?;
    let path = dtw_align_rows(&word_matrix, audio.features())?;

    let n_frames = audio.len();
    // contiguous word range matched to each frame
    let mut frame_words = vec![(usize::MAX, 0usize); n_frames];
    let mut word_frames = vec![(usize::MAX, 0usize); words.len()];
    for &(w, f) in &path.pairs {
        let fw = &mut frame_words[f];
        fw.0 = fw.0.min(w);
        fw.1 = fw.1.max(w);
        let wf = &mut word_frames[w];
        wf.0 = wf.0.min(f);
        wf.1 = wf.1.max(f);
    }

    let ts = audio.timestamps();
    let share = |w: usize, f: usize| -> (f64, f64) {
        let (lo, hi) = frame_words[f];
        let (s, e) = ts[f];
        let k = (hi - lo + 1) as f64;
        let r = (w - lo) as f64;
        let len = e - s;
        let end = if w == hi { e } else { s + (r + 1.0) * len / k };
        (s + r * len / k, end)
    };

    Ok(words
        .iter()
        .enumerate()
        .map(|(w, word)| {
            let (first, last) = word_frames[w];
            WordTiming { word: word.word.clone(), start_s: share(w, first).0, end_s: share(w, last).1 }
        })
        .collect())
}
