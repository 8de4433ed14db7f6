//! DTW forced alignment and pivot-based resampling onto the text timeline.

mod dtw;
mod forced;
mod pivot;

pub use dtw::{dtw_align, dtw_align_rows, euclidean, AlignmentPath};
pub use forced::{forced_align_text_audio, WordPrototype, WordTiming};
pub use pivot::{align_corpus, pivot_align, CollapseFn};
