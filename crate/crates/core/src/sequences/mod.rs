//! Multimodal corpus data model, file format, statistics, annotation
//! aggregation and the synthetic corpus generator.

mod annotation;
mod io;
mod stats;
mod synth;
mod types;

pub use annotation::{aggregate_annotations, Aggregated, AnnotationSet, ANNOTATORS};
pub use io::{load_corpus, parse_corpus, render_corpus, save_corpus};
pub use stats::{corpus_stats, CorpusStats, DatasetProfile, REFERENCE_PROFILE};
pub use synth::{synth_generate, SynthConfig, SynthMode};
pub use types::{Corpus, Dims, FeatureSequence, Label, Modality, ModalitySet, Segment, Split};

