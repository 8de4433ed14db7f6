//! Corpus file format: one UTF-8 JSON document.
//!
//! ```text
//! {
//!   "dims": {"text": 16, "audio": 12, "video": 10},
//!   "segments": [
//!     {
//!       "id": "seg00000",
//!       "label": -1,
//!       "duration_s": 2.5,
//!       "split": "train",
//!       "text": {"timestamps": [[0.0, 0.4], ...], "features": [[...], ...]},
//!       "audio": {...},
//!       "video": {...}
//!     }
//!   ]
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, one feature row per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::sequences::{Corpus, Dims, FeatureSequence, Label, Modality, Segment, Split};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    dims: Dims,
    segments: Vec<SegmentFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentFile {
    id: String,
    label: i64,
    duration_s: f64,
    split: Split,
    text: SequenceFile,
    audio: SequenceFile,
    video: SequenceFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    timestamps: Vec<[f64; 2]>,
    features: Vec<Vec<f64>>,
}

impl SequenceFile {
    fn from_sequence(seq: &FeatureSequence) -> Self {
        SequenceFile {
            timestamps: seq.timestamps().iter().map(|&(s, e)| [s, e]).collect(),
            features: seq.features().iter_rows().map(<[f64]>::to_vec).collect(),
        }
    }

    fn into_sequence(self, id: &str, m: Modality, dim: usize) -> Result<FeatureSequence> {
        let features = if self.features.is_empty() {
            Matrix::empty(dim)
        } else {
            Matrix::from_rows(&self.features)
                .map_err(|e| Error::invalid(format!("segment {id}: {m} features: {e}")))?
        };
        let timestamps = self.timestamps.into_iter().map(|[s, e]| (s, e)).collect();
        FeatureSequence::new(m, timestamps, features)
            .map_err(|e| Error::invalid(format!("segment {id}: {e}")))
    }
}

/// Parses and fully validates a corpus document.
pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let file: CorpusFile = serde_json::from_str(text)?;
    let dims = file.dims;
    let mut segments = Vec::with_capacity(file.segments.len());
    for s in file.segments {
        let label =
            Label::from_value(s.label).map_err(|e| Error::invalid(format!("segment {}: {e}", s.id)))?;
        let text = s.text.into_sequence(&s.id, Modality::Text, dims.text)?;
        let audio = s.audio.into_sequence(&s.id, Modality::Audio, dims.audio)?;
        let video = s.video.into_sequence(&s.id, Modality::Video, dims.video)?;
        segments.push(Segment {
            id: s.id,
            label,
            duration_s: s.duration_s,
            split: s.split,
            text,
            audio,
            video,
        });
    }
    Corpus::new(dims, segments)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_corpus(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Renders a corpus document.
pub fn render_corpus(corpus: &Corpus) -> Result<String> {
    let file = CorpusFile {
        dims: corpus.dims(),
        segments: corpus
            .segments()
            .iter()
            .map(|s| SegmentFile {
                id: s.id.clone(),
                label: s.label.value() as i64,
                duration_s: s.duration_s,
                split: s.split,
                text: SequenceFile::from_sequence(&s.text),
                audio: SequenceFile::from_sequence(&s.audio),
                video: SequenceFile::from_sequence(&s.video),
            })
            .collect(),
    };
    let value = serde_json::to_value(&file)?;
    let mut out = String::new();
    write_value(&value, 0, &mut out)?;
    out.push('\n');
    Ok(out)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let text = render_corpus(corpus)?;
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Pretty-prints objects one key per line and keeps numeric rows on one line.
pub(crate) fn write_value(v: &Value, indent: usize, out: &mut String) -> Result<()> {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            let n = map.len();
            for (i, (k, val)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k)?);
                out.push_str(": ");
                write_value(val, indent + 1, out)?;
                if i + 1 < n {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(items) if !items.is_empty() && !items.iter().all(is_scalar) => {
            out.push_str("[\n");
            let n = items.len();
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out)?;
                if i + 1 < n {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&serde_json::to_string(item)?);
            }
            out.push(']');
        }
        other => out.push_str(&serde_json::to_string(other)?),
    }
    Ok(())
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}
