use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Audio,
    Video,
}

impl Modality {
    /// Canonical order t < a < v.
    pub const ALL: [Modality; 3] = [Modality::Text, Modality::Audio, Modality::Video];

    pub fn code(self) -> char {
        match self {
            Modality::Text => 't',
            Modality::Audio => 'a',
            Modality::Video => 'v',
        }
    }

    pub fn from_code(c: char) -> Option<Modality> {
        match c.to_ascii_lowercase() {
            't' => Some(Modality::Text),
            'a' => Some(Modality::Audio),
            'v' => Some(Modality::Video),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Text => "text",
            Modality::Audio => "audio",
            Modality::Video => "video",
        })
    }
}

/// Non-empty subset of modalities, iterated in canonical order.
///
/// Serializes as its lowercase code (`"tav"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ModalitySet(u8);

impl ModalitySet {
    pub const ALL: ModalitySet = ModalitySet(0b111);

    pub fn single(m: Modality) -> Self {
        ModalitySet(1 << m.index())
    }

    pub fn from_modalities(ms: &[Modality]) -> Result<Self> {
        let bits = ms.iter().fold(0u8, |b, m| b | (1 << m.index()));
        if bits == 0 {
            return Err(Error::invalid("modality set must not be empty"));
        }
        Ok(ModalitySet(bits))
    }

    pub fn contains(self, m: Modality) -> bool {
        self.0 & (1 << m.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Modality> {
        Modality::ALL.into_iter().filter(move |m| self.contains(*m))
    }

    /// Short label such as `"TVA"` or `"T"` (text, video, audio order).
    pub fn label(self) -> String {
        [Modality::Text, Modality::Video, Modality::Audio]
            .into_iter()
            .filter(|m| self.contains(*m))
            .map(|m| m.code().to_ascii_uppercase())
            .collect()
    }

    /// Lowercase code in canonical order, e.g. `"tav"`.
    pub fn code(self) -> String {
        self.iter().map(Modality::code).collect()
    }
}

impl FromStr for ModalitySet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ms = s
            .chars()
            .map(|c| {
                Modality::from_code(c)
                    .ok_or_else(|| Error::invalid(format!("unknown modality code '{c}' in \"{s}\"")))
            })
            .collect::<Result<Vec<_>>>()?;
        ModalitySet::from_modalities(&ms)
    }
}

impl From<ModalitySet> for String {
    fn from(m: ModalitySet) -> String {
        m.code()
    }
}

impl TryFrom<String> for ModalitySet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for ModalitySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// Sentiment polarity in {-1, 0, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Neutral,
    Positive,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Negative, Label::Neutral, Label::Positive];

    pub fn value(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Neutral => 0,
            Label::Positive => 1,
        }
    }

    pub fn from_value(v: i64) -> Result<Label> {
        match v {
            -1 => Ok(Label::Negative),
            0 => Ok(Label::Neutral),
            1 => Ok(Label::Positive),
            _ => Err(Error::invalid(format!("label {v} outside {{-1, 0, 1}}"))),
        }
    }

    /// Classifier index: -1 -> 0, 0 -> 1, +1 -> 2.
    pub fn class_index(self) -> usize {
        (self.value() + 1) as usize
    }

    pub fn from_class_index(i: usize) -> Result<Label> {
        Label::from_value(i as i64 - 1)
    }

    pub fn from_sign(x: f64) -> Label {
        if x > 0.0 {
            Label::Positive
        } else if x < 0.0 {
            Label::Negative
        } else {
            Label::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            _ => Err(Error::invalid(format!("unknown split \"{s}\""))),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

/// One modality's time-stamped feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    modality: Modality,
    timestamps: Vec<(f64, f64)>,
    features: Matrix,
}

impl FeatureSequence {
    pub fn new(modality: Modality, timestamps: Vec<(f64, f64)>, features: Matrix) -> Result<Self> {
        if features.rows() != timestamps.len() {
            return Err(Error::invalid(format!(
                "{modality}: {} feature rows for {} timestamps",
                features.rows(),
                timestamps.len()
            )));
        }
        if !features.is_finite() {
            return Err(Error::invalid(format!("{modality}: non-finite feature value")));
        }
        let mut prev_end = f64::NEG_INFINITY;
        for (k, &(s, e)) in timestamps.iter().enumerate() {
            if !s.is_finite() || !e.is_finite() || e <= s {
                return Err(Error::invalid(format!(
                    "{modality}: timestamp {k} [{s}, {e}] needs end > start"
                )));
            }
            if s < prev_end {
                return Err(Error::invalid(format!(
                    "{modality}: timestamp {k} starts at {s} before previous end {prev_end}"
                )));
            }
            prev_end = e;
        }
        Ok(FeatureSequence { modality, timestamps, features })
    }

    pub fn empty(modality: Modality, dim: usize) -> Self {
        FeatureSequence { modality, timestamps: Vec::new(), features: Matrix::empty(dim) }
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn timestamps(&self) -> &[(f64, f64)] {
        &self.timestamps
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn into_parts(self) -> (Modality, Vec<(f64, f64)>, Matrix) {
        (self.modality, self.timestamps, self.features)
    }
}

/// Per-modality feature widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub text: usize,
    pub audio: usize,
    pub video: usize,
}

impl Dims {
    pub fn new(text: usize, audio: usize, video: usize) -> Self {
        Dims { text, audio, video }
    }

    pub fn get(&self, m: Modality) -> usize {
        match m {
            Modality::Text => self.text,
            Modality::Audio => self.audio,
            Modality::Video => self.video,
        }
    }
}

/// A labeled multimodal segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: String,
    pub label: Label,
    pub duration_s: f64,
    pub split: Split,
    pub text: FeatureSequence,
    pub audio: FeatureSequence,
    pub video: FeatureSequence,
}

impl Segment {
    pub fn sequence(&self, m: Modality) -> &FeatureSequence {
        match m {
            Modality::Text => &self.text,
            Modality::Audio => &self.audio,
            Modality::Video => &self.video,
        }
    }

    pub fn sequence_mut(&mut self, m: Modality) -> &mut FeatureSequence {
        match m {
            Modality::Text => &mut self.text,
            Modality::Audio => &mut self.audio,
            Modality::Video => &mut self.video,
        }
    }

    /// True when all three modalities have the same number of rows.
    pub fn is_aligned(&self) -> bool {
        self.text.len() == self.audio.len() && self.audio.len() == self.video.len()
    }

    fn validate(&self, dims: &Dims) -> Result<()> {
        let id = &self.id;
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::invalid(format!(
                "segment {id}: duration_s {} must be positive",
                self.duration_s
            )));
        }
        for m in Modality::ALL {
            let seq = self.sequence(m);
            if seq.modality() != m {
                return Err(Error::invalid(format!(
                    "segment {id}: {m} slot holds a {} sequence",
                    seq.modality()
                )));
            }
            if seq.dim() != dims.get(m) {
                return Err(Error::invalid(format!(
                    "segment {id}: {m} width {} but corpus declares {}",
                    seq.dim(),
                    dims.get(m)
                )));
            }
            if let Some(&(s, e)) =
                seq.timestamps().iter().find(|&&(s, e)| s < 0.0 || e > self.duration_s)
            {
                return Err(Error::invalid(format!(
                    "segment {id}: {m} interval [{s}, {e}] outside [0, {}]",
                    self.duration_s
                )));
            }
        }
        Ok(())
    }
}

/// Labeled segments with split assignments and declared widths.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    dims: Dims,
    segments: Vec<Segment>,
}

impl Corpus {
    pub fn new(dims: Dims, segments: Vec<Segment>) -> Result<Self> {
        let mut seen = HashSet::new();
        for seg in &segments {
            if !seen.insert(seg.id.as_str()) {
                return Err(Error::invalid(format!("duplicate segment id {}", seg.id)));
            }
            seg.validate(&dims)?;
        }
        Ok(Corpus { dims, segments })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn splits(&self) -> BTreeMap<&str, Split> {
        self.segments.iter().map(|s| (s.id.as_str(), s.split)).collect()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.split == split)
    }

    /// True when every segment is aligned.
    pub fn is_aligned(&self) -> bool {
        self.segments.iter().all(Segment::is_aligned)
    }
}
