use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numkernel::Matrix;
use crate::sequences::{Corpus, FeatureSequence, Modality, Segment};

/// Pooling applied to each bin of resampled rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseFn {
    #[default]
    Mean,
    Max,
}

impl CollapseFn {
    fn collapse(self, rows: &[&[f64]], out: &mut [f64]) {
        match self {
            CollapseFn::Mean => {
                out.iter_mut().for_each(|x| *x = 0.0);
                for r in rows {
                    for (o, v) in out.iter_mut().zip(*r) {
                        *o += v;
                    }
                }
                let n = rows.len() as f64;
                out.iter_mut().for_each(|x| *x /= n);
            }
            CollapseFn::Max => {
                out.iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
                for r in rows {
                    for (o, v) in out.iter_mut().zip(*r) {
                        *o = o.max(*v);
                    }
                }
            }
        }
    }
}

impl FromStr for CollapseFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(CollapseFn::Mean),
            "max" => Ok(CollapseFn::Max),
            _ => Err(Error::invalid(format!("unknown collapse function \"{s}\""))),
        }
    }
}

impl fmt::Display for CollapseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CollapseFn::Mean => "mean",
            CollapseFn::Max => "max",
        })
    }
}

/// Resamples `other` onto the pivot timeline.
///
/// Row `k` of the result collapses every `other` row whose interval midpoint
/// lies in pivot interval `k` (half-open, the last interval also takes its end
/// point). Empty bins become zero rows.
pub fn pivot_align(
    pivot: &FeatureSequence,
    other: &FeatureSequence,
    collapse: CollapseFn,
) -> Result<FeatureSequence> {
    if pivot.is_empty() {
        return Err(Error::invalid(format!("pivot {} sequence is empty", pivot.modality())));
    }
    let pts = pivot.timestamps();
    let ots = other.timestamps();
    let dim = other.dim();
    let mut out = Matrix::zeros(pts.len(), dim);
    let mut bin: Vec<&[f64]> = Vec::new();
    let mut j = 0;
    let last = pts.len() - 1;
    for (k, &(s, e)) in pts.iter().enumerate() {
        bin.clear();
        while j < ots.len() {
            let mid = 0.5 * (ots[j].0 + ots[j].1);
            if mid < s {
                j += 1;
            } else if mid < e || (k == last && mid == e) {
                bin.push(other.features().row(j));
                j += 1;
            } else {
                break;
            }
        }
        if !bin.is_empty() {
            collapse.collapse(&bin, out.row_mut(k));
        }
    }
    FeatureSequence::new(other.modality(), pts.to_vec(), out)
}

/// Pivot-aligns audio and video onto the text timeline of every segment.
pub fn align_corpus(corpus: &Corpus, collapse: CollapseFn, exec: Exec) -> Result<Corpus> {
    let aligned = exec.map(corpus.segments(), |seg| align_segment(seg, collapse));
    let segments = aligned.into_iter().collect::<Result<Vec<_>>>()?;
    Corpus::new(corpus.dims(), segments)
}

fn align_segment(seg: &Segment, collapse: CollapseFn) -> Result<Segment> {
    if seg.text.is_empty() {
        return Err(Error::invalid(format!(
            "segment {}: empty text sequence cannot serve as pivot",
            seg.id
        )));
    }
    let mut out = seg.clone();
    for m in [Modality::Audio, Modality::Video] {
        *out.sequence_mut(m) = pivot_align(&seg.text, seg.sequence(m), collapse)?;
    }
    Ok(out)
}
