//! Seeded synthetic corpora with a planted sentiment signal.
//!
//! Every segment has a contiguous word timeline (the text pivot) and denser
//! audio and video frame timelines covering the same duration, so downstream
//! pivot alignment has real work to do.
//!
//! * [`SynthMode::Unimodal`]: the label value is added to the first few feature
//!   columns of one modality. A sign threshold on that modality's mean recovers
//!   the label exactly when noise is zero.
//! * [`SynthMode::Crossmodal`]: two independent fair signs `s1`, `s2` and
//!   label `s1 * s2`. The query modality carries `s1` on its first columns.
//!   Each pivot word gets a balanced random key `k = ±1`; key-modality frames
//!   inside that word carry `k` on their key columns and `k * s2` on their value
//!   columns. A query attending to frames whose key matches its own sign reads
//!   `s1 * s2`; any single modality is independent of the label.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::sequences::{Corpus, Dims, FeatureSequence, Label, Modality, Segment, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthMode {
    Unimodal,
    Crossmodal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub mode: SynthMode,
    pub segments: usize,
    pub dims: Dims,
    /// Standard deviation of additive Gaussian noise on every feature.
    pub noise: f64,
    /// Magnitude of the planted signal.
    pub amplitude: f64,
    /// Number of leading columns that carry the signal (clamped to the width).
    pub signal_width: usize,
    pub words_min: usize,
    pub words_max: usize,
    pub word_duration_min_s: f64,
    pub word_duration_max_s: f64,
    pub audio_rate_hz: f64,
    pub video_rate_hz: f64,
    /// Modality carrying the label in unimodal mode.
    pub planted: Modality,
    /// Query-side modality in crossmodal mode (carries `s1`).
    pub query: Modality,
    /// Key-side modality in crossmodal mode (carries keys and `s2`).
    pub key: Modality,
    /// Relative sampling weights (negative, neutral, positive) in unimodal mode.
    pub label_weights: [f64; 3],
    /// Train and validation fractions; the test split takes the rest.
    pub train_fraction: f64,
    pub valid_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            mode: SynthMode::Crossmodal,
            segments: 300,
            dims: Dims::new(16, 12, 10),
            noise: 0.3,
            amplitude: 1.0,
            signal_width: 4,
            words_min: 4,
            words_max: 8,
            word_duration_min_s: 0.25,
            word_duration_max_s: 0.55,
            audio_rate_hz: 25.0,
            video_rate_hz: 12.5,
            planted: Modality::Text,
            query: Modality::Text,
            key: Modality::Audio,
            label_weights: [2.0, 1.0, 2.0],
            train_fraction: 0.70,
            valid_fraction: 0.15,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if self.segments == 0 {
            return bad("segment count must be at least 1".into());
        }
        for m in Modality::ALL {
            if self.dims.get(m) == 0 {
                return bad(format!("{m} dimension must be positive"));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("noise {} must be a finite non-negative number", self.noise));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return bad(format!("amplitude {} must be positive", self.amplitude));
        }
        if self.signal_width == 0 {
            return bad("signal_width must be positive".into());
        }
        if self.words_min == 0 || self.words_max < self.words_min {
            return bad(format!("word range {}..={} is empty", self.words_min, self.words_max));
        }
        if !(self.word_duration_min_s > 0.0 && self.word_duration_max_s >= self.word_duration_min_s)
        {
            return bad("word duration range must be positive and ordered".into());
        }
        if !(self.audio_rate_hz > 0.0 && self.video_rate_hz > 0.0) {
            return bad("frame rates must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.train_fraction)
            || !(0.0..=1.0).contains(&self.valid_fraction)
            || self.train_fraction + self.valid_fraction > 1.0
        {
            return bad("split fractions must lie in [0, 1] and sum to at most 1".into());
        }
        match self.mode {
            SynthMode::Unimodal => {
                if self.label_weights.iter().any(|w| w.is_nan() || *w < 0.0) || self.label_weights.iter().sum::<f64>() <= 0.0 {
                    return bad("label weights must be non-negative with a positive sum".into());
                }
            }
            SynthMode::Crossmodal => {
                if self.query == self.key {
                    return bad("crossmodal query and key modalities must differ".into());
                }
                if self.dims.get(self.key) < 2 {
                    return bad(format!("{} needs at least 2 columns for key and value", self.key));
                }
                if self.words_max < 2 {
                    return bad("crossmodal mode needs at least 2 words per segment".into());
                }
            }
        }
        Ok(())
    }

    fn key_width(&self) -> usize {
        self.signal_width.min(self.dims.get(self.key) / 2).max(1)
    }
}

/// Generates a corpus deterministically from `(config, seed)`.
pub fn synth_generate(config: &SynthConfig, seed: u64) -> Result<Corpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, config.noise).map_err(|e| Error::invalid(e.to_string()))?;

    let mut order: Vec<usize> = (0..config.segments).collect();
    order.shuffle(&mut rng);
    let n = config.segments;
    let n_train = (config.train_fraction * n as f64).round() as usize;
    let n_valid = ((config.valid_fraction * n as f64).round() as usize).min(n - n_train.min(n));
    let mut splits = vec![Split::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        splits[i] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_valid {
            Split::Valid
        } else {
            Split::Test
        };
    }

    let segments = (0..n)
        .map(|i| generate_segment(config, format!("seg{i:05}"), splits[i], &mut rng, &noise))
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(config.dims, segments)
}

fn generate_segment(
    config: &SynthConfig,
    id: String,
    split: Split,
    rng: &mut ChaCha8Rng,
    noise: &Normal<f64>,
) -> Result<Segment> {
    let n_words = rng.random_range(config.words_min..=config.words_max);
    let mut words = Vec::with_capacity(n_words);
    let mut t = 0.0;
    for _ in 0..n_words {
        let d = rng.random_range(config.word_duration_min_s..=config.word_duration_max_s);
        words.push((t, t + d));
        t += d;
    }
    let duration = t;
    let audio_ts = frame_timeline(duration, config.audio_rate_hz);
    let video_ts = frame_timeline(duration, config.video_rate_hz);
    let timeline = |m: Modality| -> &[(f64, f64)] {
        match m {
            Modality::Text => &words,
            Modality::Audio => &audio_ts,
            Modality::Video => &video_ts,
        }
    };

    let mut feats: Vec<Matrix> = Modality::ALL
        .iter()
        .map(|&m| {
            let rows = timeline(m).len();
            let dim = config.dims.get(m);
            let data = (0..rows * dim).map(|_| noise.sample(rng)).collect();
            Matrix::new(rows, dim, data)
        })
        .collect::<Result<_>>()?;

    let label = match config.mode {
        SynthMode::Unimodal => {
            let label = sample_label(&config.label_weights, rng);
            let m = config.planted;
            let width = config.signal_width.min(config.dims.get(m));
            let shift = label.value() as f64 * config.amplitude;
            let f = &mut feats[m.index()];
            for r in 0..f.rows() {
                f.row_mut(r)[..width].iter_mut().for_each(|x| *x += shift);
            }
            label
        }
        SynthMode::Crossmodal => {
            let s1 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let s2 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut keys: Vec<f64> = (0..n_words).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
            keys.shuffle(rng);

            let qm = config.query;
            let width = config.signal_width.min(config.dims.get(qm));
            let q = &mut feats[qm.index()];
            for r in 0..q.rows() {
                q.row_mut(r)[..width].iter_mut().for_each(|x| *x += s1 * config.amplitude);
            }

            let km = config.key;
            let kw = config.key_width();
            let ts = timeline(km).to_vec();
            let kf = &mut feats[km.index()];
            for (r, &(s, e)) in ts.iter().enumerate() {
                let word = word_at(&words, 0.5 * (s + e));
                let key = keys[word];
                let row = kf.row_mut(r);
                row[..kw].iter_mut().for_each(|x| *x += key * config.amplitude);
                row[kw..2 * kw].iter_mut().for_each(|x| *x += key * s2 * config.amplitude);
            }
            Label::from_sign(s1 * s2)
        }
    };

    let mut seqs = Modality::ALL.into_iter().zip(feats).map(|(m, f)| {
        FeatureSequence::new(m, timeline(m).to_vec(), f)
    });
    let text = seqs.next().expect("text")?;
    let audio = seqs.next().expect("audio")?;
    let video = seqs.next().expect("video")?;
    Ok(Segment { id, label, duration_s: duration, split, text, audio, video })
}

/// Contiguous equal-length frames covering `[0, duration]`.
fn frame_timeline(duration: f64, rate_hz: f64) -> Vec<(f64, f64)> {
    let n = ((duration * rate_hz).round() as usize).max(1);
    let step = duration / n as f64;
    (0..n)
        .map(|k| {
            let end = if k + 1 == n { duration } else { (k + 1) as f64 * step };
            (k as f64 * step, end)
        })
        .collect()
}

fn word_at(words: &[(f64, f64)], t: f64) -> usize {
    words.iter().position(|&(_, e)| t < e).unwrap_or(words.len() - 1)
}

fn sample_label(weights: &[f64; 3], rng: &mut ChaCha8Rng) -> Label {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random_range(0.0..total);
    for (l, &w) in Label::ALL.iter().zip(weights) {
        if u < w {
            return *l;
        }
        u -= w;
    }
    Label::Positive
}
