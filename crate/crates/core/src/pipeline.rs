//! File-level pipeline steps behind the `mmsa` subcommands. Every step writes
//! its outputs plus a `<output>.manifest.json` recording the configuration,
//! seed, input/output hashes and wall time.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::alignment::{align_corpus, CollapseFn};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fusion::{load_checkpoint, save_checkpoint, FusionModel};
use crate::sequences::{load_corpus, save_corpus, synth_generate, Split, SynthConfig};
use crate::training::{compare_reports, evaluate, train, Comparison, MetricsReport, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

impl Artifact {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        Ok(Artifact { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(&bytes)) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    pub elapsed_ms: u128,
    /// Command-specific results such as the final training loss.
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub summary: serde_json::Value,
}

/// `<path>.manifest.json`
pub fn manifest_path(output: &Path) -> PathBuf {
    suffixed(output, ".manifest.json")
}

/// `<path>.loss.json`
pub fn loss_history_path(checkpoint: &Path) -> PathBuf {
    suffixed(checkpoint, ".loss.json")
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct Recorder {
    command: &'static str,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<Artifact>,
    start: Instant,
}

impl Recorder {
    fn new(command: &'static str, config: &impl Serialize, seed: Option<u64>, inputs: &[&Path]) -> Result<Self> {
        Ok(Recorder {
            command,
            config: serde_json::to_value(config)?,
            seed,
            inputs: inputs.iter().map(|p| Artifact::of(p)).collect::<Result<_>>()?,
            start: Instant::now(),
        })
    }

    fn finish(self, outputs: &[&Path], summary: serde_json::Value) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: self.config,
            seed: self.seed,
            inputs: self.inputs,
            outputs: outputs.iter().map(|p| Artifact::of(p)).collect::<Result<_>>()?,
            elapsed_ms: self.start.elapsed().as_millis(),
            summary,
        };
        let primary = outputs.first().ok_or_else(|| Error::State("command produced no output".into()))?;
        fs::write(manifest_path(primary), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(manifest)
    }
}

/// Generates a synthetic corpus into `out`.
pub fn run_synth(config: &SynthConfig, seed: u64, out: &Path) -> Result<RunManifest> {
    let rec = Recorder::new("synth", config, Some(seed), &[])?;
    let corpus = synth_generate(config, seed)?;
    save_corpus(&corpus, out)?;
    rec.finish(&[out], serde_json::Value::Null)
}

#[derive(Serialize)]
struct AlignEcho {
    collapse: CollapseFn,
}

/// Pivot-aligns every segment of `input` onto its text timeline.
pub fn run_align(input: &Path, collapse: CollapseFn, out: &Path, exec: Exec) -> Result<RunManifest> {
    let rec = Recorder::new("align", &AlignEcho { collapse }, None, &[input])?;
    let corpus = load_corpus(input)?;
    let aligned = align_corpus(&corpus, collapse, exec)?;
    save_corpus(&aligned, out)?;
    rec.finish(&[out], serde_json::Value::Null)
}

/// Trains a model on the train split; writes the checkpoint to `out` and the
/// per-epoch loss history to `<out>.loss.json`.
pub fn run_train(corpus_path: &Path, config: &TrainConfig, out: &Path, exec: Exec) -> Result<RunManifest> {
    let rec = Recorder::new("train", config, Some(config.seed), &[corpus_path])?;
    let corpus = load_corpus(corpus_path)?;
    let outcome = train(&corpus, config, exec)?;
    save_checkpoint(&outcome.model, out)?;
    let loss_path = loss_history_path(out);
    fs::write(&loss_path, serde_json::to_string(&outcome.loss_history)? + "\n")?;
    let final_loss = *outcome.loss_history.last().expect("epochs >= 1");
    rec.finish(&[out, &loss_path], serde_json::json!({ "final_train_loss": final_loss }))
}

/// Default report label for a model, e.g. `"TVA-Mult"`.
pub fn default_label(model: &dyn FusionModel) -> String {
    format!("{}-{}", model.modalities().label(), model.spec().arch_name())
}

#[derive(Serialize)]
struct EvalEcho<'a> {
    split: Split,
    label: &'a str,
}

/// Evaluates a checkpoint on one split and writes the metrics report to `out`.
pub fn run_eval(
    checkpoint: &Path,
    corpus_path: &Path,
    split: Split,
    label: Option<&str>,
    out: &Path,
    exec: Exec,
) -> Result<(MetricsReport, RunManifest)> {
    let model = load_checkpoint(checkpoint)?;
    let label = label.map(str::to_string).unwrap_or_else(|| default_label(&model));
    let rec = Recorder::new("eval", &EvalEcho { split, label: &label }, None, &[checkpoint, corpus_path])?;
    let corpus = load_corpus(corpus_path)?;
    if model.dims() != corpus.dims() {
        return Err(Error::dim(format!(
            "checkpoint expects dims {:?}, corpus has {:?}",
            model.dims(),
            corpus.dims()
        )));
    }
    let report = evaluate(&model, &corpus, split, &label, exec)?;
    fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
    let manifest = rec.finish(&[out], serde_json::Value::Null)?;
    Ok((report, manifest))
}

pub fn read_report(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Combines metrics reports into a comparison; writes JSON to `out` and the
/// text table to `<out>.txt`.
pub fn run_report(inputs: &[PathBuf], out: &Path) -> Result<(Comparison, RunManifest)> {
    let paths: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let rec = Recorder::new("report", &serde_json::Value::Null, None, &paths)?;
    let reports = paths.iter().map(|p| read_report(p)).collect::<Result<Vec<_>>>()?;
    let cmp = compare_reports(&reports)?;
    fs::write(out, serde_json::to_string_pretty(&cmp)? + "\n")?;
    let text_path = suffixed(out, ".txt");
    fs::write(&text_path, cmp.render_text())?;
    let manifest = rec.finish(&[out, &text_path], serde_json::Value::Null)?;
    Ok((cmp, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_paths() {
        assert_eq!(manifest_path(Path::new("a/c.json")), PathBuf::from("a/c.json.manifest.json"));
        assert_eq!(loss_history_path(Path::new("m.ckpt")), PathBuf::from("m.ckpt.loss.json"));
    }

    #[test]
    fn artifact_hash_is_sha256() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        fs::write(&p, b"abc").unwrap();
        assert_eq!(
            Artifact::of(&p).unwrap().sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
