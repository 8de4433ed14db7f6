use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::training::evaluate::MetricsReport;

/// Trimodal-versus-best-unimodal gap for one metric within one architecture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta {
    pub metric: String,
    pub tva: String,
    pub best_unimodal: String,
    /// Absolute difference in percentage points.
    pub points: f64,
    /// Difference relative to the unimodal score, in percent; absent when that score is 0.
    pub relative_percent: Option<f64>,
}

impl Delta {
    /// E.g. `+8.0 points (+15.4% relative)`.
    pub fn describe(&self) -> String {
        match self.relative_percent {
            Some(r) => format!("{:+.1} points ({:+.1}% relative)", self.points, r),
            None => format!("{:+.1} points (relative undefined)", self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<MetricsReport>,
    pub deltas: Vec<Delta>,
}

/// Splits `"TVA-Mult"` into (`"TVA"`, `"Mult"`); labels without a suffix get `""`.
fn split_label(label: &str) -> (&str, &str) {
    label.split_once('-').unwrap_or((label, ""))
}

fn is_unimodal(mods: &str) -> bool {
    matches!(mods, "T" | "A" | "V")
}

/// Builds the comparison table. For every architecture suffix that has a
/// `TVA` row and at least one unimodal row, accuracy and F1 deltas against the
/// best unimodal score are added.
pub fn compare_reports(reports: &[MetricsReport]) -> Result<Comparison> {
    if reports.is_empty() {
        return Err(Error::invalid("report needs at least one metrics file"));
    }
    let mut seen = BTreeSet::new();
    for r in reports {
        if !seen.insert(r.model.as_str()) {
            return Err(Error::invalid(format!("duplicate model label \"{}\"", r.model)));
        }
    }
    let mut suffixes: Vec<&str> = Vec::new();
    for r in reports {
        let s = split_label(&r.model).1;
        if !suffixes.contains(&s) {
            suffixes.push(s);
        }
    }
    let mut deltas = Vec::new();
    for suffix in suffixes {
        let group: Vec<&MetricsReport> = reports.iter().filter(|r| split_label(&r.model).1 == suffix).collect();
        let Some(tva) = group.iter().find(|r| split_label(&r.model).0 == "TVA") else {
            continue;
        };
        let uni: Vec<&&MetricsReport> = group.iter().filter(|r| is_unimodal(split_label(&r.model).0)).collect();
        if uni.is_empty() {
            continue;
        }
        for (metric, get) in [("accuracy", (|r: &MetricsReport| r.accuracy) as fn(&MetricsReport) -> f64), ("f1", |r| r.f1)] {
            // first maximum in input order
            let best = uni.iter().fold(uni[0], |b, r| if get(r) > get(b) { r } else { b });
            let (t, u) = (get(tva), get(best));
            deltas.push(Delta {
                metric: metric.into(),
                tva: tva.model.clone(),
                best_unimodal: best.model.clone(),
                points: (t - u) * 100.0,
                relative_percent: (u != 0.0).then(|| (t - u) / u * 100.0),
            });
        }
    }
    Ok(Comparison { rows: reports.to_vec(), deltas })
}

impl Comparison {
    /// Fixed-width table followed by one labeled footer line per delta.
    pub fn render_text(&self) -> String {
        let mut out = MetricsReport::table_header();
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.table_row());
            out.push('\n');
        }
        if !self.deltas.is_empty() {
            out.push('\n');
        }
        for d in &self.deltas {
            out.push_str(&format!(
                "{} vs best unimodal {} ({}, f1 macro): {}\n",
                d.tva,
                d.best_unimodal,
                d.metric,
                d.describe()
            ));
        }
        out
    }
}
