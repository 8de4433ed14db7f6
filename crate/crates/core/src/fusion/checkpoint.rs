use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fusion::model::{AnyModel, FusionModel, ModelSpec};
use crate::numkernel::Matrix;
use crate::sequences::Dims;

const MAGIC: &str = "mmsa-checkpoint 1";

/// Renders a model as a versioned text checkpoint.
///
/// ```text
/// mmsa-checkpoint 1
/// spec {"kind":"mult",...}
/// dims 16 12 10
/// param in.t.wq 16 32
/// <one line of space-separated values per row>
/// ...
/// end
/// ```
///
/// Values use the shortest representation that parses back to the same `f64`.
pub fn render_checkpoint(model: &dyn FusionModel) -> Result<String> {
    let mut out = String::new();
    let spec = serde_json::to_string(&model.spec())?;
    let d = model.dims();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "spec {spec}").unwrap();
    writeln!(out, "dims {} {} {}", d.text, d.audio, d.video).unwrap();
    for (_, name, m) in model.params().iter() {
        if !m.is_finite() {
            return Err(Error::Numeric(format!("parameter {name} is not finite")));
        }
        writeln!(out, "param {name} {} {}", m.rows(), m.cols()).unwrap();
        for row in m.iter_rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
    }
    out.push_str("end\n");
    Ok(out)
}

pub fn save_checkpoint(model: &dyn FusionModel, path: &Path) -> Result<()> {
    fs::write(path, render_checkpoint(model)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<AnyModel> {
    parse_checkpoint(&fs::read_to_string(path)?)
}

/// Parses a checkpoint; every parameter of the declared architecture must be
/// present exactly once with its expected shape.
pub fn parse_checkpoint(text: &str) -> Result<AnyModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse(format!("checkpoint ends before {what}")))
    };
    let (_, magic) = next("header")?;
    if magic != MAGIC {
        return Err(Error::Parse(format!("not a checkpoint (expected \"{MAGIC}\", found \"{magic}\")")));
    }
    let (n, spec_line) = next("spec")?;
    let spec: ModelSpec = serde_json::from_str(
        spec_line.strip_prefix("spec ").ok_or_else(|| bad(n, "expected spec line"))?,
    )
    .map_err(|e| bad(n, &e.to_string()))?;
    let (n, dims_line) = next("dims")?;
    let d: Vec<usize> = dims_line
        .strip_prefix("dims ")
        .ok_or_else(|| bad(n, "expected dims line"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(n, "bad dimension")))
        .collect::<Result<_>>()?;
    if d.len() != 3 {
        return Err(bad(n, "dims needs three values"));
    }
    let mut model = spec.build(Dims::new(d[0], d[1], d[2]), 0)?;
    let mut seen = vec![false; model.params().len()];
    loop {
        let (n, line) = next("end")?;
        if line == "end" {
            break;
        }
        let head: Vec<&str> = line.split_whitespace().collect();
        let [kw, name, rows, cols] = head[..] else {
            return Err(bad(n, "expected \"param <name> <rows> <cols>\""));
        };
        if kw != "param" {
            return Err(bad(n, "expected \"param <name> <rows> <cols>\""));
        }
        let rows: usize = rows.parse().map_err(|_| bad(n, "bad row count"))?;
        let cols: usize = cols.parse().map_err(|_| bad(n, "bad column count"))?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, row) = next("parameter rows")?;
            let before = data.len();
            for t in row.split_whitespace() {
                let v: f64 = t.parse().map_err(|_| bad(n, &format!("bad number \"{t}\"")))?;
                if !v.is_finite() {
                    return Err(bad(n, "non-finite parameter value"));
                }
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(bad(n, &format!("row of {name} has {} values, expected {cols}", data.len() - before)));
            }
        }
        let id = model
            .params()
            .id_of(name)
            .ok_or_else(|| bad(n, &format!("unknown parameter {name}")))?;
        if std::mem::replace(&mut seen[id.index()], true) {
            return Err(bad(n, &format!("duplicate parameter {name}")));
        }
        model
            .params_mut()
            .assign(name, Matrix::new(rows, cols, data)?)
            .map_err(|e| bad(n, &e.to_string()))?;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        let name = model.params().iter().nth(i).map(|(_, n, _)| n.to_string()).unwrap_or_default();
        return Err(Error::Parse(format!("checkpoint is missing parameter {name}")));
    }
    Ok(model)
}

fn bad(line: usize, msg: &str) -> Error {
    Error::Parse(format!("checkpoint line {line}: {msg}"))
}
