//! CSV serialization of convergence traces.
//!
//! Schema: `iteration,energy,mean_G,max_G,norm_err` for the
//! augmented-Lagrangian solver, `iteration,energy,pf_objective,max_du,
//! norm_err` for the pseudo-flow solver. Floats are printed with Rust's
//! shortest round-trip formatting, so re-reading reproduces them exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use cyclic_maxflow::ConvergenceTrace;

pub fn write_trace(path: &Path, trace: &ConvergenceTrace) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "{}", trace.column_names().join(","))?;
    for rec in &trace.records {
        let (a, b) = ConvergenceTrace::metric_values(rec);
        writeln!(
            w,
            "{},{},{},{},{}",
            rec.iteration, rec.energy, a, b, rec.norm_err
        )?;
    }
    w.flush()?;
    Ok(())
}

/// A trace CSV read back as raw columns.
pub struct TraceData {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_trace(path: &Path) -> Result<TraceData> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading trace {}", path.display()))?;
    let mut lines = text.lines();
    let header_line = match lines.next() {
        Some(l) if !l.trim().is_empty() => l,
        _ => bail!("{}: empty trace file", path.display()),
    };
    let headers: Vec<String> = header_line
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .with_context(|| format!("{}:{}: bad number", path.display(), lineno + 2))
            })
            .collect::<Result<_>>()?;
        if row.len() != headers.len() {
            bail!(
                "{}:{}: expected {} columns, got {}",
                path.display(),
                lineno + 2,
                headers.len(),
                row.len()
            );
        }
        rows.push(row);
    }
    Ok(TraceData { headers, rows })
}

/// Re-emits a trace as CSV, optionally restricted to named columns, for
/// piping into a plotting tool.
pub fn plot_data(data: &TraceData, columns: Option<&[String]>, out: &mut dyn Write) -> Result<()> {
    let selected: Vec<usize> = match columns {
        None => (0..data.headers.len()).collect(),
        Some(names) => names
            .iter()
            .map(|name| {
                data.headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| anyhow::anyhow!("no column named `{name}`"))
            })
            .collect::<Result<_>>()?,
    };
    let header: Vec<&str> = selected.iter().map(|&i| data.headers[i].as_str()).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in &data.rows {
        let cells: Vec<String> = selected.iter().map(|&i| row[i].to_string()).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
