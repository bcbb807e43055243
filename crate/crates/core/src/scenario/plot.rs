//! CSV plot data. Every file has a header row even when it has no data.

use std::fs::File;
use std::path::{Path, PathBuf};

use super::report::AuditReport;
use crate::{Error, Result};

fn io(path: &Path, e: impl Into<std::io::Error>) -> Error {
    Error::Io { path: path.display().to_string(), source: e.into() }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn finish(path: &Path, mut w: csv::Writer<File>) -> Result<()> {
    w.flush().map_err(|e| io(path, e))
}

/// `m,T_m,p_m`.
pub fn write_distribution(path: &Path, times: &[f64], probabilities: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["m", "T_m", "p_m"]).map_err(|e| io(path, e))?;
    for (m, (t, p)) in times.iter().zip(probabilities).enumerate() {
        w.write_record([m.to_string(), fmt(*t), fmt(*p)]).map_err(|e| io(path, e))?;
    }
    finish(path, w)
}

/// Writes the report's distributions, trajectory and defect sweep as
/// `<scenario>_<artifact>.csv` under `dir` and returns the paths written.
pub fn emit_plotdata(report: &AuditReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    let name = |artifact: &str| dir.join(format!("{}_{artifact}.csv", report.scenario));

    for dist in &report.distributions {
        let path = name(&format!("distribution_{}", dist.label));
        write_distribution(&path, &dist.times, &dist.probabilities)?;
        written.push(path);
    }
    if report.distributions.is_empty() {
        let path = name("distribution");
        write_distribution(&path, &[], &[])?;
        written.push(path);
    }

    let path = name("trajectory");
    let mut w = writer(&path)?;
    w.write_record(["param", "q1", "p1", "T", "S"]).map_err(|e| io(&path, e))?;
    for r in &report.trajectory {
        w.write_record([fmt(r.theta), fmt(r.q), fmt(r.p), fmt(r.time), fmt(r.time_conjugate)])
            .map_err(|e| io(&path, e))?;
    }
    finish(&path, w)?;
    written.push(path);

    let path = name("defects_vs_M");
    let mut w = writer(&path)?;
    w.write_record(["M", "d", "orthogonality_defect", "idempotency_defect", "closed_form_orthogonality"])
        .map_err(|e| io(&path, e))?;
    for s in &report.sweep {
        w.write_record([
            s.size.to_string(),
            s.d.to_string(),
            fmt(s.orthogonality_defect),
            fmt(s.idempotency_defect),
            s.closed_form_orthogonality.map(fmt).unwrap_or_default(),
        ])
        .map_err(|e| io(&path, e))?;
    }
    finish(&path, w)?;
    written.push(path);
    Ok(written)
}
