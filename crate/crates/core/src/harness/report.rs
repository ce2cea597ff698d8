use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use super::bench::{RunReport, RunRow, SCHEMA_VERSION};
use crate::error::{Result, SolverError};

fn csv_err(e: csv::Error) -> SolverError {
    let line = e.position().map_or(0, |p| p.line() as usize + 1);
    SolverError::Parse {
        line,
        message: e.to_string(),
    }
}

/// `schema=1` on the first line, then a header row and one row per cell.
pub fn write_csv<W: Write>(rows: &[RunRow], mut w: W) -> Result<()> {
    writeln!(w, "schema={SCHEMA_VERSION}")?;
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(mut r: R) -> Result<Vec<RunRow>> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    if first.trim_end() != format!("schema={SCHEMA_VERSION}") {
        return Err(SolverError::Parse {
            line: 1,
            message: format!("expected schema={SCHEMA_VERSION}, found {:?}", first.trim_end()),
        });
    }
    let mut rest = String::new();
    r.read_to_string(&mut rest)?;
    csv::Reader::from_reader(rest.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<RunRow>, _>>()
        .map_err(csv_err)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| SolverError::InvalidParameter(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes `report.csv`, `report.json` and, when given, `hierarchy.json`.
pub fn write_outputs<H: Serialize>(report: &RunReport, hierarchy: Option<&H>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_csv(&report.rows, fs::File::create(dir.join("report.csv"))?)?;
    write_json(report, &dir.join("report.json"))?;
    if let Some(h) = hierarchy {
        write_json(h, &dir.join("hierarchy.json"))?;
    }
    Ok(())
}

pub fn read_json_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| SolverError::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}
