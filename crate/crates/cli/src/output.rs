//! Report and field files.
//!
//! Reports go to `<dir>/<id>.json` (a JSON array, rewritten on each run) and
//! `<dir>/<id>.csv` (rows appended, header written only into a new file).

use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use paralab::fields::SpaceTimeField;
use paralab::verify::{write_csv, EstimateReport};

use crate::error::CliError;
use crate::scenario::{Format, Scenario};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "PARALAB_OUT";

/// `--out`, then `$PARALAB_OUT`, then `output.dir`, then `out`.
pub fn output_dir(flag: Option<&Path>, s: &Scenario) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    PathBuf::from(s.output.dir.clone().unwrap_or_else(|| "out".into()))
}

fn io_err(e: paralab::Error) -> CliError {
    match e {
        paralab::Error::Io(e) => CliError::Io(e),
        other => CliError::Io(std::io::Error::other(other.to_string())),
    }
}

/// Writes the report files; returns the paths written.
pub fn write_reports(dir: &Path, id: &str, format: Format, reports: &[EstimateReport]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join(format!("{id}.json"));
        let text = serde_json::to_string_pretty(reports).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        fs::write(&path, text + "\n")?;
        written.push(path);
    }
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{id}.csv"));
        let fresh = fs::metadata(&path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        write_csv(reports, fresh, BufWriter::new(file)).map_err(io_err)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes the whole field (binary) and its last time level (CSV).
pub fn write_fields(dir: &Path, id: &str, u: &SpaceTimeField) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{id}.field.bin"));
    let mut w = BufWriter::new(fs::File::create(&bin)?);
    u.write_binary(&mut w).map_err(io_err)?;
    w.flush()?;
    let last = dir.join(format!("{id}.final.csv"));
    let mut w = BufWriter::new(fs::File::create(&last)?);
    u.write_slice_csv(u.grid().levels() - 1, &mut w).map_err(io_err)?;
    w.flush()?;
    Ok(vec![bin, last])
}
