//! CSV and JSON tables.
//!
//! CSV carries one header row and one line per record, floats in `{:.16e}`
//! (17 significant digits) so the file alone reproduces every bit. JSON
//! holds the same records next to a metadata block.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cuspwave::analysis::{ConvergenceRecord, ReferenceSummary};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }
}

pub fn float_cell(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(float_cell).unwrap_or_default()
}

/// A record that flattens into one CSV line.
pub trait TableRow: Serialize {
    fn header() -> &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

impl TableRow for ConvergenceRecord {
    fn header() -> &'static [&'static str] {
        &[
            "M",
            "E_M",
            "E_ref",
            "raw_error",
            "predicted_error",
            "corrected_error",
            "psi_at_nuclei",
            "residual_coupling",
            "tail_fit",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            float_cell(self.e_m),
            float_cell(self.e_ref),
            float_cell(self.raw_error),
            float_cell(self.predicted_error),
            float_cell(self.corrected_error),
            // one column, nuclei separated by ';'
            self.psi_at_nuclei
                .iter()
                .map(|&v| float_cell(v))
                .collect::<Vec<_>>()
                .join(";"),
            opt_cell(self.residual_coupling),
            opt_cell(self.tail_fit),
        ]
    }
}

/// `(M, D_M, S_M)` plus the cross-term prediction of `D_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationEntry {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "D_M")]
    pub d: f64,
    #[serde(rename = "S_M")]
    pub s: f64,
    #[serde(rename = "D_pred")]
    pub d_pred: f64,
}

impl TableRow for CancellationEntry {
    fn header() -> &'static [&'static str] {
        &["M", "D_M", "S_M", "D_pred"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            float_cell(self.d),
            float_cell(self.s),
            float_cell(self.d_pred),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyEntry {
    #[serde(rename = "M")]
    pub m: u32,
    pub raw_error: f64,
    pub predicted_error: f64,
    pub corrected_error: f64,
    /// `raw_error / |corrected_error|`.
    pub gain: f64,
}

impl TableRow for EfficiencyEntry {
    fn header() -> &'static [&'static str] {
        &[
            "M",
            "raw_error",
            "predicted_error",
            "corrected_error",
            "gain",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            float_cell(self.raw_error),
            float_cell(self.predicted_error),
            float_cell(self.corrected_error),
            float_cell(self.gain),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEntry {
    #[serde(rename = "M")]
    pub m: u32,
    pub shell_lo: f64,
    pub shell_hi: f64,
    pub residual: f64,
    /// `ψ^M(R_I)` straight from the truncated series.
    pub psi_truncated: Vec<f64>,
    /// Same with the cusp tail beyond the cutoff added back.
    pub psi_corrected: Vec<f64>,
}

impl TableRow for TailEntry {
    fn header() -> &'static [&'static str] {
        &[
            "M",
            "shell_lo",
            "shell_hi",
            "residual",
            "psi_truncated",
            "psi_corrected",
        ]
    }

    fn cells(&self) -> Vec<String> {
        let join = |v: &[f64]| {
            v.iter()
                .map(|&x| float_cell(x))
                .collect::<Vec<_>>()
                .join(";")
        };
        vec![
            self.m.to_string(),
            float_cell(self.shell_lo),
            float_cell(self.shell_hi),
            float_cell(self.residual),
            join(&self.psi_truncated),
            join(&self.psi_corrected),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsUsed {
    /// `1/3 + (5√2/2) arctan(1/√2)`.
    #[serde(rename = "A")]
    pub a: f64,
    /// `2L³/(3π³)`.
    pub spherical_prefactor: f64,
    /// `A L³/(2π⁴)`.
    pub cubic_prefactor: f64,
    pub shape: cuspwave::Shape,
    pub prefactor_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureNote {
    #[serde(rename = "M")]
    pub m: u32,
    pub error: String,
}

/// Everything needed to rerun a table from its JSON alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub experiment: String,
    pub table: String,
    pub config: ExperimentConfig,
    pub constants: ConstantsUsed,
    /// Log-log slopes keyed by the fitted column.
    pub slopes: BTreeMap<String, f64>,
    pub reference: Vec<ReferenceSummary>,
    pub failures: Vec<FailureNote>,
    /// Set when some solve failed and rows are missing.
    pub partial: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonTable<R> {
    metadata: Metadata,
    records: R,
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `records` to `path` in the given format.
pub fn emit_table<T: TableRow>(
    records: &[T],
    format: TableFormat,
    path: &Path,
    metadata: &Metadata,
) -> CliResult<()> {
    if records.is_empty() {
        return Err(CliError::Output(format!(
            "no records for {}",
            path.display()
        )));
    }
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(create(path)?);
            let csv_err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
            w.write_record(T::header()).map_err(csv_err)?;
            for r in records {
                w.write_record(r.cells()).map_err(csv_err)?;
            }
            w.flush().map_err(io_err(path))?;
        }
        TableFormat::Json => {
            let mut w = create(path)?;
            let table = JsonTable {
                metadata: metadata.clone(),
                records,
            };
            serde_json::to_writer_pretty(&mut w, &table)
                .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            w.write_all(b"\n").map_err(io_err(path))?;
            w.flush().map_err(io_err(path))?;
        }
    }
    Ok(())
}

/// Reads back a JSON table written by [`emit_table`].
pub fn read_json_table<T: DeserializeOwned>(path: &Path) -> CliResult<(Metadata, Vec<T>)> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let table: JsonTable<Vec<T>> = serde_json::from_str(&text)
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    Ok((table.metadata, table.records))
}

/// `dir/name.ext` for each requested format.
pub fn table_paths(dir: &Path, name: &str, formats: &[TableFormat]) -> Vec<(TableFormat, PathBuf)> {
    formats
        .iter()
        .map(|&f| (f, dir.join(format!("{name}.{}", f.extension()))))
        .collect()
}
