//! Plain-text data files: `#` metadata lines followed by comma-separated
//! rows. Values are written with 17 significant digits so a read-back
//! reproduces them bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use optomech_core::{NoiseSpectrum, SpectrumUnits};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SPECTRUM_COLUMNS: &str = "frequency_hz,value";

/// SHA-256 of the canonical parameter text, hex encoded.
pub fn params_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFile {
    pub label: String,
    pub command: String,
    pub units: String,
    pub params_hash: String,
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectrumFile {
    pub fn from_spectrum(label: &str, command: &str, hash: &str, s: &NoiseSpectrum) -> Self {
        Self {
            label: label.to_string(),
            command: command.to_string(),
            units: s.units.label().to_string(),
            params_hash: hash.to_string(),
            freqs: s.freqs.clone(),
            values: s.values.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# label: {}", self.label);
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# units: {}", self.units);
        let _ = writeln!(s, "# params_hash: {}", self.params_hash);
        let _ = writeln!(s, "# columns: {SPECTRUM_COLUMNS}");
        for (f, v) in self.freqs.iter().zip(&self.values) {
            let _ = writeln!(s, "{},{}", format_value(*f), format_value(*v));
        }
        s
    }

    /// Parses a spectrum file. Metadata lines are optional so plain
    /// two-column CSV (e.g. measured ancillary noise) is accepted.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut out = SpectrumFile {
            label: String::new(),
            command: String::new(),
            units: String::new(),
            params_hash: String::new(),
            freqs: Vec::new(),
            values: Vec::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            if let Some(meta) = row.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once(':') {
                    let v = v.trim().to_string();
                    match k.trim() {
                        "label" => out.label = v,
                        "command" => out.command = v,
                        "units" => out.units = v,
                        "params_hash" => out.params_hash = v,
                        _ => {}
                    }
                }
                continue;
            }
            if row.eq_ignore_ascii_case(SPECTRUM_COLUMNS) {
                continue;
            }
            let (f, v) = row
                .split_once(',')
                .ok_or_else(|| err(line, format!("expected `frequency_hz,value`, got `{row}`")))?;
            let parse = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
            let (Some(f), Some(v)) = (parse(f), parse(v)) else {
                return Err(err(line, format!("non-numeric row `{row}`")));
            };
            if out.freqs.last().is_some_and(|&last| f <= last) {
                return Err(err(line, format!("frequency {f} is not above the previous row")));
            }
            out.freqs.push(f);
            out.values.push(v);
        }
        if out.freqs.is_empty() {
            return Err(err(1, "no data rows".into()));
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| CliError::io(path, e))
    }

    pub fn to_spectrum(&self, units: SpectrumUnits) -> Result<NoiseSpectrum> {
        Ok(NoiseSpectrum::new(self.freqs.clone(), self.values.clone(), units)?)
    }
}

/// Multi-column report table with the same header conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct TableFile {
    pub label: String,
    pub command: String,
    pub params_hash: String,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TableFile {
    pub fn new(label: &str, command: &str, hash: &str, columns: &[&str]) -> Self {
        Self {
            label: label.to_string(),
            command: command.to_string(),
            params_hash: hash.to_string(),
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# label: {}", self.label);
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# params_hash: {}", self.params_hash);
        for n in &self.notes {
            let _ = writeln!(s, "# note: {n}");
        }
        let _ = writeln!(s, "# columns: {}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| CliError::io(path, e))
    }
}
