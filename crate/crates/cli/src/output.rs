use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::commands::CliError;
use crate::Format;

/// Result of one subcommand in both renderings.
pub struct Output {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// False when some identity residual failed.
    pub ok: bool,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut text = serde_json::to_vec_pretty(&self.json).map_err(|e| CliError::Output(e.to_string()))?;
                text.push(b'\n');
                Ok(text)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).map_err(|e| CliError::Output(e.to_string()))?;
                for row in &self.rows {
                    w.write_record(row).map_err(|e| CliError::Output(e.to_string()))?;
                }
                w.into_inner().map_err(|e| CliError::Output(e.to_string()))
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            }),
            None => std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Output(e.to_string())),
        }
    }
}

/// `n1,n2,...` header cells.
pub fn index_header(r: usize) -> Vec<String> {
    (1..=r).map(|j| format!("n{j}")).collect()
}

pub fn index_cells(n: &mopuc::MultiIndex) -> Vec<String> {
    n.entries().iter().map(usize::to_string).collect()
}
