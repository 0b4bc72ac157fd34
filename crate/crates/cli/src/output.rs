use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

/// 17 significant digits, enough to round-trip any f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub type CsvSink = csv::Writer<Box<dyn Write>>;

pub fn csv_sink(path: Option<&Path>) -> Result<CsvSink, CliError> {
    let inner: Box<dyn Write> = match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                CliError::Io(format!("cannot create {}: {e}", p.display()))
            })?))
        }
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(inner))
}

pub fn write_row<I, S>(sink: &mut CsvSink, fields: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    sink.write_record(fields)
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn finish(mut sink: CsvSink) -> Result<(), CliError> {
    sink.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// `dir/name.csv` -> `dir/name.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.meta.json"))
}

pub fn write_sidecar(out: &Path, meta: &Value) -> Result<(), CliError> {
    let path = sidecar_path(out);
    let text = serde_json::to_string_pretty(meta).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&path, text + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// `dir/name.csv` -> `dir/name_t<k>.csv`.
pub fn per_time_path(out: &Path, k: usize) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = out
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}_t{k}.{ext}"))
}
