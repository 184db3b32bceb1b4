use std::io::Write;

use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;

/// Full round-trip precision, locale independent.
pub fn real(x: f64) -> String {
    // adding 0.0 turns -0.0 into 0.0
    format!("{:.16e}", x + 0.0)
}

pub trait Row {
    fn headers() -> &'static [&'static str];
    fn cells(&self) -> Vec<Vec<String>>;
}

/// Writes `rows` as CSV, or `json` (usually the rows themselves) as JSON.
pub fn emit<R: Row, J: Serialize + ?Sized>(
    rows: &[R],
    json: &J,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(R::headers())?;
            for row in rows {
                for cells in row.cells() {
                    w.write_record(&cells)?;
                }
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, json)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
