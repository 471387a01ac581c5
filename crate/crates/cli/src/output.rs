//! JSON envelopes and CSV writers.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use sardlab::geometry::QUADRANT_CONVENTION;
use sardlab::rational::{fmt_rational, to_f64};
use sardlab::Rational;

use crate::exit::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Exact `num/den` and its nearest decimal.
#[derive(Debug, Clone, Serialize)]
pub struct RatOut {
    pub exact: String,
    pub decimal: f64,
}

impl From<&Rational> for RatOut {
    fn from(q: &Rational) -> Self {
        Self {
            exact: fmt_rational(q),
            decimal: to_f64(q),
        }
    }
}

pub fn envelope(command: &str, body: impl Serialize) -> Result<Value, CliError> {
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "quadrant_convention": QUADRANT_CONVENTION,
        "command": command,
        "result": serde_json::to_value(body)?,
    }))
}

pub fn print_json(value: &Value) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Writes `header` and `rows` to `path`, or to stdout when `path` is `None`.
pub fn write_csv<I, R>(path: Option<&Path>, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(sink));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
