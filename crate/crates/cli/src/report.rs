//! JSON report envelope. Every command emits one of these to --out or stdout;
//! floats are serialized with 17 significant digits so reports reproduce
//! byte-for-byte across runs (timing fields aside).

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub command: String,
    pub parameters: serde_json::Value,
    pub metrics: T,
    pub version: String,
    pub wall_clock_seconds: f64,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, parameters: serde_json::Value, metrics: T, started: std::time::Instant) -> Self {
        Report {
            command: command.to_string(),
            parameters,
            metrics,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

/// serde_json formatter that prints every f64 with 17 significant digits.
struct SigDigitFormatter {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    // Everything else delegates to the pretty formatter.
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_array(&mut self.pretty, w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_array(&mut self.pretty, w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        serde_json::ser::Formatter::begin_array_value(&mut self.pretty, w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_array_value(&mut self.pretty, w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object(&mut self.pretty, w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_object(&mut self.pretty, w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object_key(&mut self.pretty, w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_object_key(&mut self.pretty, w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object_value(&mut self.pretty, w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_object_value(&mut self.pretty, w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> io::Result<String> {
    let mut buf = Vec::new();
    let fmt = SigDigitFormatter {
        pretty: serde_json::ser::PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value
        .serialize(&mut ser)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Write the report to `out` when given, stdout otherwise.
pub fn emit<T: Serialize>(report: &Report<T>, out: Option<&Path>) -> io::Result<()> {
    let text = to_json_string(report)?;
    match out {
        Some(path) => std::fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}
