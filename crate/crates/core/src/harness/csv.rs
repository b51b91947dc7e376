//! CSV output. Reals are written with 17 significant digits so every row
//! parses back to the identical `f64`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::channel::ChannelTrace;
use crate::error::{Error, Result};

pub const HEADER: &str = "scheme,sigma_psi_sq,sigma_xi_sq,distortion,rate_bits,source,seed,n_samples";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Theory,
    Simulation,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Theory => "theory",
            Source::Simulation => "simulation",
        })
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(Source::Theory),
            "simulation" => Ok(Source::Simulation),
            _ => Err(Error::InvalidArgument(format!("unknown source '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scheme: String,
    pub sigma_psi_sq: f64,
    pub sigma_xi_sq: f64,
    pub distortion: f64,
    pub rate_bits: f64,
    pub source: Source,
    pub seed: u64,
    pub n_samples: u64,
}

/// Scientific notation with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl fmt::Display for CsvRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            self.scheme,
            format_real(self.sigma_psi_sq),
            format_real(self.sigma_xi_sq),
            format_real(self.distortion),
            format_real(self.rate_bits),
            self.source,
            self.seed,
            self.n_samples
        )
    }
}

impl FromStr for CsvRow {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
        if fields.len() != 8 {
            return Err(Error::DimensionMismatch {
                expected: 8,
                got: fields.len(),
            });
        }
        let real = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number '{s}'")))
        };
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::InvalidArgument(format!("bad integer '{s}'")))
        };
        Ok(CsvRow {
            scheme: fields[0].to_string(),
            sigma_psi_sq: real(fields[1])?,
            sigma_xi_sq: real(fields[2])?,
            distortion: real(fields[3])?,
            rate_bits: real(fields[4])?,
            source: fields[5].parse()?,
            seed: int(fields[6])?,
            n_samples: int(fields[7])?,
        })
    }
}

pub fn write_rows<W: Write>(mut out: W, rows: &[CsvRow]) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[CsvRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Parses a full CSV document written by [`write_rows`].
pub fn parse_rows(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == HEADER => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "unexpected CSV header {other:?}"
            )))
        }
    }
    lines.filter(|l| !l.is_empty()).map(str::parse).collect()
}

pub fn write_trace<W: Write>(mut out: W, trace: &ChannelTrace) -> Result<()> {
    writeln!(out, "k,x,y")?;
    for (k, (x, y)) in trace.x.iter().zip(&trace.y).enumerate() {
        writeln!(out, "{k},{},{}", format_real(*x), format_real(*y))?;
    }
    out.flush()?;
    Ok(())
}
