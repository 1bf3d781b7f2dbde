//! CSV/JSON file formats.
//!
//! Every CSV written here starts with `#` comment lines carrying the tool
//! version, config hash and master seed; readers skip those lines. Floats
//! use Rust's shortest round-trip formatting so reruns are byte-identical.

use std::io::{self, BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::EmpiricalCdf;
use crate::intervals::IntervalSeries;
use crate::volatility::VolatilityPoint;

pub const TOOL_NAME: &str = "retscale";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("expected header `{expected}`, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Provenance written at the top of every output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputHeader {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl OutputHeader {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self { tool: TOOL_NAME.into(), version: TOOL_VERSION.into(), config_hash: config_hash.into(), seed }
    }

    pub fn write_comment<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# {} {}", self.tool, self.version)?;
        writeln!(w, "# config_hash {}", self.config_hash)?;
        writeln!(w, "# seed {}", self.seed)
    }
}

/// Writes the comment header, a column header and rows of preformatted
/// fields.
pub fn write_table<W: Write>(
    w: &mut W,
    header: &OutputHeader,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    header.write_comment(w)?;
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn write_volatility_csv<W: Write>(w: &mut W, header: &OutputHeader, points: &[VolatilityPoint]) -> io::Result<()> {
    write_table(
        w,
        header,
        &["day", "minute", "v"],
        points.iter().map(|p| vec![p.day.to_string(), p.minute.to_string(), fmt(p.v)]),
    )
}

/// Reads `day,minute,v` rows as written by [`write_volatility_csv`].
pub fn read_volatility_csv<R: Read>(r: R) -> Result<Vec<VolatilityPoint>, FormatError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    expect_header(&mut reader, &["day", "minute", "v"])?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| FormatError::Malformed { line, reason: format!("bad {what}") };
        if record.len() != 3 {
            return Err(bad("field count"));
        }
        let day = record[0].parse().map_err(|_| bad("day"))?;
        let minute = record[1].parse().map_err(|_| bad("minute"))?;
        let v: f64 = record[2].parse().map_err(|_| bad("v"))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad("v"));
        }
        out.push(VolatilityPoint { day, minute, v });
    }
    Ok(out)
}

fn expect_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), FormatError> {
    let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if found != expected {
        return Err(FormatError::BadHeader { expected: expected.join(","), found: found.join(",") });
    }
    Ok(())
}

/// First non-comment line of a CSV stream, used to tell input kinds apart.
pub fn sniff_header<R: BufRead>(r: R) -> io::Result<Option<String>> {
    for line in r.lines() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            return Ok(Some(trimmed.replace(' ', "")));
        }
    }
    Ok(None)
}

pub fn write_profile_csv<W: Write>(w: &mut W, header: &OutputHeader, profile: &[f64]) -> io::Result<()> {
    write_table(
        w,
        header,
        &["minute", "profile"],
        profile.iter().enumerate().map(|(i, p)| vec![i.to_string(), fmt(*p)]),
    )
}

/// One interval series per row: `q,mean_tau,n,tau_1,...,tau_n`. An empty
/// series has an empty `mean_tau` field and `n = 0`.
pub fn write_intervals_csv<W: Write>(w: &mut W, header: &OutputHeader, series: &[IntervalSeries]) -> io::Result<()> {
    header.write_comment(w)?;
    writeln!(w, "q,mean_tau,n,taus...")?;
    for s in series {
        write!(w, "{},{},{}", fmt(s.q), s.mean_tau.map(fmt).unwrap_or_default(), s.taus.len())?;
        for t in &s.taus {
            write!(w, ",{t}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_intervals_csv<R: Read>(r: R) -> Result<Vec<IntervalSeries>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .has_headers(true)
        .from_reader(r);
    expect_header(&mut reader, &["q", "mean_tau", "n", "taus..."])?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| FormatError::Malformed { line, reason: format!("bad {what}") };
        if record.len() < 3 {
            return Err(bad("field count"));
        }
        let q: f64 = record[0].parse().map_err(|_| bad("q"))?;
        let n: usize = record[2].parse().map_err(|_| bad("n"))?;
        if record.len() != 3 + n {
            return Err(bad("interval count"));
        }
        let taus = record.iter().skip(3).map(|t| t.parse::<u64>()).collect::<Result<Vec<_>, _>>().map_err(|_| bad("tau"))?;
        out.push(IntervalSeries::from_taus(q, taus));
    }
    Ok(out)
}

/// JSON form of an interval series, same fields as the CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub q: f64,
    pub mean_tau: Option<f64>,
    pub n: usize,
    pub taus: Vec<u64>,
}

impl From<&IntervalSeries> for IntervalRecord {
    fn from(s: &IntervalSeries) -> Self {
        Self { q: s.q, mean_tau: s.mean_tau, n: s.taus.len(), taus: s.taus.clone() }
    }
}

impl From<IntervalRecord> for IntervalSeries {
    fn from(r: IntervalRecord) -> Self {
        IntervalSeries::from_taus(r.q, r.taus)
    }
}

pub fn write_survival_csv<W: Write>(w: &mut W, header: &OutputHeader, cdf: &EmpiricalCdf) -> io::Result<()> {
    write_table(
        w,
        header,
        &["x", "survival"],
        cdf.xs.iter().zip(&cdf.survival).map(|(x, s)| vec![fmt(*x), fmt(*s)]),
    )
}

/// Serializes `value` with a top-level `meta` object holding the header.
pub fn write_json<W: Write, T: Serialize>(w: &mut W, header: &OutputHeader, value: &T) -> Result<(), FormatError> {
    #[derive(Serialize)]
    struct Wrapped<'a, T> {
        meta: &'a OutputHeader,
        data: &'a T,
    }
    serde_json::to_writer_pretty(&mut *w, &Wrapped { meta: header, data: value })?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> OutputHeader {
        OutputHeader::new("abc", 7)
    }

    #[test]
    fn interval_csv_round_trip() {
        let series = vec![
            IntervalSeries::from_taus(2.0, vec![3, 2, 10]),
            IntervalSeries::from_taus(6.5, vec![]),
        ];
        let mut buf = Vec::new();
        write_intervals_csv(&mut buf, &header(), &series).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# retscale "));
        assert!(text.contains("\n2,5,3,3,2,10\n"));
        let back = read_intervals_csv(buf.as_slice()).unwrap();
        assert_eq!(back, series);
    }

    #[test]
    fn interval_csv_rejects_wrong_count() {
        let text = "q,mean_tau,n,taus...\n2,2.5,3,3,2\n";
        assert!(matches!(read_intervals_csv(text.as_bytes()), Err(FormatError::Malformed { line: 2, .. })));
    }

    #[test]
    fn interval_json_round_trip() {
        let s = IntervalSeries::from_taus(2.0, vec![1, 3]);
        let json = serde_json::to_string(&IntervalRecord::from(&s)).unwrap();
        assert_eq!(json, r#"{"q":2.0,"mean_tau":2.0,"n":2,"taus":[1,3]}"#);
        let back: IntervalRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(IntervalSeries::from(back), s);
    }

    #[test]
    fn volatility_csv_round_trip() {
        let pts = vec![
            VolatilityPoint { day: 0, minute: 0, v: 0.0 },
            VolatilityPoint { day: 0, minute: 1, v: 1.2345678901234567 },
            VolatilityPoint { day: 1, minute: 389, v: 3.5 },
        ];
        let mut buf = Vec::new();
        write_volatility_csv(&mut buf, &header(), &pts).unwrap();
        assert_eq!(read_volatility_csv(buf.as_slice()).unwrap(), pts);
        assert_eq!(sniff_header(buf.as_slice()).unwrap().as_deref(), Some("day,minute,v"));
    }
}
