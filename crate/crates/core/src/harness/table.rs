use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names of the CSV output, in order.
pub const CSV_HEADER: [&str; 10] = [
    "m",
    "law",
    "metric",
    "value",
    "ci_low",
    "ci_high",
    "n_reps",
    "mean_count",
    "se_count",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub m: usize,
    pub law: String,
    pub metric: String,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_reps: usize,
    pub mean_count: f64,
    pub se_count: f64,
    pub wall_ms: u64,
    /// Bootstrap replicates of `value`; kept in memory only.
    #[serde(skip)]
    pub replicates: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse<T: std::str::FromStr>(field: &str, col: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {col} value {field:?}")))
}

impl ResultTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.m.to_string(),
                r.law.clone(),
                r.metric.clone(),
                fmt_f64(r.value),
                fmt_f64(r.ci_low),
                fmt_f64(r.ci_high),
                r.n_reps.to_string(),
                fmt_f64(r.mean_count),
                fmt_f64(r.se_count),
                r.wall_ms.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != CSV_HEADER {
            return Err(Error::Config(format!("unexpected CSV header {header:?}")));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != CSV_HEADER.len() {
                return Err(Error::Config(format!("row with {} fields", rec.len())));
            }
            rows.push(ResultRow {
                m: parse(&rec[0], "m")?,
                law: rec[1].to_owned(),
                metric: rec[2].to_owned(),
                value: parse(&rec[3], "value")?,
                ci_low: parse(&rec[4], "ci_low")?,
                ci_high: parse(&rec[5], "ci_high")?,
                n_reps: parse(&rec[6], "n_reps")?,
                mean_count: parse(&rec[7], "mean_count")?,
                se_count: parse(&rec[8], "se_count")?,
                wall_ms: parse(&rec[9], "wall_ms")?,
                replicates: Vec::new(),
            });
        }
        Ok(ResultTable { rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// JSON formatter that writes every float with 17 significant digits.
struct PreciseFloats;

impl serde_json::ser::Formatter for PreciseFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as compact JSON, floats at full precision and
/// non-finite floats as `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFloats);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("json output is utf-8"))
}
