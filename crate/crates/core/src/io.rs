//! File formats: records CSV, sweep CSV/JSON and run manifests.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{MaddError, Result};
use crate::objective::{SweepResult, SweepRow};
use crate::record::{Group, ScoredRecord};

pub const RECORDS_HEADER: &str = "proba,group,label";
pub const SWEEP_HEADER: &str = "lambda,accuracy_loss,fairness_loss,total_loss";

/// Decimal rendering with 17 significant digits, which round-trips any f64.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.16}", x);
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (16 - exponent).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // Rounding can carry into a new leading digit (e.g. 0.099.. -> 0.100..).
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if digits > 17 && decimals > 0 {
        format!("{:.*}", decimals - 1, x)
    } else {
        s
    }
}

pub fn write_records<W: Write>(w: W, records: &[ScoredRecord]) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        let label = match r.label {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        writeln!(w, "{},{},{}", format_sig17(r.proba()), r.group.as_u8(), label)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    proba: String,
    group: String,
    #[serde(default)]
    label: Option<String>,
}

/// Reads `proba,group[,label]`. A missing label column or an empty label
/// field yields `None`.
pub fn read_records<R: Read>(r: R) -> Result<Vec<ScoredRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    for required in ["proba", "group"] {
        if !headers.iter().any(|h| h == required) {
            return Err(MaddError::Parse(format!("records file lacks a {required:?} column")));
        }
    }
    let mut out = Vec::new();
    for (line, row) in rdr.deserialize::<RawRecord>().enumerate() {
        let row = row?;
        let ctx = |what: &str| MaddError::Parse(format!("row {}: invalid {what}", line + 1));
        let proba: f64 = row.proba.parse().map_err(|_| ctx("proba"))?;
        let group = Group::from_u8(row.group.parse().map_err(|_| ctx("group"))?)?;
        let label = match row.label.as_deref() {
            None | Some("") => None,
            Some("1") => Some(true),
            Some("0") => Some(false),
            Some(_) => return Err(ctx("label")),
        };
        out.push(ScoredRecord::new(proba, group, label)?);
    }
    Ok(out)
}

pub fn read_records_file(path: &Path) -> Result<Vec<ScoredRecord>> {
    read_records(File::open(path)?)
}

pub fn write_records_file(path: &Path, records: &[ScoredRecord]) -> Result<()> {
    ensure_parent(path)?;
    write_records(File::create(path)?, records)
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            format_sig17(r.lambda),
            format_sig17(r.accuracy_loss),
            format_sig17(r.fairness_loss),
            format_sig17(r.total_loss)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfigEcho {
    pub theta: f64,
    pub threshold: f64,
    pub m: usize,
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub lambda_star: f64,
    pub min_total_loss: f64,
    pub config: SweepConfigEcho,
    pub rows: Vec<SweepRow>,
}

impl From<&SweepResult> for SweepReport {
    fn from(s: &SweepResult) -> Self {
        Self {
            lambda_star: s.lambda_star,
            min_total_loss: s.min_total_loss,
            config: SweepConfigEcho {
                theta: s.config.theta,
                threshold: s.config.threshold,
                m: s.config.m,
                grid_size: s.config.lambda_grid.len(),
            },
            rows: s.rows.clone(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// `out.csv` -> `out.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub g0: usize,
    pub g1: usize,
}

impl GroupCounts {
    pub fn of(records: &[ScoredRecord]) -> Self {
        let g0 = records.iter().filter(|r| r.group == Group::G0).count();
        Self { g0, g1: records.len() - g0 }
    }
}

/// Written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub rows: GroupCounts,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub version: String,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, started_unix: f64) -> Self {
        Self {
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            rows: GroupCounts::default(),
            started_unix,
            finished_unix: started_unix,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn finish(mut self, path: &Path) -> Result<()> {
        self.finished_unix = unix_now();
        write_json(path, &self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig17_examples() {
        assert_eq!(format_sig17(0.0), "0.0000000000000000");
        assert_eq!(format_sig17(1.0), "1.0000000000000000");
        assert_eq!(format_sig17(0.5), "0.50000000000000000");
        assert_eq!(format_sig17(0.1), "0.10000000000000001");
        assert_eq!(format_sig17(0.00123), "0.0012300000000000000");
    }

    #[test]
    fn records_schema_is_exact() {
        let recs = vec![
            ScoredRecord::new(0.25, Group::G0, Some(true)).unwrap(),
            ScoredRecord::new(1.0, Group::G1, None).unwrap(),
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "proba,group,label\n0.25000000000000000,0,1\n1.0000000000000000,1,\n");
        assert_eq!(read_records(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn label_column_is_optional() {
        let recs = read_records("proba,group\n0.3,1\n".as_bytes()).unwrap();
        assert_eq!(recs[0].label, None);
        assert!(read_records("p,group\n0.3,1\n".as_bytes()).is_err());
        assert!(matches!(read_records("proba,group\n0.3,2\n".as_bytes()), Err(MaddError::Parse(_))));
        assert!(matches!(read_records("proba,group\n1.3,0\n".as_bytes()), Err(MaddError::InvalidProbability(_))));
    }

    proptest! {
        #[test]
        fn sig17_round_trips(x in 0.0f64..=1.0) {
            let s = format_sig17(x);
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
            prop_assert!(!s.contains('e'));
            let sig = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
            prop_assert!(x == 0.0 || sig == 17, "{} has {} significant digits", s, sig);
        }
    }
}
