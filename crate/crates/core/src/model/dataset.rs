//! Flat tabular course data: ingestion, encoding and the train/validation/test
//! split.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MaddError, Result};
use crate::record::Group;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "levels", rename_all = "snake_case")]
pub enum ColumnKind {
    Binary,
    /// Levels from lowest to highest.
    Ordinal(Vec<String>),
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: &str, kind: ColumnKind) -> Self {
        Self { name: name.to_string(), kind }
    }
}

fn levels(v: &[&str]) -> ColumnKind {
    ColumnKind::Ordinal(v.iter().map(|s| s.to_string()).collect())
}

/// The course-level attributes: gender, age band, disability, highest
/// education, deprivation band, previous attempts, studied credits and click
/// count.
pub fn default_schema() -> Vec<Column> {
    vec![
        Column::new("gender", ColumnKind::Binary),
        Column::new("age", levels(&["0-35", "35-55", "55<="])),
        Column::new("disability", ColumnKind::Binary),
        Column::new(
            "highest_education",
            levels(&[
                "No Formal quals",
                "Lower Than A Level",
                "A Level or Equivalent",
                "HE Qualification",
                "Post Graduate Qualification",
            ]),
        ),
        Column::new(
            "poverty",
            levels(&[
                "0-10%", "10-20%", "20-30%", "30-40%", "40-50%", "50-60%", "60-70%", "70-80%", "80-90%", "90-100%",
            ]),
        ),
        Column::new("num_of_prev_attempts", ColumnKind::Numerical),
        Column::new("studied_credits", ColumnKind::Numerical),
        Column::new("sum_click", ColumnKind::Numerical),
    ]
}

/// Header aliases used by the raw course tables.
fn alias(name: &str) -> Option<&'static str> {
    match name {
        "age" => Some("age_band"),
        "poverty" => Some("imd_band"),
        _ => None,
    }
}

fn is_missing(v: &str) -> bool {
    let v = v.trim();
    v.is_empty() || v == "?" || v.eq_ignore_ascii_case("na") || v.eq_ignore_ascii_case("nan")
}

/// Parses a pass/fail style label.
pub fn parse_label(v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "pass" | "distinction" => Ok(true),
        "0" | "false" | "fail" | "withdrawn" => Ok(false),
        other => Err(MaddError::EncodingError(format!("unrecognized label value {other:?}"))),
    }
}

/// Raw (string-valued) rows with a binary label and a designated sensitive
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub schema: Vec<Column>,
    pub sensitive: String,
    /// One entry per row: feature values in schema order.
    pub rows: Vec<Vec<String>>,
    /// Sensitive attribute value per row.
    pub sensitive_values: Vec<String>,
    pub labels: Vec<bool>,
    /// Rows discarded at ingestion because a value was missing.
    pub dropped: usize,
}

impl TabularDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Reads a headered CSV. Columns are matched by name (or alias); extra
    /// columns are ignored. Rows with a missing value in any used column are
    /// dropped and counted.
    pub fn from_csv<R: Read>(reader: R, schema: Vec<Column>, label: &str, sensitive: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .or_else(|| alias(name).and_then(|a| headers.iter().position(|h| h == a)))
                .ok_or_else(|| MaddError::Parse(format!("missing column {name:?}")))
        };
        let feature_idx = schema.iter().map(|c| find(&c.name)).collect::<Result<Vec<_>>>()?;
        let label_idx = find(label)?;
        let sensitive_idx = find(sensitive)?;

        let mut ds = TabularDataset {
            schema,
            sensitive: sensitive.to_string(),
            rows: Vec::new(),
            sensitive_values: Vec::new(),
            labels: Vec::new(),
            dropped: 0,
        };
        for rec in rdr.records() {
            let rec = rec?;
            let get = |i: usize| rec.get(i).unwrap_or("");
            let used = feature_idx.iter().chain([&label_idx, &sensitive_idx]);
            if used.into_iter().any(|&i| is_missing(get(i))) {
                ds.dropped += 1;
                continue;
            }
            ds.rows.push(feature_idx.iter().map(|&i| get(i).to_string()).collect());
            ds.sensitive_values.push(get(sensitive_idx).to_string());
            ds.labels.push(parse_label(get(label_idx))?);
        }
        if ds.rows.is_empty() {
            return Err(MaddError::EmptyPopulation);
        }
        Ok(ds)
    }

    /// Group of each row: the sensitive column's values sorted
    /// lexicographically map to `G0` and `G1`.
    pub fn groups(&self) -> Result<(Vec<Group>, [String; 2])> {
        let map = binary_levels(&self.sensitive, self.sensitive_values.iter().map(String::as_str))?;
        let groups = self.sensitive_values.iter().map(|v| if *v == map[0] { Group::G0 } else { Group::G1 }).collect();
        Ok((groups, map))
    }

    fn subset(&self, idx: &[usize]) -> TabularDataset {
        TabularDataset {
            schema: self.schema.clone(),
            sensitive: self.sensitive.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            sensitive_values: idx.iter().map(|&i| self.sensitive_values[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            dropped: 0,
        }
    }
}

/// Sorted distinct values of a column that must have exactly two of them.
fn binary_levels<'a>(name: &str, values: impl Iterator<Item = &'a str>) -> Result<[String; 2]> {
    let distinct: BTreeSet<&str> = values.collect();
    let v: Vec<&str> = distinct.into_iter().collect();
    match v.as_slice() {
        [a, b] => Ok([a.to_string(), b.to_string()]),
        _ => Err(MaddError::EncodingError(format!(
            "column {name:?} must have exactly 2 distinct values, found {}",
            v.len()
        ))),
    }
}

/// Dense row-major design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(MaddError::InvalidConfig("ragged design matrix".into()));
        }
        Ok(Self { n_rows: rows.len(), n_cols, data: rows.concat() })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "snake_case")]
pub enum FeatureEncoding {
    /// `levels[0] -> 0`, `levels[1] -> 1`.
    Binary {
        levels: Vec<String>,
    },
    /// Level index; values that are not a known level but parse as numbers
    /// are taken as ranks directly.
    Ordinal {
        levels: Vec<String>,
    },
    Standardized {
        mean: f64,
        sd: f64,
    },
}

/// Column encodings. Binary levels come from the whole dataset; numerical
/// statistics from the rows passed to [`Encoder::fit`] only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub features: Vec<(String, FeatureEncoding)>,
}

/// Floor on the variance before standardizing.
const VARIANCE_FLOOR: f64 = 1e-12;

impl Encoder {
    /// `full` supplies category levels, `train` the standardization statistics.
    pub fn fit(full: &TabularDataset, train: &TabularDataset) -> Result<Self> {
        let mut features = Vec::with_capacity(full.schema.len());
        for (j, col) in full.schema.iter().enumerate() {
            let enc = match &col.kind {
                ColumnKind::Binary => {
                    let distinct: BTreeSet<&str> = full.rows.iter().map(|r| r[j].as_str()).collect();
                    if distinct.len() > 2 {
                        return Err(MaddError::EncodingError(format!(
                            "binary column {:?} has {} distinct values",
                            col.name,
                            distinct.len()
                        )));
                    }
                    FeatureEncoding::Binary { levels: distinct.into_iter().map(String::from).collect() }
                }
                ColumnKind::Ordinal(levels) => FeatureEncoding::Ordinal { levels: levels.clone() },
                ColumnKind::Numerical => {
                    let xs = train.rows.iter().map(|r| parse_number(&col.name, &r[j])).collect::<Result<Vec<_>>>()?;
                    if xs.is_empty() {
                        return Err(MaddError::EmptyPopulation);
                    }
                    let n = xs.len() as f64;
                    let mean = xs.iter().sum::<f64>() / n;
                    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                    FeatureEncoding::Standardized { mean, sd: var.max(VARIANCE_FLOOR).sqrt() }
                }
            };
            features.push((col.name.clone(), enc));
        }
        Ok(Self { features })
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn encode_value(&self, j: usize, raw: &str) -> Result<f64> {
        let (name, enc) = &self.features[j];
        match enc {
            FeatureEncoding::Binary { levels } => levels
                .iter()
                .position(|l| l == raw)
                .map(|i| i as f64)
                .ok_or_else(|| MaddError::EncodingError(format!("unknown category {raw:?} in column {name:?}"))),
            FeatureEncoding::Ordinal { levels } => {
                if let Some(i) = levels.iter().position(|l| l == raw) {
                    return Ok(i as f64);
                }
                // Raw deprivation bands sometimes drop the percent sign.
                if let Some(i) = levels.iter().position(|l| l.trim_end_matches('%') == raw.trim_end_matches('%')) {
                    return Ok(i as f64);
                }
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| MaddError::EncodingError(format!("unknown category {raw:?} in column {name:?}")))
            }
            FeatureEncoding::Standardized { mean, sd } => {
                let x = parse_number(name, raw)?;
                Ok((x - mean) / sd)
            }
        }
    }

    pub fn transform(&self, ds: &TabularDataset) -> Result<Matrix> {
        let rows = ds
            .rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| self.encode_value(j, v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut m = Matrix::from_rows(&rows)?;
        if rows.is_empty() {
            m.n_cols = self.features.len();
        }
        Ok(m)
    }
}

fn parse_number(col: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| MaddError::EncodingError(format!("non-numeric value {raw:?} in column {col:?}")))
}

pub const DEFAULT_RATIOS: [f64; 3] = [0.70, 0.15, 0.15];

/// Partition sizes by largest remainder: each size is within one row of its
/// exact share, and ties in the remainder favour train, then validation.
pub fn split_sizes(n: usize, ratios: [f64; 3]) -> Result<[usize; 3]> {
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(MaddError::InvalidRatios(ratios));
    }
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, e) in sizes.iter_mut().zip(&exact) {
        *s = e.floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut remaining = n.saturating_sub(sizes.iter().sum());
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        sizes[i] += 1;
        remaining -= 1;
    }
    Ok(sizes)
}

/// Seeded shuffle, then contiguous train/validation/test partition.
pub fn split(
    ds: &TabularDataset,
    ratios: [f64; 3],
    seed: u64,
) -> Result<(TabularDataset, TabularDataset, TabularDataset)> {
    if ds.is_empty() {
        return Err(MaddError::EmptyPopulation);
    }
    let [a, b, _] = split_sizes(ds.len(), ratios)?;
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((ds.subset(&idx[..a]), ds.subset(&idx[a..a + b]), ds.subset(&idx[a + b..])))
}

/// Counts per distinct value, for manifests.
pub fn value_counts<'a>(values: impl Iterator<Item = &'a str>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for v in values {
        *out.entry(v.to_string()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> TabularDataset {
        TabularDataset {
            schema: vec![
                Column::new("sex", ColumnKind::Binary),
                Column::new("band", ColumnKind::Ordinal(vec!["low".into(), "mid".into(), "high".into()])),
                Column::new("x", ColumnKind::Numerical),
                Column::new("c", ColumnKind::Numerical),
            ],
            sensitive: "sex".into(),
            rows: (0..n)
                .map(|i| {
                    vec![
                        if i % 2 == 0 { "M" } else { "F" }.to_string(),
                        ["low", "mid", "high"][i % 3].to_string(),
                        i.to_string(),
                        "7".to_string(),
                    ]
                })
                .collect(),
            sensitive_values: (0..n).map(|i| if i % 2 == 0 { "M" } else { "F" }.to_string()).collect(),
            labels: (0..n).map(|i| i % 4 == 0).collect(),
            dropped: 0,
        }
    }

    #[test]
    fn split_size_examples() {
        assert_eq!(split_sizes(100, DEFAULT_RATIOS).unwrap(), [70, 15, 15]);
        assert_eq!(split_sizes(101, DEFAULT_RATIOS).unwrap(), [71, 15, 15]);
        assert!(matches!(split_sizes(10, [0.5, 0.2, 0.2]), Err(MaddError::InvalidRatios(_))));
        for n in 1..500 {
            let s = split_sizes(n, DEFAULT_RATIOS).unwrap();
            assert_eq!(s.iter().sum::<usize>(), n);
            for (size, r) in s.iter().zip(DEFAULT_RATIOS) {
                assert!((*size as f64 - r * n as f64).abs() <= 1.0, "n={n} {s:?}");
            }
        }
    }

    #[test]
    fn split_is_seeded_and_partitions() {
        let ds = toy(101);
        let (a, b, c) = split(&ds, DEFAULT_RATIOS, 5).unwrap();
        let (a2, b2, c2) = split(&ds, DEFAULT_RATIOS, 5).unwrap();
        assert_eq!((&a, &b, &c), (&a2, &b2, &c2));
        assert_eq!((a.len(), b.len(), c.len()), (71, 15, 15));
        let mut xs: Vec<String> = [&a, &b, &c].iter().flat_map(|d| d.rows.iter().map(|r| r[2].clone())).collect();
        xs.sort();
        xs.dedup();
        assert_eq!(xs.len(), 101);
        let (a3, _, _) = split(&ds, DEFAULT_RATIOS, 6).unwrap();
        assert_ne!(a, a3);
    }

    #[test]
    fn encoding_rules() {
        let ds = toy(12);
        let (train, _, _) = split(&ds, DEFAULT_RATIOS, 1).unwrap();
        let enc = Encoder::fit(&ds, &train).unwrap();
        // Lexicographic binary levels: F -> 0, M -> 1.
        assert_eq!(enc.encode_value(0, "F").unwrap(), 0.0);
        assert_eq!(enc.encode_value(0, "M").unwrap(), 1.0);
        assert_eq!(enc.encode_value(1, "low").unwrap(), 0.0);
        assert_eq!(enc.encode_value(1, "mid").unwrap(), 1.0);
        assert_eq!(enc.encode_value(1, "high").unwrap(), 2.0);
        assert_eq!(enc.encode_value(3, "7").unwrap(), 0.0);
        assert!(matches!(enc.encode_value(0, "X"), Err(MaddError::EncodingError(_))));
        assert!(matches!(enc.encode_value(1, "extreme"), Err(MaddError::EncodingError(_))));

        // Standardization uses train rows only.
        let xs: Vec<f64> = train.rows.iter().map(|r| r[2].parse().unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        match &enc.features[2].1 {
            FeatureEncoding::Standardized { mean: m, .. } => assert!((m - mean).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let m = enc.transform(&train).unwrap();
        let col: Vec<f64> = (0..m.n_rows).map(|i| m.row(i)[2]).collect();
        assert!(col.iter().sum::<f64>().abs() < 1e-9);
        let var = col.iter().map(|z| z * z).sum::<f64>() / col.len() as f64;
        assert!((var - 1.0).abs() < 1e-9);
        assert!((0..m.n_rows).all(|i| m.row(i)[3] == 0.0));
    }

    #[test]
    fn non_binary_sensitive_is_rejected() {
        let mut ds = toy(9);
        ds.sensitive = "band".into();
        ds.sensitive_values = ds.rows.iter().map(|r| r[1].clone()).collect();
        assert!(matches!(ds.groups(), Err(MaddError::EncodingError(_))));
        let ok = toy(9);
        let (groups, levels) = ok.groups().unwrap();
        assert_eq!(levels, ["F".to_string(), "M".to_string()]);
        assert_eq!(groups[0], Group::G1);
        assert_eq!(groups[1], Group::G0);
    }

    #[test]
    fn csv_ingestion_drops_missing_rows() {
        let text = "\
gender,age_band,disability,highest_education,imd_band,num_of_prev_attempts,studied_credits,sum_click,final_result
M,0-35,N,A Level or Equivalent,10-20,0,60,120,Pass
F,35-55,Y,HE Qualification,?,1,120,40,Fail
F,55<=,N,Lower Than A Level,90-100%,0,30,300,Distinction
";
        let ds = TabularDataset::from_csv(text.as_bytes(), default_schema(), "final_result", "gender").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dropped, 1);
        assert_eq!(ds.labels, vec![true, true]);
        let enc = Encoder::fit(&ds, &ds).unwrap();
        let m = enc.transform(&ds).unwrap();
        assert_eq!(m.n_cols, 8);
        assert_eq!(m.row(0)[4], 1.0);
        assert_eq!(m.row(1)[4], 9.0);
    }

    #[test]
    fn missing_column_is_reported() {
        let text = "gender,final_result\nM,Pass\n";
        let err = TabularDataset::from_csv(text.as_bytes(), default_schema(), "final_result", "gender").unwrap_err();
        assert!(matches!(err, MaddError::Parse(_)));
    }
}
