//! CSV intake described by a TOML manifest.
//!
//! The dialect is fixed: comma separated, UTF-8, header row unless the
//! manifest says otherwise. Rows with an empty or `?` field are rejected and
//! counted. Categorical columns are one-hot encoded (one indicator per
//! distinct token, tokens sorted), then every feature is standardized on the
//! full file; constant columns are dropped and recorded.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sdnoise_core::{Dataset, LabeledPoint, Sign};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    /// Relative paths resolve against the manifest's directory.
    pub path: PathBuf,
    pub label_column: LabelColumn,
    pub positive_value: String,
    /// When set, any label other than the two tokens is an error. Otherwise
    /// a single non-positive token is accepted as the negative class.
    #[serde(default)]
    pub negative_value: Option<String>,
    #[serde(default)]
    pub one_hot_columns: Vec<String>,
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Columns ignored entirely, such as identifiers.
    #[serde(default)]
    pub drop_columns: Vec<String>,
}

fn default_true() -> bool {
    true
}

impl DatasetManifest {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: DatasetManifest =
            toml::from_str(&text).map_err(|e| Error::Config { path: path.to_path_buf(), message: e.to_string() })?;
        if m.path.is_relative() {
            if let Some(dir) = path.parent() {
                m.path = dir.join(&m.path);
            }
        }
        Ok(m)
    }

    pub fn load(&self) -> Result<LoadedDataset> {
        load_csv_dataset(
            &self.path,
            &self.label_column,
            &self.positive_value,
            self.negative_value.as_deref(),
            &self.one_hot_columns,
            self.has_header,
            &self.drop_columns,
        )
    }
}

#[derive(Clone, Debug)]
pub struct LoadedDataset {
    /// Standardized features with labels in `{+1, -1}`.
    pub dataset: Dataset,
    pub feature_names: Vec<String>,
    /// Features removed because they were constant.
    pub dropped_columns: Vec<String>,
    pub rejected_rows: usize,
}

impl LoadedDataset {
    pub fn prior(&self) -> f64 {
        self.dataset.positive_fraction()
    }

    /// False when only one class is present.
    pub fn is_usable(&self) -> bool {
        self.dataset.is_usable()
    }
}

fn is_missing(field: &str) -> bool {
    let f = field.trim();
    f.is_empty() || f == "?"
}

#[allow(clippy::too_many_arguments)]
pub fn load_csv_dataset(
    path: &Path,
    label_column: &LabelColumn,
    positive_value: &str,
    negative_value: Option<&str>,
    one_hot_columns: &[String],
    has_header: bool,
    drop_columns: &[String],
) -> Result<LoadedDataset> {
    let parse_err = |line: u64, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(has_header).trim(csv::Trim::All).from_reader(file);

    let mut rows: Vec<(u64, csv::StringRecord)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    let width = match (has_header, rows.first()) {
        (true, _) => reader.headers().map_err(|e| parse_err(1, e.to_string()))?.len(),
        (false, Some((_, r))) => r.len(),
        (false, None) => 0,
    };
    let names: Vec<String> = if has_header {
        reader.headers().map_err(|e| parse_err(1, e.to_string()))?.iter().map(str::to_string).collect()
    } else {
        (0..width).map(|i| format!("c{i}")).collect()
    };
    let column_index = |name: &str| {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn { path: path.to_path_buf(), column: name.to_string() })
    };
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => return Err(Error::UnknownColumn { path: path.to_path_buf(), column: i.to_string() }),
        LabelColumn::Name(n) => column_index(n)?,
    };
    let one_hot: BTreeSet<usize> = one_hot_columns.iter().map(|c| column_index(c)).collect::<Result<_>>()?;
    let dropped: BTreeSet<usize> = drop_columns.iter().map(|c| column_index(c)).collect::<Result<_>>()?;

    let mut kept = Vec::with_capacity(rows.len());
    let mut rejected = 0;
    for (line, rec) in rows {
        if rec.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", rec.len())));
        }
        let relevant = (0..width).filter(|i| !dropped.contains(i));
        if relevant.into_iter().any(|i| is_missing(&rec[i])) {
            rejected += 1;
            continue;
        }
        kept.push((line, rec));
    }
    if kept.is_empty() {
        return Err(parse_err(0, "no complete rows".to_string()));
    }

    // Category levels per one-hot column, sorted for a stable layout.
    let levels: BTreeMap<usize, Vec<String>> = one_hot
        .iter()
        .map(|&c| {
            let set: BTreeSet<String> = kept.iter().map(|(_, r)| r[c].to_string()).collect();
            (c, set.into_iter().collect())
        })
        .collect();

    let mut feature_names = Vec::new();
    for (i, name) in names.iter().enumerate() {
        if i == label_idx || dropped.contains(&i) {
            continue;
        }
        match levels.get(&i) {
            Some(lv) => feature_names.extend(lv.iter().map(|l| format!("{name}={l}"))),
            None => feature_names.push(name.clone()),
        }
    }

    let mut negative_seen: Option<String> = negative_value.map(str::to_string);
    let mut points = Vec::with_capacity(kept.len());
    for (line, rec) in &kept {
        let token = &rec[label_idx];
        let y = if token == positive_value {
            Sign::Plus
        } else {
            match &negative_seen {
                Some(neg) if neg == token => Sign::Minus,
                Some(_) => {
                    return Err(Error::UnknownLabel {
                        path: path.to_path_buf(),
                        token: token.to_string(),
                        positive: positive_value.to_string(),
                    })
                }
                None => {
                    negative_seen = Some(token.to_string());
                    Sign::Minus
                }
            }
        };
        let mut x = Vec::with_capacity(feature_names.len());
        for i in 0..width {
            if i == label_idx || dropped.contains(&i) {
                continue;
            }
            match levels.get(&i) {
                Some(lv) => x.extend(lv.iter().map(|l| if l == &rec[i] { 1.0 } else { 0.0 })),
                None => {
                    let v: f64 = rec[i]
                        .parse()
                        .map_err(|_| parse_err(*line, format!("column {:?}: not a number: {:?}", names[i], &rec[i])))?;
                    if !v.is_finite() {
                        return Err(parse_err(*line, format!("column {:?}: non-finite value", names[i])));
                    }
                    x.push(v);
                }
            }
        }
        points.push(LabeledPoint { x, y });
    }

    let raw = Dataset::new(points)?;
    let (dataset, dropped_idx) = raw.standardized()?;
    let dropped_columns: Vec<String> = dropped_idx.iter().map(|&i| feature_names[i].clone()).collect();
    let feature_names =
        feature_names.into_iter().enumerate().filter(|(i, _)| !dropped_idx.contains(i)).map(|(_, n)| n).collect();
    Ok(LoadedDataset { dataset, feature_names, dropped_columns, rejected_rows: rejected })
}
