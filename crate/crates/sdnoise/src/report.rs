//! Report serialization: a Markdown table laid out like the accuracy tables
//! (one row per dataset and noise setting, one column per method),
//! JSON lines, and whitespace-separated plot data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiment::{RunReport, SweepTable, SweepVariable};
use crate::spec::{Method, NoiseTag};

/// Relative output paths resolve against this directory when it is set.
pub const OUTPUT_DIR_VAR: &str = "SDNOISE_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    JsonLines,
    PlotData,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Format::Table),
            "json-lines" | "jsonl" => Ok(Format::JsonLines),
            "plot-data" => Ok(Format::PlotData),
            _ => Err(Error::Spec(format!("unknown format {s:?} (table, json-lines, plot-data)"))),
        }
    }
}

const COLUMNS: [(Method, &str); 7] = [
    (Method::Pn, "P-N"),
    (Method::TLoss, "T-Loss"),
    (Method::SdLossClean, "SD-Loss"),
    (Method::Weighted, "weighted"),
    (Method::Unweighted, "unweighted"),
    (Method::Km, "KM"),
    (Method::KmCop, "KM-COP"),
];

fn cell(r: &RunReport) -> String {
    match (r.mean, r.std) {
        (Some(m), Some(s)) => format!("{:.2} ± {:.2}", 100.0 * m, 100.0 * s),
        _ => format!("partial ({} of {})", r.repeats.len(), r.repeats.len() + r.failures.len()),
    }
}

fn noise_label(r: &RunReport) -> String {
    let tag = match r.noise.model {
        NoiseTag::Pairing => "pairing",
        NoiseTag::Labeling => "labeling",
    };
    format!("{tag} ({}, {})", r.noise.rates[0], r.noise.rates[1])
}

/// Pivots reports into rows keyed by dataset and noise, in first-seen order.
pub fn render_table(reports: &[RunReport]) -> String {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut cells: BTreeMap<(String, String), BTreeMap<usize, String>> = BTreeMap::new();
    let mut header_of: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut used = [false; COLUMNS.len()];
    for r in reports {
        let d = &r.dataset;
        // The clean reference has no noise; it joins every row of its dataset.
        let key = (d.name.clone(), noise_label(r));
        let col = COLUMNS.iter().position(|(m, _)| *m == r.method).expect("every method has a column");
        used[col] = true;
        if r.method == Method::Pn {
            continue;
        }
        if !cells.contains_key(&key) {
            order.push(key.clone());
            header_of.insert(key.clone(), format!("{} ({}, {:.2}) {}", d.name, d.d, d.prior, d.n));
        }
        cells.entry(key).or_default().insert(col, cell(r));
    }
    for r in reports.iter().filter(|r| r.method == Method::Pn) {
        let mut matched = false;
        for key in order.iter().filter(|k| k.0 == r.dataset.name) {
            cells.get_mut(key).expect("ordered keys exist").insert(0, cell(r));
            matched = true;
        }
        if !matched {
            let d = &r.dataset;
            let key = (d.name.clone(), "clean".to_string());
            order.push(key.clone());
            header_of.insert(key.clone(), format!("{} ({}, {:.2}) {}", d.name, d.d, d.prior, d.n));
            cells.entry(key).or_default().insert(0, cell(r));
        }
    }
    let cols: Vec<usize> = (0..COLUMNS.len()).filter(|&c| used[c]).collect();
    let mut s = String::from("| dataset (d, prior) N | noise |");
    for &c in &cols {
        let _ = write!(s, " {} |", COLUMNS[c].1);
    }
    s.push_str("\n|---|---|");
    for _ in &cols {
        s.push_str("---|");
    }
    s.push('\n');
    for key in &order {
        let _ = write!(s, "| {} | {} |", header_of[key], key.1);
        for &c in &cols {
            let _ = write!(s, " {} |", cells[key].get(&c).map_or("", String::as_str));
        }
        s.push('\n');
    }
    s
}

pub fn to_json_lines(reports: &[RunReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&serde_json::to_string(r).expect("reports serialize"));
        s.push('\n');
    }
    s
}

pub fn from_json_lines(text: &str, origin: &Path) -> Result<Vec<RunReport>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                line: i as u64 + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Per-repeat rows `repeat accuracy`.
fn report_plot_data(r: &RunReport) -> String {
    let mut s = String::from("# repeat accuracy\n");
    for rep in &r.repeats {
        let _ = writeln!(s, "{} {}", rep.repeat, rep.accuracy);
    }
    s
}

pub fn render_report(r: &RunReport, format: Format) -> String {
    match format {
        Format::Table => render_table(std::slice::from_ref(r)),
        Format::JsonLines => to_json_lines(std::slice::from_ref(r)),
        Format::PlotData => report_plot_data(r),
    }
}

pub fn render_sweep(t: &SweepTable, format: Format) -> String {
    let var = match t.variable {
        SweepVariable::Rate => "rate",
        SweepVariable::NPairs => "n_pairs",
    };
    match format {
        Format::Table => {
            let mut s = format!("| {var} | mean accuracy (%) | sd |\n|---|---|---|\n");
            for (x, r) in &t.rows {
                match (r.mean, r.std) {
                    (Some(m), Some(sd)) => {
                        let _ = writeln!(s, "| {x} | {:.2} | {:.2} |", 100.0 * m, 100.0 * sd);
                    }
                    _ => {
                        let _ = writeln!(s, "| {x} | {} | |", cell(r));
                    }
                }
            }
            s
        }
        Format::JsonLines => {
            let reports: Vec<RunReport> = t.rows.iter().map(|(_, r)| r.clone()).collect();
            to_json_lines(&reports)
        }
        Format::PlotData => {
            // Incomplete rows print NaN so the row count always matches the axis.
            let mut s = format!("# {var} mean_accuracy std\n");
            for (x, r) in &t.rows {
                let _ = writeln!(s, "{x} {} {}", r.mean.unwrap_or(f64::NAN), r.std.unwrap_or(f64::NAN));
            }
            s
        }
    }
}

/// Resolves a relative path against the output directory variable.
pub fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes `text` to `path` (resolved by [`output_path`]), creating parent
/// directories. Returns the final path.
pub fn write_output(path: &Path, text: &str) -> Result<PathBuf> {
    let path = output_path(path);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{DatasetSummary, RepeatRecord};
    use crate::spec::NoiseSpec;

    fn report(method: Method, acc: &[f64]) -> RunReport {
        let repeats: Vec<RepeatRecord> = acc
            .iter()
            .enumerate()
            .map(|(i, &a)| RepeatRecord {
                repeat: i,
                seed: i as u64,
                accuracy: a,
                n_pairs: 10,
                similar_fraction: 0.6,
                prior: Some(0.37),
                selected: None,
                alpha: None,
                flip_sign: false,
            })
            .collect();
        let (m, s) = crate::experiment::mean_std(acc);
        RunReport {
            name: "x".into(),
            method,
            noise: NoiseSpec { model: NoiseTag::Pairing, rates: [0.2, 0.2] },
            dataset: DatasetSummary { name: "cancer".into(), d: 30, prior: 0.37, n: 569 },
            repeats,
            failures: vec![],
            mean: Some(m),
            std: Some(s),
            wall_clock_secs: 1.5,
        }
    }

    #[test]
    fn table_has_one_row_per_setting() {
        let t = render_table(&[report(Method::TLoss, &[0.97, 0.98]), report(Method::Km, &[0.9, 0.9])]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].contains("T-Loss") && lines[0].contains("KM"));
        assert!(lines[2].starts_with("| cancer (30, 0.37) 569 | pairing (0.2, 0.2) | 97.50 ± 0.71 | 90.00 ± 0.00 |"));
    }

    #[test]
    fn json_lines_round_trip() {
        let rs = vec![report(Method::Weighted, &[0.5, 0.75]), report(Method::Pn, &[0.9])];
        let back = from_json_lines(&to_json_lines(&rs), Path::new("mem")).unwrap();
        assert_eq!(back, rs);
    }

    #[test]
    fn plot_data_rows_match_sweep_length() {
        let t = SweepTable {
            variable: SweepVariable::Rate,
            rows: [0.0, 0.1, 0.2].iter().map(|&x| (x, report(Method::Weighted, &[0.9]))).collect(),
        };
        let text = render_sweep(&t, Format::PlotData);
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].split_whitespace().count(), 3);
    }
}
