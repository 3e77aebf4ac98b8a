//! CSV and JSON emission of analysis reports.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::analysis::AnalysisReport;
use crate::error::{usage, Error, Result};
use crate::sharpness::Notion;

/// The full CSV schema, in column order.
pub const CSV_HEADER: &str = "k,opt,greedy_ratio,worst_tie_ratio,curvature_bound,monotonic_bound,\
dynamic_monotonic_bound,submodular_bound,dynamic_submodular_bound,optima_count,queries";

/// Notions with a column in the fixed schema.
pub const CSV_NOTIONS: [Notion; 4] = [
    Notion::Monotonic,
    Notion::DynamicMonotonic,
    Notion::Submodular,
    Notion::DynamicSubmodular,
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(usage(format!("unknown format '{s}', expected csv or json"))),
        }
    }
}

/// `x` rounded to 12 significant digits, printed in its shortest form.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".into()
    } else {
        rounded.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Column {
    K,
    Opt,
    GreedyRatio,
    WorstTieRatio,
    Curvature,
    Bound(Notion),
    OptimaCount,
    Queries,
}

impl Column {
    fn name(self) -> String {
        match self {
            Column::K => "k".into(),
            Column::Opt => "opt".into(),
            Column::GreedyRatio => "greedy_ratio".into(),
            Column::WorstTieRatio => "worst_tie_ratio".into(),
            Column::Curvature => "curvature_bound".into(),
            Column::Bound(n) => format!("{}_bound", n.name()),
            Column::OptimaCount => "optima_count".into(),
            Column::Queries => "queries".into(),
        }
    }

    fn cell(self, r: &AnalysisReport) -> String {
        match self {
            Column::K => r.k().to_string(),
            Column::Opt => fmt_sig(r.opt),
            Column::GreedyRatio => fmt_sig(r.greedy_ratio),
            Column::WorstTieRatio => fmt_sig(r.worst_tie_ratio),
            Column::Curvature => r.curvature.map_or_else(String::new, |c| fmt_sig(c.bound)),
            Column::Bound(n) => r.bound(n).map_or_else(String::new, fmt_sig),
            Column::OptimaCount => r.optima.count.to_string(),
            Column::Queries => r.queries.to_string(),
        }
    }
}

fn columns(reports: &[AnalysisReport]) -> Vec<Column> {
    let all = reports.is_empty();
    let has_curv = all || reports.iter().any(|r| r.curvature.is_some());
    let has = |n: Notion| all || reports.iter().any(|r| r.fit(n).is_some());
    let mut cols = vec![Column::K, Column::Opt, Column::GreedyRatio, Column::WorstTieRatio];
    if has_curv {
        cols.push(Column::Curvature);
    }
    for n in CSV_NOTIONS {
        if has(n) {
            cols.push(Column::Bound(n));
        }
    }
    cols.push(Column::OptimaCount);
    cols.push(Column::Queries);
    // Only present when asked for; not part of the fixed schema.
    if !all && has(Notion::Approximate) {
        cols.push(Column::Bound(Notion::Approximate));
    }
    cols
}

/// Header names for `reports`. Columns of notions no report carries are
/// dropped.
pub fn csv_columns(reports: &[AnalysisReport]) -> Vec<String> {
    columns(reports).into_iter().map(Column::name).collect()
}

fn render_csv(reports: &[AnalysisReport]) -> String {
    let cols = columns(reports);
    let mut out = cols.iter().map(|c| c.name()).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in reports {
        let row: Vec<String> = cols.iter().map(|c| c.cell(r)).collect();
        writeln!(out, "{}", row.join(",")).expect("writing to a String");
    }
    out
}

/// Writes `reports` to `w`.
pub fn write_report<W: Write>(reports: &[AnalysisReport], format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Csv => w.write_all(render_csv(reports).as_bytes())?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, reports)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `reports` to the file at `path`.
pub fn emit_report(reports: &[AnalysisReport], format: Format, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_report(reports, format, BufWriter::new(file))
}

pub fn read_json_reports(path: impl AsRef<Path>) -> Result<Vec<AnalysisReport>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{analyze, AnalysisOptions, Family, InstanceSpec};

    fn sample_reports() -> Vec<AnalysisReport> {
        let opts = AnalysisOptions {
            notions: CSV_NOTIONS.to_vec(),
            ..Default::default()
        };
        (2..=4)
            .map(|k| analyze(&InstanceSpec::new(Family::Truncation, 2 * k, k, 0), &opts).unwrap())
            .collect()
    }

    #[test]
    fn sig_digits() {
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(19.0 / 27.0), "0.703703703704");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(123456789.123456), "123456789.123");
    }

    #[test]
    fn csv_schema() {
        let reports = sample_reports();
        let text = render_csv(&reports);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.count(), 3);
        assert_eq!(csv_columns(&[]).join(","), CSV_HEADER);
        let mut with_approx = reports[0].clone();
        let extra = analyze(&with_approx.instance, &AnalysisOptions::default()).unwrap();
        with_approx.fits = extra.fits;
        assert!(csv_columns(&[with_approx]).join(",").ends_with("queries,approximate_bound"));
    }

    #[test]
    fn dropped_columns() {
        let opts = AnalysisOptions {
            notions: vec![],
            ..Default::default()
        };
        let r = analyze(&InstanceSpec::new(Family::Truncation, 6, 3, 0), &opts).unwrap();
        assert_eq!(
            csv_columns(&[r]).join(","),
            "k,opt,greedy_ratio,worst_tie_ratio,curvature_bound,optima_count,queries"
        );
    }

    #[test]
    fn json_round_trip() {
        let reports = sample_reports();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_report(&reports, Format::Json, &path).unwrap();
        assert_eq!(read_json_reports(&path).unwrap(), reports);
        let missing = dir.path().join("no/such/dir/r.csv");
        assert!(matches!(emit_report(&reports, Format::Csv, missing), Err(Error::Io(_))));
    }
}
