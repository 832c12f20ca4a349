//! CSV and plot-data artifacts of an experiment table.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::experiment::{ResultRow, ResultTable};

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Table as CSV: `# key=value` provenance lines, then a header row and one
/// RFC 4180 record per row.
pub fn table_csv(table: &ResultTable) -> Result<String, OutputError> {
    let p = &table.provenance;
    let mut out = format!(
        "# experiment={}\n# seed={}\n# build_id={}\n# spec_hash={}\n",
        table.kind.name(),
        p.seed,
        p.build_id,
        p.spec_hash
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        w.serialize(row)?;
    }
    if table.rows.is_empty() {
        w.write_record([
            "x",
            "series",
            "statistic",
            "mean",
            "std",
            "samples",
            "infeasible",
        ])?;
    }
    let body = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

#[derive(Serialize)]
struct PlotPoint {
    x: f64,
    series: String,
    y: Option<f64>,
}

/// `(x, series, y)` triples; the series names carry the statistic.
pub fn plot_data(table: &ResultTable) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        w.serialize(PlotPoint {
            x: row.x,
            series: format!("{} {}", row.series, row.statistic),
            y: row.mean,
        })?;
    }
    if table.rows.is_empty() {
        w.write_record(["x", "series", "y"])?;
    }
    let body = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(body).expect("csv output is utf-8"))
}

/// Writes `<kind>-<hash>.csv` and `<kind>-<hash>.plot.csv` into `dir`.
pub fn emit_outputs(table: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let stem = format!("{}-{}", table.kind.name(), table.provenance.spec_hash);
    let files = [
        (dir.join(format!("{stem}.csv")), table_csv(table)?),
        (dir.join(format!("{stem}.plot.csv")), plot_data(table)?),
    ];
    let mut out = Vec::new();
    for (path, text) in files {
        fs::write(&path, text).map_err(|source| OutputError::Io {
            path: path.clone(),
            source,
        })?;
        out.push(path);
    }
    Ok(out)
}

/// Parses rows back from [`table_csv`] output.
pub fn read_rows(text: &str) -> Result<Vec<ResultRow>, OutputError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<ResultRow>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{ExperimentKind, Provenance};

    fn table() -> ResultTable {
        ResultTable {
            kind: ExperimentKind::SfcSurvivability,
            provenance: Provenance {
                seed: 3,
                build_id: "v0".into(),
                spec_hash: "abc".into(),
            },
            rows: vec![
                ResultRow {
                    x: 0.05,
                    series: "6D, \"1SFC\"".into(),
                    statistic: "survivable".into(),
                    mean: Some(0.125),
                    std: Some(0.0),
                    samples: 2,
                    infeasible: 0,
                },
                ResultRow {
                    x: 0.1,
                    series: "6D-rFork".into(),
                    statistic: "survivable".into(),
                    mean: None,
                    std: None,
                    samples: 0,
                    infeasible: 2,
                },
            ],
        }
    }

    #[test]
    fn header_and_round_trip() {
        let t = table();
        let text = table_csv(&t).unwrap();
        assert!(text
            .lines()
            .nth(4)
            .unwrap()
            .starts_with("x,series,statistic,mean,std,samples,infeasible"));
        assert!(text.contains("\"6D, \"\"1SFC\"\"\""));
        assert_eq!(read_rows(&text).unwrap(), t.rows);
    }

    #[test]
    fn plot_triples() {
        let text = plot_data(&table()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,series,y"));
        assert_eq!(lines.nth(1), Some("0.1,6D-rFork survivable,"));
    }
}
