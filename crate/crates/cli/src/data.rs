//! CSV input and output.
//!
//! Grouped data uses the header `group,value`; series use
//! `series,index,value` with integer indices that run without gaps.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Labelled samples in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Labelled {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct GroupRow {
    group: String,
    value: f64,
}

#[derive(Debug, Deserialize)]
struct SeriesRow {
    series: String,
    index: i64,
    value: f64,
}

fn malformed(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Data {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn open(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn check_header(reader: &mut csv::Reader<File>, path: &Path, expected: &[&str]) -> CliResult<()> {
    let header = reader.headers().map_err(|e| malformed(path, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(malformed(path, format!("expected header `{}`", expected.join(","))));
    }
    Ok(())
}

fn push(labels: &mut Vec<String>, index: &mut BTreeMap<String, usize>, key: String) -> usize {
    *index.entry(key.clone()).or_insert_with(|| {
        labels.push(key);
        labels.len() - 1
    })
}

fn check_values(path: &Path, data: &Labelled) -> CliResult<()> {
    if data.values.is_empty() {
        return Err(malformed(path, "no observations"));
    }
    if data.values.iter().flatten().any(|x| !x.is_finite()) {
        return Err(malformed(path, "non-finite value"));
    }
    Ok(())
}

pub fn read_groups(path: &Path) -> CliResult<Labelled> {
    let mut reader = open(path)?;
    check_header(&mut reader, path, &["group", "value"])?;
    let mut labels = Vec::new();
    let mut index = BTreeMap::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for (line, row) in reader.deserialize::<GroupRow>().enumerate() {
        let row = row.map_err(|e| malformed(path, format!("row {}: {e}", line + 2)))?;
        let slot = push(&mut labels, &mut index, row.group);
        if slot == values.len() {
            values.push(Vec::new());
        }
        values[slot].push(row.value);
    }
    let data = Labelled { labels, values };
    check_values(path, &data)?;
    Ok(data)
}

pub fn read_series(path: &Path) -> CliResult<Labelled> {
    let mut reader = open(path)?;
    check_header(&mut reader, path, &["series", "index", "value"])?;
    let mut labels = Vec::new();
    let mut index = BTreeMap::new();
    let mut rows: Vec<Vec<(i64, f64)>> = Vec::new();
    for (line, row) in reader.deserialize::<SeriesRow>().enumerate() {
        let row = row.map_err(|e| malformed(path, format!("row {}: {e}", line + 2)))?;
        let slot = push(&mut labels, &mut index, row.series);
        if slot == rows.len() {
            rows.push(Vec::new());
        }
        rows[slot].push((row.index, row.value));
    }
    let mut values = Vec::with_capacity(rows.len());
    for (label, mut points) in labels.iter().zip(rows) {
        points.sort_by_key(|p| p.0);
        if points.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
            return Err(malformed(path, format!("series `{label}` has missing or repeated indices")));
        }
        values.push(points.into_iter().map(|p| p.1).collect());
    }
    let data = Labelled { labels, values };
    check_values(path, &data)?;
    Ok(data)
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Renders rows as CSV text under `header`.
pub fn to_csv<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> CliResult<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| malformed(Path::new("<output>"), e.to_string());
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        writer.write_record(row.as_ref()).map_err(csv_err)?;
    }
    writer
        .into_inner()
        .map_err(|e| malformed(Path::new("<output>"), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn groups_keep_first_appearance_order() {
        let f = file("group,value\nb,1.0\na,2.5\nb,3\n");
        let data = read_groups(f.path()).unwrap();
        assert_eq!(data.labels, ["b", "a"]);
        assert_eq!(data.values, vec![vec![1.0, 3.0], vec![2.5]]);
    }

    #[test]
    fn series_are_sorted_and_checked() {
        let f = file("series,index,value\ns,2,5\ns,1,4\n");
        assert_eq!(read_series(f.path()).unwrap().values, vec![vec![4.0, 5.0]]);
        let gap = file("series,index,value\ns,1,4\ns,3,5\n");
        assert!(matches!(read_series(gap.path()), Err(CliError::Data { .. })));
    }

    #[test]
    fn bad_input_is_a_data_error() {
        for text in ["grp,value\na,1\n", "group,value\na,x\n", "group,value\n", "group,value\na,inf\n"] {
            let f = file(text);
            let err = read_groups(f.path()).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }
}
