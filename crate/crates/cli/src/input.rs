use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// The `y` column of a CSV file, trimmed.
pub fn read_column(path: &Path) -> CliResult<Vec<String>> {
    let mut reader =
        csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| CliError::io(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::io(path, e))?;
    let col = headers.iter().position(|h| h == "y").ok_or_else(|| CliError::io(path, "no `y` column in the header"))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::io(path, e))?;
        out.push(record.get(col).unwrap_or_default().to_string());
    }
    Ok(out)
}

/// Parses every entry of the `y` column; `line` in errors counts the header.
pub fn read_parsed<T: std::str::FromStr>(path: &Path) -> CliResult<Vec<T>> {
    read_column(path)?
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse().map_err(|_| CliError::io(path, format!("line {}: cannot read {s:?}", i + 2))))
        .collect()
}

/// Splits a comma-separated list, rejecting empty items.
pub fn split_list(text: &str) -> CliResult<Vec<&str>> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(CliError::Usage(format!("empty item in list {text:?}")));
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_the_y_column_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "id,y\n1, A\n2,B\n").unwrap();
        assert_eq!(read_column(&path).unwrap(), vec!["A", "B"]);
        fs::write(&path, "x\n1\n").unwrap();
        assert!(matches!(read_column(&path), Err(CliError::Io { .. })));
        fs::write(&path, "y\n1.5\nfoo\n").unwrap();
        let err = read_parsed::<f64>(&path).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn lists() {
        assert_eq!(split_list("0.1, 1/2").unwrap(), vec!["0.1", "1/2"]);
        assert!(split_list("0.1,,0.2").is_err());
    }
}
