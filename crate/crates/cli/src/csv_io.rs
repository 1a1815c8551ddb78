//! CSV reading and writing for time-series data.
//!
//! Expected layout: one header row of column names, then one row per time
//! step. A leading column named `t` or `timestamp` (case-insensitive) is
//! treated as an index and dropped; every remaining column must parse as a
//! finite float. Written files render floats with 17 significant digits, so
//! a write/read round trip is bitwise lossless.

use freqfit_core::series::CoreError;
use freqfit_core::TimeSeries;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("ragged rows: line {line} has {got} fields, expected {expected}")]
    RaggedRows {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-numeric cell at line {line}, column '{column}': {value:?}")]
    NonNumericCell {
        line: usize,
        column: String,
        value: String,
    },
    #[error("too few data rows: {got} (need at least 2)")]
    TooShort { got: usize },
    #[error("no data columns (only an index column was found)")]
    NoColumns,
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn is_index_name(name: &str) -> bool {
    let lower = name.trim().to_ascii_lowercase();
    lower == "t" || lower == "timestamp"
}

/// Loads a CSV file into a [`TimeSeries`], dropping a leading index column.
pub fn load_csv(path: &Path) -> Result<TimeSeries, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(translate_csv_error)?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(translate_csv_error)?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(CsvError::ParseError {
            line: 1,
            message: "empty input".into(),
        });
    }
    let skip_first = is_index_name(&headers[0]);
    let names: Vec<String> = headers
        .iter()
        .skip(if skip_first { 1 } else { 0 })
        .cloned()
        .collect();
    if names.is_empty() {
        return Err(CsvError::NoColumns);
    }

    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut rows = 0usize;
    for record in rdr.records() {
        let record = record.map_err(translate_csv_error)?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows + 2);
        for (c, field) in record.iter().skip(if skip_first { 1 } else { 0 }).enumerate() {
            let value: f64 = field.parse().map_err(|_| CsvError::NonNumericCell {
                line,
                column: names[c].clone(),
                value: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(CsvError::NonNumericCell {
                    line,
                    column: names[c].clone(),
                    value: field.to_string(),
                });
            }
            channels[c].push(value);
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(CsvError::TooShort { got: rows });
    }
    Ok(TimeSeries::from_channels(channels)?.with_names(names)?)
}

fn translate_csv_error(err: csv::Error) -> CsvError {
    let line = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or_default();
    match err.kind() {
        csv::ErrorKind::UnequalLengths {
            pos,
            expected_len,
            len,
        } => CsvError::RaggedRows {
            line: pos.as_ref().map(|p| p.line() as usize).unwrap_or(line),
            expected: *expected_len as usize,
            got: *len as usize,
        },
        csv::ErrorKind::Io(_) => CsvError::ParseError {
            line,
            message: err.to_string(),
        },
        _ => CsvError::ParseError {
            line,
            message: err.to_string(),
        },
    }
}

/// Writes a [`TimeSeries`] as CSV with a leading `t` index column. Floats
/// carry 17 significant digits.
pub fn write_csv(path: &Path, ts: &TimeSeries) -> Result<(), CsvError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let names: Vec<String> = match ts.names() {
        Some(n) => n.to_vec(),
        None => (0..ts.n_channels()).map(|c| format!("c{c}")).collect(),
    };
    let mut header = vec!["t".to_string()];
    header.extend(names);
    wtr.write_record(&header)
        .map_err(translate_csv_error)?;
    for t in 0..ts.t_len() {
        let mut row = vec![t.to_string()];
        row.extend(ts.row(t).iter().map(|v| format!("{v:.16e}")));
        wtr.write_record(&row).map_err(translate_csv_error)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CsvError::ParseError {
            line: 0,
            message: e.to_string(),
        })?;
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_plain_table() {
        let f = write_tmp("a,b\n1.0,2.0\n3.5,-4.0\n");
        let ts = load_csv(f.path()).unwrap();
        assert_eq!(ts.n_channels(), 2);
        assert_eq!(ts.t_len(), 2);
        assert_eq!(ts.channel(0), &[1.0, 3.5]);
        assert_eq!(ts.channel(1), &[2.0, -4.0]);
        assert_eq!(ts.names().unwrap(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn drops_index_column_case_insensitively() {
        for idx in ["t", "T", "Timestamp", "timestamp"] {
            let f = write_tmp(&format!("{idx},y\n0,1.5\n1,2.5\n2,3.5\n"));
            let ts = load_csv(f.path()).unwrap();
            assert_eq!(ts.n_channels(), 1);
            assert_eq!(ts.channel(0), &[1.5, 2.5, 3.5]);
        }
        // A non-index first column is kept.
        let f = write_tmp("x,y\n0,1.5\n1,2.5\n");
        assert_eq!(load_csv(f.path()).unwrap().n_channels(), 2);
    }

    #[test]
    fn rejects_non_numeric_cell_with_location() {
        let f = write_tmp("a\n1.0\nxyz\n");
        match load_csv(f.path()).unwrap_err() {
            CsvError::NonNumericCell { line, column, value } => {
                assert_eq!(line, 3);
                assert_eq!(column, "a");
                assert_eq!(value, "xyz");
            }
            other => panic!("unexpected: {other:?}"),
        }
        // NaN/inf literals parse as floats but are still rejected.
        let f = write_tmp("a\n1.0\nNaN\n");
        assert!(matches!(
            load_csv(f.path()).unwrap_err(),
            CsvError::NonNumericCell { .. }
        ));
    }

    #[test]
    fn rejects_ragged_rows() {
        let f = write_tmp("a,b\n1.0,2.0\n3.0\n");
        match load_csv(f.path()).unwrap_err() {
            CsvError::RaggedRows { expected, got, .. } => {
                assert_eq!(expected, 2);
                assert_eq!(got, 1);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn rejects_short_and_empty_inputs() {
        let f = write_tmp("a\n1.0\n");
        assert!(matches!(
            load_csv(f.path()).unwrap_err(),
            CsvError::TooShort { got: 1 }
        ));
        let f = write_tmp("");
        assert!(matches!(
            load_csv(f.path()).unwrap_err(),
            CsvError::ParseError { .. }
        ));
        let f = write_tmp("t\n0\n1\n");
        assert!(matches!(load_csv(f.path()).unwrap_err(), CsvError::NoColumns));
    }

    #[test]
    fn missing_file_is_a_parse_error() {
        let err = load_csv(Path::new("/nonexistent/nope.csv")).unwrap_err();
        assert!(matches!(err, CsvError::ParseError { .. }));
    }

    #[test]
    fn write_read_round_trip_is_bitwise() {
        let values: Vec<f64> = vec![
            1.0,
            -2.5,
            std::f64::consts::PI,
            1e-17,
            -3.137e8,
            0.1 + 0.2,
        ];
        let ts = TimeSeries::univariate(values.clone())
            .unwrap()
            .with_names(vec!["y".into()])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        write_csv(&path, &ts).unwrap();
        let back = load_csv(&path).unwrap();
        for (a, b) in values.iter().zip(back.channel(0)) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.names().unwrap(), &["y".to_string()]);
    }

    #[test]
    fn written_file_has_index_and_header() {
        let ts = TimeSeries::from_channels(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        write_csv(&path, &ts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,c0,c1");
        assert!(lines.next().unwrap().starts_with("0,"));
        assert!(lines.next().unwrap().starts_with("1,"));
    }
}
