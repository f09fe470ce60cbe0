//! CSV input.

use std::fs::File;
use std::path::Path;

use qcorr::SampleMatrix;

use crate::error::{CliError, Result};

const OP: &str = "cli::ingest_csv";

/// Parsed columns plus the number of rows that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub sample: SampleMatrix,
    pub dropped: usize,
}

fn parse_field(field: &str) -> Option<f64> {
    let v: f64 = field.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Reads the selected columns (all columns when `columns` is empty).
///
/// A header row is required. Rows where any selected field is missing or
/// not a finite number are dropped and counted; the order of the remaining
/// rows is preserved.
pub fn ingest_csv(path: &Path, columns: &[String]) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::data(
            OP,
            format!("{}: missing header row", path.display()),
        ));
    }

    let names: Vec<String> = if columns.is_empty() {
        headers.clone()
    } else {
        columns.to_vec()
    };
    let mut index = Vec::with_capacity(names.len());
    for name in &names {
        match headers.iter().position(|h| h == name) {
            Some(i) => index.push(i),
            None => {
                return Err(CliError::data(
                    OP,
                    format!("unknown column {name:?}; available: {}", headers.join(", ")),
                ))
            }
        }
    }

    let mut data: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut bad_fields = vec![0usize; names.len()];
    let mut dropped = 0;
    let mut row = Vec::with_capacity(names.len());
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        row.clear();
        for (k, &i) in index.iter().enumerate() {
            match record.get(i).and_then(parse_field) {
                Some(v) => row.push(v),
                None => bad_fields[k] += 1,
            }
        }
        if row.len() == names.len() {
            for (col, &v) in data.iter_mut().zip(&row) {
                col.push(v);
            }
        } else {
            dropped += 1;
        }
    }

    if data[0].is_empty() {
        let culprits: Vec<&str> = names
            .iter()
            .zip(&bad_fields)
            .filter(|(_, &b)| b > 0)
            .map(|(n, _)| n.as_str())
            .collect();
        let msg = if culprits.is_empty() {
            "no data rows".to_string()
        } else {
            format!(
                "no usable rows; non-numeric or missing values in column(s) {}",
                culprits.join(", ")
            )
        };
        return Err(CliError::data(OP, msg));
    }
    let sample = SampleMatrix::new(names, data)?;
    Ok(Ingested { sample, dropped })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        CliError::data(OP, format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn two_columns() {
        let f = file("a,b\n1,2\n3,4.5\n-1e-3,7\n");
        let got = ingest_csv(f.path(), &[]).unwrap();
        assert_eq!(got.sample.d(), 2);
        assert_eq!(got.sample.column(1), &[2.0, 4.5, 7.0]);
        assert_eq!(got.dropped, 0);
    }

    #[test]
    fn blank_cell_drops_one_row() {
        let mut text = String::from("x,y\n");
        for i in 0..100 {
            if i == 37 {
                text.push_str(&format!("{i},\n"));
            } else {
                text.push_str(&format!("{i},{}\n", i * 2));
            }
        }
        let got = ingest_csv(file(&text).path(), &[]).unwrap();
        assert_eq!(got.sample.n(), 99);
        assert_eq!(got.dropped, 1);
        assert_eq!(got.sample.column(0)[37], 38.0);
    }

    #[test]
    fn selection_and_order() {
        let f = file("t,price,vol\n2020-01-01,1.5,10\n2020-01-02,1.25,11\n");
        let got = ingest_csv(f.path(), &["vol".into(), "price".into()]).unwrap();
        assert_eq!(
            got.sample.names(),
            &["vol".to_string(), "price".to_string()]
        );
        assert_eq!(got.sample.column(1), &[1.5, 1.25]);
    }

    #[test]
    fn non_numeric_column_is_named() {
        let f = file("t,price\n2020-01-01,1.5\n2020-01-02,1.25\n");
        let err = ingest_csv(f.path(), &["t".into(), "price".into()]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("column(s) t"), "{err}");
    }

    #[test]
    fn unknown_column_lists_available() {
        let f = file("a,b\n1,2\n");
        let err = ingest_csv(f.path(), &["c".into()]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("\"c\"") && msg.contains("a, b"), "{msg}");
    }

    #[test]
    fn missing_file_is_io() {
        let err = ingest_csv(Path::new("/nonexistent/qcorr.csv"), &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn nan_and_inf_are_dropped() {
        let f = file("a\n1\nnan\ninf\n2\n");
        let got = ingest_csv(f.path(), &[]).unwrap();
        assert_eq!(got.sample.column(0), &[1.0, 2.0]);
        assert_eq!(got.dropped, 2);
    }

    #[test]
    fn header_only_is_data_error() {
        let err = ingest_csv(file("a,b\n").path(), &[]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
