use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use super::DataError;
use crate::dataset::{RawDataset, SurvivalDataset};

/// A parsed CSV before validation. Cells are `None` where the field was
/// empty. The event column is stored as 1.0 (event) or 0.0 (censored).
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub time_column: usize,
    pub event_column: usize,
    pub cells: Vec<Vec<Option<f64>>>,
}

/// Event coding: `1`, `true`, `yes` are events; `0`, `false`, `no` are
/// censored. Case-insensitive; numeric spellings such as `1.0` are accepted.
pub fn parse_event(token: &str) -> Option<bool> {
    match token.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        other => match other.parse::<f64>() {
            Ok(1.0) => Some(true),
            Ok(0.0) => Some(false),
            _ => None,
        },
    }
}

/// Read a comma-separated file with a header row. Rows are numbered from 1
/// (the first data row) in error locations.
pub fn load_csv<R: Read>(input: R, time_column: &str, event_column: &str) -> Result<RawTable, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(DataError::DuplicateColumn(h.clone()));
        }
    }
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let time_idx = find(time_column)?;
    let event_idx = find(event_column)?;

    let mut cells = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record?;
        if record.len() != header.len() {
            return Err(DataError::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut parsed = Vec::with_capacity(header.len());
        for (c, field) in record.iter().enumerate() {
            if field.is_empty() {
                parsed.push(None);
            } else if c == event_idx {
                let e = parse_event(field).ok_or_else(|| DataError::InvalidEventValue {
                    row,
                    value: field.to_string(),
                })?;
                parsed.push(Some(if e { 1.0 } else { 0.0 }));
            } else {
                let v = field.parse::<f64>().map_err(|_| DataError::UnparsableNumber {
                    row,
                    column: header[c].clone(),
                    value: field.to_string(),
                })?;
                parsed.push(Some(v));
            }
        }
        cells.push(parsed);
    }
    Ok(RawTable {
        header,
        time_column: time_idx,
        event_column: event_idx,
        cells,
    })
}

pub fn load_csv_path(
    path: impl AsRef<Path>,
    time_column: &str,
    event_column: &str,
) -> Result<RawTable, DataError> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| DataError::Io(format!("{}: {e}", path.as_ref().display())))?;
    load_csv(std::io::BufReader::new(file), time_column, event_column)
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    /// Indices of the covariate columns (everything except time and event).
    pub fn covariate_columns(&self) -> Vec<usize> {
        (0..self.header.len())
            .filter(|&c| c != self.time_column && c != self.event_column)
            .collect()
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_none()).count()
    }

    /// Validate a complete table into a dataset.
    pub fn to_dataset(&self) -> Result<SurvivalDataset, DataError> {
        let covs = self.covariate_columns();
        let mut raw = RawDataset {
            variable_names: covs.iter().map(|&c| self.header[c].clone()).collect(),
            ..RawDataset::default()
        };
        for (r, row) in self.cells.iter().enumerate() {
            let get = |c: usize| {
                row[c].ok_or_else(|| DataError::MissingValue {
                    row: r + 1,
                    column: self.header[c].clone(),
                })
            };
            raw.times.push(get(self.time_column)?);
            raw.events.push(get(self.event_column)? == 1.0);
            raw.rows.push(covs.iter().map(|&c| get(c)).collect::<Result<_, _>>()?);
        }
        Ok(crate::dataset::validate_dataset(raw)?)
    }
}

/// Write a dataset as CSV with the time and event columns first; events are
/// written as `1`/`0`.
pub fn write_dataset_csv<W: Write>(
    data: &SurvivalDataset,
    out: W,
    time_column: &str,
    event_column: &str,
) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![time_column.to_string(), event_column.to_string()];
    header.extend(data.variable_names().iter().cloned());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for s in data.subjects() {
        record.clear();
        record.push(s.time.to_string());
        record.push(if s.event { "1" } else { "0" }.to_string());
        record.extend(s.covariate_row.iter().map(f64::to_string));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cell_becomes_missing() {
        let csv = "time,event,a,b\n1,1,0.5,2\n2,0,,3\n3,1,1.5,4\n";
        let t = load_csv(csv.as_bytes(), "time", "event").unwrap();
        assert_eq!(t.missing_count(), 1);
        assert_eq!(t.cells[1][2], None);
        assert_eq!(t.covariate_columns(), vec![2, 3]);
    }

    #[test]
    fn yes_no_events() {
        let csv = "time,event,a\n1,yes,0.5\n2,no,1\n3,TRUE,2\n";
        let t = load_csv(csv.as_bytes(), "time", "event").unwrap();
        let d = t.to_dataset().unwrap();
        assert_eq!(d.events(), &[true, false, true]);
    }

    #[test]
    fn ragged_row_location() {
        let csv = "time,event,a\n1,1,0.5\n2,0\n";
        assert_eq!(
            load_csv(csv.as_bytes(), "time", "event").unwrap_err(),
            DataError::RaggedRow {
                row: 2,
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn header_and_value_errors() {
        let csv = "t,event,a\n1,1,0.5\n";
        assert_eq!(
            load_csv(csv.as_bytes(), "time", "event").unwrap_err(),
            DataError::MissingColumn("time".into())
        );
        let csv = "time,event,a\n1,1,abc\n";
        assert!(matches!(
            load_csv(csv.as_bytes(), "time", "event").unwrap_err(),
            DataError::UnparsableNumber { row: 1, .. }
        ));
        let csv = "time,event,a\n1,maybe,1\n";
        assert!(matches!(
            load_csv(csv.as_bytes(), "time", "event").unwrap_err(),
            DataError::InvalidEventValue { row: 1, .. }
        ));
    }

    #[test]
    fn write_then_read_preserves_dataset() {
        let csv = "time,event,a,b\n1.25,1,0.1,-2\n2,0,3e-7,4\n0,1,1.5,0\n";
        let d = load_csv(csv.as_bytes(), "time", "event").unwrap().to_dataset().unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&d, &mut buf, "time", "event").unwrap();
        let back = load_csv(&buf[..], "time", "event").unwrap().to_dataset().unwrap();
        assert_eq!(d, back);
    }
}
