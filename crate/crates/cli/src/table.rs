//! Panel ingestion from CSV. Columns are series, rows are time points.
//! A header row is required; a leading `time` column (case-insensitive)
//! is recognized and dropped from the data matrix.

use sharedvol_core::{Panel, Series};

use crate::error::{CliError, Result};

#[derive(Debug)]
pub struct InputTable {
    pub labels: Vec<String>,
    /// Column-major data, one vector per series.
    pub columns: Vec<Vec<f64>>,
}

impl InputTable {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn into_panel(self) -> Result<Panel> {
        let mut series = Vec::with_capacity(self.columns.len());
        for (column, label) in self.columns.into_iter().zip(&self.labels) {
            let s = Series::new(column).map_err(|e| {
                CliError::Input(format!("column '{label}': {e}"))
            })?;
            series.push(s);
        }
        Panel::new(series, self.labels).map_err(|e| CliError::Input(e.to_string()))
    }
}

/// Split one CSV line. Quoting is not supported: the format is a plain
/// numeric matrix and labels containing commas are rejected upstream.
fn split_line(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

pub fn parse_table(raw: &str) -> Result<InputTable> {
    let mut lines = raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Input("line 1: expected a header row, found an empty file".into()))?;
    let mut labels: Vec<String> = split_line(header).iter().map(|s| s.to_string()).collect();
    if labels.iter().any(String::is_empty) {
        return Err(CliError::Input("line 1: header contains an empty label".into()));
    }

    let had_time_column = labels
        .first()
        .is_some_and(|l| l.eq_ignore_ascii_case("time"));
    if had_time_column {
        labels.remove(0);
    }
    if labels.is_empty() {
        return Err(CliError::Input(
            "line 1: header declares no data columns".into(),
        ));
    }

    let width = labels.len() + usize::from(had_time_column);
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for (idx, line) in lines {
        let lineno = idx + 1;
        let cells = split_line(line);
        if cells.len() != width {
            return Err(CliError::Input(format!(
                "line {lineno}: expected {width} cells, found {}",
                cells.len()
            )));
        }
        for (col, cell) in cells.iter().enumerate().skip(usize::from(had_time_column)) {
            let value: f64 = cell.parse().map_err(|_| {
                CliError::Input(format!(
                    "line {lineno}, column {}: could not parse '{cell}' as a number",
                    col + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Input(format!(
                    "line {lineno}, column {}: non-finite value '{cell}'",
                    col + 1
                )));
            }
            columns[col - usize::from(had_time_column)].push(value);
        }
    }

    if columns[0].is_empty() {
        return Err(CliError::Input("no data rows after the header".into()));
    }
    Ok(InputTable { labels, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_plain_matrix() {
        let table = parse_table("a,b\n1,2\n3,4\n5,6\n").unwrap();
        assert_eq!(table.labels, vec!["a", "b"]);
        assert_eq!(table.columns, vec![vec![1.0, 3.0, 5.0], vec![2.0, 4.0, 6.0]]);
    }

    #[test]
    fn drops_a_leading_time_column() {
        let table = parse_table("Time,x\n1,0.5\n2,0.7\n").unwrap();
        assert_eq!(table.labels, vec!["x"]);
        assert_eq!(table.columns, vec![vec![0.5, 0.7]]);
    }

    #[test]
    fn empty_file_is_an_input_error() {
        let err = parse_table("").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn bad_cell_reports_line_and_column() {
        let err = parse_table("a,b\n1,2\n1,oops\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("column 2"), "{msg}");
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = parse_table("a,b\n1,2\n3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn infinities_are_rejected() {
        let err = parse_table("a\ninf\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
