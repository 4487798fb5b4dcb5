//! Instance files: `<prefix>.A.csv` (obs rows × n columns) and
//! `<prefix>.b.csv` (obs rows, one column), no header, comma separated.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::lasso::RawInstance;
use crate::{Error, Matrix, Result, Vector};

/// The two files that make up the instance with the given prefix.
pub fn instance_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".A.csv"), with(".b.csv"))
}

/// Whether both instance files exist for `prefix`.
pub fn instance_exists(prefix: &Path) -> bool {
    let (a, b) = instance_paths(prefix);
    a.is_file() && b.is_file()
}

pub fn load_csv_instance(prefix: &Path) -> Result<RawInstance> {
    let (a_path, b_path) = instance_paths(prefix);
    let a_rows = read_rows(&a_path)?;
    let b_rows = read_rows(&b_path)?;
    let n = a_rows.first().map(|(_, r)| r.len()).ok_or(Error::EmptyMatrix)?;
    for (line, row) in &a_rows {
        if row.len() != n {
            return Err(parse_err(&a_path, *line, format!("ragged row: {} columns, expected {n}", row.len())));
        }
    }
    for (line, row) in &b_rows {
        if row.len() != 1 {
            return Err(parse_err(&b_path, *line, format!("expected one column, found {}", row.len())));
        }
    }
    if b_rows.len() != a_rows.len() {
        // first row present in one file but not the other
        let line = a_rows.len().min(b_rows.len()) as u64 + 1;
        return Err(parse_err(
            &b_path,
            line,
            format!("row count mismatch: A has {} rows, b has {}", a_rows.len(), b_rows.len()),
        ));
    }
    let obs = a_rows.len();
    let a = Matrix::from_fn(obs, n, |r, c| a_rows[r].1[c]);
    let b = Vector::from_fn(obs, |r, _| b_rows[r].1[0]);
    Ok(RawInstance { a, b })
}

/// Write an instance; values use the shortest representation that parses back
/// to the identical `f64`.
pub fn write_csv_instance(prefix: &Path, raw: &RawInstance) -> Result<()> {
    let (a_path, b_path) = instance_paths(prefix);
    let mut w = writer(&a_path)?;
    for r in 0..raw.a.nrows() {
        let row: Vec<String> = raw.a.row(r).iter().map(|v| v.to_string()).collect();
        w.write_record(&row).map_err(|e| csv_io(&a_path, e))?;
    }
    w.flush().map_err(|e| io_err(&a_path, e))?;
    let mut w = writer(&b_path)?;
    for v in raw.b.iter() {
        w.write_record([v.to_string()]).map_err(|e| csv_io(&b_path, e))?;
    }
    w.flush().map_err(|e| io_err(&b_path, e))?;
    Ok(())
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(file))
}

/// Parse every record into numbers, tagging each with its 1-based line.
fn read_rows(path: &Path) -> Result<Vec<(u64, Vec<f64>)>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(path, line, format!("column {}: `{cell}` is not a finite number", col + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

fn parse_err(path: &Path, line: u64, msg: String) -> Error {
    Error::Parse { path: path.to_path_buf(), line: line as usize, msg }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    io_err(path, std::io::Error::other(e))
}
