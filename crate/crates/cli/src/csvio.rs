//! CSV import with per-column kind inference, and CSV export.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use rma_core::{Column, Kind, Relation, Value};

use crate::ShellError;

/// Reads a CSV file with a mandatory header row.
///
/// A column becomes `int64` when every cell parses as an integer, `float64`
/// when every cell parses as a finite number, and `text` otherwise.
pub fn load_csv(path: &Path) -> Result<Relation, ShellError> {
    let file = std::fs::File::open(path).map_err(|e| ShellError::io(path, e))?;
    read_csv(file, path)
}

/// Like [`load_csv`] but reads from any source; `origin` only labels errors.
pub fn read_csv(source: impl Read, origin: &Path) -> Result<Relation, ShellError> {
    let csv_err = |source| ShellError::Csv {
        path: origin.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(ShellError::bad_csv(origin, "missing header row"));
    }
    let mut seen = HashSet::new();
    for h in &header {
        if h.is_empty() {
            return Err(ShellError::bad_csv(origin, "empty column name in header"));
        }
        if !seen.insert(h.as_str()) {
            return Err(ShellError::bad_csv(
                origin,
                format!("duplicate column name '{h}'"),
            ));
        }
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        // line 1 is the header
        let line = i + 2;
        if record.len() != header.len() {
            return Err(ShellError::bad_csv(
                origin,
                format!(
                    "line {line} has {} fields, header has {}",
                    record.len(),
                    header.len()
                ),
            ));
        }
        for (c, cell) in record.iter().enumerate() {
            if cell.trim().is_empty() {
                return Err(ShellError::bad_csv(
                    origin,
                    format!("line {line}: empty cell in column '{}'", header[c]),
                ));
            }
            cells[c].push(cell.to_string());
        }
    }

    let columns = header
        .into_iter()
        .zip(cells)
        .map(|(name, raw)| (name, infer(raw)));
    Ok(Relation::from_columns(columns)?)
}

fn infer(raw: Vec<String>) -> Column {
    if let Some(ints) = raw
        .iter()
        .map(|s| s.trim().parse::<i64>().ok())
        .collect::<Option<Vec<_>>>()
    {
        return Column::int(ints);
    }
    let floats = raw
        .iter()
        .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()));
    if let Some(floats) = floats.collect::<Option<Vec<_>>>() {
        return Column::float(floats);
    }
    Column::text(raw)
}

/// Renders one cell for CSV output. Floats use the shortest decimal that
/// parses back to the same value and always carry a decimal point or
/// exponent, so a re-import infers `float64` again.
pub fn csv_cell(v: &Value) -> String {
    match v {
        Value::Float(f) => format!("{f:?}"),
        Value::Int(i) => i.to_string(),
        Value::Text(s) => s.clone(),
    }
}

pub fn write_csv(r: &Relation, sink: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(r.schema().names())?;
    for row in r.rows() {
        w.write_record(row.iter().map(csv_cell))?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(r: &Relation, path: &Path) -> Result<(), ShellError> {
    let file = std::fs::File::create(path).map_err(|e| ShellError::io(path, e))?;
    write_csv(r, std::io::BufWriter::new(file)).map_err(|source| ShellError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Kinds of the columns of `r`, in order.
pub fn kinds(r: &Relation) -> Vec<Kind> {
    r.columns().iter().map(Column::kind).collect()
}
