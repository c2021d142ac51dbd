//! On-disk table storage.
//!
//! A table `t` with `n` attributes is stored as `t.schema` plus the files
//! `t.0.col` .. `t.{n-1}.col`. The schema file starts with `rows <count>` and
//! has one `<kind>\t<name>` line per attribute. Column files hold raw
//! little-endian values: 8 bytes per `float64` or `int64` cell, and a `u32`
//! byte length followed by UTF-8 bytes per `text` cell.

use std::fs;
use std::path::{Path, PathBuf};

use rma_core::{Attribute, Column, ColumnData, Kind, Relation, Schema};

use crate::ShellError;

const SCHEMA_EXT: &str = "schema";

#[derive(Debug, Clone)]
pub struct CatalogDir {
    root: PathBuf,
}

/// Table names double as file stems, so they are restricted to identifiers.
pub fn valid_table_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl CatalogDir {
    /// Opens `root`, creating the directory if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ShellError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| ShellError::io(&root, e))?;
        Ok(CatalogDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn schema_path(&self, table: &str) -> PathBuf {
        self.root.join(format!("{table}.{SCHEMA_EXT}"))
    }

    fn column_path(&self, table: &str, i: usize) -> PathBuf {
        self.root.join(format!("{table}.{i}.col"))
    }

    /// Names of all stored tables, sorted.
    pub fn tables(&self) -> Result<Vec<String>, ShellError> {
        let entries = fs::read_dir(&self.root).map_err(|e| ShellError::io(&self.root, e))?;
        let mut names = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| ShellError::io(&self.root, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some(SCHEMA_EXT) {
                continue;
            }
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                if valid_table_name(stem) {
                    names.push(stem.to_string());
                }
            }
        }
        names.sort();
        Ok(names)
    }

    pub fn load_all(&self) -> Result<Vec<(String, Relation)>, ShellError> {
        self.tables()?
            .into_iter()
            .map(|t| self.load(&t).map(|r| (t, r)))
            .collect()
    }

    pub fn load(&self, table: &str) -> Result<Relation, ShellError> {
        let schema_path = self.schema_path(table);
        let text = fs::read_to_string(&schema_path).map_err(|e| ShellError::io(&schema_path, e))?;
        let bad = |msg: String| ShellError::catalog(&schema_path, msg);
        let mut lines = text.lines();
        let rows: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("rows "))
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| bad("first line must be 'rows <count>'".into()))?;
        let mut attrs = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let (kind, name) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("attribute line {} is not '<kind>\\t<name>'", i + 2)))?;
            let kind = Kind::parse(kind).ok_or_else(|| bad(format!("unknown kind '{kind}'")))?;
            attrs.push(Attribute::new(name, kind));
        }
        let columns = attrs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let path = self.column_path(table, i);
                let bytes = fs::read(&path).map_err(|e| ShellError::io(&path, e))?;
                decode(a.kind, &bytes, rows).map_err(|m| ShellError::catalog(&path, m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let schema = Schema::new(attrs)?;
        Ok(Relation::new(schema, columns)?.named(table))
    }

    /// Writes `r` under `table`, replacing any earlier version.
    pub fn store(&self, table: &str, r: &Relation) -> Result<(), ShellError> {
        if !valid_table_name(table) {
            return Err(ShellError::Usage(format!(
                "table name '{table}' must be letters, digits and underscores"
            )));
        }
        let stale = self.stored_width(table);
        for (i, c) in r.columns().iter().enumerate() {
            let path = self.column_path(table, i);
            fs::write(&path, encode(c.data())).map_err(|e| ShellError::io(&path, e))?;
        }
        let mut schema = format!("rows {}\n", r.row_count());
        for a in r.schema().attrs() {
            schema.push_str(&format!("{}\t{}\n", a.kind.name(), a.name));
        }
        let path = self.schema_path(table);
        fs::write(&path, schema).map_err(|e| ShellError::io(&path, e))?;
        for i in r.schema().len()..stale {
            let _ = fs::remove_file(self.column_path(table, i));
        }
        Ok(())
    }

    fn stored_width(&self, table: &str) -> usize {
        fs::read_to_string(self.schema_path(table))
            .map(|t| t.lines().skip(1).filter(|l| !l.is_empty()).count())
            .unwrap_or(0)
    }
}

fn encode(data: &ColumnData) -> Vec<u8> {
    match data {
        ColumnData::Float64(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        ColumnData::Int64(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        ColumnData::Text(v) => {
            let mut out = Vec::new();
            for s in v {
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
            out
        }
    }
}

fn decode(kind: Kind, bytes: &[u8], rows: usize) -> Result<Column, String> {
    let fixed = |width: usize| {
        if bytes.len() != rows * width {
            Err(format!(
                "expected {} bytes for {rows} rows, found {}",
                rows * width,
                bytes.len()
            ))
        } else {
            Ok(bytes
                .chunks_exact(width)
                .map(|c| <[u8; 8]>::try_from(c).unwrap()))
        }
    };
    match kind {
        Kind::Float64 => {
            let v: Vec<f64> = fixed(8)?.map(f64::from_le_bytes).collect();
            if v.iter().any(|x| !x.is_finite()) {
                return Err("column holds a non-finite value".into());
            }
            Ok(Column::float(v))
        }
        Kind::Int64 => Ok(Column::int(fixed(8)?.map(i64::from_le_bytes).collect())),
        Kind::Text => {
            let mut out = Vec::with_capacity(rows);
            let mut rest = bytes;
            while !rest.is_empty() {
                let (len, tail) = rest
                    .split_first_chunk::<4>()
                    .ok_or("truncated length prefix")?;
                let len = u32::from_le_bytes(*len) as usize;
                if tail.len() < len {
                    return Err("truncated text value".into());
                }
                let s =
                    std::str::from_utf8(&tail[..len]).map_err(|e| format!("invalid UTF-8: {e}"))?;
                out.push(s.to_string());
                rest = &tail[len..];
            }
            if out.len() != rows {
                return Err(format!("expected {rows} values, found {}", out.len()));
            }
            Ok(Column::text(out))
        }
    }
}
