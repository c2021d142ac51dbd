//! Column storage: typed columns addressed by position, schemas and
//! relations built from them, and the sort/align primitives the rest of the
//! engine uses to reorder columns.
//!
//! A column is the tail of a binary association table; the head (object
//! identifier) is implicit and equals the position in the column. Columns are
//! immutable and reference counted, so projections share storage.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColumnarError {
    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),
    #[error("duplicate attribute '{0}'")]
    DuplicateAttribute(String),
    #[error("attribute names must be non-empty")]
    EmptyAttributeName,
    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("column '{name}' has kind {actual}, schema declares {expected}")]
    KindMismatch {
        name: String,
        expected: Kind,
        actual: Kind,
    },
    #[error("schema has {schema} attributes but {columns} columns were supplied")]
    ArityMismatch { schema: usize, columns: usize },
    #[error("non-finite float value in column '{0}'")]
    NonFinite(String),
}

/// Element kind of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Float64,
    Int64,
    Text,
}

impl Kind {
    pub fn is_numeric(self) -> bool {
        matches!(self, Kind::Float64 | Kind::Int64)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Float64 => "float64",
            Kind::Int64 => "int64",
            Kind::Text => "text",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        match s {
            "float64" => Some(Kind::Float64),
            "int64" => Some(Kind::Int64),
            "text" => Some(Kind::Text),
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single cell value. Used for row-wise access and literals; bulk work
/// stays on [`ColumnData`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Value {
    pub fn kind(&self) -> Kind {
        match self {
            Value::Float(_) => Kind::Float64,
            Value::Int(_) => Kind::Int64,
            Value::Text(_) => Kind::Text,
        }
    }

    /// Total order within a kind. Values of different kinds are ordered by
    /// kind so the comparison stays total, but callers never rely on that.
    pub fn cmp_same_kind(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Text(a), Value::Text(b)) => a.as_bytes().cmp(b.as_bytes()),
            _ => (self.kind() as u8).cmp(&(other.kind() as u8)),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            Value::Text(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

/// Owned storage of one column.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Float64(Vec<f64>),
    Int64(Vec<i64>),
    Text(Vec<String>),
}

impl ColumnData {
    pub fn kind(&self) -> Kind {
        match self {
            ColumnData::Float64(_) => Kind::Float64,
            ColumnData::Int64(_) => Kind::Int64,
            ColumnData::Text(_) => Kind::Text,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Float64(v) => v.len(),
            ColumnData::Int64(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An immutable, shareable column. Cloning is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct Column(Arc<ColumnData>);

impl Column {
    pub fn new(data: ColumnData) -> Self {
        Column(Arc::new(data))
    }

    pub fn float(values: Vec<f64>) -> Self {
        Column::new(ColumnData::Float64(values))
    }

    pub fn int(values: Vec<i64>) -> Self {
        Column::new(ColumnData::Int64(values))
    }

    pub fn text<S: Into<String>>(values: impl IntoIterator<Item = S>) -> Self {
        Column::new(ColumnData::Text(
            values.into_iter().map(Into::into).collect(),
        ))
    }

    pub fn from_values(kind: Kind, values: &[Value]) -> Self {
        match kind {
            Kind::Float64 => Column::float(values.iter().map(|v| v.as_f64().unwrap()).collect()),
            Kind::Int64 => Column::int(
                values
                    .iter()
                    .map(|v| match v {
                        Value::Int(i) => *i,
                        other => panic!("expected int64 value, got {other:?}"),
                    })
                    .collect(),
            ),
            Kind::Text => Column::text(values.iter().map(|v| v.to_string())),
        }
    }

    pub fn data(&self) -> &ColumnData {
        &self.0
    }

    pub fn kind(&self) -> Kind {
        self.0.kind()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self, row: usize) -> Value {
        match self.data() {
            ColumnData::Float64(v) => Value::Float(v[row]),
            ColumnData::Int64(v) => Value::Int(v[row]),
            ColumnData::Text(v) => Value::Text(v[row].clone()),
        }
    }

    pub fn cmp_rows(&self, a: usize, b: usize) -> Ordering {
        match self.data() {
            ColumnData::Float64(v) => v[a].total_cmp(&v[b]),
            ColumnData::Int64(v) => v[a].cmp(&v[b]),
            ColumnData::Text(v) => v[a].as_bytes().cmp(v[b].as_bytes()),
        }
    }

    /// Numeric values widened to `f64`; `None` for text columns.
    pub fn to_f64(&self) -> Option<Vec<f64>> {
        match self.data() {
            ColumnData::Float64(v) => Some(v.clone()),
            ColumnData::Int64(v) => Some(v.iter().map(|&x| x as f64).collect()),
            ColumnData::Text(_) => None,
        }
    }

    /// Gathers rows by position: output `k` is input `indices[k]`.
    pub fn gather(&self, indices: &[usize]) -> Column {
        match self.data() {
            ColumnData::Float64(v) => Column::float(indices.iter().map(|&i| v[i]).collect()),
            ColumnData::Int64(v) => Column::int(indices.iter().map(|&i| v[i]).collect()),
            ColumnData::Text(v) => Column::text(indices.iter().map(|&i| v[i].clone())),
        }
    }

    pub(crate) fn hash_key(&self, row: usize) -> KeyPart<'_> {
        match self.data() {
            ColumnData::Float64(v) => {
                // +0.0 and -0.0 compare equal, so they must hash equal too
                let x = if v[row] == 0.0 { 0.0 } else { v[row] };
                KeyPart::Float(x.to_bits())
            }
            ColumnData::Int64(v) => KeyPart::Int(v[row]),
            ColumnData::Text(v) => KeyPart::Text(&v[row]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum KeyPart<'a> {
    Float(u64),
    Int(i64),
    Text(&'a str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub kind: Kind,
}

impl Attribute {
    pub fn new(name: impl Into<String>, kind: Kind) -> Self {
        Attribute {
            name: name.into(),
            kind,
        }
    }
}

/// Ordered list of uniquely named, typed attributes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    attrs: Vec<Attribute>,
}

impl Schema {
    pub fn new(attrs: Vec<Attribute>) -> Result<Self, ColumnarError> {
        let mut seen = HashSet::new();
        for a in &attrs {
            if a.name.is_empty() {
                return Err(ColumnarError::EmptyAttributeName);
            }
            if !seen.insert(a.name.as_str()) {
                return Err(ColumnarError::DuplicateAttribute(a.name.clone()));
            }
        }
        Ok(Schema { attrs })
    }

    pub fn attrs(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attrs.iter().map(|a| a.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a.name == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, ColumnarError> {
        self.index_of(name)
            .ok_or_else(|| ColumnarError::UnknownAttribute(name.to_string()))
    }
}

/// A bag of tuples stored column-wise. All columns have the same length;
/// the row count is kept separately so zero-column relations still have one.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    name: Option<String>,
    schema: Schema,
    columns: Vec<Column>,
    rows: usize,
}

impl Relation {
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self, ColumnarError> {
        let rows = columns.first().map_or(0, Column::len);
        Self::with_rows(schema, columns, rows)
    }

    /// Like [`Relation::new`] but with an explicit row count, which matters
    /// only when there are no columns.
    pub fn with_rows(
        schema: Schema,
        columns: Vec<Column>,
        rows: usize,
    ) -> Result<Self, ColumnarError> {
        if schema.len() != columns.len() {
            return Err(ColumnarError::ArityMismatch {
                schema: schema.len(),
                columns: columns.len(),
            });
        }
        for (attr, col) in schema.attrs().iter().zip(&columns) {
            if col.kind() != attr.kind {
                return Err(ColumnarError::KindMismatch {
                    name: attr.name.clone(),
                    expected: attr.kind,
                    actual: col.kind(),
                });
            }
            if col.len() != rows {
                return Err(ColumnarError::LengthMismatch {
                    expected: rows,
                    actual: col.len(),
                });
            }
            if let ColumnData::Float64(v) = col.data() {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(ColumnarError::NonFinite(attr.name.clone()));
                }
            }
        }
        Ok(Relation {
            name: None,
            schema,
            columns,
            rows,
        })
    }

    /// Builds a relation from `(name, column)` pairs.
    pub fn from_columns<S: Into<String>>(
        cols: impl IntoIterator<Item = (S, Column)>,
    ) -> Result<Self, ColumnarError> {
        let (attrs, columns): (Vec<_>, Vec<_>) = cols
            .into_iter()
            .map(|(n, c)| (Attribute::new(n, c.kind()), c))
            .unzip();
        Relation::new(Schema::new(attrs)?, columns)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn unnamed(mut self) -> Self {
        self.name = None;
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn column_by_name(&self, name: &str) -> Result<&Column, ColumnarError> {
        Ok(&self.columns[self.schema.require(name)?])
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn row(&self, idx: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.value(idx)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<Value>> + '_ {
        (0..self.rows).map(|i| self.row(i))
    }

    /// Reorders every column by the same positions.
    pub fn gather(&self, indices: &[usize]) -> Relation {
        Relation {
            name: self.name.clone(),
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.gather(indices)).collect(),
            rows: indices.len(),
        }
    }
}

/// Row positions in the order a sort produced. Always a permutation of
/// `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortPermutation {
    indices: Vec<usize>,
}

impl SortPermutation {
    pub fn identity(n: usize) -> Self {
        SortPermutation {
            indices: (0..n).collect(),
        }
    }

    /// Wraps an index list, checking that it is a permutation.
    pub fn from_indices(indices: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; indices.len()];
        for &i in &indices {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(SortPermutation { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `inverse()[p[k]] == k`: the rank of each original row.
    pub fn inverse(&self) -> SortPermutation {
        let mut inv = vec![0; self.indices.len()];
        for (k, &i) in self.indices.iter().enumerate() {
            inv[i] = k;
        }
        SortPermutation { indices: inv }
    }
}

thread_local! {
    static SORTS: Cell<u64> = const { Cell::new(0) };
    static GATHERS: Cell<u64> = const { Cell::new(0) };
}

/// Number of sort operations performed on the current thread.
pub fn sort_operations() -> u64 {
    SORTS.with(Cell::get)
}

/// Number of permutation applications (leftfetchjoins) on the current thread.
pub fn gather_operations() -> u64 {
    GATHERS.with(Cell::get)
}

/// Ascending lexicographic permutation of `r` by `order_attrs`. Ties keep
/// their original relative order.
pub fn sort_permutation(
    r: &Relation,
    order_attrs: &[impl AsRef<str>],
) -> Result<SortPermutation, ColumnarError> {
    let cols = order_attrs
        .iter()
        .map(|a| r.column_by_name(a.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    SORTS.with(|c| c.set(c.get() + 1));
    let mut indices: Vec<usize> = (0..r.row_count()).collect();
    indices.sort_by(|&a, &b| {
        cols.iter()
            .map(|c| c.cmp_rows(a, b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    Ok(SortPermutation { indices })
}

/// Reorders `c` so that output position `k` holds input `p[k]`.
pub fn apply_permutation(c: &Column, p: &SortPermutation) -> Result<Column, ColumnarError> {
    if c.len() != p.len() {
        return Err(ColumnarError::LengthMismatch {
            expected: p.len(),
            actual: c.len(),
        });
    }
    GATHERS.with(|g| g.set(g.get() + 1));
    Ok(c.gather(p.indices()))
}

/// Projects `names` in the given order. Columns are shared, not copied.
pub fn project_columns(r: &Relation, names: &[impl AsRef<str>]) -> Result<Relation, ColumnarError> {
    let mut attrs = Vec::with_capacity(names.len());
    let mut columns = Vec::with_capacity(names.len());
    for n in names {
        let idx = r.schema().require(n.as_ref())?;
        attrs.push(r.schema().attrs()[idx].clone());
        columns.push(r.column(idx).clone());
    }
    Relation::with_rows(Schema::new(attrs)?, columns, r.row_count())
}
