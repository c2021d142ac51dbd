use std::cmp::Ordering;
use std::collections::HashSet;

use crate::columnar::{
    apply_permutation, sort_permutation, Attribute, Column, ColumnData, Kind, Relation, Schema,
    SortPermutation,
};
use crate::kernels::Matrix;

use super::RmaError;

/// Validates an order schema against `schema` and returns the application
/// schema (the complement, in schema order).
pub(super) fn split_schema(schema: &Schema, order: &[String]) -> Result<Vec<String>, RmaError> {
    if order.is_empty() {
        return Err(RmaError::EmptyOrderSchema);
    }
    for (i, a) in order.iter().enumerate() {
        schema.require(a)?;
        if order[..i].contains(a) {
            return Err(RmaError::DuplicateOrderAttribute(a.clone()));
        }
    }
    let app: Vec<String> = schema
        .attrs()
        .iter()
        .filter(|a| !order.contains(&a.name))
        .map(|a| {
            if a.kind.is_numeric() {
                Ok(a.name.clone())
            } else {
                Err(RmaError::NonNumericApplication {
                    attribute: a.name.clone(),
                    kind: a.kind,
                })
            }
        })
        .collect::<Result<_, _>>()?;
    if app.is_empty() {
        return Err(RmaError::EmptyApplicationSchema);
    }
    Ok(app)
}

fn order_columns<'a>(r: &'a Relation, order: &[String]) -> Vec<&'a Column> {
    order
        .iter()
        .map(|a| r.column_by_name(a).expect("validated"))
        .collect()
}

fn key_violation(r: &Relation, order: &[String], row: usize) -> RmaError {
    let values: Vec<String> = order_columns(r, order)
        .iter()
        .map(|c| c.value(row).to_string())
        .collect();
    RmaError::KeyViolation {
        attrs: order.join(", "),
        values: values.join(", "),
    }
}

/// Sorts by the order schema and rejects duplicate order parts.
pub(super) fn sort_by_key(r: &Relation, order: &[String]) -> Result<SortPermutation, RmaError> {
    let perm = sort_permutation(r, order)?;
    let cols = order_columns(r, order);
    for w in perm.indices().windows(2) {
        if cols
            .iter()
            .all(|c| c.cmp_rows(w[0], w[1]) == Ordering::Equal)
        {
            return Err(key_violation(r, order, w[1]));
        }
    }
    Ok(perm)
}

#[derive(PartialEq, Eq, Hash)]
enum KeyCell<'a> {
    Float(u64),
    Int(i64),
    Text(&'a str),
}

/// Key check by hashing, leaving the rows where they are. Equality agrees
/// with the ordering used by [`sort_by_key`].
pub(super) fn check_key_unsorted(r: &Relation, order: &[String]) -> Result<(), RmaError> {
    let cols = order_columns(r, order);
    let mut seen = HashSet::with_capacity(r.row_count());
    for row in 0..r.row_count() {
        let key: Vec<KeyCell<'_>> = cols
            .iter()
            .map(|c| match c.data() {
                ColumnData::Float64(v) => KeyCell::Float(v[row].to_bits()),
                ColumnData::Int64(v) => KeyCell::Int(v[row]),
                ColumnData::Text(v) => KeyCell::Text(&v[row]),
            })
            .collect();
        if !seen.insert(key) {
            return Err(key_violation(r, order, row));
        }
    }
    Ok(())
}

/// Gathers the named columns through `perm` (or shares them when `perm` is
/// `None`).
pub(super) fn aligned(
    r: &Relation,
    names: &[String],
    perm: Option<&SortPermutation>,
) -> Result<Vec<Column>, RmaError> {
    names
        .iter()
        .map(|n| {
            let c = r.column_by_name(n)?;
            Ok(match perm {
                Some(p) => apply_permutation(c, p)?,
                None => c.clone(),
            })
        })
        .collect()
}

pub(super) fn to_matrix(columns: &[Column]) -> Result<Matrix, RmaError> {
    let data = columns
        .iter()
        .map(|c| c.to_f64().expect("application columns are numeric"))
        .collect();
    Ok(Matrix::from_columns(data)?)
}

/// The order part of `r` sorted by `order`.
pub fn order_part(r: &Relation, order: &[String]) -> Result<Relation, RmaError> {
    split_schema(r.schema(), order)?;
    let perm = sort_by_key(r, order)?;
    let cols = aligned(r, order, Some(&perm))?;
    let attrs = order
        .iter()
        .map(|n| r.schema().attrs()[r.schema().require(n).expect("validated")].clone())
        .collect();
    Ok(Relation::new(Schema::new(attrs)?, cols)?)
}

/// The application part of `r` as a matrix, rows ordered by `order`.
pub fn matrix_constructor(r: &Relation, order: &[String]) -> Result<Matrix, RmaError> {
    let app = split_schema(r.schema(), order)?;
    if r.row_count() == 0 {
        return Err(RmaError::Kernel(crate::kernels::KernelError::Empty {
            rows: 0,
            cols: app.len(),
        }));
    }
    let perm = sort_by_key(r, order)?;
    to_matrix(&aligned(r, &app, Some(&perm))?)
}

/// The matrix `r` reduces to under `order`.
pub fn reduce(r: &Relation, order: &[String]) -> Result<Matrix, RmaError> {
    matrix_constructor(r, order)
}

/// Renders already sorted key values as attribute names.
pub(super) fn cast_names(col: &Column, attribute: &str) -> Result<Vec<String>, RmaError> {
    let names: Vec<String> = (0..col.len()).map(|i| col.value(i).to_string()).collect();
    let mut seen = HashSet::with_capacity(names.len());
    for n in &names {
        if n.is_empty() {
            return Err(RmaError::EmptyCastName(attribute.to_string()));
        }
        if !seen.insert(n.as_str()) {
            return Err(RmaError::DuplicateCastName {
                attribute: attribute.to_string(),
                name: n.clone(),
            });
        }
    }
    Ok(names)
}

/// Attribute names from the sorted values of key attribute `attribute`.
pub fn column_cast(r: &Relation, attribute: &str) -> Result<Vec<String>, RmaError> {
    let order = [attribute.to_string()];
    r.schema().require(attribute)?;
    let perm = sort_by_key(r, &order)?;
    cast_names(
        &apply_permutation(r.column_by_name(attribute)?, &perm)?,
        attribute,
    )
}

/// A text column holding the given attribute names.
pub fn schema_cast(attrs: &[impl AsRef<str>]) -> Result<Column, RmaError> {
    if attrs.is_empty() {
        return Err(RmaError::EmptySchemaCast);
    }
    Ok(Column::text(attrs.iter().map(|a| a.as_ref().to_string())))
}

/// Concatenates aligned column groups side by side and names them with
/// `schema`. The resulting rows must be unique.
pub fn relation_constructor(parts: Vec<Vec<Column>>, schema: Schema) -> Result<Relation, RmaError> {
    let columns: Vec<Column> = parts.into_iter().flatten().collect();
    let rows = columns.first().map_or(0, Column::len);
    let r = Relation::with_rows(schema, columns, rows)?;
    let all: Vec<String> = r.schema().names().map(str::to_string).collect();
    if check_key_unsorted(&r, &all).is_err() {
        return Err(RmaError::DuplicateRow);
    }
    Ok(r)
}

pub(super) fn float_attrs(names: &[String]) -> Vec<Attribute> {
    names
        .iter()
        .map(|n| Attribute::new(n.clone(), Kind::Float64))
        .collect()
}
