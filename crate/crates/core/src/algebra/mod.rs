//! Classical relational operators over bags: selection, projection, join,
//! cross product, rename and grouped aggregation.

mod expr;

use std::collections::HashMap;

use thiserror::Error;

use crate::columnar::{
    Attribute, Column, ColumnData, ColumnarError, KeyPart, Kind, Relation, Schema,
};

pub use expr::{evaluate, BinaryOp, Evaluated, ExprType, ScalarExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Columnar(#[from] ColumnarError),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("numeric overflow")]
    Overflow,
    #[error("duplicate output column '{0}'")]
    DuplicateOutput(String),
    #[error("column '{0}' appears on both sides of a join; rename one side first")]
    OverlappingSchemas(String),
    #[error("{0} over an empty input has no value")]
    EmptyAggregate(String),
}

pub fn select(r: &Relation, predicate: &ScalarExpr) -> Result<Relation, AlgebraError> {
    let mask = evaluate(predicate, r)?.into_mask()?;
    let keep: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    Ok(r.gather(&keep))
}

pub fn project(r: &Relation, exprs: &[(ScalarExpr, String)]) -> Result<Relation, AlgebraError> {
    let mut attrs = Vec::with_capacity(exprs.len());
    let mut columns = Vec::with_capacity(exprs.len());
    for (e, name) in exprs {
        if attrs.iter().any(|a: &Attribute| &a.name == name) {
            return Err(AlgebraError::DuplicateOutput(name.clone()));
        }
        let col = match e {
            // plain references share storage
            ScalarExpr::Column(c) => r
                .column_by_name(c)
                .map_err(|_| AlgebraError::UnknownColumn(c.clone()))?
                .clone(),
            _ => evaluate(e, r)?.into_column()?,
        };
        attrs.push(Attribute::new(name.clone(), col.kind()));
        columns.push(col);
    }
    Ok(Relation::with_rows(
        Schema::new(attrs)?,
        columns,
        r.row_count(),
    )?)
}

fn concat_schemas(r: &Relation, s: &Relation) -> Result<Schema, AlgebraError> {
    if let Some(dup) = s
        .schema()
        .names()
        .find(|n| r.schema().index_of(n).is_some())
    {
        return Err(AlgebraError::OverlappingSchemas(dup.to_string()));
    }
    let attrs = r
        .schema()
        .attrs()
        .iter()
        .chain(s.schema().attrs())
        .cloned()
        .collect();
    Ok(Schema::new(attrs)?)
}

/// Pairs row `left[k]` of `r` with row `right[k]` of `s`.
fn pair_rows(
    r: &Relation,
    s: &Relation,
    schema: Schema,
    left: &[usize],
    right: &[usize],
) -> Result<Relation, AlgebraError> {
    let columns = r
        .columns()
        .iter()
        .map(|c| c.gather(left))
        .chain(s.columns().iter().map(|c| c.gather(right)))
        .collect();
    Ok(Relation::with_rows(schema, columns, left.len())?)
}

pub fn cross(r: &Relation, s: &Relation) -> Result<Relation, AlgebraError> {
    let schema = concat_schemas(r, s)?;
    let (n, m) = (r.row_count(), s.row_count());
    let left: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, m)).collect();
    let right: Vec<usize> = (0..n).flat_map(|_| 0..m).collect();
    pair_rows(r, s, schema, &left, &right)
}

/// Theta join. Equality conjuncts between a column of `r` and a column of
/// `s` of the same kind are answered with a hash table; the full predicate
/// is then applied to the candidate pairs. Output order is that of a nested
/// loop with `r` outer.
pub fn join(r: &Relation, s: &Relation, predicate: &ScalarExpr) -> Result<Relation, AlgebraError> {
    let schema = concat_schemas(r, s)?;
    let probe = Relation::with_rows(
        schema.clone(),
        r.columns()
            .iter()
            .chain(s.columns())
            .map(|c| c.gather(&[]))
            .collect(),
        0,
    )?;
    evaluate(predicate, &probe)?.into_mask()?;

    let keys: Vec<(usize, usize)> = predicate
        .conjuncts()
        .into_iter()
        .filter_map(|c| equi_key(c, r, s))
        .collect();
    if keys.is_empty() {
        return select(&cross(r, s)?, predicate);
    }

    let mut table: HashMap<Vec<KeyPart<'_>>, Vec<usize>> = HashMap::new();
    for j in 0..s.row_count() {
        let key = keys
            .iter()
            .map(|&(_, sc)| s.column(sc).hash_key(j))
            .collect();
        table.entry(key).or_default().push(j);
    }
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for i in 0..r.row_count() {
        let key: Vec<KeyPart<'_>> = keys
            .iter()
            .map(|&(rc, _)| r.column(rc).hash_key(i))
            .collect();
        if let Some(matches) = table.get(&key) {
            for &j in matches {
                left.push(i);
                right.push(j);
            }
        }
    }
    select(&pair_rows(r, s, schema, &left, &right)?, predicate)
}

fn equi_key(term: &ScalarExpr, r: &Relation, s: &Relation) -> Option<(usize, usize)> {
    let ScalarExpr::Binary {
        op: BinaryOp::Eq,
        left,
        right,
    } = term
    else {
        return None;
    };
    let (ScalarExpr::Column(a), ScalarExpr::Column(b)) = (left.as_ref(), right.as_ref()) else {
        return None;
    };
    let pair = match (r.schema().index_of(a), s.schema().index_of(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => (r.schema().index_of(b)?, s.schema().index_of(a)?),
    };
    (r.column(pair.0).kind() == s.column(pair.1).kind()).then_some(pair)
}

/// Renames attributes; names not in `mapping` are kept.
pub fn rename(r: &Relation, mapping: &[(String, String)]) -> Result<Relation, AlgebraError> {
    for (old, _) in mapping {
        r.schema().require(old)?;
    }
    let attrs = r
        .schema()
        .attrs()
        .iter()
        .map(|a| {
            let name = mapping
                .iter()
                .find(|(old, _)| *old == a.name)
                .map_or(a.name.clone(), |(_, new)| new.clone());
            Attribute::new(name, a.kind)
        })
        .collect();
    let out = Relation::with_rows(Schema::new(attrs)?, r.columns().to_vec(), r.row_count())?;
    Ok(match r.name() {
        Some(n) => out.named(n),
        None => out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggFunc {
    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Count => "COUNT",
            AggFunc::Sum => "SUM",
            AggFunc::Avg => "AVG",
            AggFunc::Min => "MIN",
            AggFunc::Max => "MAX",
        }
    }

    pub fn parse(s: &str) -> Option<AggFunc> {
        match s.to_ascii_uppercase().as_str() {
            "COUNT" => Some(AggFunc::Count),
            "SUM" => Some(AggFunc::Sum),
            "AVG" => Some(AggFunc::Avg),
            "MIN" => Some(AggFunc::Min),
            "MAX" => Some(AggFunc::Max),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggSpec {
    pub func: AggFunc,
    /// `None` is `*`, only meaningful for COUNT.
    pub arg: Option<ScalarExpr>,
    pub name: String,
}

impl AggSpec {
    pub fn new(func: AggFunc, arg: Option<ScalarExpr>, name: impl Into<String>) -> Self {
        AggSpec {
            func,
            arg,
            name: name.into(),
        }
    }

    pub fn output_kind(&self, schema: &Schema) -> Result<Kind, AlgebraError> {
        let arg_kind = match &self.arg {
            None if self.func == AggFunc::Count => return Ok(Kind::Int64),
            None => {
                return Err(AlgebraError::Type(format!(
                    "{}(*) is not allowed",
                    self.func.name()
                )))
            }
            Some(e) => e.type_in(schema)?,
        };
        match (self.func, arg_kind) {
            (AggFunc::Count, _) => Ok(Kind::Int64),
            (AggFunc::Avg, ExprType::Value(k)) if k.is_numeric() => Ok(Kind::Float64),
            (_, ExprType::Value(k)) if k.is_numeric() => Ok(k),
            (f, t) => Err(AlgebraError::Type(format!(
                "{} expects a number, got {t}",
                f.name()
            ))),
        }
    }
}

/// Grouped aggregation. Groups appear in order of first occurrence; with no
/// grouping attributes the result has exactly one row.
pub fn aggregate(
    r: &Relation,
    group_by: &[String],
    aggs: &[AggSpec],
) -> Result<Relation, AlgebraError> {
    let group_idx = group_by
        .iter()
        .map(|g| r.schema().require(g))
        .collect::<Result<Vec<_>, _>>()?;
    let kinds = aggs
        .iter()
        .map(|a| a.output_kind(r.schema()))
        .collect::<Result<Vec<_>, _>>()?;

    let mut groups: Vec<Vec<usize>> = Vec::new();
    if group_idx.is_empty() {
        groups.push((0..r.row_count()).collect());
    } else {
        let mut index: HashMap<Vec<KeyPart<'_>>, usize> = HashMap::new();
        for row in 0..r.row_count() {
            let key = group_idx
                .iter()
                .map(|&c| r.column(c).hash_key(row))
                .collect();
            let g = *index.entry(key).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(row);
        }
    }

    let firsts: Vec<usize> = groups
        .iter()
        .map(|g| g.first().copied().unwrap_or(0))
        .collect();
    let mut attrs = Vec::new();
    let mut columns = Vec::new();
    for &c in &group_idx {
        attrs.push(r.schema().attrs()[c].clone());
        columns.push(r.column(c).gather(&firsts));
    }
    for (spec, kind) in aggs.iter().zip(kinds) {
        let arg = spec.arg.as_ref().map(|e| evaluate(e, r)).transpose()?;
        let col = aggregate_column(spec, kind, arg.as_ref(), &groups)?;
        attrs.push(Attribute::new(spec.name.clone(), kind));
        columns.push(col);
    }
    Ok(Relation::with_rows(
        Schema::new(attrs)?,
        columns,
        groups.len(),
    )?)
}

fn aggregate_column(
    spec: &AggSpec,
    kind: Kind,
    arg: Option<&Evaluated>,
    groups: &[Vec<usize>],
) -> Result<Column, AlgebraError> {
    if spec.func == AggFunc::Count {
        return Ok(Column::int(groups.iter().map(|g| g.len() as i64).collect()));
    }
    let Some(Evaluated::Data(data)) = arg else {
        unreachable!("type-checked");
    };
    let empty = || AlgebraError::EmptyAggregate(spec.func.name().to_string());
    match (data, kind) {
        (ColumnData::Int64(v), Kind::Int64) => {
            let out = groups
                .iter()
                .map(|g| {
                    let mut it = g.iter().map(|&i| v[i]);
                    match spec.func {
                        AggFunc::Sum => it
                            .try_fold(0i64, i64::checked_add)
                            .ok_or(AlgebraError::Overflow),
                        AggFunc::Min => it.min().ok_or_else(empty),
                        _ => it.max().ok_or_else(empty),
                    }
                })
                .collect::<Result<_, _>>()?;
            Ok(Column::int(out))
        }
        (data, _) => {
            let v = match data {
                ColumnData::Float64(v) => v.clone(),
                ColumnData::Int64(v) => v.iter().map(|&x| x as f64).collect(),
                ColumnData::Text(_) => unreachable!("type-checked"),
            };
            let out = groups
                .iter()
                .map(|g| {
                    let it = g.iter().map(|&i| v[i]);
                    match spec.func {
                        AggFunc::Sum => Ok(it.sum()),
                        AggFunc::Avg if g.is_empty() => Err(empty()),
                        AggFunc::Avg => Ok(it.sum::<f64>() / g.len() as f64),
                        AggFunc::Min => it.reduce(f64::min).ok_or_else(empty),
                        _ => it.reduce(f64::max).ok_or_else(empty),
                    }
                })
                .collect::<Result<_, _>>()?;
            Ok(Column::float(out))
        }
    }
}
