//! Scalar expressions, evaluated a column at a time.

use std::cmp::Ordering;
use std::fmt;

use crate::columnar::{Column, ColumnData, Kind, Relation, Schema, Value};

use super::AlgebraError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    NotEq,
    Lt,
    Gt,
    LtEq,
    GtEq,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Eq => "=",
            BinaryOp::NotEq => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::LtEq => "<=",
            BinaryOp::GtEq => ">=",
            BinaryOp::And => "AND",
            BinaryOp::Or => "OR",
        }
    }

    fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div
        )
    }

    fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq
                | BinaryOp::NotEq
                | BinaryOp::Lt
                | BinaryOp::Gt
                | BinaryOp::LtEq
                | BinaryOp::GtEq
        )
    }

    fn holds(self, o: Ordering) -> bool {
        match self {
            BinaryOp::Eq => o.is_eq(),
            BinaryOp::NotEq => o.is_ne(),
            BinaryOp::Lt => o.is_lt(),
            BinaryOp::Gt => o.is_gt(),
            BinaryOp::LtEq => o.is_le(),
            BinaryOp::GtEq => o.is_ge(),
            _ => unreachable!("not a comparison"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Column(String),
    Literal(Value),
    Bool(bool),
    Binary {
        op: BinaryOp,
        left: Box<ScalarExpr>,
        right: Box<ScalarExpr>,
    },
    Not(Box<ScalarExpr>),
    Neg(Box<ScalarExpr>),
}

/// Static type of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprType {
    Value(Kind),
    Bool,
}

impl fmt::Display for ExprType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprType::Value(k) => write!(f, "{k}"),
            ExprType::Bool => f.write_str("boolean"),
        }
    }
}

impl ScalarExpr {
    pub fn col(name: impl Into<String>) -> Self {
        ScalarExpr::Column(name.into())
    }

    pub fn lit(v: Value) -> Self {
        ScalarExpr::Literal(v)
    }

    pub fn binary(op: BinaryOp, left: ScalarExpr, right: ScalarExpr) -> Self {
        ScalarExpr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn eq(left: ScalarExpr, right: ScalarExpr) -> Self {
        Self::binary(BinaryOp::Eq, left, right)
    }

    pub fn and(left: ScalarExpr, right: ScalarExpr) -> Self {
        Self::binary(BinaryOp::And, left, right)
    }

    pub fn type_in(&self, schema: &Schema) -> Result<ExprType, AlgebraError> {
        match self {
            ScalarExpr::Column(name) => schema
                .index_of(name)
                .map(|i| ExprType::Value(schema.attrs()[i].kind))
                .ok_or_else(|| AlgebraError::UnknownColumn(name.clone())),
            ScalarExpr::Literal(v) => Ok(ExprType::Value(v.kind())),
            ScalarExpr::Bool(_) => Ok(ExprType::Bool),
            ScalarExpr::Not(e) => match e.type_in(schema)? {
                ExprType::Bool => Ok(ExprType::Bool),
                t => Err(AlgebraError::Type(format!("NOT expects boolean, got {t}"))),
            },
            ScalarExpr::Neg(e) => match e.type_in(schema)? {
                t @ ExprType::Value(k) if k.is_numeric() => Ok(t),
                t => Err(AlgebraError::Type(format!(
                    "unary minus expects a number, got {t}"
                ))),
            },
            ScalarExpr::Binary { op, left, right } => {
                let (l, r) = (left.type_in(schema)?, right.type_in(schema)?);
                binary_type(*op, l, r)
            }
        }
    }

    /// Columns referenced by the expression, in first-use order.
    pub fn columns(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ScalarExpr::Column(n) => {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
            ScalarExpr::Literal(_) | ScalarExpr::Bool(_) => {}
            ScalarExpr::Not(e) | ScalarExpr::Neg(e) => e.collect_columns(out),
            ScalarExpr::Binary { left, right, .. } => {
                left.collect_columns(out);
                right.collect_columns(out);
            }
        }
    }

    /// Splits a conjunction into its terms.
    pub fn conjuncts(&self) -> Vec<&ScalarExpr> {
        match self {
            ScalarExpr::Binary {
                op: BinaryOp::And,
                left,
                right,
            } => {
                let mut v = left.conjuncts();
                v.extend(right.conjuncts());
                v
            }
            other => vec![other],
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarExpr::Column(n) => f.write_str(n),
            ScalarExpr::Literal(Value::Text(s)) => write!(f, "'{}'", s.replace('\'', "''")),
            ScalarExpr::Literal(v) => write!(f, "{v}"),
            ScalarExpr::Bool(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            ScalarExpr::Not(e) => write!(f, "NOT ({e})"),
            ScalarExpr::Neg(e) => write!(f, "-({e})"),
            ScalarExpr::Binary { op, left, right } => write!(f, "({left} {} {right})", op.symbol()),
        }
    }
}

fn binary_type(op: BinaryOp, l: ExprType, r: ExprType) -> Result<ExprType, AlgebraError> {
    use ExprType::*;
    let mismatch = || {
        AlgebraError::Type(format!(
            "operator {} cannot be applied to {l} and {r}",
            op.symbol()
        ))
    };
    match op {
        BinaryOp::And | BinaryOp::Or => match (l, r) {
            (Bool, Bool) => Ok(Bool),
            _ => Err(mismatch()),
        },
        _ if op.is_arithmetic() => match (l, r) {
            (Value(a), Value(b)) if a.is_numeric() && b.is_numeric() => {
                if op == BinaryOp::Div || a == Kind::Float64 || b == Kind::Float64 {
                    Ok(Value(Kind::Float64))
                } else {
                    Ok(Value(Kind::Int64))
                }
            }
            _ => Err(mismatch()),
        },
        _ => match (l, r) {
            (Value(a), Value(b)) if a == b || (a.is_numeric() && b.is_numeric()) => Ok(Bool),
            _ => Err(mismatch()),
        },
    }
}

/// Result of evaluating an expression over a relation.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluated {
    Data(ColumnData),
    Bool(Vec<bool>),
}

impl Evaluated {
    pub fn into_column(self) -> Result<Column, AlgebraError> {
        match self {
            Evaluated::Data(d) => Ok(Column::new(d)),
            Evaluated::Bool(_) => Err(AlgebraError::Type(
                "boolean expressions cannot be stored as columns".into(),
            )),
        }
    }

    pub fn into_mask(self) -> Result<Vec<bool>, AlgebraError> {
        match self {
            Evaluated::Bool(b) => Ok(b),
            Evaluated::Data(d) => Err(AlgebraError::Type(format!(
                "predicate must be boolean, got {}",
                d.kind()
            ))),
        }
    }
}

pub fn evaluate(expr: &ScalarExpr, r: &Relation) -> Result<Evaluated, AlgebraError> {
    expr.type_in(r.schema())?;
    eval(expr, r)
}

fn broadcast(v: &Value, n: usize) -> ColumnData {
    match v {
        Value::Float(x) => ColumnData::Float64(vec![*x; n]),
        Value::Int(x) => ColumnData::Int64(vec![*x; n]),
        Value::Text(s) => ColumnData::Text(vec![s.clone(); n]),
    }
}

fn widen(d: &ColumnData) -> Vec<f64> {
    match d {
        ColumnData::Float64(v) => v.clone(),
        ColumnData::Int64(v) => v.iter().map(|&x| x as f64).collect(),
        ColumnData::Text(_) => unreachable!("type-checked"),
    }
}

fn eval(expr: &ScalarExpr, r: &Relation) -> Result<Evaluated, AlgebraError> {
    let n = r.row_count();
    Ok(match expr {
        ScalarExpr::Column(name) => Evaluated::Data(r.column_by_name(name)?.data().clone()),
        ScalarExpr::Literal(v) => Evaluated::Data(broadcast(v, n)),
        ScalarExpr::Bool(b) => Evaluated::Bool(vec![*b; n]),
        ScalarExpr::Not(e) => {
            Evaluated::Bool(eval(e, r)?.into_mask()?.into_iter().map(|b| !b).collect())
        }
        ScalarExpr::Neg(e) => match eval(e, r)? {
            Evaluated::Data(ColumnData::Float64(v)) => {
                Evaluated::Data(ColumnData::Float64(v.into_iter().map(|x| -x).collect()))
            }
            Evaluated::Data(ColumnData::Int64(v)) => Evaluated::Data(ColumnData::Int64(
                v.into_iter()
                    .map(|x| x.checked_neg().ok_or(AlgebraError::Overflow))
                    .collect::<Result<_, _>>()?,
            )),
            _ => unreachable!("type-checked"),
        },
        ScalarExpr::Binary { op, left, right } => {
            let l = eval(left, r)?;
            let rr = eval(right, r)?;
            match (op, l, rr) {
                (BinaryOp::And, Evaluated::Bool(a), Evaluated::Bool(b)) => {
                    Evaluated::Bool(a.iter().zip(&b).map(|(x, y)| *x && *y).collect())
                }
                (BinaryOp::Or, Evaluated::Bool(a), Evaluated::Bool(b)) => {
                    Evaluated::Bool(a.iter().zip(&b).map(|(x, y)| *x || *y).collect())
                }
                (op, Evaluated::Data(a), Evaluated::Data(b)) if op.is_arithmetic() => {
                    Evaluated::Data(arithmetic(*op, &a, &b)?)
                }
                (op, Evaluated::Data(a), Evaluated::Data(b)) if op.is_comparison() => {
                    Evaluated::Bool(compare(*op, &a, &b))
                }
                _ => unreachable!("type-checked"),
            }
        }
    })
}

fn arithmetic(op: BinaryOp, a: &ColumnData, b: &ColumnData) -> Result<ColumnData, AlgebraError> {
    if let (ColumnData::Int64(x), ColumnData::Int64(y), true) = (a, b, op != BinaryOp::Div) {
        let f: fn(i64, i64) -> Option<i64> = match op {
            BinaryOp::Add => i64::checked_add,
            BinaryOp::Sub => i64::checked_sub,
            _ => i64::checked_mul,
        };
        return x
            .iter()
            .zip(y)
            .map(|(&p, &q)| f(p, q).ok_or(AlgebraError::Overflow))
            .collect::<Result<_, _>>()
            .map(ColumnData::Int64);
    }
    let (x, y) = (widen(a), widen(b));
    let mut out = Vec::with_capacity(x.len());
    for (p, q) in x.into_iter().zip(y) {
        let v = match op {
            BinaryOp::Add => p + q,
            BinaryOp::Sub => p - q,
            BinaryOp::Mul => p * q,
            _ => {
                if q == 0.0 {
                    return Err(AlgebraError::DivisionByZero);
                }
                p / q
            }
        };
        if !v.is_finite() {
            return Err(AlgebraError::Overflow);
        }
        out.push(v);
    }
    Ok(ColumnData::Float64(out))
}

fn compare(op: BinaryOp, a: &ColumnData, b: &ColumnData) -> Vec<bool> {
    match (a, b) {
        (ColumnData::Text(x), ColumnData::Text(y)) => x
            .iter()
            .zip(y)
            .map(|(p, q)| op.holds(p.as_bytes().cmp(q.as_bytes())))
            .collect(),
        (ColumnData::Int64(x), ColumnData::Int64(y)) => {
            x.iter().zip(y).map(|(p, q)| op.holds(p.cmp(q))).collect()
        }
        _ => widen(a)
            .iter()
            .zip(widen(b))
            .map(|(p, q)| op.holds(p.total_cmp(&q)))
            .collect(),
    }
}
