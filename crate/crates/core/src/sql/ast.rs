//! Syntax tree of the SQL subset and its rendering back to text.
//!
//! Rendering is canonical: keywords in upper case, expressions fully
//! parenthesized, identifiers quoted only when they would not lex as plain
//! words. Parsing a rendered query yields an equal tree.

use std::fmt;

use crate::algebra::{AggFunc, BinaryOp};
use crate::rma::OpCode;

use super::Pos;

/// Source position attached to a node. Positions never take part in
/// equality, so trees parsed from differently formatted text compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span(pub Pos);

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub select: Vec<SelectItem>,
    pub from: FromItem,
    pub filter: Option<Expr>,
    pub group_by: Vec<Expr>,
    pub order_by: Vec<OrderItem>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectItem {
    Star(Span),
    QualifiedStar(String, Span),
    Expr { expr: Expr, alias: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderItem {
    pub name: String,
    pub descending: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FromItem {
    Table {
        name: String,
        alias: Option<String>,
        span: Span,
    },
    Subquery {
        query: Box<Query>,
        alias: String,
        span: Span,
    },
    Rma {
        call: RmaCallAst,
        alias: Option<String>,
    },
    Join {
        left: Box<FromItem>,
        right: Box<FromItem>,
        kind: JoinKind,
        span: Span,
    },
}

impl FromItem {
    pub fn span(&self) -> Span {
        match self {
            FromItem::Table { span, .. }
            | FromItem::Subquery { span, .. }
            | FromItem::Join { span, .. } => *span,
            FromItem::Rma { call, .. } => call.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JoinKind {
    /// `a, b`
    Comma,
    /// `a CROSS JOIN b`
    Cross,
    /// `a JOIN b ON predicate`
    On(Expr),
    /// `a JOIN b USING (x, y)`
    Using(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmaCallAst {
    pub op: OpCode,
    pub args: Vec<RmaArgAst>,
    pub context: Option<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmaArgAst {
    pub item: FromItem,
    pub order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Column {
        qualifier: Option<String>,
        name: String,
        span: Span,
    },
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Binary {
        op: BinaryOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Agg {
        func: AggFunc,
        /// `None` is `*`
        arg: Option<Box<Expr>>,
        span: Span,
    },
}

impl Expr {
    pub fn contains_aggregate(&self) -> bool {
        match self {
            Expr::Agg { .. } => true,
            Expr::Binary { left, right, .. } => {
                left.contains_aggregate() || right.contains_aggregate()
            }
            Expr::Not(e) | Expr::Neg(e) => e.contains_aggregate(),
            _ => false,
        }
    }
}

pub(super) const RESERVED: &[&str] = &[
    "SELECT", "FROM", "WHERE", "GROUP", "ORDER", "BY", "AS", "JOIN", "CROSS", "INNER", "ON",
    "USING", "AND", "OR", "NOT", "NAMED", "TRUE", "FALSE", "ASC", "DESC",
];

pub(super) fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

/// Writes an identifier, quoting it when it is not a plain word.
pub struct Ident<'a>(pub &'a str);

impl fmt::Display for Ident<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        let plain = s
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !is_reserved(s);
        if plain {
            f.write_str(s)
        } else {
            write!(f, "\"{}\"", s.replace('"', "\"\""))
        }
    }
}

fn list<T>(
    f: &mut fmt::Formatter<'_>,
    items: &[T],
    mut each: impl FnMut(&mut fmt::Formatter<'_>, &T) -> fmt::Result,
) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        each(f, it)?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Column {
                qualifier: Some(q),
                name,
                ..
            } => write!(f, "{}.{}", Ident(q), Ident(name)),
            Expr::Column { name, .. } => write!(f, "{}", Ident(name)),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Float(x) => write!(f, "{x:?}"),
            Expr::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Expr::Bool(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            Expr::Binary { op, left, right } => write!(f, "({left} {} {right})", op.symbol()),
            Expr::Not(e) => write!(f, "(NOT {e})"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Agg {
                func, arg: None, ..
            } => write!(f, "{}(*)", func.name()),
            Expr::Agg {
                func, arg: Some(a), ..
            } => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Display for SelectItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectItem::Star(_) => f.write_str("*"),
            SelectItem::QualifiedStar(q, _) => write!(f, "{}.*", Ident(q)),
            SelectItem::Expr { expr, alias: None } => write!(f, "{expr}"),
            SelectItem::Expr {
                expr,
                alias: Some(a),
            } => write!(f, "{expr} AS {}", Ident(a)),
        }
    }
}

fn alias(f: &mut fmt::Formatter<'_>, a: &Option<String>) -> fmt::Result {
    match a {
        Some(a) => write!(f, " AS {}", Ident(a)),
        None => Ok(()),
    }
}

impl fmt::Display for FromItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FromItem::Table { name, alias: a, .. } => {
                write!(f, "{}", Ident(name))?;
                alias(f, a)
            }
            FromItem::Subquery { query, alias, .. } => write!(f, "({query}) AS {}", Ident(alias)),
            FromItem::Rma { call, alias: a } => {
                write!(f, "{}(", call.op)?;
                list(f, &call.args, |f, arg| {
                    write!(f, "{} BY ", arg.item)?;
                    list(f, &arg.order, |f, o| write!(f, "{}", Ident(o)))
                })?;
                if let Some(c) = &call.context {
                    write!(f, " NAMED {}", Ident(c))?;
                }
                f.write_str(")")?;
                alias(f, a)
            }
            FromItem::Join {
                left, right, kind, ..
            } => {
                write!(f, "{left}")?;
                match kind {
                    JoinKind::Comma => write!(f, ", {right}"),
                    JoinKind::Cross => write!(f, " CROSS JOIN {right}"),
                    JoinKind::On(e) => write!(f, " JOIN {right} ON {e}"),
                    JoinKind::Using(cols) => {
                        write!(f, " JOIN {right} USING (")?;
                        list(f, cols, |f, c| write!(f, "{}", Ident(c)))?;
                        f.write_str(")")
                    }
                }
            }
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        list(f, &self.select, |f, s| write!(f, "{s}"))?;
        write!(f, " FROM {}", self.from)?;
        if let Some(w) = &self.filter {
            write!(f, " WHERE {w}")?;
        }
        if !self.group_by.is_empty() {
            f.write_str(" GROUP BY ")?;
            list(f, &self.group_by, |f, g| write!(f, "{g}"))?;
        }
        if !self.order_by.is_empty() {
            f.write_str(" ORDER BY ")?;
            list(f, &self.order_by, |f, o| {
                write!(
                    f,
                    "{}{}",
                    Ident(&o.name),
                    if o.descending { " DESC" } else { "" }
                )
            })?;
        }
        Ok(())
    }
}
