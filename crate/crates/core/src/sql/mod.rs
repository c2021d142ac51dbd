//! SQL subset with relational matrix operations as table functions in the
//! FROM clause: `SELECT * FROM inv(rating BY User);`.

pub mod ast;
mod exec;
mod lexer;
mod parser;
mod plan;

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::columnar::Relation;

pub use exec::execute;
pub use parser::parse;
pub use plan::{plan, PlanNode, PlanOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Lex,
    Parse,
    Plan,
    Execute,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Lex => "lex",
            Phase::Parse => "parse",
            Phase::Plan => "plan",
            Phase::Execute => "execute",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct SqlError {
    pub phase: Phase,
    pub message: String,
    pub pos: Option<Pos>,
}

impl SqlError {
    pub fn new(phase: Phase, message: impl Into<String>, pos: Option<Pos>) -> Self {
        SqlError {
            phase,
            message: message.into(),
            pos,
        }
    }
}

impl fmt::Display for SqlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ERROR {}: {}", self.phase, self.message)?;
        if let Some(p) = self.pos {
            write!(f, " at line {} col {}", p.line, p.col)?;
        }
        Ok(())
    }
}

/// Source of base tables for planning and execution.
pub trait Catalog {
    fn table(&self, name: &str) -> Option<&Relation>;
}

/// Wall-clock time spent in each phase of one statement.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub parse: Duration,
    pub plan: Duration,
    pub execute: Duration,
}

/// In-memory set of named tables.
#[derive(Debug, Clone, Default)]
pub struct Database {
    tables: BTreeMap<String, Relation>,
}

impl Catalog for Database {
    fn table(&self, name: &str) -> Option<&Relation> {
        self.tables.get(name)
    }
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `r` under `name`, replacing any table of that name.
    pub fn insert(&mut self, name: impl Into<String>, r: Relation) {
        let name = name.into();
        let r = r.named(name.clone());
        self.tables.insert(name, r);
    }

    pub fn remove(&mut self, name: &str) -> Option<Relation> {
        self.tables.remove(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn query(&self, sql: &str) -> Result<Relation, SqlError> {
        self.query_timed(sql).map(|(r, _)| r)
    }

    pub fn query_timed(&self, sql: &str) -> Result<(Relation, Timings), SqlError> {
        let t0 = Instant::now();
        let ast = parse(sql)?;
        let t1 = Instant::now();
        let plan = plan(&ast, self)?;
        let t2 = Instant::now();
        let out = execute(&plan, self)?;
        let t3 = Instant::now();
        Ok((
            out,
            Timings {
                parse: t1 - t0,
                plan: t2 - t1,
                execute: t3 - t2,
            },
        ))
    }
}
