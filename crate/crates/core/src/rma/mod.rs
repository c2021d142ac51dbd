//! Relational matrix operations: linear algebra applied to relations, with
//! the order part, application schema and origins carried into the result.

mod apply;
mod construct;

use std::fmt;

use thiserror::Error;

use crate::columnar::{ColumnarError, Kind};
use crate::kernels::KernelError;

pub use apply::{
    apply_rma, base_result, check_call, origins_of, result_order_schema, ArgSchema, Origins,
    ResultShape, RmaArg, RmaCall, DEFAULT_CONTEXT,
};
pub use construct::{
    column_cast, matrix_constructor, order_part, reduce, relation_constructor, schema_cast,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RmaError {
    #[error(transparent)]
    Columnar(#[from] ColumnarError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{op} takes {expected} argument relation(s), got {actual}")]
    Arity {
        op: OpCode,
        expected: usize,
        actual: usize,
    },
    #[error("order schema must name at least one attribute")]
    EmptyOrderSchema,
    #[error("attribute '{0}' is listed twice in the order schema")]
    DuplicateOrderAttribute(String),
    #[error("the order schema {arg} of {op} must have exactly one attribute, got {actual}")]
    OrderCardinality {
        op: OpCode,
        arg: &'static str,
        actual: usize,
    },
    #[error("order schema ({attrs}) is not a key: order part ({values}) occurs more than once")]
    KeyViolation { attrs: String, values: String },
    #[error("application attribute '{attribute}' has kind {kind}; matrix operations need numeric columns")]
    NonNumericApplication { attribute: String, kind: Kind },
    #[error("application schema is empty: every attribute is in the order schema")]
    EmptyApplicationSchema,
    #[error("{op} over an empty relation")]
    EmptyRelation { op: OpCode },
    #[error(
        "{op} requires union compatible application schemas, got {left} and {right} attributes"
    )]
    NotUnionCompatible {
        op: OpCode,
        left: usize,
        right: usize,
    },
    #[error("{op} requires disjoint order schemas, '{attribute}' appears in both")]
    OverlappingOrderSchemas { op: OpCode, attribute: String },
    #[error("result attribute '{0}' would appear twice; pick another context name with NAMED or rename the input")]
    NameCollision(String),
    #[error("{op} takes its context value from the argument's name; give the argument an alias")]
    UnnamedRelation { op: OpCode },
    #[error("column cast of '{0}' produced an empty attribute name")]
    EmptyCastName(String),
    #[error("column cast of '{attribute}' produced the name '{name}' twice")]
    DuplicateCastName { attribute: String, name: String },
    #[error("schema cast of an empty attribute list")]
    EmptySchemaCast,
    #[error("relation constructor: duplicate row")]
    DuplicateRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpCode {
    Emu,
    Mmu,
    Opd,
    Cpd,
    Add,
    Sub,
    Tra,
    Sol,
    Inv,
    Evc,
    Evl,
    Qqr,
    Rqr,
    Dsv,
    Usv,
    Vsv,
    Det,
    Rnk,
    Chf,
}

/// Where the rows or the columns of a result come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    /// rows of the first argument
    R1,
    /// rows of the second argument
    R2,
    /// rows of both arguments, paired
    RStar,
    /// columns of the first argument
    C1,
    /// columns of the second argument
    C2,
    /// columns of both arguments, paired
    CStar,
    One,
}

impl Dim {
    pub fn symbol(self) -> &'static str {
        match self {
            Dim::R1 => "r1",
            Dim::R2 => "r2",
            Dim::RStar => "r*",
            Dim::C1 => "c1",
            Dim::C2 => "c2",
            Dim::CStar => "c*",
            Dim::One => "1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShapeType {
    pub rows: Dim,
    pub cols: Dim,
}

impl fmt::Display for ShapeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.rows.symbol(), self.cols.symbol())
    }
}

impl OpCode {
    pub const ALL: [OpCode; 19] = [
        OpCode::Emu,
        OpCode::Mmu,
        OpCode::Opd,
        OpCode::Cpd,
        OpCode::Add,
        OpCode::Sub,
        OpCode::Tra,
        OpCode::Sol,
        OpCode::Inv,
        OpCode::Evc,
        OpCode::Evl,
        OpCode::Qqr,
        OpCode::Rqr,
        OpCode::Dsv,
        OpCode::Usv,
        OpCode::Vsv,
        OpCode::Det,
        OpCode::Rnk,
        OpCode::Chf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpCode::Emu => "emu",
            OpCode::Mmu => "mmu",
            OpCode::Opd => "opd",
            OpCode::Cpd => "cpd",
            OpCode::Add => "add",
            OpCode::Sub => "sub",
            OpCode::Tra => "tra",
            OpCode::Sol => "sol",
            OpCode::Inv => "inv",
            OpCode::Evc => "evc",
            OpCode::Evl => "evl",
            OpCode::Qqr => "qqr",
            OpCode::Rqr => "rqr",
            OpCode::Dsv => "dsv",
            OpCode::Usv => "usv",
            OpCode::Vsv => "vsv",
            OpCode::Det => "det",
            OpCode::Rnk => "rnk",
            OpCode::Chf => "chf",
        }
    }

    /// Case-insensitive lookup by name.
    pub fn parse(s: &str) -> Option<OpCode> {
        OpCode::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
    }

    pub fn is_binary(self) -> bool {
        matches!(
            self,
            OpCode::Emu
                | OpCode::Mmu
                | OpCode::Opd
                | OpCode::Cpd
                | OpCode::Add
                | OpCode::Sub
                | OpCode::Sol
        )
    }

    pub fn arity(self) -> usize {
        if self.is_binary() {
            2
        } else {
            1
        }
    }

    /// Operations whose result does not depend on how the input rows are
    /// ordered beyond pairing them, so the full sort can be skipped.
    pub fn supports_sort_avoidance(self) -> bool {
        matches!(self, OpCode::Qqr | OpCode::Add | OpCode::Sub | OpCode::Emu)
    }

    pub fn shape_type(self) -> ShapeType {
        use Dim::*;
        let (rows, cols) = match self {
            OpCode::Usv => (R1, R1),
            OpCode::Opd => (R1, R2),
            OpCode::Inv | OpCode::Evc | OpCode::Chf | OpCode::Qqr => (R1, C1),
            OpCode::Mmu => (R1, C2),
            OpCode::Evl => (R1, One),
            OpCode::Tra => (C1, R1),
            OpCode::Rqr | OpCode::Dsv | OpCode::Vsv => (C1, C1),
            OpCode::Cpd | OpCode::Sol => (C1, C2),
            OpCode::Add | OpCode::Sub | OpCode::Emu => (RStar, CStar),
            OpCode::Det | OpCode::Rnk => (One, One),
        };
        ShapeType { rows, cols }
    }
}

impl fmt::Display for OpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn shape_type_of(op: OpCode) -> ShapeType {
    op.shape_type()
}
