//! Column-oriented relational engine where matrix operations such as
//! inversion, QR decomposition or multiplication take relations as input and
//! return relations that keep the row and column context of their arguments.
//!
//! ```
//! use rma_core::{Column, Database, Relation};
//!
//! let mut db = Database::new();
//! db.insert(
//!     "r",
//!     Relation::from_columns([
//!         ("T", Column::text(["7am", "8am"])),
//!         ("H", Column::float(vec![6.0, 8.0])),
//!         ("W", Column::float(vec![7.0, 5.0])),
//!     ])
//!     .unwrap(),
//! );
//! let inv = db.query("SELECT * FROM inv(r BY T);").unwrap();
//! assert_eq!(inv.row_count(), 2);
//! ```

pub mod algebra;
pub mod columnar;
pub mod kernels;
pub mod rma;
pub mod sql;

pub use algebra::AlgebraError;
pub use columnar::{Attribute, Column, ColumnData, ColumnarError, Kind, Relation, Schema, Value};
pub use kernels::{KernelError, Matrix};
pub use rma::{apply_rma, OpCode, RmaArg, RmaCall, RmaError};
pub use sql::{Catalog, Database, Phase, SqlError, Timings};
