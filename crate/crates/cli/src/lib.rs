//! Interactive shell for the relational matrix engine: CSV import and
//! export, an on-disk table catalog, result formatting and a line-based
//! session that drives both the REPL and script mode.

pub mod catalog;
pub mod csvio;
mod error;
pub mod format;
pub mod session;

pub use catalog::CatalogDir;
pub use error::ShellError;
pub use format::OutputFormat;
pub use session::{Session, Step};
