//! Line-oriented session shared by the REPL and script mode.
//!
//! Lines starting with a backslash are meta-commands when no statement is
//! pending. Everything else accumulates until a `;` outside quotes and
//! comments, and each completed statement runs on its own: a failure is
//! reported and leaves the session as it was before that statement.

use std::io::Write;
use std::path::Path;

use rma_core::{Column, Database, Relation};

use crate::catalog::{valid_table_name, CatalogDir};
use crate::csvio::{export_csv, load_csv};
use crate::format::{render, OutputFormat};
use crate::ShellError;

pub const HELP: &str = "\
statements end with ';'
\\load NAME FILE      import a CSV file as table NAME
\\store NAME QUERY    save the result of QUERY as table NAME
\\export NAME FILE    write table NAME to a CSV file
\\tables              list tables
\\schema NAME         list the attributes of table NAME
\\timing on|off       report parse, plan and execute times
\\format table|csv    choose the result format
\\quit                leave the shell
";

/// Result of feeding one line: whether `\quit` was seen, and the errors of
/// the commands and statements that failed.
#[derive(Debug, Default)]
pub struct Step {
    pub quit: bool,
    pub errors: Vec<ShellError>,
}

#[derive(Debug, Default)]
pub struct Session {
    db: Database,
    catalog: Option<CatalogDir>,
    format: OutputFormat,
    timing: bool,
    pending: String,
}

impl Session {
    pub fn new(format: OutputFormat) -> Self {
        Session {
            format,
            ..Session::default()
        }
    }

    /// Attaches a catalog directory, loading every table stored there. Tables
    /// created later with `\load` or `\store` are written back to it.
    pub fn with_catalog(mut self, catalog: CatalogDir) -> Result<Self, ShellError> {
        for (name, r) in catalog.load_all()? {
            self.db.insert(name, r);
        }
        self.catalog = Some(catalog);
        Ok(self)
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    pub fn format(&self) -> OutputFormat {
        self.format
    }

    pub fn timing(&self) -> bool {
        self.timing
    }

    /// True while an unterminated statement is buffered.
    pub fn in_statement(&self) -> bool {
        !is_blank(&self.pending)
    }

    pub fn feed_line(&mut self, line: &str, out: &mut dyn Write) -> Step {
        let mut step = Step::default();
        let trimmed = line.trim();
        if !self.in_statement() && trimmed.starts_with('\\') {
            self.pending.clear();
            match self.meta(trimmed, out) {
                Ok(quit) => step.quit = quit,
                Err(e) => step.errors.push(e),
            }
            return step;
        }
        self.pending.push_str(line);
        self.pending.push('\n');
        while let Some(end) = statement_end(&self.pending) {
            let stmt: String = self.pending.drain(..=end).collect();
            let stmt = &stmt[..stmt.len() - 1];
            if is_blank(stmt) {
                continue;
            }
            if let Err(e) = self.run_query(stmt, out) {
                step.errors.push(e);
            }
        }
        step
    }

    /// Runs whatever is left in the buffer as a final statement.
    pub fn finish(&mut self, out: &mut dyn Write) -> Step {
        let stmt = std::mem::take(&mut self.pending);
        let mut step = Step::default();
        if !is_blank(&stmt) {
            if let Err(e) = self.run_query(&stmt, out) {
                step.errors.push(e);
            }
        }
        step
    }

    fn run_query(&mut self, sql: &str, out: &mut dyn Write) -> Result<(), ShellError> {
        let (r, t) = self.db.query_timed(sql)?;
        emit(out, &render(&r, self.format))?;
        if self.timing {
            let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
            emit(
                out,
                &format!(
                    "Time: parse {:.3} ms, plan {:.3} ms, execute {:.3} ms\n",
                    ms(t.parse),
                    ms(t.plan),
                    ms(t.execute)
                ),
            )?;
        }
        Ok(())
    }

    /// Returns `Ok(true)` for `\quit`.
    fn meta(&mut self, line: &str, out: &mut dyn Write) -> Result<bool, ShellError> {
        let (cmd, rest) = split_word(&line[1..]);
        match cmd {
            "quit" | "q" => return Ok(true),
            "help" | "?" => emit(out, HELP)?,
            "tables" => {
                let names: Vec<&str> = self.db.names().collect();
                let tables: Vec<&Relation> =
                    names.iter().filter_map(|n| self.table(n).ok()).collect();
                let listing = Relation::from_columns([
                    ("table", Column::text(names.iter().copied())),
                    (
                        "rows",
                        Column::int(tables.iter().map(|r| r.row_count() as i64).collect()),
                    ),
                    (
                        "columns",
                        Column::int(tables.iter().map(|r| r.schema().len() as i64).collect()),
                    ),
                ])?;
                emit(out, &render(&listing, self.format))?;
            }
            "schema" => {
                let name = single_arg(rest, "\\schema NAME")?;
                let r = self.table(name)?;
                let attrs = r.schema().attrs();
                let listing = Relation::from_columns([
                    (
                        "attribute",
                        Column::text(attrs.iter().map(|a| a.name.as_str())),
                    ),
                    ("kind", Column::text(attrs.iter().map(|a| a.kind.name()))),
                ])?;
                emit(out, &render(&listing, self.format))?;
            }
            "timing" => {
                self.timing = match rest {
                    "on" => true,
                    "off" => false,
                    _ => return Err(usage("\\timing on|off")),
                };
            }
            "format" => self.format = rest.parse().map_err(ShellError::Usage)?,
            "load" => {
                let (name, file) = name_and_rest(rest, "\\load NAME FILE")?;
                let r = load_csv(Path::new(file))?;
                self.register(name, r)?;
                emit(out, &format!("loaded {name}\n"))?;
            }
            "store" => {
                let (name, query) = name_and_rest(rest, "\\store NAME QUERY")?;
                let r = self.db.query(query.trim_end_matches(';'))?;
                self.register(name, r)?;
                emit(out, &format!("stored {name}\n"))?;
            }
            "export" => {
                let (name, file) = name_and_rest(rest, "\\export NAME FILE")?;
                export_csv(self.table(name)?, Path::new(file))?;
                emit(out, &format!("exported {name}\n"))?;
            }
            other => {
                return Err(ShellError::Usage(format!(
                    "unknown command '\\{other}', try \\help"
                )))
            }
        }
        Ok(false)
    }

    fn table(&self, name: &str) -> Result<&Relation, ShellError> {
        use rma_core::Catalog;
        self.db
            .table(name)
            .ok_or_else(|| ShellError::UnknownTable(name.to_string()))
    }

    /// Persists first so that a failed write leaves the session untouched.
    fn register(&mut self, name: &str, r: Relation) -> Result<(), ShellError> {
        if !valid_table_name(name) {
            return Err(ShellError::Usage(format!(
                "table name '{name}' must be letters, digits and underscores"
            )));
        }
        if let Some(cat) = &self.catalog {
            cat.store(name, &r)?;
        }
        self.db.insert(name, r);
        Ok(())
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), ShellError> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| ShellError::io("<output>", e))
}

fn usage(form: &str) -> ShellError {
    ShellError::Usage(format!("usage: {form}"))
}

fn split_word(s: &str) -> (&str, &str) {
    let s = s.trim();
    match s.split_once(char::is_whitespace) {
        Some((w, rest)) => (w, rest.trim()),
        None => (s, ""),
    }
}

fn single_arg<'a>(rest: &'a str, form: &str) -> Result<&'a str, ShellError> {
    match split_word(rest) {
        (name, "") if !name.is_empty() => Ok(name),
        _ => Err(usage(form)),
    }
}

fn name_and_rest<'a>(rest: &'a str, form: &str) -> Result<(&'a str, &'a str), ShellError> {
    match split_word(rest) {
        (name, tail) if !name.is_empty() && !tail.is_empty() => Ok((name, tail)),
        _ => Err(usage(form)),
    }
}

/// Byte offset of the first `;` that is not inside a quoted literal,
/// quoted identifier or `--` comment.
fn statement_end(text: &str) -> Option<usize> {
    let mut quote: Option<char> = None;
    let mut comment = false;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if comment {
            comment = c != '\n';
            continue;
        }
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None => match c {
                '\'' | '"' => quote = Some(c),
                '-' if chars.peek().map(|(_, n)| *n) == Some('-') => comment = true,
                ';' => return Some(i),
                _ => {}
            },
        }
    }
    None
}

/// True when `text` holds nothing but whitespace and comments.
fn is_blank(text: &str) -> bool {
    text.lines()
        .all(|l| l.trim().is_empty() || l.trim_start().starts_with("--"))
}
