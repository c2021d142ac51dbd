use std::fmt::Write as _;
use std::str::FromStr;

use rma_core::{Relation, Value};

use crate::csvio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format '{other}', expected table or csv")),
        }
    }
}

/// Four significant digits, switching to scientific notation outside
/// `1e-4 <= |v| < 1e4`.
pub fn display_float(v: f64) -> String {
    let sci = format!("{v:.3e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    let out = if (-4..4).contains(&exp) {
        format!("{:.*}", (3 - exp).max(0) as usize, v)
    } else {
        sci
    };
    // a negative value that rounds to zero prints without its sign
    if out.starts_with('-') && out[1..].chars().all(|c| matches!(c, '0' | '.')) {
        out[1..].to_string()
    } else {
        out
    }
}

fn display_cell(v: &Value) -> String {
    match v {
        Value::Float(f) => display_float(*f),
        Value::Int(i) => i.to_string(),
        Value::Text(s) => s.clone(),
    }
}

pub fn render(r: &Relation, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => render_table(r),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            csvio::write_csv(r, &mut buf).expect("writing to memory cannot fail");
            String::from_utf8(buf).expect("csv output of UTF-8 input is UTF-8")
        }
    }
}

fn render_table(r: &Relation) -> String {
    let names: Vec<&str> = r.schema().names().collect();
    let numeric: Vec<bool> = r
        .schema()
        .attrs()
        .iter()
        .map(|a| a.kind.is_numeric())
        .collect();
    let cells: Vec<Vec<String>> = r
        .rows()
        .map(|row| row.iter().map(display_cell).collect())
        .collect();
    let widths: Vec<usize> = names
        .iter()
        .enumerate()
        .map(|(c, n)| {
            cells
                .iter()
                .map(|row| row[c].chars().count())
                .chain([n.chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let line = |out: &mut String, values: &mut dyn Iterator<Item = (usize, &str)>, header: bool| {
        let parts: Vec<String> = values
            .map(|(c, v)| {
                if numeric[c] && !header {
                    format!("{v:>w$}", w = widths[c])
                } else {
                    format!("{v:<w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(parts.join(" | ").trim_end());
        out.push('\n');
    };

    let mut out = String::new();
    line(&mut out, &mut names.iter().copied().enumerate(), true);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in &cells {
        line(
            &mut out,
            &mut row.iter().map(String::as_str).enumerate(),
            false,
        );
    }
    let n = r.row_count();
    let _ = writeln!(out, "({n} row{})", if n == 1 { "" } else { "s" });
    out
}
