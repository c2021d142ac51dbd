use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rma_shell::{CatalogDir, OutputFormat, Session, Step};

/// SQL shell with relational matrix operations.
#[derive(Parser, Debug)]
#[command(name = "rma-shell", version)]
struct Args {
    /// Catalog directory; stored tables are loaded at startup and tables
    /// created with \load or \store are saved there.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Run the statements and commands in FILE, then exit.
    #[arg(long, value_name = "FILE")]
    exec: Option<PathBuf>,
    /// Result format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
}

const BAD_ARGS: u8 = 2;

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(BAD_ARGS)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let mut session = Session::new(args.format);
    if let Some(dir) = &args.data {
        if dir.exists() && !dir.is_dir() {
            eprintln!("--data {}: not a directory", dir.display());
            return ExitCode::from(BAD_ARGS);
        }
        match CatalogDir::open(dir).and_then(|c| session.with_catalog(c)) {
            Ok(s) => session = s,
            Err(e) => {
                eprintln!("--data {}: {e}", dir.display());
                return ExitCode::from(BAD_ARGS);
            }
        }
    }

    let stdin = std::io::stdin();
    let result = match &args.exec {
        Some(path) => match std::fs::File::open(path) {
            Ok(f) => run(&mut session, std::io::BufReader::new(f), false),
            Err(e) => {
                eprintln!("--exec {}: {e}", path.display());
                return ExitCode::from(BAD_ARGS);
            }
        },
        None => {
            let interactive = stdin.is_terminal();
            run(&mut session, stdin.lock(), interactive)
        }
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}

/// Feeds every line to the session and returns how many commands failed.
/// Interactive sessions print a prompt and never fail on statement errors.
fn run(session: &mut Session, input: impl BufRead, interactive: bool) -> std::io::Result<usize> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut failures = 0;
    let mut report = |step: Step| {
        for e in &step.errors {
            eprintln!("{e}");
        }
        failures += step.errors.len();
        step.quit
    };
    let prompt = |out: &mut dyn Write, session: &Session| -> std::io::Result<()> {
        if interactive {
            write!(
                out,
                "{}",
                if session.in_statement() {
                    "  -> "
                } else {
                    "rma> "
                }
            )?;
            out.flush()?;
        }
        Ok(())
    };

    prompt(&mut out, session)?;
    for line in input.lines() {
        if report(session.feed_line(&line?, &mut out)) {
            return Ok(if interactive { 0 } else { failures });
        }
        prompt(&mut out, session)?;
    }
    report(session.finish(&mut out));
    if interactive {
        writeln!(out)?;
        return Ok(0);
    }
    Ok(failures)
}
