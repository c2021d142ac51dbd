use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

fn shell(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rma-shell"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn inverse_of_loaded_rating_prints_three_rows() {
    let script = format!(
        "\\load rating {}\nSELECT * FROM inv(rating BY User);\n",
        data("rating.csv").display()
    );
    let o = shell(&[], &script);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("(3 rows)"), "{out}");
    let body: Vec<&str> = out.lines().skip_while(|l| !l.starts_with("User")).collect();
    assert_eq!(
        body[0].split('|').map(str::trim).collect::<Vec<_>>(),
        ["User", "Balto", "Heat", "Net"]
    );
    assert_eq!(body.len(), 6);
}

#[test]
fn schema_lists_four_attributes() {
    let script = format!(
        "\\load rating {}\n\\format csv\n\\schema rating\n",
        data("rating.csv").display()
    );
    let o = shell(&[], &script);
    assert_eq!(
        stdout(&o),
        "loaded rating\nattribute,kind\nUser,text\nBalto,float64\nHeat,float64\nNet,float64\n"
    );
}

#[test]
fn quit_exits_zero_and_ignores_the_rest() {
    let o = shell(&[], "\\quit\nSELECT * FROM nowhere;\n");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
    assert_eq!(stderr(&o), "");
}

#[test]
fn script_errors_are_reported_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.sql");
    std::fs::write(
        &script,
        format!(
            "\\load r {}\nSELECT * FROM tra(r BY T, H);\nSELECT T FROM r WHERE H > 5 ORDER BY T;\n",
            data("weather.csv").display()
        ),
    )
    .unwrap();
    let o = shell(&["--exec", script.to_str().unwrap(), "--format", "csv"], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR plan:"), "{}", stderr(&o));
    assert_eq!(stdout(&o), "loaded r\nT\n7am\n8am\n");
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(shell(&["--bogus"], "").status.code(), Some(2));
    assert_eq!(shell(&["--format", "xml"], "").status.code(), Some(2));
    assert_eq!(
        shell(&["--exec", "/no/such/file.sql"], "").status.code(),
        Some(2)
    );
    let file = tempfile::NamedTempFile::new().unwrap();
    assert_eq!(
        shell(&["--data", file.path().to_str().unwrap()], "")
            .status
            .code(),
        Some(2)
    );
    assert_eq!(shell(&["--help"], "").status.code(), Some(0));
}

#[test]
fn catalog_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let script = format!(
        "\\load r {}\n\\store t SELECT * FROM tra(r BY T)\n",
        data("weather.csv").display()
    );
    assert!(shell(&["--data", d], &script).status.success());
    assert!(dir.path().join("t.schema").exists());

    let o = shell(
        &["--data", d, "--format", "csv"],
        "\\tables\nSELECT * FROM t WHERE C = 'W';\n",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "table,rows,columns\nr,4,3\nt,2,5\nC,5am,6am,7am,8am\nW,3.0,4.0,7.0,5.0\n"
    );
}

#[test]
fn failed_load_keeps_the_previous_table() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n1,2\n3\n").unwrap();
    let script = format!(
        "\\load r {}\n\\load r {}\nSELECT COUNT(*) AS n FROM r;\n",
        data("weather.csv").display(),
        bad.display()
    );
    let o = shell(&["--format", "csv"], &script);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3 has 1 fields"), "{}", stderr(&o));
    assert_eq!(stdout(&o), "loaded r\nn\n4\n");
}

#[test]
fn export_then_reload_gives_the_same_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let script = format!(
        "\\load r {}\n\\store q SELECT * FROM qqr(r BY T)\n\\export q {}\n\\load q2 {}\n\\format csv\n\
         SELECT T FROM q JOIN q2 USING (T) WHERE q.H <> q2.H OR q.W <> q2.W;\n\
         SELECT COUNT(*) AS n FROM q JOIN q2 USING (T);\n",
        data("weather.csv").display(),
        out.display(),
        out.display()
    );
    let o = shell(&[], &script);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("\nT\nn\n4\n"), "{}", stdout(&o));
}

#[test]
fn timing_reports_three_phases() {
    let script = format!(
        "\\load r {}\n\\timing on\nSELECT * FROM r;\n",
        data("weather.csv").display()
    );
    let o = shell(&[], &script);
    let out = stdout(&o);
    let line = out
        .lines()
        .find(|l| l.starts_with("Time:"))
        .expect("timing line");
    for phase in ["parse", "plan", "execute"] {
        assert!(
            line.contains(&format!("{phase} ")) && line.contains(" ms"),
            "{line}"
        );
    }
}
