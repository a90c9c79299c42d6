use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const LISTING: &str = include_str!("../../core/tests/data/listing1.ipl");
const NAT: &str = "N where N = 0 fby N+1; end\n";
const STUBS: &str =
    "JAVA.foo = object\nJAVA.intValue = field_sum_int\nEMBED.bar = sum_float32\nCPP.f1 = zero\n";

fn corelucid(args: &[&str]) -> Output {
    corelucid_with_input(args, "")
}

fn corelucid_with_input(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_corelucid"))
        .args(args)
        .env_remove("CORELUCID_PROVIDERS")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn add(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_nat() {
    let f = Files::new();
    let nat = f.add("nat.ipl", NAT);
    let o = corelucid(&["run", s(&nat), "--context", "{t:7}"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "7\n");
    let o = corelucid(&["run", s(&nat), "--context", "{t:0}"]);
    assert_eq!(stdout(&o), "0\n");
    let o = corelucid(&["run", s(&nat)]);
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn segments_of_listing() {
    let f = Files::new();
    let l = f.add("listing1.ipl", LISTING);
    let o = corelucid(&["segments", s(&l)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "TYPEDECL 5-8\nFUNCDECL 9-14\nJAVA 15-28\nCPP 29-37\nOBJECTIVELUCID 38-54\n"
    );
}

#[test]
fn translate_from_stdin() {
    let o = corelucid_with_input(&["translate", "-"], "first X\n");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("X @ {t:0}"));
}

#[test]
fn check_listing() {
    let f = Files::new();
    let l = f.add("listing1.ipl", LISTING);
    let o = corelucid(&["check", s(&l)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("type myclass"));
    assert!(out.contains("function myclass foo(int, double) [JAVA]"));
    assert!(out.contains("bar(int, int)") && out.contains("alias baz"));
    assert!(out.contains("function int f1() [CPP]"));
    assert!(out.contains("call 42:8: foo : myclass"));
    assert!(stderr(&o).is_empty());
}

#[test]
fn check_reports_call_errors() {
    let f = Files::new();
    let p = f.add("bad.ipl", "#FUNCDECL\nint f(int);\n#GIPL\nf(1.0) + g(2)\n");
    let o = corelucid(&["check", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("bad.ipl:4:3: argument 1 of `f` is double, expected int"),
        "{err}"
    );
    assert!(err.contains("bad.ipl:4:10: no function `g`"), "{err}");
}

#[test]
fn listing_needs_providers() {
    let f = Files::new();
    let l = f.add("listing1.ipl", LISTING);
    let o = corelucid(&["run", s(&l)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("missing provider for bar, f1, foo"),
        "{}",
        stderr(&o)
    );

    let stubs = f.add("stubs.txt", STUBS);
    let o = corelucid(&["run", s(&l), "--providers", s(&stubs)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "float32<4.0>\n");

    let o = Command::new(env!("CARGO_BIN_EXE_corelucid"))
        .args(["run", s(&l), "--json"])
        .env("CORELUCID_PROVIDERS", &stubs)
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"][0]["value"], "float32<4.0>");
    assert_eq!(v["results"][0]["tag"], "OBJECTIVELUCID");
}

#[test]
fn top_level_special() {
    let f = Files::new();
    let p = f.add("div.ipl", "\n1 + 1 / 0\n");
    let o = corelucid(&["run", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "special<arith> at div.ipl:2\n");
}

#[test]
fn usage_errors() {
    let f = Files::new();
    let nat = f.add("nat.ipl", NAT);
    assert_eq!(
        corelucid(&["run", s(&nat), "--context", "t:1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        corelucid(&["run", s(&nat), "--context", "{{t:1},{t:2}}"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        corelucid(&["run", "/no/such/file.ipl"]).status.code(),
        Some(2)
    );
    assert_eq!(corelucid(&["fly", s(&nat)]).status.code(), Some(2));
    assert_eq!(
        corelucid(&["run", s(&nat), "--eager-mode", "lazy"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        corelucid(&["run", s(&nat), "--tag", "9X"]).status.code(),
        Some(2)
    );
    let bad = f.add("bad.txt", "JAVA.foo = nothing\n");
    assert_eq!(
        corelucid(&["run", s(&nat), "--providers", s(&bad)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn program_errors_carry_positions() {
    let f = Files::new();
    let p = f.add("syntax.ipl", "// header\n#GIPL\n1 +\n");
    let o = corelucid(&["run", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("syntax.ipl:4:1: "), "{}", stderr(&o));
    let p = f.add("tag.ipl", "#GIPL\n1\n#COBOL\n");
    let o = corelucid(&["segments", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3: unknown segment tag #COBOL"));
    let o = corelucid(&["segments", s(&p), "--tag", "COBOL"]);
    assert_eq!(o.status.code(), Some(0));
    let nat = f.add("nat.ipl", NAT);
    let o = corelucid(&["run", s(&nat), "--context", "{t:50}", "--max-depth", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("more than 10 nested demands"));
}

#[test]
fn dialect_of_bare_files() {
    let f = Files::new();
    let nat = f.add("nat.ipl", NAT);
    let o = corelucid(&["run", s(&nat), "--dialect", "core"]);
    assert_eq!(o.status.code(), Some(1));
    let core = f.add("core.ipl", "#t + 1\n");
    let o = corelucid(&["run", s(&core), "--dialect", "core", "--context", "{t:4}"]);
    assert_eq!(stdout(&o), "5\n");
}

#[test]
fn trace_matches_counters() {
    let f = Files::new();
    let nat = f.add("nat.ipl", NAT);
    let o = corelucid(&[
        "run",
        s(&nat),
        "--context",
        "{t:5}",
        "--trace",
        "--warehouse-stats",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    let events = err
        .lines()
        .filter(|l| {
            [
                "demandIssued ",
                "cacheHit ",
                "cacheMiss ",
                "store ",
                "dimensionQueried ",
            ]
            .iter()
            .any(|k| l.starts_with(k))
        })
        .count();
    let counted: usize = err
        .lines()
        .find_map(|l| l.strip_prefix("events "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(events > 0);
    assert_eq!(events, counted);
    assert_eq!(stdout(&o), "5\n");
}

#[test]
fn output_is_reproducible() {
    let f = Files::new();
    let l = f.add("listing1.ipl", LISTING);
    let stubs = f.add("stubs.txt", STUBS);
    for cmd in ["run", "parse", "translate", "segments", "check"] {
        let args = [
            cmd,
            s(&l),
            "--providers",
            s(&stubs),
            "--trace",
            "--warehouse-stats",
        ];
        let a = corelucid(&args);
        let b = corelucid(&args);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
        assert_eq!(a.stderr, b.stderr, "{cmd}");
        assert_eq!(a.status.code(), Some(0), "{cmd}: {}", stderr(&a));
    }
}

#[test]
fn eager_modes() {
    let f = Files::new();
    let p = f.add("e.ipl", "#t @ {t:1, u:1/0}\n");
    let o = corelucid(&["run", s(&p)]);
    assert_eq!(stdout(&o), "special<arith> at e.ipl:1\n");
    let o = corelucid(&["run", s(&p), "--eager-mode", "dimension"]);
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn parse_tree() {
    let o = corelucid_with_input(&["parse", "-"], "X @ {t:1}");
    let out = stdout(&o);
    assert_eq!(out, "At [1:3]\n  Identifier X [1:1]\n  Context [1:5]\n    Entry\n      Identifier t [1:6]\n      Literal 1 [1:8]\n");
    let o = corelucid_with_input(&["parse", "-", "--json"], "0 fby 1");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["units"][0]["tree"]["node"], "fby.t");
}

#[test]
fn repl_keeps_going() {
    let o = corelucid_with_input(
        &["repl", "--context", "{t:2}"],
        "1 + 2\n\nfoo(\n#t * 10\n0 fby 1\n",
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "3");
    assert!(lines[1].starts_with("error: 3:5"), "{out}");
    assert_eq!(lines[2], "20");
    assert!(lines[3].starts_with("error: "), "{out}");
    let o = corelucid_with_input(
        &["repl", "--dialect", "indexical", "--context", "{t:2}"],
        "N where N = 1 fby N * 2; end\n",
    );
    assert_eq!(stdout(&o), "4\n");
}
