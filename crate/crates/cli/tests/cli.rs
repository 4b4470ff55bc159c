use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_precsat")
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../trs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn prove(file: &str, extra: &[&str]) -> Output {
    let path = corpus(file);
    let mut args = vec!["prove", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn exit_codes_follow_the_verdict() {
    let o = prove("nnf.trs", &["--print-model"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("YES"));
    assert!(stdout(&o).contains("precedence: - > * > "));

    let o = prove("idiv.trs", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("no strict LPO proof exists"));

    let o = prove("idiv.trs", &["--order", "quasi", "--print-model"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("precedence: div = i"));
}

#[test]
fn errors_exit_with_two() {
    assert_eq!(prove("missing.trs", &[]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.trs");
    std::fs::write(&bad, "(VAR x y)(RULES f(x) -> g(x,y))").unwrap();
    let o = run(&["prove", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not occur in the left-hand side"));

    let theory = dir.path().join("ac.trs");
    std::fs::write(&theory, "(VAR x)(THEORY (AC f))(RULES f(x,x) -> x)").unwrap();
    assert_eq!(run(&["prove", theory.to_str().unwrap()]).status.code(), Some(2));

    let o = prove("idiv.trs", &["--order", "quasi", "--timeout", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(prove("idiv.trs", &["--solver", "bogus"]).status.code(), Some(2));
}

#[test]
fn json_report_fields() {
    let o = prove("idiv.trs", &["--order", "quasi", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "YES");
    assert_eq!(v["variant"], "quasi");
    assert_eq!(v["encoding"], "symbol");
    assert_eq!(v["precedence"][0], serde_json::json!(["div", "i"]));
    let stats = v["statistics"].as_object().unwrap();
    for key in [
        "symbols_total",
        "symbols_largest_scc",
        "cnf_vars",
        "cnf_clauses",
        "parse_ms",
        "unfold_ms",
        "encode_ms",
        "solve_ms",
    ] {
        assert!(stats.contains_key(key), "{key}");
    }
    assert_eq!(stats["symbols_total"], 3);

    let o = prove("idiv.trs", &["--format", "json", "--encoding", "atom"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "NO");
    assert!(v["precedence"].is_null());
}

fn two_system_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["nnf.trs", "idiv.trs"] {
        std::fs::copy(corpus(f), dir.path().join(f)).unwrap();
    }
    dir
}

#[test]
fn batch_over_the_bundled_pair() {
    let dir = two_system_dir();
    let o = run(&["batch", dir.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let s = &v["summary"];
    assert_eq!(s["file_count"], 2);
    assert_eq!(s["yes_count"], 1);
    let avg = s["average_seconds"].as_f64().unwrap();
    let total = s["total_seconds"].as_f64().unwrap();
    assert!((avg - total / 2.0).abs() < 1e-12);
    let rows = v["rows"].as_array().unwrap();
    assert!(rows[0]["path"].as_str().unwrap().ends_with("idiv.trs"));
    assert_eq!(rows[0]["outcome"], "no");
    assert_eq!(rows[1]["outcome"], "yes");

    let text = stdout(&run(&["batch", dir.path().to_str().unwrap(), "--jobs", "4"]));
    let verdicts: Vec<&str> = text.lines().take(2).map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(verdicts, ["NO", "YES"]);
    assert!(text.contains("files 2  YES 1  NO 1"));
}

#[test]
fn batch_skips_theories_and_handles_empty_dirs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["batch", dir.path().to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["summary"]["file_count"], 0);
    assert_eq!(v["summary"]["yes_count"], 0);
    assert_eq!(v["summary"]["average_seconds"], 0.0);

    std::fs::write(dir.path().join("ac.trs"), "(VAR x)(THEORY (AC f))(RULES f(x,x) -> x)").unwrap();
    let o = run(&["batch", dir.path().to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["summary"]["skipped_count"], 1);
    assert_eq!(v["summary"]["file_count"], 0);

    assert_eq!(run(&["batch", "/nonexistent/dir"]).status.code(), Some(2));
}

#[test]
fn external_solver_agrees_with_the_internal_one() {
    let via_file = format!("external:{} solve {{input}} {{output}}", bin());
    let via_stdout = format!("external:{} solve", bin());
    for solver in [via_file, via_stdout] {
        for (file, order, code) in [
            ("nnf.trs", "strict", 0),
            ("idiv.trs", "strict", 1),
            ("idiv.trs", "quasi", 0),
            ("loop.trs", "quasi", 1),
        ] {
            let o = prove(file, &["--order", order, "--solver", &solver]);
            assert_eq!(o.status.code(), Some(code), "{file} {order} {solver}");
        }
    }
}

#[test]
fn dimacs_dump_and_solve_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("nnf.cnf");
    let o = prove("nnf.trs", &["--dimacs", cnf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&cnf).unwrap();
    assert!(text.lines().any(|l| l.starts_with("p cnf ")));
    assert!(text.contains("bit 1 of -"));

    let o = run(&["solve", cnf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).starts_with("s SATISFIABLE\nv "));

    let unsat = dir.path().join("u.cnf");
    std::fs::write(&unsat, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let o = run(&["solve", unsat.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(20));
    assert_eq!(stdout(&o), "s UNSATISFIABLE\n");
}

#[test]
fn every_bundled_file_agrees_across_options() {
    for entry in std::fs::read_dir(corpus("")).unwrap() {
        let path = entry.unwrap().path();
        let p = path.to_str().unwrap();
        for order in ["strict", "quasi"] {
            let codes: Vec<Option<i32>> = [["symbol", "off"], ["symbol", "on"], ["atom", "off"], ["atom", "on"]]
                .iter()
                .map(|[e, s]| {
                    run(&["prove", p, "--order", order, "--encoding", e, "--scc", s]).status.code()
                })
                .collect();
            assert!(codes.iter().all(|c| *c == codes[0] && matches!(c, Some(0 | 1))), "{p} {order} {codes:?}");
        }
    }
}
