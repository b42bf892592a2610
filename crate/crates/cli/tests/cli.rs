use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn cagasp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cagasp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ground_prints_canonical_program() {
    let mf = fixture("module_frame.lp");
    let o = cagasp(&["ground", path(&mf)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("mINf(1,2).\n"));
    assert!(text.contains(":- mINf(2,1), mINf(2,2).\n"));
    let oracle = cagasp(&["ground", path(&mf), "--oracle"]);
    assert!(stdout(&oracle).lines().count() > text.lines().count());
}

#[test]
fn ground_stats_csv() {
    let o = cagasp(&["ground", path(&fixture("module_frame.lp")), "--stats", "csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.iter().position(|l| l.starts_with("rule_count,")).unwrap();
    assert!(lines[header + 1].starts_with("13,5,"));
}

#[test]
fn solve_exit_codes() {
    let o = cagasp(&["solve", path(&fixture("module_frame.lp")), "--models", "0"]);
    assert_eq!(o.status.code(), Some(10));
    assert_eq!(stdout(&o).lines().count(), 1);
    let dir = tempfile::tempdir().unwrap();
    let unsat = dir.path().join("unsat.lp");
    std::fs::write(&unsat, "a :- not b. b :- not a. :- a. :- b.").unwrap();
    let o = cagasp(&["solve", path(&unsat)]);
    assert_eq!(o.status.code(), Some(20));
    let o = cagasp(&["solve", path(&unsat), "--brute-force"]);
    assert_eq!(o.status.code(), Some(20));
}

#[test]
fn solve_check_model() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.lp");
    std::fs::write(&p, "a :- not b. b :- not a.").unwrap();
    let m = dir.path().join("m.txt");
    std::fs::write(&m, "a").unwrap();
    assert_eq!(cagasp(&["solve", path(&p), "--check", path(&m)]).status.code(), Some(0));
    std::fs::write(&m, "a b").unwrap();
    assert_eq!(cagasp(&["solve", path(&p), "--check", path(&m)]).status.code(), Some(1));
}

#[test]
fn rewrite_matches_bundled_output() {
    let o = cagasp(&["rewrite", path(&fixture("hcp.lp"))]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), std::fs::read_to_string(fixture("hcp_cag.lp")).unwrap());
    let only = cagasp(&["rewrite", path(&fixture("hcp.lp")), "--only", "room", "--report"]);
    let report = String::from_utf8_lossy(&only.stderr).into_owned();
    assert!(report.contains("rule: room(R)"));
    assert!(!report.contains("rule: cabinetTOthing"));
}

#[test]
fn gen_inc_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.lp");
    let o = cagasp(&["gen", "--persons", "2"]);
    std::fs::write(&inst, o.stdout).unwrap();
    let o = cagasp(&[
        "inc",
        path(&fixture("hcp.lp")),
        "--instance",
        path(&inst),
        "--ppi",
        "1",
        "--cag",
        "--trace",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(10));
    let trace = String::from_utf8_lossy(&o.stderr).into_owned();
    assert_eq!(trace.lines().filter(|l| l.ends_with(",sat")).count(), 2);
    let model = dir.path().join("model.txt");
    std::fs::write(&model, o.stdout).unwrap();
    assert_eq!(cagasp(&["verify", path(&inst), path(&model)]).status.code(), Some(0));
    std::fs::write(&model, "cabinetTOthing(1,1)").unwrap();
    let bad = cagasp(&["verify", path(&inst), path(&model)]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("thing 2 is in no cabinet"));
}

#[test]
fn gen_emits_batches() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("batches");
    let o = cagasp(&["gen", "--persons", "5", "--ppi", "2", "--emit-batches", path(&out)]);
    assert!(o.status.success());
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["batch_001.lp", "batch_002.lp", "batch_003.lp"]);
}

#[test]
fn inc_with_external_engine() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.lp");
    std::fs::write(&inst, "person(1). thing(1). personTOthing(1,1).").unwrap();
    let o = cagasp(&[
        "inc",
        path(&fixture("hcp.lp")),
        "--instance",
        path(&inst),
        "--ppi",
        "1",
        "--engine",
        "external:cat >/dev/null; exit 20",
    ]);
    assert_eq!(o.status.code(), Some(20));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = cagasp(&[
        "bench",
        "--sizes",
        "1,2",
        "--ppi",
        "1",
        "--rewrite",
        "cag",
        "--timeout",
        "30s",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.contains(",sat,")));
    let bad = cagasp(&["bench", "--sizes", "3,1"]);
    assert_eq!(bad.status.code(), Some(1));
    let bad_mode = cagasp(&["bench", "--sizes", "1", "--mode", "sideways"]);
    assert!(!bad_mode.status.success());
}

#[test]
fn missing_file_is_an_error() {
    let o = cagasp(&["ground", "/nonexistent/file.lp"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("reading /nonexistent/file.lp"));
}
