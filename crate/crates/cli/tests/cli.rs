use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_commitlab"));
    cmd.env_remove("COMMITLAB_SEED");
    cmd
}

fn asset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/assets").join(name)
}

fn run(args: &[&std::ffi::OsStr]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn demo_matches_golden_output() {
    let o = bin().arg("demo").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let golden = include_str!("golden/demo.txt");
    assert_eq!(stdout(&o), golden);
    assert_eq!(stdout(&o).lines().last(), Some("final active: c4, c5"));
}

#[test]
fn demo_ignores_seed() {
    let a = bin().args(["demo", "--seed", "1"]).output().unwrap();
    let b = bin().args(["demo"]).env("COMMITLAB_SEED", "99").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn demo_machine_output_replays() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("demo.jsonl");
    let o = bin().args(["demo", "--machine"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&trace, &o.stdout).unwrap();
    let r = run(&[
        "replay".as_ref(),
        trace.as_os_str(),
        asset("appointment.cp").as_os_str(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let dump = stdout(&r);
    assert_eq!(dump.lines().filter(|l| l.contains(" Detached ")).count(), 2, "{dump}");
}

#[test]
fn lint_flags_bare_ordering() {
    let o = run(&["lint".as_ref(), asset("bad-ordering.cp").as_os_str()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("L-SOLELY"));

    let o = run(&["lint".as_ref(), asset("wrapped-ordering.cp").as_os_str()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("L-SOLELY"));
}

#[test]
fn lint_machine_output_is_json_lines() {
    let o = run(&["lint".as_ref(), "--machine".as_ref(), asset("bad-ordering.cp").as_os_str()]);
    for line in stdout(&o).lines() {
        assert!(line.starts_with('{') && line.ends_with('}'), "{line}");
        assert!(line.contains("\"principle\""));
    }
}

#[test]
fn check_syntax_reports_errors_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cp");
    std::fs::write(&bad, "protocol P\nroles A B\nmessage m: A -> \nend\n").unwrap();
    let o = run(&["check-syntax".as_ref(), bad.as_os_str()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(":3:"), "{}", stdout(&o));

    let o = run(&["check-syntax".as_ref(), asset("bad-ordering.cp").as_os_str()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = run(&["lint".as_ref(), "no/such/file.cp".as_ref()]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_stable_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let o = run(&[
            "simulate".as_ref(),
            asset("appointment-showup.scn").as_os_str(),
            "--seed".as_ref(),
            "7".as_ref(),
            "--out".as_ref(),
            out.as_os_str(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(a).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(b).unwrap());
}

#[test]
fn seed_falls_back_to_environment() {
    let scn = asset("appointment-showup.scn");
    let flag = bin().args(["simulate".as_ref(), scn.as_os_str(), "--seed".as_ref(), "3".as_ref()]).output().unwrap();
    let env = bin().args(["simulate".as_ref(), scn.as_os_str()]).env("COMMITLAB_SEED", "3").output().unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn comply_on_showup_trace_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let o = run(&[
        "simulate".as_ref(),
        asset("appointment-showup.scn").as_os_str(),
        "--out".as_ref(),
        trace.as_os_str(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["comply".as_ref(), trace.as_os_str(), asset("appointment.cp").as_os_str()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all principals compliant"));
}

#[test]
fn comply_reports_violations_after_deadline() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let o = bin().args(["demo", "--machine"]).output().unwrap();
    std::fs::write(&trace, &o.stdout).unwrap();
    let cp = dir.path().join("p.cp");
    // Same protocol, but showing up is due by time 10.
    let src = commitlab::demo::APPOINTMENT_PROTOCOL.replace("showUp(PAT, s))", "showUp(PAT, s) . tick(10))");
    std::fs::write(&cp, src).unwrap();
    let o = run(&[
        "comply".as_ref(),
        trace.as_os_str(),
        cp.as_os_str(),
        "--horizon".as_ref(),
        "50".as_ref(),
    ]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(1), "{text}");
    assert!(text.contains("1 violation(s)"), "{text}");
    assert!(text.contains("accountable Bianca owed to Alessia"), "{text}");
}

#[test]
fn explain_accepts_hash_ids() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let o = bin().args(["demo", "--machine"]).output().unwrap();
    std::fs::write(&trace, &o.stdout).unwrap();
    let o = run(&[
        "explain".as_ref(),
        trace.as_os_str(),
        asset("appointment.cp").as_os_str(),
        "#0".as_ref(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("#0 setup c0: created conditional"), "{text}");
    assert!(text.ends_with("verdict: discharged\n"), "{text}");

    let o = run(&["explain".as_ref(), trace.as_os_str(), asset("appointment.cp").as_os_str(), "42".as_ref()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_directory_is_sorted_and_parallel_safe() {
    let dir = tempfile::tempdir().unwrap();
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/assets");
    let out = dir.path().join("traces");
    let o = run(&["simulate".as_ref(), src.as_os_str(), "--out".as_ref(), out.as_os_str()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let names: Vec<&str> = text.lines().map(|l| l.split(':').next().unwrap()).collect();
    assert_eq!(names, ["appointment_showup", "appointment"]);
    assert!(out.join("appointment.jsonl").exists());
    assert!(out.join("appointment-showup.jsonl").exists());
    let again = run(&["simulate".as_ref(), src.as_os_str()]);
    assert_eq!(again.stdout, o.stdout);
}
