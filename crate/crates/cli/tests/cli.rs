use std::path::Path;
use std::process::{Command, Output};

fn run(session: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discharge"))
        .arg("--session")
        .arg(session)
        .args(args)
        .current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../.."))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn command_line_loop() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("s");
    let sp = s.to_str().unwrap();

    let o = run(&s, &["gen"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("F5 324008"));
    assert!(!run(&s, &["gen"]).status.success());

    let o = run(&s, &["solve"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("round 1 alpha 3"));
    let o = run(&s, &["tight", "--limit", "3"]);
    assert_eq!(stdout(&o).lines().count(), 3);
    assert!(stdout(&run(&s, &["tight"])).lines().any(|l| l == "V3:[3/3/3]"));

    let ev = tmp.path().join("c0.ev");
    let pats = tmp.path().join("c0.pat");
    let o = run(&s, &["reduce", "fixtures/fragments/c0.frag", "--out", ev.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let o = run(&s, &["reduce", "fixtures/fragments/h24.frag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("failure"));
    let o = run(&s, &["reduce", "fixtures/fragments/c1.frag", "--pair", "b,c", "--pivot", "a"]);
    assert!(o.status.success(), "{o:?}");

    let o = run(&s, &["derive", "fixtures/fragments/c0.frag", "--out", pats.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let o = run(
        &s,
        &[
            "commit",
            pats.to_str().unwrap(),
            "--fragment",
            "fixtures/fragments/c0.frag",
            "--evidence",
            ev.to_str().unwrap(),
            "--principal",
            "tester",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("committed c0 (heuristic-proved"));
    // the same patterns without a fragment to check them against cannot carry evidence
    let o = run(&s, &["commit", pats.to_str().unwrap(), "--name", "again", "--evidence", ev.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&s, &["solve"]);
    assert!(o.status.success(), "{o:?}");
    let o = run(&s, &["history"]);
    let h = stdout(&o);
    assert!(h.lines().nth(1).unwrap().ends_with("delta c0"), "{h}");
    let o = run(&s, &["status"]);
    assert!(stdout(&o).contains("c0 heuristic-proved"));
    let o = run(&s, &["export"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not proven"), "{sp}");
}
