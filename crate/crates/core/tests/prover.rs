use std::path::Path;
use std::sync::Arc;

use discharge_core::prover::*;
use discharge_core::rational::Rational;

fn fixture_session(words: Arc<Vec<discharge_core::ConfigWord>>) -> Session {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/c");
    let mut s = Session::with_words("t", words);
    for e in load_entries(&dir).unwrap() {
        s.commit(e.to_request("test")).unwrap();
    }
    s
}

fn read_all(dir: &Path) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for sub in ["", "c"] {
        let d = dir.join(sub);
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_file() {
                out.push((p.display().to_string(), std::fs::read_to_string(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn fixture_forbidden_set_reaches_four_and_bundle_replays() {
    let words = Arc::new(generate_d());
    let mut s = fixture_session(words.clone());
    assert_eq!(s.entries.len(), 41);
    let asserted: Vec<_> = s
        .entries
        .iter()
        .filter(|e| e.status == Status::Asserted)
        .map(|e| e.name.as_str())
        .collect();
    assert_eq!(asserted, ["c7", "h24"]);

    let r = s.iterate(None).unwrap();
    assert_eq!(r.outcome, Outcome::Success);
    assert!(r.alpha >= Rational::from_int(4));
    assert_eq!(r.unabsorbed, 0);
    assert_eq!(s.log[0].delta.len(), 41);

    // save, load, save is byte-identical
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    s.save(&a).unwrap();
    let loaded = Session::load_with(&a, Some(words.clone())).unwrap();
    assert!(loaded == s);
    loaded.save(&b).unwrap();
    let strip = |v: Vec<(String, String)>, root: &Path| {
        let root = root.display().to_string();
        v.into_iter()
            .map(|(p, t)| (p.replace(&root, ""), t))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(read_all(&a), &a), strip(read_all(&b), &b));

    // a modified session file is refused
    let entry = std::fs::read_dir(a.join("c")).unwrap().next().unwrap().unwrap().path();
    let text = std::fs::read_to_string(&entry).unwrap();
    std::fs::write(&entry, text.replace("principal test", "principal mallory")).unwrap();
    assert!(matches!(
        Session::load_with(&a, Some(words.clone())),
        Err(ProverError::ManifestMismatch(_))
    ));

    let out = tmp.path().join("bundle");
    let report = export_proof(&s, &out).unwrap();
    assert!(report.ok(), "{}", report.to_text());
    assert_eq!(report.obligations, 2 + s.entries.iter().filter_map(|e| e.fragment.as_ref()).map(|f| f.distant.len()).sum::<usize>());
    let again = replay_bundle(&out).unwrap();
    assert!(again.ok(), "{}", again.to_text());

    // tampering with the certificate is caught even with a fixed manifest
    let cert_path = out.join("certificate.txt");
    let cert = std::fs::read_to_string(&cert_path).unwrap();
    let tampered = cert.replacen("alpha 4", "alpha 5", 1);
    assert_ne!(cert, tampered);
    std::fs::write(&cert_path, &tampered).unwrap();
    let r = replay_bundle(&out).unwrap();
    assert!(!r.ok());
    assert_eq!(r.checks[0].0, "manifest");
    assert!(r.checks[0].1.is_err());
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    let fixed: String = manifest
        .lines()
        .map(|l| {
            if l.ends_with("  certificate.txt") {
                format!("{}  certificate.txt\n", sha256_hex(tampered.as_bytes()))
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    std::fs::write(out.join("manifest.txt"), fixed).unwrap();
    let r = replay_bundle(&out).unwrap();
    let verify = r.checks.iter().find(|c| c.0 == "verify").unwrap();
    assert!(verify.1.is_err(), "{}", r.to_text());

    // dropping an entry leaves D\C with a lower optimum, so the model check fails
    let out2 = tmp.path().join("bundle2");
    export_proof(&s, &out2).unwrap();
    let victim = std::fs::read_dir(out2.join("c")).unwrap().next().unwrap().unwrap().path();
    std::fs::remove_file(&victim).unwrap();
    let r = replay_bundle(&out2).unwrap();
    assert!(!r.ok());

    s.commit(CommitRequest {
        name: "later".into(),
        patterns: Vec::new(),
        fragment: None,
        justification: Justification::Pending,
        principal: "test".into(),
    })
    .unwrap();
    assert!(matches!(
        export_proof(&s, &tmp.path().join("bundle3")),
        Err(ProverError::NotProven(_))
    ));
}

#[test]
fn export_refuses_unfinished_sessions() {
    let words = Arc::new(generate_d());
    let mut s = Session::with_words("t", words);
    let tmp = tempfile::tempdir().unwrap();
    assert!(matches!(export_proof(&s, tmp.path()), Err(ProverError::NotProven(_))));
    let r = s.iterate(None).unwrap();
    assert_eq!(r.alpha, Rational::from_int(3));
    match r.outcome {
        Outcome::Tight(words) => assert!(!words.is_empty()),
        Outcome::Success => panic!("empty forbidden set cannot succeed"),
    }
    assert!(matches!(export_proof(&s, tmp.path()), Err(ProverError::NotProven(_))));
}

#[test]
fn session_lock_is_exclusive() {
    let tmp = tempfile::tempdir().unwrap();
    let l = SessionLock::acquire(tmp.path()).unwrap();
    assert!(matches!(SessionLock::acquire(tmp.path()), Err(ProverError::Locked)));
    drop(l);
    SessionLock::acquire(tmp.path()).unwrap();
}

fn demo_fragment() -> discharge_core::fragments::PlaneFragment {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/demo/pair-octagon.frag");
    discharge_core::fragments::PlaneFragment::parse(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn empty_session() -> Session {
    Session::with_words("t", Arc::new(Vec::new()))
}

#[test]
fn pair_evidence_commits_as_pair_proved() {
    let f = demo_fragment();
    let ev = attempt_reduce(&f, &ReduceOptions::default()).unwrap().unwrap();
    assert_eq!(ev.method, Method::Pair);
    assert_eq!(ev.trace[..2], ["pivot a".to_string(), "pair c g".to_string()]);
    let parsed = Evidence::parse(&ev.to_text()).unwrap();
    assert_eq!(parsed, ev);
    let mut s = empty_session();
    let e = s
        .commit(CommitRequest {
            name: "octagon".into(),
            patterns: Vec::new(),
            fragment: Some(f),
            justification: Justification::Evidence(parsed),
            principal: "test".into(),
        })
        .unwrap();
    assert_eq!(e.status, Status::PairProved);
}

#[test]
fn corrupted_evidence_leaves_the_session_unchanged() {
    let f = demo_fragment();
    let ev = attempt_reduce(&f, &ReduceOptions::default()).unwrap().unwrap();
    let mut s = empty_session();
    let before = s.clone();
    let mut bad = ev.clone();
    bad.trace[1] = "pair a e".into();
    let req = |j| CommitRequest {
        name: "octagon".into(),
        patterns: Vec::new(),
        fragment: Some(f.clone()),
        justification: j,
        principal: "test".into(),
    };
    assert!(matches!(
        s.commit(req(Justification::Evidence(bad))),
        Err(ProverError::EvidenceReplayFailed(_))
    ));
    let mut text = ev.to_text().replace("v a 2", "v a 3");
    assert!(matches!(
        s.commit(req(Justification::Evidence(Evidence::parse(&text).unwrap()))),
        Err(ProverError::EvidenceReplayFailed(_))
    ));
    text = ev.to_text().replace(&ev.fragment_sha256, &"0".repeat(64));
    assert!(matches!(
        s.commit(req(Justification::Evidence(Evidence::parse(&text).unwrap()))),
        Err(ProverError::EvidenceReplayFailed(_))
    ));
    assert!(s == before);
    assert!(s.entries.is_empty());
}

#[test]
fn commit_rejects_unsound_patterns_and_duplicates() {
    use discharge_core::words::Pattern;
    let f = demo_fragment();
    let mut s = empty_session();
    let any_v3 = Pattern::parse_line("x-1 V3:[*/*/*]").unwrap();
    let req = |name: &str, p: Vec<Pattern>, j| CommitRequest {
        name: name.into(),
        patterns: p,
        fragment: Some(f.clone()),
        justification: j,
        principal: "test".into(),
    };
    assert!(matches!(
        s.commit(req("x", vec![any_v3.clone()], Justification::Assert("because".into()))),
        Err(ProverError::PatternUnsound(_))
    ));
    assert!(matches!(
        s.commit(req("x", vec![], Justification::Assert("  ".into()))),
        Err(ProverError::Invalid(_))
    ));
    s.commit(req("x", vec![], Justification::Pending)).unwrap();
    assert!(matches!(
        s.commit(req("x", vec![], Justification::Pending)),
        Err(ProverError::Invalid(_))
    ));
    assert_eq!(s.entries[0].status, Status::Pending);
}
