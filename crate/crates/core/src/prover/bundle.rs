//! Self-contained proof bundles and their independent replay.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::lp::{build_model, verify, Certificate, LpModel, ModelOptions};
use crate::rational::Rational;
use crate::structure::{c6plus_absorption_check, pattern_sound, Template};
use crate::words::{filter_forbidden, ConfigWord};

use super::evidence::replay;
use super::session::{c6plus_text, generate_d, load_entries, summarize, CEntry, Outcome, Session, Status};
use super::{sha256_hex, ProverError};

const REPLAY: &str = "\
Replay with `discharge replay <bundle-dir>`. It checks, in order:
  manifest    every file hash in manifest.txt
  d           regenerated D matches d.txt
  model       D minus the patterns in c/, with options.txt, rebuilds model.txt
              byte for byte
  verify      certificate.txt satisfies every row exactly and alpha >= 4
  evidence    every proved entry's evidence replays on its fragment
  patterns    every pattern is implied by its entry's fragment
  c6plus      every overloaded edge scenario is absorbed by some entry
Entries listed in obligations.txt are assumed, not proved.
";

/// Result of an independent replay; `checks` is in the order above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleReport {
    pub alpha: Option<Rational>,
    pub checks: Vec<(String, Result<(), String>)>,
    pub obligations: usize,
}

impl BundleReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.1.is_ok())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, r) in &self.checks {
            match r {
                Ok(()) => {
                    let _ = writeln!(out, "{name:<10} PASS");
                }
                Err(e) => {
                    let _ = writeln!(out, "{name:<10} FAIL {e}");
                }
            }
        }
        if let Some(a) = &self.alpha {
            let _ = writeln!(out, "alpha {a}");
        }
        let _ = writeln!(out, "obligations {}", self.obligations);
        out
    }
}

fn obligations(entries: &[CEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        if e.status == Status::Asserted {
            let _ = writeln!(out, "asserted {} {}", e.name, e.reason.as_deref().unwrap_or(""));
        }
        if let Some(f) = &e.fragment {
            for d in &f.distant {
                let _ = writeln!(out, "distant {} {} {} {}", e.name, f.id(d.a), f.id(d.b), d.reason);
            }
        }
    }
    out
}

fn kept_model(words: &[ConfigWord], entries: &[CEntry], options: ModelOptions) -> LpModel {
    let patterns: Vec<_> = entries.iter().flat_map(|e| e.patterns.iter().cloned()).collect();
    build_model(&filter_forbidden(words, &patterns), options)
}

/// Writes a bundle for a session whose last round succeeded, then replays it
/// from disk and fails unless every check passes.
pub fn export_proof(session: &Session, out: &Path) -> Result<BundleReport, ProverError> {
    match session.last() {
        Some(r) if r.success => {}
        _ => return Err(ProverError::NotProven("the last round did not reach alpha >= 4".into())),
    }
    if let Some(e) = session.entries.iter().find(|e| e.status == Status::Pending) {
        return Err(ProverError::NotProven(format!("entry `{}` is pending", e.name)));
    }
    let cert = session
        .certificate
        .clone()
        .ok_or_else(|| ProverError::NotProven("no certificate".into()))?;
    let model = kept_model(session.words(), &session.entries, session.options);
    let mut files: Vec<(String, String)> = vec![
        ("REPLAY.txt".into(), REPLAY.to_string()),
        (
            "options.txt".into(),
            format!("nonneg-omega {}\n", session.options.nonneg_omega),
        ),
        ("model.txt".into(), model.to_text()),
        ("certificate.txt".into(), cert.to_text()),
        (
            "verify.txt".into(),
            format!(
                "rows {}\nalpha {}\nresult {}\n",
                model.constraints.len(),
                cert.alpha,
                if verify(&model, &cert)? { "pass" } else { "fail" }
            ),
        ),
        ("obligations.txt".into(), obligations(&session.entries)),
        (
            "c6plus.txt".into(),
            c6plus_text(&c6plus_absorption_check(&session.templates())),
        ),
    ];
    let mut d = String::new();
    for s in &session.d {
        let _ = writeln!(d, "{} {} {}", s.kind.prefix(), s.count, s.sha256);
    }
    files.push(("d.txt".into(), d));
    for (i, e) in session.entries.iter().enumerate() {
        files.push((format!("c/{:03}-{}.entry", i + 1, e.name), e.to_text()));
    }
    if out.exists() && fs::read_dir(out)?.next().is_some() {
        return Err(ProverError::Invalid(format!("{} is not empty", out.display())));
    }
    fs::create_dir_all(out.join("c"))?;
    let mut manifest = String::new();
    for (name, text) in &files {
        fs::write(out.join(name), text)?;
        let _ = writeln!(manifest, "{}  {}", sha256_hex(text.as_bytes()), name);
    }
    fs::write(out.join("manifest.txt"), manifest)?;
    let report = replay_bundle_with(out, Some(session.words()))?;
    if !report.ok() {
        return Err(ProverError::NotProven(report.to_text()));
    }
    Ok(report)
}

/// Replays a bundle from scratch, regenerating D.
pub fn replay_bundle(dir: &Path) -> Result<BundleReport, ProverError> {
    replay_bundle_with(dir, None)
}

fn check(checks: &mut Vec<(String, Result<(), String>)>, name: &str, r: Result<(), String>) -> bool {
    let ok = r.is_ok();
    checks.push((name.to_string(), r));
    ok
}

pub(crate) fn replay_bundle_with(
    dir: &Path,
    words: Option<&[ConfigWord]>,
) -> Result<BundleReport, ProverError> {
    let mut checks = Vec::new();
    let report = |checks, alpha, obligations| BundleReport {
        alpha,
        checks,
        obligations,
    };

    let manifest = fs::read_to_string(dir.join("manifest.txt"))?;
    let mut listed: BTreeMap<String, String> = BTreeMap::new();
    let mut bad = Vec::new();
    for line in manifest.lines().filter(|l| !l.trim().is_empty()) {
        let Some((hash, name)) = line.split_once("  ") else {
            bad.push(format!("malformed line `{line}`"));
            continue;
        };
        match fs::read_to_string(dir.join(name)) {
            Ok(text) if sha256_hex(text.as_bytes()) == hash => {
                listed.insert(name.to_string(), text);
            }
            Ok(_) => bad.push(format!("{name} hash differs")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    for e in fs::read_dir(dir.join("c"))? {
        let name = format!("c/{}", e?.file_name().to_string_lossy());
        if !listed.contains_key(&name) && !bad.iter().any(|b| b.starts_with(&name)) {
            bad.push(format!("{name} not in manifest"));
        }
    }
    if !check(&mut checks, "manifest", if bad.is_empty() { Ok(()) } else { Err(bad.join("; ")) }) {
        return Ok(report(checks, None, 0));
    }
    let text = |n: &str| {
        listed
            .get(n)
            .cloned()
            .ok_or_else(|| ProverError::Parse(format!("bundle is missing {n}")))
    };

    let generated;
    let words = match words {
        Some(w) => w,
        None => {
            generated = generate_d();
            &generated
        }
    };
    let mut d = String::new();
    for s in summarize(words) {
        let _ = writeln!(d, "{} {} {}", s.kind.prefix(), s.count, s.sha256);
    }
    check(
        &mut checks,
        "d",
        if d == text("d.txt")? { Ok(()) } else { Err("regenerated D differs".into()) },
    );

    let entries = load_entries(&dir.join("c"))?;
    let obligation_count = text("obligations.txt")?.lines().count();
    let options = ModelOptions {
        nonneg_omega: text("options.txt")?.trim() == "nonneg-omega true",
    };
    let model = kept_model(words, &entries, options);
    let model_ok = check(
        &mut checks,
        "model",
        if model.to_text() == text("model.txt")? {
            Ok(())
        } else {
            Err("rebuilt model differs from model.txt".into())
        },
    );

    let cert = Certificate::parse(&text("certificate.txt")?)?;
    let four = Rational::from_int(4);
    let r = if !model_ok {
        Err("skipped, model differs".into())
    } else if !verify(&model, &cert)? {
        Err("certificate violates a row".into())
    } else if cert.alpha < four {
        Err(format!("alpha {} < 4", cert.alpha))
    } else {
        Ok(())
    };
    check(&mut checks, "verify", r);

    let mut failures = Vec::new();
    for e in &entries {
        match (e.status, &e.evidence, &e.fragment) {
            (Status::HeuristicProved | Status::PairProved, Some(ev), Some(f)) => {
                if let Err(err) = replay(f, ev) {
                    failures.push(format!("{}: {err}", e.name));
                }
            }
            (Status::HeuristicProved | Status::PairProved, _, _) => {
                failures.push(format!("{}: proved without evidence", e.name))
            }
            (Status::Pending, _, _) => failures.push(format!("{}: pending", e.name)),
            (Status::Asserted, _, _) => {}
        }
    }
    check(
        &mut checks,
        "evidence",
        if failures.is_empty() { Ok(()) } else { Err(failures.join("; ")) },
    );

    let mut unsound = Vec::new();
    for e in &entries {
        if let Some(t) = e.template() {
            unsound.extend(e.patterns.iter().filter(|p| !pattern_sound(&t, p)).map(|p| p.id.clone()));
        }
    }
    check(
        &mut checks,
        "patterns",
        if unsound.is_empty() { Ok(()) } else { Err(format!("unsound {}", unsound.join(" "))) },
    );

    let templates: Vec<Template> = entries.iter().filter_map(CEntry::template).collect();
    let absorption = c6plus_absorption_check(&templates);
    let open = absorption.iter().filter(|a| !a.absorbed()).count();
    let r = if c6plus_text(&absorption) != text("c6plus.txt")? {
        Err("recomputed report differs from c6plus.txt".into())
    } else if open > 0 {
        Err(format!("{open} contexts unabsorbed"))
    } else {
        Ok(())
    };
    check(&mut checks, "c6plus", r);

    Ok(report(checks, Some(cert.alpha), obligation_count))
}

impl Session {
    /// Last outcome as recorded in the log.
    pub fn last_outcome(&self) -> Option<Outcome> {
        self.last().map(|r| {
            if r.success {
                Outcome::Success
            } else {
                Outcome::Tight(r.tight.iter().filter_map(|t| t.parse().ok()).collect())
            }
        })
    }
}
