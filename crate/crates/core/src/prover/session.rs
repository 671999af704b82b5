//! Persistent proof sessions.
//!
//! A session directory holds `session.txt`, `d.txt`, one `c/NNN-<name>.entry`
//! file per forbidden-set entry, `log.txt`, the current `certificate.txt` and
//! `c6plus.txt`, and a `manifest.txt` of sha256 hashes over all of them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::fragments::PlaneFragment;
use crate::lp::{build_model, solve, verify, Certificate, LpModel, ModelOptions, SolveControl, SolveOptions};
use crate::rational::Rational;
use crate::structure::{
    c6plus_absorption_check, derive_patterns, pattern_sound, structure_of_word, Absorption, Template,
};
use crate::words::{enumerate_words, filter_forbidden, ConfigWord, Pattern, WordKind};

use super::evidence::{attempt_reduce, replay, Evidence, Method, ReduceOptions};
use super::{sha256_hex, ProverError};

pub const KINDS: [WordKind; 3] = [WordKind::Vertex3, WordKind::Face3, WordKind::Face5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    HeuristicProved,
    PairProved,
    Asserted,
    Pending,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::HeuristicProved => "heuristic-proved",
            Status::PairProved => "pair-proved",
            Status::Asserted => "asserted",
            Status::Pending => "pending",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        Some(match s {
            "heuristic-proved" => Status::HeuristicProved,
            "pair-proved" => Status::PairProved,
            "asserted" => Status::Asserted,
            "pending" => Status::Pending,
            _ => return None,
        })
    }
}

/// One member of the forbidden set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CEntry {
    pub name: String,
    pub status: Status,
    pub principal: String,
    /// Number of rounds logged before the commit.
    pub round: usize,
    pub reason: Option<String>,
    pub patterns: Vec<Pattern>,
    pub fragment: Option<PlaneFragment>,
    pub evidence: Option<Evidence>,
}

fn section(out: &mut String, name: &str, body: &str) {
    let _ = writeln!(out, "[{name}]");
    out.push_str(body);
    if !body.is_empty() && !body.ends_with('\n') {
        out.push('\n');
    }
}

impl CEntry {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "entry {}", self.name);
        let _ = writeln!(out, "status {}", self.status.as_str());
        let _ = writeln!(out, "principal {}", self.principal);
        let _ = writeln!(out, "round {}", self.round);
        if let Some(r) = &self.reason {
            let _ = writeln!(out, "reason {r}");
        }
        let pats: String = self.patterns.iter().map(|p| p.to_line() + "\n").collect();
        section(&mut out, "patterns", &pats);
        if let Some(f) = &self.fragment {
            section(&mut out, "fragment", &f.to_text());
        }
        if let Some(e) = &self.evidence {
            section(&mut out, "evidence", &e.to_text());
        }
        out
    }

    pub fn parse(text: &str) -> Result<CEntry, ProverError> {
        let bad = |m: String| ProverError::Parse(format!("entry: {m}"));
        let mut head: BTreeMap<&str, &str> = BTreeMap::new();
        let mut sections: BTreeMap<&str, String> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for line in text.lines() {
            let t = line.trim();
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                current = Some(name);
                sections.entry(name).or_default();
                continue;
            }
            match current {
                Some(s) => {
                    let body = sections.get_mut(s).expect("section opened");
                    body.push_str(line);
                    body.push('\n');
                }
                None if t.is_empty() || t.starts_with('#') => {}
                None => {
                    let (k, v) = t.split_once(' ').unwrap_or((t, ""));
                    head.insert(k, v.trim());
                }
            }
        }
        let get = |k: &str| head.get(k).copied().ok_or_else(|| bad(format!("missing `{k}`")));
        let status = Status::parse(get("status")?).ok_or_else(|| bad("unknown status".into()))?;
        let patterns = match sections.get("patterns") {
            Some(body) => crate::words::parse_patterns(body)?,
            None => Vec::new(),
        };
        let fragment = sections
            .get("fragment")
            .map(|b| PlaneFragment::parse(b))
            .transpose()?;
        let evidence = sections.get("evidence").map(|b| Evidence::parse(b)).transpose()?;
        Ok(CEntry {
            name: get("entry")?.to_string(),
            status,
            principal: head.get("principal").unwrap_or(&"unknown").to_string(),
            round: head
                .get("round")
                .map(|r| r.parse().map_err(|_| bad("bad round".into())))
                .transpose()?
                .unwrap_or(0),
            reason: head.get("reason").map(|r| r.to_string()),
            patterns,
            fragment,
            evidence,
        })
    }

    pub fn template(&self) -> Option<Template> {
        self.fragment.as_ref().map(|f| Template::new(self.name.clone(), f))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Evidence(Evidence),
    Assert(String),
    Pending,
}

#[derive(Debug, Clone)]
pub struct CommitRequest {
    pub name: String,
    pub patterns: Vec<Pattern>,
    pub fragment: Option<PlaneFragment>,
    pub justification: Justification,
    pub principal: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    pub success: bool,
    pub alpha: Rational,
    pub certificate_sha256: String,
    /// Entries committed since the previous round.
    pub delta: Vec<String>,
    pub tight: Vec<String>,
    pub unabsorbed: usize,
}

impl RoundRecord {
    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "round {}", self.round);
        let _ = writeln!(out, "outcome {}", if self.success { "success" } else { "tight" });
        let _ = writeln!(out, "alpha {}", self.alpha);
        let _ = writeln!(out, "certificate {}", self.certificate_sha256);
        let _ = writeln!(out, "unabsorbed {}", self.unabsorbed);
        let _ = writeln!(out, "delta {}", self.delta.join(" "));
        for t in &self.tight {
            let _ = writeln!(out, "tight {t}");
        }
        out.push_str("end\n");
        out
    }

    fn parse_log(text: &str) -> Result<Vec<RoundRecord>, ProverError> {
        let bad = |m: &str| ProverError::Parse(format!("log: {m}"));
        let mut out = Vec::new();
        let mut cur: Option<RoundRecord> = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            if k == "round" {
                cur = Some(RoundRecord {
                    round: v.parse().map_err(|_| bad("round"))?,
                    success: false,
                    alpha: Rational::zero(),
                    certificate_sha256: String::new(),
                    delta: Vec::new(),
                    tight: Vec::new(),
                    unabsorbed: 0,
                });
                continue;
            }
            if k == "end" {
                out.push(cur.take().ok_or_else(|| bad("stray end"))?);
                continue;
            }
            let r = cur.as_mut().ok_or_else(|| bad("line outside a round"))?;
            match k {
                "outcome" => r.success = v == "success",
                "alpha" => r.alpha = v.parse().map_err(|_| bad("alpha"))?,
                "certificate" => r.certificate_sha256 = v.to_string(),
                "unabsorbed" => r.unabsorbed = v.parse().map_err(|_| bad("unabsorbed"))?,
                "delta" => r.delta = v.split_whitespace().map(String::from).collect(),
                "tight" => r.tight.push(v.to_string()),
                _ => return Err(bad(line)),
            }
        }
        if cur.is_some() {
            return Err(bad("unterminated round"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Tight(Vec<ConfigWord>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub round: usize,
    pub alpha: Rational,
    pub outcome: Outcome,
    pub certificate_sha256: String,
    pub unabsorbed: usize,
}

/// Per-kind count and content hash of D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DSummary {
    pub kind: WordKind,
    pub count: usize,
    pub sha256: String,
}

/// All canonical words of the three enumerated kinds.
pub fn generate_d() -> Vec<ConfigWord> {
    KINDS.iter().flat_map(|&k| enumerate_words(k)).collect()
}

pub(crate) fn summarize(words: &[ConfigWord]) -> Vec<DSummary> {
    KINDS
        .iter()
        .map(|&kind| {
            let mut text = String::new();
            let mut count = 0;
            for w in words.iter().filter(|w| w.kind() == kind) {
                let _ = writeln!(text, "{w}");
                count += 1;
            }
            DSummary {
                kind,
                count,
                sha256: sha256_hex(text.as_bytes()),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub k: i64,
    pub options: ModelOptions,
    pub d: Vec<DSummary>,
    pub entries: Vec<CEntry>,
    pub log: Vec<RoundRecord>,
    pub certificate: Option<Certificate>,
    pub c6plus: Vec<Absorption>,
    words: Arc<Vec<ConfigWord>>,
}

impl PartialEq for Session {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.k == other.k
            && self.options == other.options
            && self.d == other.d
            && self.entries == other.entries
            && self.log == other.log
            && self.certificate == other.certificate
            && self.c6plus == other.c6plus
    }
}

pub(crate) fn c6plus_text(report: &[Absorption]) -> String {
    let mut out = String::new();
    for a in report {
        for (sc, hit) in &a.scenarios {
            let far = match (sc.far_triangle_u, sc.far_triangle_v) {
                (false, false) => "-",
                (true, false) => "u",
                (false, true) => "v",
                (true, true) => "uv",
            };
            let _ = writeln!(
                out,
                "{} transit {} far {} {}",
                a.context,
                sc.transit,
                far,
                hit.as_deref().unwrap_or("UNABSORBED")
            );
        }
    }
    out
}

pub(crate) fn parse_c6plus(text: &str) -> Result<Vec<Absorption>, ProverError> {
    let bad = |l: &str| ProverError::Parse(format!("c6plus: `{l}`"));
    let mut out: Vec<Absorption> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [ctx, "transit", q, "far", far, hit] = toks.as_slice() else {
            return Err(bad(line));
        };
        let context: crate::transit::LocalEdgeContext = ctx.parse().map_err(|_| bad(line))?;
        let sc = crate::transit::TransitScenario {
            transit: q.parse().map_err(|_| bad(line))?,
            far_triangle_u: far.contains('u'),
            far_triangle_v: far.contains('v'),
        };
        let hit = (*hit != "UNABSORBED").then(|| hit.to_string());
        match out.last_mut() {
            Some(a) if a.context == context => a.scenarios.push((sc, hit)),
            _ => out.push(Absorption {
                context,
                scenarios: vec![(sc, hit)],
            }),
        }
    }
    Ok(out)
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '\''))
}

fn write_atomic(path: &Path, text: &str) -> Result<(), ProverError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Exclusive writer lock on a session directory, released on drop.
#[derive(Debug)]
pub struct SessionLock {
    path: PathBuf,
}

impl SessionLock {
    pub fn acquire(dir: &Path) -> Result<SessionLock, ProverError> {
        let path = dir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(SessionLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(ProverError::Locked),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for SessionLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

impl Session {
    /// Fresh session with D generated.
    pub fn new(id: &str) -> Session {
        Session::with_words(id, Arc::new(generate_d()))
    }

    /// Fresh session over an already generated D.
    pub fn with_words(id: &str, words: Arc<Vec<ConfigWord>>) -> Session {
        Session {
            id: id.to_string(),
            k: 12,
            options: ModelOptions::default(),
            d: summarize(&words),
            entries: Vec::new(),
            log: Vec::new(),
            certificate: None,
            c6plus: Vec::new(),
            words,
        }
    }

    pub fn words(&self) -> &Arc<Vec<ConfigWord>> {
        &self.words
    }

    pub fn entry(&self, name: &str) -> Option<&CEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn patterns(&self) -> Vec<Pattern> {
        self.entries.iter().flat_map(|e| e.patterns.iter().cloned()).collect()
    }

    pub fn templates(&self) -> Vec<Template> {
        self.entries.iter().filter_map(CEntry::template).collect()
    }

    /// Rule LP over the words no entry forbids.
    pub fn model(&self) -> LpModel {
        let kept = filter_forbidden(&self.words, &self.patterns());
        build_model(&kept, self.options)
    }

    pub fn last(&self) -> Option<&RoundRecord> {
        self.log.last()
    }

    fn delta(&self) -> Vec<String> {
        let n = self.log.len();
        self.entries
            .iter()
            .filter(|e| e.round == n)
            .map(|e| e.name.clone())
            .collect()
    }

    /// One round of the loop: filter, solve, verify, report.
    pub fn iterate(&mut self, ctl: Option<&SolveControl>) -> Result<RoundOutcome, ProverError> {
        let model = self.model();
        let sol = solve(&model, &SolveOptions::default(), ctl)?;
        if !verify(&model, &sol.cert)? {
            return Err(ProverError::NotProven("solver certificate failed verification".into()));
        }
        let cert_sha = sha256_hex(sol.cert.to_text().as_bytes());
        self.c6plus = c6plus_absorption_check(&self.templates());
        let unabsorbed = self.c6plus.iter().filter(|a| !a.absorbed()).count();
        let success = sol.alpha >= Rational::from_int(4);
        let mut tight: Vec<String> = sol
            .tight
            .iter()
            .filter(|t| t.parse::<ConfigWord>().is_ok())
            .cloned()
            .collect();
        tight.sort();
        let record = RoundRecord {
            round: self.log.len() + 1,
            success,
            alpha: sol.alpha.clone(),
            certificate_sha256: cert_sha.clone(),
            delta: self.delta(),
            tight: tight.clone(),
            unabsorbed,
        };
        self.log.push(record);
        self.certificate = Some(sol.cert);
        let outcome = if success {
            Outcome::Success
        } else {
            Outcome::Tight(tight.iter().map(|t| t.parse().expect("filtered")).collect())
        };
        Ok(RoundOutcome {
            round: self.log.len(),
            alpha: sol.alpha,
            outcome,
            certificate_sha256: cert_sha,
            unabsorbed,
        })
    }

    /// Adds an entry after replaying its evidence and checking that every
    /// pattern is implied by its fragment. On error the session is unchanged.
    pub fn commit(&mut self, req: CommitRequest) -> Result<&CEntry, ProverError> {
        if !valid_name(&req.name) {
            return Err(ProverError::Invalid(format!("bad entry name `{}`", req.name)));
        }
        if self.entry(&req.name).is_some() {
            return Err(ProverError::Invalid(format!("entry `{}` exists", req.name)));
        }
        let mut ids: Vec<&str> = self
            .entries
            .iter()
            .flat_map(|e| e.patterns.iter().map(|p| p.id.as_str()))
            .collect();
        for p in &req.patterns {
            if ids.contains(&p.id.as_str()) {
                return Err(ProverError::Invalid(format!("duplicate pattern id `{}`", p.id)));
            }
            ids.push(&p.id);
        }
        let (status, evidence, reason) = match req.justification {
            Justification::Evidence(ev) => {
                let frag = req
                    .fragment
                    .as_ref()
                    .ok_or_else(|| ProverError::Invalid("evidence needs a fragment".into()))?;
                replay(frag, &ev)?;
                let status = match ev.method {
                    Method::Heuristic => Status::HeuristicProved,
                    Method::Pair => Status::PairProved,
                };
                (status, Some(ev), None)
            }
            Justification::Assert(reason) => {
                if reason.trim().is_empty() {
                    return Err(ProverError::Invalid("an assertion needs a reason".into()));
                }
                (Status::Asserted, None, Some(reason.trim().to_string()))
            }
            Justification::Pending => (Status::Pending, None, None),
        };
        if let Some(frag) = &req.fragment {
            let t = Template::new(req.name.clone(), frag);
            if let Some(p) = req.patterns.iter().find(|p| !pattern_sound(&t, p)) {
                return Err(ProverError::PatternUnsound(p.id.clone()));
            }
        }
        self.entries.push(CEntry {
            name: req.name,
            status,
            principal: req.principal,
            round: self.log.len(),
            reason,
            patterns: req.patterns,
            fragment: req.fragment,
            evidence,
        });
        Ok(self.entries.last().expect("just pushed"))
    }

    fn files(&self) -> Vec<(String, String)> {
        let mut files = vec![(
            "session.txt".to_string(),
            format!(
                "id {}\nk {}\nnonneg-omega {}\n",
                self.id, self.k, self.options.nonneg_omega
            ),
        )];
        let mut d = String::new();
        for s in &self.d {
            let _ = writeln!(d, "{} {} {}", s.kind.prefix(), s.count, s.sha256);
        }
        files.push(("d.txt".into(), d));
        for (i, e) in self.entries.iter().enumerate() {
            files.push((format!("c/{:03}-{}.entry", i + 1, e.name), e.to_text()));
        }
        files.push(("log.txt".into(), self.log.iter().map(RoundRecord::to_text).collect()));
        if let Some(c) = &self.certificate {
            files.push(("certificate.txt".into(), c.to_text()));
        }
        if !self.c6plus.is_empty() {
            files.push(("c6plus.txt".into(), c6plus_text(&self.c6plus)));
        }
        files
    }

    pub fn save(&self, dir: &Path) -> Result<(), ProverError> {
        fs::create_dir_all(dir.join("c"))?;
        let files = self.files();
        for old in fs::read_dir(dir.join("c"))? {
            let old = old?.path();
            let rel = format!("c/{}", old.file_name().unwrap_or_default().to_string_lossy());
            if !files.iter().any(|(n, _)| *n == rel) {
                fs::remove_file(old)?;
            }
        }
        let mut manifest = String::new();
        for (name, text) in &files {
            write_atomic(&dir.join(name), text)?;
            let _ = writeln!(manifest, "{}  {}", sha256_hex(text.as_bytes()), name);
        }
        write_atomic(&dir.join("manifest.txt"), &manifest)
    }

    pub fn load(dir: &Path) -> Result<Session, ProverError> {
        Session::load_with(dir, None)
    }

    /// Loads a session, reusing `words` when their hashes match `d.txt`.
    pub fn load_with(dir: &Path, words: Option<Arc<Vec<ConfigWord>>>) -> Result<Session, ProverError> {
        let manifest = fs::read_to_string(dir.join("manifest.txt"))?;
        let mut texts: BTreeMap<String, String> = BTreeMap::new();
        for line in manifest.lines().filter(|l| !l.trim().is_empty()) {
            let (hash, name) = line
                .split_once("  ")
                .ok_or_else(|| ProverError::Parse(format!("manifest line `{line}`")))?;
            let text = fs::read_to_string(dir.join(name))?;
            if sha256_hex(text.as_bytes()) != hash {
                return Err(ProverError::ManifestMismatch(name.to_string()));
            }
            texts.insert(name.to_string(), text);
        }
        let need = |n: &str| {
            texts
                .get(n)
                .cloned()
                .ok_or_else(|| ProverError::Parse(format!("missing {n}")))
        };
        let head = need("session.txt")?;
        let mut id = String::new();
        let mut k = 12;
        let mut options = ModelOptions::default();
        for line in head.lines() {
            match line.split_once(' ') {
                Some(("id", v)) => id = v.to_string(),
                Some(("k", v)) => k = v.parse().map_err(|_| ProverError::Parse("k".into()))?,
                Some(("nonneg-omega", v)) => options.nonneg_omega = v == "true",
                _ => {}
            }
        }
        let mut d = Vec::new();
        for line in need("d.txt")?.lines().filter(|l| !l.is_empty()) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [kind, count, sha] = toks.as_slice() else {
                return Err(ProverError::Parse(format!("d.txt line `{line}`")));
            };
            d.push(DSummary {
                kind: WordKind::from_prefix(kind)
                    .ok_or_else(|| ProverError::Parse(format!("kind `{kind}`")))?,
                count: count.parse().map_err(|_| ProverError::Parse("count".into()))?,
                sha256: sha.to_string(),
            });
        }
        let words = words.unwrap_or_else(|| Arc::new(generate_d()));
        if summarize(&words) != d {
            return Err(ProverError::ManifestMismatch("d.txt (regenerated D differs)".into()));
        }
        let entries = texts
            .iter()
            .filter(|(n, _)| n.starts_with("c/"))
            .map(|(_, t)| CEntry::parse(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Session {
            id,
            k,
            options,
            d,
            entries,
            log: RoundRecord::parse_log(&need("log.txt")?)?,
            certificate: texts
                .get("certificate.txt")
                .map(|t| Certificate::parse(t))
                .transpose()?,
            c6plus: texts
                .get("c6plus.txt")
                .map(|t| parse_c6plus(t))
                .transpose()?
                .unwrap_or_default(),
            words,
        })
    }
}

/// Entry files of a directory, in file-name order.
pub fn load_entries(dir: &Path) -> Result<Vec<CEntry>, ProverError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "entry"));
    paths.sort();
    paths
        .iter()
        .map(|p| CEntry::parse(&fs::read_to_string(p)?))
        .collect()
}

impl CEntry {
    /// The commit request that recreates this entry.
    pub fn to_request(&self, principal: &str) -> CommitRequest {
        let justification = match (&self.evidence, &self.reason, self.status) {
            (_, _, Status::Pending) => Justification::Pending,
            (Some(e), _, _) => Justification::Evidence(e.clone()),
            (None, Some(r), _) => Justification::Assert(r.clone()),
            (None, None, _) => Justification::Pending,
        };
        CommitRequest {
            name: self.name.clone(),
            patterns: self.patterns.clone(),
            fragment: self.fragment.clone(),
            justification,
            principal: principal.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub fragment: String,
    pub committed: bool,
    pub patterns: usize,
    pub note: String,
}

/// Patterns for a fragment, generalised from the words of D it embeds into.
pub fn derive_fragment_patterns(name: &str, frag: &PlaneFragment, words: &[ConfigWord]) -> Vec<Pattern> {
    let t = Template::new(name.to_string(), frag);
    let hits: Vec<ConfigWord> = words
        .iter()
        .filter(|w| t.embed(&structure_of_word(w)).is_some())
        .copied()
        .collect();
    derive_patterns(&t, &hits, name)
}

/// A commit request for a library fragment: derived patterns with evidence
/// when the fragment reduces, otherwise an assertion carrying the failure.
pub fn library_request(
    name: &str,
    frag: &PlaneFragment,
    words: &[ConfigWord],
    principal: &str,
) -> Result<CommitRequest, ProverError> {
    let justification = match attempt_reduce(frag, &ReduceOptions::default())? {
        Ok(ev) => Justification::Evidence(ev),
        Err(f) => Justification::Assert(match f.note {
            Some(n) => format!("heuristic fails ({n}), reducibility taken as given"),
            None => "heuristic fails, reducibility taken as given".into(),
        }),
    };
    Ok(CommitRequest {
        name: name.to_string(),
        patterns: derive_fragment_patterns(name, frag, words),
        fragment: Some(frag.clone()),
        justification,
        principal: principal.to_string(),
    })
}

/// Attempts every library fragment that embeds into a tight word of the last
/// round and commits the ones that reduce, with derived patterns.
pub fn batch_reduce(
    session: &mut Session,
    library: &[(String, PlaneFragment)],
    principal: &str,
) -> Result<Vec<BatchResult>, ProverError> {
    let tight: Vec<ConfigWord> = match session.last() {
        Some(r) => r.tight.iter().filter_map(|t| t.parse().ok()).collect(),
        None => return Err(ProverError::Invalid("no round has been run".into())),
    };
    let structures: Vec<_> = tight.iter().map(structure_of_word).collect();
    let mut out = Vec::new();
    for (name, frag) in library {
        if session.entry(name).is_some() {
            continue;
        }
        let t = Template::new(name.clone(), frag);
        if !structures.iter().any(|s| t.embed(s).is_some()) {
            continue;
        }
        let ev = match attempt_reduce(frag, &ReduceOptions::default())? {
            Ok(ev) => ev,
            Err(f) => {
                out.push(BatchResult {
                    fragment: name.clone(),
                    committed: false,
                    patterns: 0,
                    note: f.note.unwrap_or_else(|| "heuristic failed".into()),
                });
                continue;
            }
        };
        let patterns = derive_fragment_patterns(name, frag, session.words());
        let n = patterns.len();
        session.commit(CommitRequest {
            name: name.clone(),
            patterns,
            fragment: Some(frag.clone()),
            justification: Justification::Evidence(ev),
            principal: principal.to_string(),
        })?;
        out.push(BatchResult {
            fragment: name.clone(),
            committed: true,
            patterns: n,
            note: String::new(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Template;

    #[test]
    fn status_text_round_trips() {
        for s in [Status::HeuristicProved, Status::PairProved, Status::Asserted, Status::Pending] {
            assert_eq!(Status::parse(s.as_str()), Some(s));
        }
        assert_eq!(Status::parse("proved"), None);
    }

    #[test]
    fn entry_text_round_trips() {
        let f = PlaneFragment::parse("v a deg=3 open\nv b deg=3 open\ne a b\n").unwrap();
        let ev = attempt_reduce(&f, &ReduceOptions::default()).unwrap().unwrap();
        let p = Pattern::parse_line("two-1 F3:[v3/3/v3/*/*/*] -- two").unwrap();
        assert!(pattern_sound(&Template::new("two", &f), &p));
        let e = CEntry {
            name: "two".into(),
            status: Status::HeuristicProved,
            principal: "me".into(),
            round: 3,
            reason: None,
            patterns: vec![p],
            fragment: Some(f),
            evidence: Some(ev),
        };
        let text = e.to_text();
        let back = CEntry::parse(&text).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn log_text_round_trips() {
        let r = RoundRecord {
            round: 2,
            success: false,
            alpha: Rational::new(7, 2),
            certificate_sha256: "ab".repeat(32),
            delta: vec!["x".into(), "y".into()],
            tight: vec!["V3:[3/3/3]".into()],
            unabsorbed: 4,
        };
        let text = r.to_text() + &r.to_text();
        assert_eq!(RoundRecord::parse_log(&text).unwrap(), vec![r.clone(), r]);
        assert!(RoundRecord::parse_log("round 1\nalpha 3\n").is_err());
    }

    #[test]
    fn c6plus_report_round_trips() {
        let report = c6plus_absorption_check(&[]);
        assert!(!report.is_empty());
        assert_eq!(parse_c6plus(&c6plus_text(&report)).unwrap(), report);
    }

    #[test]
    fn entry_names_are_file_safe() {
        assert!(valid_name("h01"));
        assert!(valid_name("v4-two_triangles.x'"));
        assert!(!valid_name(""));
        assert!(!valid_name("../x"));
        assert!(!valid_name("a b"));
    }
}
