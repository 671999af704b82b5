//! HTTP API over one session directory.
//!
//! Reads share the session; commits and round results take it exclusively
//! and are saved before the response. Solves run as background jobs on a
//! snapshot, so no request waits on the LP.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::RwLock;

use discharge_core::fragments::PlaneFragment;
use discharge_core::lp::SolveControl;
use discharge_core::prover::{
    attempt_reduce, derive_fragment_patterns, replay_bundle, CommitRequest, Evidence, Justification,
    Outcome, ProverError, ReduceOptions, Session, SessionLock,
};
use discharge_core::structure::{structure_of_word, Template};
use discharge_core::words::{matches, parse_patterns, ConfigWord};

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<ProverError> for ApiError {
    fn from(e: ProverError) -> Self {
        let code = match &e {
            ProverError::EvidenceReplayFailed(_)
            | ProverError::PatternUnsound(_)
            | ProverError::Invalid(_)
            | ProverError::Parse(_)
            | ProverError::Fragment(_)
            | ProverError::Word(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ProverError::NotProven(_) | ProverError::Locked => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}"))
    }
}

fn bad(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::UNPROCESSABLE_ENTITY, msg.into())
}

type ApiResult = Result<Json<Value>, ApiError>;

#[derive(Debug, Clone)]
enum JobState {
    Running,
    Done(Value),
    Failed(String),
    Cancelled,
    /// C changed while the job ran; the result was discarded.
    Stale,
}

struct Job {
    ctl: Arc<SolveControl>,
    state: JobState,
}

pub struct AppState {
    session: RwLock<Session>,
    dir: PathBuf,
    library: Vec<(String, PlaneFragment)>,
    jobs: Mutex<BTreeMap<u64, Job>>,
    _lock: Option<SessionLock>,
}

impl AppState {
    /// Serves `session`, saving to `dir`; holds the directory lock if given.
    pub fn new(
        session: Session,
        dir: PathBuf,
        library: Vec<(String, PlaneFragment)>,
        lock: Option<SessionLock>,
    ) -> Arc<AppState> {
        Arc::new(AppState {
            session: RwLock::new(session),
            dir,
            library,
            jobs: Mutex::new(BTreeMap::new()),
            _lock: lock,
        })
    }

    fn fragment(&self, name: &str) -> Option<&PlaneFragment> {
        self.library.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/status", get(status))
        .route("/api/tight", get(tight))
        .route("/api/config/{id}", get(config))
        .route("/api/fragments", get(fragments))
        .route("/api/attempt-reduce", post(attempt))
        .route("/api/commit", post(commit))
        .route("/api/history", get(history))
        .route("/api/bundle", get(bundle))
        .route("/api/iterate", post(iterate))
        .route("/api/jobs/{id}", get(job).delete(cancel_job))
        .with_state(state)
}

fn job_json(id: u64, job: &Job) -> Value {
    let pivots = job.ctl.pivots.load(Ordering::Relaxed);
    let (state, result) = match &job.state {
        JobState::Running => ("running", Value::Null),
        JobState::Done(v) => ("done", v.clone()),
        JobState::Failed(e) => ("failed", json!(e)),
        JobState::Cancelled => ("cancelled", Value::Null),
        JobState::Stale => ("stale", Value::Null),
    };
    json!({ "id": id, "state": state, "pivots": pivots, "result": result })
}

async fn status(State(st): State<Arc<AppState>>) -> ApiResult {
    let s = st.session.read().await;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &s.entries {
        *counts.entry(e.status.as_str()).or_default() += 1;
    }
    let by_status = |x: &str| -> Vec<&str> {
        s.entries
            .iter()
            .filter(|e| e.status.as_str() == x)
            .map(|e| e.name.as_str())
            .collect()
    };
    let last = s.last().map(|r| {
        json!({
            "round": r.round,
            "outcome": if r.success { "success" } else { "tight" },
            "alpha": r.alpha.to_string(),
            "certificate_sha256": r.certificate_sha256,
            "tight": r.tight.len(),
            "unabsorbed": r.unabsorbed,
        })
    });
    let jobs = st.jobs.lock().expect("jobs lock");
    let running: Vec<Value> = jobs
        .iter()
        .filter(|(_, j)| matches!(j.state, JobState::Running))
        .map(|(id, j)| job_json(*id, j))
        .collect();
    Ok(Json(json!({
        "id": s.id,
        "k": s.k,
        "nonneg_omega": s.options.nonneg_omega,
        "d": s.d.iter().map(|d| json!({
            "kind": d.kind.prefix(), "count": d.count, "sha256": d.sha256
        })).collect::<Vec<_>>(),
        "entries": s.entries.len(),
        "by_status": counts,
        "asserted": by_status("asserted"),
        "pending": by_status("pending"),
        "rounds": s.log.len(),
        "alpha_history": s.log.iter().map(|r| r.alpha.to_string()).collect::<Vec<_>>(),
        "last": last,
        "jobs": running,
    })))
}

#[derive(Deserialize)]
struct Limit {
    limit: Option<usize>,
}

async fn tight(State(st): State<Arc<AppState>>, Query(q): Query<Limit>) -> ApiResult {
    let s = st.session.read().await;
    let Some(r) = s.last() else {
        return Ok(Json(json!({ "round": 0, "alpha": null, "total": 0, "tight": [] })));
    };
    let n = q.limit.unwrap_or(usize::MAX);
    Ok(Json(json!({
        "round": r.round,
        "alpha": r.alpha.to_string(),
        "total": r.tight.len(),
        "tight": r.tight.iter().take(n).collect::<Vec<_>>(),
    })))
}

async fn config(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let w: ConfigWord = id.parse().map_err(|e| bad(format!("{e}")))?;
    let text = w.to_string();
    let s = st.session.read().await;
    let mut forbidden_by = Vec::new();
    for e in &s.entries {
        for p in &e.patterns {
            if matches(&w, p).map_err(|e| bad(e.to_string()))? {
                forbidden_by.push(json!({ "entry": e.name, "pattern": p.id }));
            }
        }
    }
    let structure = structure_of_word(&w);
    let embedded: Vec<&str> = st
        .library
        .iter()
        .filter(|(n, f)| Template::new(n.clone(), f).embed(&structure).is_some())
        .map(|(n, _)| n.as_str())
        .collect();
    Ok(Json(json!({
        "id": text,
        "kind": w.kind().prefix(),
        "slots": w.slots().iter().map(|v| v.as_str()).collect::<Vec<_>>(),
        "in_d": s.words().contains(&w),
        "tight": s.last().is_some_and(|r| r.tight.contains(&text)),
        "forbidden_by": forbidden_by,
        "fragments": embedded,
    })))
}

async fn fragments(State(st): State<Arc<AppState>>) -> ApiResult {
    let s = st.session.read().await;
    let list: Vec<Value> = st
        .library
        .iter()
        .map(|(name, f)| {
            json!({
                "name": name,
                "text": f.to_text(),
                "vertices": f.vertices.len(),
                "pivot": f.pivot.map(|p| f.id(p).to_string()),
                "status": s.entry(name).map(|e| e.status.as_str()),
            })
        })
        .collect();
    Ok(Json(json!({ "fragments": list })))
}

#[derive(Deserialize)]
struct AttemptBody {
    fragment: Option<String>,
    fragment_text: Option<String>,
    pivot: Option<String>,
    pair: Option<(String, String)>,
    k: Option<i64>,
}

fn resolve_fragment(
    st: &AppState,
    name: &Option<String>,
    text: &Option<String>,
) -> Result<Option<PlaneFragment>, ApiError> {
    match (name, text) {
        (_, Some(t)) => Ok(Some(PlaneFragment::parse(t).map_err(|e| bad(e.to_string()))?)),
        (Some(n), None) => st
            .fragment(n)
            .cloned()
            .map(Some)
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no fragment `{n}`"))),
        (None, None) => Ok(None),
    }
}

async fn attempt(State(st): State<Arc<AppState>>, Json(b): Json<AttemptBody>) -> ApiResult {
    let frag = resolve_fragment(&st, &b.fragment, &b.fragment_text)?
        .ok_or_else(|| bad("give `fragment` or `fragment_text`"))?;
    let opts = ReduceOptions {
        pivot: b.pivot,
        pairs: b.pair.into_iter().collect(),
        k: b.k.unwrap_or(0),
    };
    let r = tokio::task::spawn_blocking(move || attempt_reduce(&frag, &opts))
        .await
        .map_err(|e| anyhow::anyhow!(e))??;
    Ok(Json(match r {
        Ok(ev) => json!({
            "reduced": true,
            "method": ev.method.as_str(),
            "trace": ev.trace,
            "evidence": ev.to_text(),
        }),
        Err(f) => json!({
            "reduced": false,
            "note": f.note,
            "core": f.core,
            "blocked": f.blocked,
            "matrix": f.matrix,
            "failure": f.to_text(),
        }),
    }))
}

#[derive(Deserialize)]
struct CommitBody {
    name: String,
    fragment: Option<String>,
    fragment_text: Option<String>,
    /// Pattern lines; derived from the fragment when absent.
    patterns: Option<String>,
    evidence: Option<String>,
    assert: Option<String>,
    #[serde(default)]
    pending: bool,
    principal: Option<String>,
}

async fn commit(State(st): State<Arc<AppState>>, Json(b): Json<CommitBody>) -> ApiResult {
    let frag = resolve_fragment(&st, &b.fragment, &b.fragment_text)?;
    let justification = match (b.evidence, b.assert, b.pending) {
        (Some(ev), None, false) => {
            Justification::Evidence(Evidence::parse(&ev).map_err(|e| bad(e.to_string()))?)
        }
        (None, Some(r), false) => Justification::Assert(r),
        (None, None, true) => Justification::Pending,
        _ => return Err(bad("give exactly one of `evidence`, `assert`, `pending`")),
    };
    let patterns = match (b.patterns, &frag) {
        (Some(text), _) => parse_patterns(&text).map_err(|e| bad(e.to_string()))?,
        (None, Some(f)) => {
            let words = st.session.read().await.words().clone();
            let (name, f) = (b.name.clone(), f.clone());
            tokio::task::spawn_blocking(move || derive_fragment_patterns(&name, &f, &words))
                .await
                .map_err(|e| anyhow::anyhow!(e))?
        }
        (None, None) => return Err(bad("give `patterns` or a fragment to derive them from")),
    };
    let req = CommitRequest {
        name: b.name,
        patterns,
        fragment: frag,
        justification,
        principal: b.principal.unwrap_or_else(|| "api".into()),
    };
    let mut s = st.session.write().await;
    let mut next = s.clone();
    let entry = next.commit(req)?.clone();
    next.save(&st.dir)?;
    *s = next;
    Ok(Json(json!({
        "name": entry.name,
        "status": entry.status.as_str(),
        "patterns": entry.patterns.len(),
        "entry": entry.to_text(),
    })))
}

async fn history(State(st): State<Arc<AppState>>) -> ApiResult {
    let s = st.session.read().await;
    let rounds: Vec<Value> = s
        .log
        .iter()
        .map(|r| {
            json!({
                "round": r.round,
                "outcome": if r.success { "success" } else { "tight" },
                "alpha": r.alpha.to_string(),
                "certificate_sha256": r.certificate_sha256,
                "delta": r.delta,
                "tight": r.tight.len(),
                "unabsorbed": r.unabsorbed,
            })
        })
        .collect();
    let commits: Vec<Value> = s
        .entries
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "status": e.status.as_str(),
                "principal": e.principal,
                "after_round": e.round,
                "patterns": e.patterns.len(),
            })
        })
        .collect();
    Ok(Json(json!({ "rounds": rounds, "commits": commits })))
}

async fn bundle(State(st): State<Arc<AppState>>) -> ApiResult {
    let snapshot = st.session.read().await.clone();
    let dir = st.dir.clone();
    let out = crate::bundle_dir(&dir);
    let report = tokio::task::spawn_blocking(move || -> Result<_, ApiError> {
        if out.join("manifest.txt").exists() {
            let r = replay_bundle(&out)?;
            let current = snapshot
                .last()
                .is_some_and(|l| r.alpha.as_ref() == Some(&l.alpha) && r.ok());
            if current {
                return Ok(r);
            }
        }
        crate::export_if_proven(&snapshot, &dir)?
            .ok_or_else(|| ApiError::from(ProverError::NotProven("the last round did not reach alpha >= 4".into())))
    })
    .await
    .map_err(|e| anyhow::anyhow!(e))??;
    let out = crate::bundle_dir(&st.dir);
    let read = |n: &str| std::fs::read_to_string(out.join(n)).unwrap_or_default();
    Ok(Json(json!({
        "path": out.display().to_string(),
        "ok": report.ok(),
        "alpha": report.alpha.as_ref().map(|a| a.to_string()),
        "report": report.to_text(),
        "obligations": read("obligations.txt"),
        "manifest": read("manifest.txt"),
        "verify": read("verify.txt"),
    })))
}

async fn iterate(State(st): State<Arc<AppState>>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let ctl = Arc::new(SolveControl::default());
    let id = {
        let mut jobs = st.jobs.lock().expect("jobs lock");
        if let Some((id, _)) = jobs.iter().find(|(_, j)| matches!(j.state, JobState::Running)) {
            return Err(ApiError(StatusCode::CONFLICT, format!("job {id} is running")));
        }
        let id = jobs.keys().next_back().map_or(1, |k| k + 1);
        jobs.insert(
            id,
            Job {
                ctl: ctl.clone(),
                state: JobState::Running,
            },
        );
        id
    };
    let mut snapshot = st.session.read().await.clone();
    let st2 = st.clone();
    tokio::spawn(async move {
        let before = (snapshot.entries.len(), snapshot.log.len());
        let ctl2 = ctl.clone();
        let r = tokio::task::spawn_blocking(move || {
            let r = snapshot.iterate(Some(&ctl2));
            (snapshot, r)
        })
        .await;
        let state = match r {
            Err(e) => JobState::Failed(e.to_string()),
            Ok((_, Err(_))) if ctl.cancel.load(Ordering::Relaxed) => JobState::Cancelled,
            Ok((_, Err(e))) => JobState::Failed(e.to_string()),
            Ok((next, Ok(outcome))) => {
                let mut s = st2.session.write().await;
                if (s.entries.len(), s.log.len()) != before {
                    JobState::Stale
                } else {
                    match next.save(&st2.dir).map_err(anyhow::Error::from).and_then(|_| {
                        crate::export_if_proven(&next, &st2.dir)
                    }) {
                        Err(e) => JobState::Failed(format!("{e:#}")),
                        Ok(_) => {
                            *s = next;
                            JobState::Done(json!({
                                "round": outcome.round,
                                "alpha": outcome.alpha.to_string(),
                                "outcome": match outcome.outcome {
                                    Outcome::Success => "success",
                                    Outcome::Tight(_) => "tight",
                                },
                                "unabsorbed": outcome.unabsorbed,
                                "certificate_sha256": outcome.certificate_sha256,
                            }))
                        }
                    }
                }
            }
        };
        if let Some(j) = st2.jobs.lock().expect("jobs lock").get_mut(&id) {
            j.state = state;
        }
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "job": id }))))
}

async fn job(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult {
    let jobs = st.jobs.lock().expect("jobs lock");
    let j = jobs
        .get(&id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no job {id}")))?;
    Ok(Json(job_json(id, j)))
}

async fn cancel_job(State(st): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult {
    let jobs = st.jobs.lock().expect("jobs lock");
    let j = jobs
        .get(&id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no job {id}")))?;
    j.ctl.cancel.store(true, Ordering::Relaxed);
    Ok(Json(job_json(id, j)))
}
