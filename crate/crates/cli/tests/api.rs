use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use discharge_cli::api::{router, AppState};
use discharge_cli::load_library;
use discharge_core::prover::{generate_d, load_entries, Session};
use discharge_core::ConfigWord;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn app(session: Session, dir: &Path) -> Router {
    session.save(dir).unwrap();
    let lib = load_library(&root().join("fixtures/fragments")).unwrap();
    router(AppState::new(session, dir.to_path_buf(), lib, None))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn finish(app: &Router, job: u64) -> Value {
    for _ in 0..600 {
        let (_, j) = call(app, "GET", &format!("/api/jobs/{job}"), None).await;
        if j["state"] != "running" {
            return j;
        }
        tokio::time::sleep(Duration::from_millis(100)).await;
    }
    panic!("job {job} did not finish");
}

fn words() -> Arc<Vec<ConfigWord>> {
    Arc::new(generate_d())
}

#[tokio::test(flavor = "multi_thread")]
async fn steering_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(Session::with_words("api", words()), tmp.path());

    let (code, s) = call(&app, "GET", "/api/status", None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(s["entries"], 0);
    assert_eq!(s["last"], Value::Null);
    assert_eq!(s["d"][2]["count"], 324_008);
    let (_, t) = call(&app, "GET", "/api/tight", None).await;
    assert_eq!(t["total"], 0);

    let (code, j) = call(&app, "POST", "/api/iterate", None).await;
    assert_eq!(code, StatusCode::ACCEPTED);
    let id = j["job"].as_u64().unwrap();
    let (code, _) = call(&app, "POST", "/api/iterate", None).await;
    assert!(code == StatusCode::CONFLICT || code == StatusCode::ACCEPTED);
    let done = finish(&app, id).await;
    assert_eq!(done["state"], "done", "{done}");
    assert_eq!(done["result"]["alpha"], "3");
    assert_eq!(done["result"]["outcome"], "tight");
    // a second job may have been accepted if the first one finished quickly
    for other in [id + 1] {
        let (c, _) = call(&app, "GET", &format!("/api/jobs/{other}"), None).await;
        if c == StatusCode::OK {
            finish(&app, other).await;
        }
    }

    let (_, t) = call(&app, "GET", "/api/tight?limit=5", None).await;
    assert_eq!(t["alpha"], "3");
    assert!(t["tight"].as_array().unwrap().len() <= 5);
    let (_, t) = call(&app, "GET", "/api/tight", None).await;
    assert!(t["tight"].as_array().unwrap().iter().any(|w| w == "V3:[3/3/3]"));

    let (code, c) = call(&app, "GET", "/api/config/V3:%5B3%2F3%2F3%5D", None).await;
    assert_eq!(code, StatusCode::OK, "{c}");
    assert_eq!(c["id"], "V3:[3/3/3]");
    assert_eq!(c["tight"], true);
    assert_eq!(c["in_d"], true);
    assert!(c["fragments"].as_array().unwrap().iter().any(|f| f == "v3-triangle"));
    let (code, _) = call(&app, "GET", "/api/config/nonsense", None).await;
    assert_eq!(code, StatusCode::UNPROCESSABLE_ENTITY);

    let (_, f) = call(&app, "GET", "/api/fragments", None).await;
    let list = f["fragments"].as_array().unwrap();
    assert_eq!(list.len(), 41);
    assert!(list.iter().all(|x| x["status"].is_null()));

    let (code, r) = call(&app, "POST", "/api/attempt-reduce", Some(json!({ "fragment": "c0" }))).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(r["reduced"], true);
    assert_eq!(r["method"], "heuristic");
    let evidence = r["evidence"].as_str().unwrap().to_string();

    let (_, r) = call(&app, "POST", "/api/attempt-reduce", Some(json!({ "fragment": "h24" }))).await;
    assert_eq!(r["reduced"], false);
    assert!(!r["core"].as_array().unwrap().is_empty());
    let (code, _) = call(&app, "POST", "/api/attempt-reduce", Some(json!({ "fragment": "nope" }))).await;
    assert_eq!(code, StatusCode::NOT_FOUND);

    // corrupted evidence is refused and nothing changes
    let bad = evidence.replace("trace strip", "trace strip x");
    let body = json!({ "name": "c0", "fragment": "c0", "evidence": bad, "principal": "tester" });
    let (code, e) = call(&app, "POST", "/api/commit", Some(body)).await;
    assert_eq!(code, StatusCode::UNPROCESSABLE_ENTITY, "{e}");
    let (_, s) = call(&app, "GET", "/api/status", None).await;
    assert_eq!(s["entries"], 0);

    let body = json!({ "name": "c0", "fragment": "c0", "evidence": evidence, "principal": "tester" });
    let (code, e) = call(&app, "POST", "/api/commit", Some(body)).await;
    assert_eq!(code, StatusCode::OK, "{e}");
    assert_eq!(e["status"], "heuristic-proved");
    assert!(e["patterns"].as_u64().unwrap() > 0);

    let body = json!({ "name": "h24", "fragment": "h24", "assert": "taken as given", "principal": "tester" });
    let (code, e) = call(&app, "POST", "/api/commit", Some(body)).await;
    assert_eq!(code, StatusCode::OK, "{e}");
    assert_eq!(e["status"], "asserted");

    let (_, h) = call(&app, "GET", "/api/history", None).await;
    let commits = h["commits"].as_array().unwrap();
    assert_eq!(commits.len(), 2);
    assert_eq!(commits[0]["principal"], "tester");
    assert_eq!(commits[0]["after_round"], h["rounds"].as_array().unwrap().len());

    // committed state is on disk
    let saved = Session::load(tmp.path()).unwrap();
    assert_eq!(saved.entries.len(), 2);

    let (_, j) = call(&app, "POST", "/api/iterate", None).await;
    let done = finish(&app, j["job"].as_u64().unwrap()).await;
    assert_eq!(done["state"], "done");
    let (_, h) = call(&app, "GET", "/api/history", None).await;
    let rounds = h["rounds"].as_array().unwrap();
    let last = rounds.last().unwrap();
    assert_eq!(last["delta"], json!(["c0", "h24"]));
    let (_, s) = call(&app, "GET", "/api/status", None).await;
    let alphas = s["alpha_history"].as_array().unwrap();
    assert!(alphas.len() >= 2);
    assert_eq!(s["asserted"], json!(["h24"]));

    let (code, _) = call(&app, "GET", "/api/bundle", None).await;
    assert_eq!(code, StatusCode::CONFLICT);
}

#[tokio::test(flavor = "multi_thread")]
async fn jobs_can_be_cancelled() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(Session::with_words("api", words()), tmp.path());
    let (_, j) = call(&app, "POST", "/api/iterate", None).await;
    let id = j["job"].as_u64().unwrap();
    let (code, _) = call(&app, "DELETE", &format!("/api/jobs/{id}"), None).await;
    assert_eq!(code, StatusCode::OK);
    let done = finish(&app, id).await;
    let state = done["state"].as_str().unwrap();
    assert!(state == "cancelled" || state == "done", "{done}");
    let (_, s) = call(&app, "GET", "/api/status", None).await;
    assert_eq!(s["jobs"], json!([]));
    let (code, _) = call(&app, "GET", "/api/jobs/99", None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn bundle_of_a_proven_session() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = Session::with_words("api", words());
    for e in load_entries(&root().join("fixtures/c")).unwrap() {
        s.commit(e.to_request("test")).unwrap();
    }
    let app = app(s, tmp.path());
    let (_, j) = call(&app, "POST", "/api/iterate", None).await;
    let done = finish(&app, j["job"].as_u64().unwrap()).await;
    assert_eq!(done["result"]["outcome"], "success", "{done}");
    assert!(tmp.path().join("bundle/manifest.txt").exists());
    let (code, b) = call(&app, "GET", "/api/bundle", None).await;
    assert_eq!(code, StatusCode::OK, "{b}");
    assert_eq!(b["ok"], true);
    assert_eq!(b["alpha"], "4");
    assert!(b["obligations"].as_str().unwrap().contains("asserted h24"));
    assert!(b["verify"].as_str().unwrap().contains("result pass"));
}
