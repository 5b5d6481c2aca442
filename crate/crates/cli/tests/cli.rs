mod support;

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use fdl_cli::server::{router, AppState};
use fdl_core::config::Config;
use fdl_core::pipeline::Engine;
use http_body_util::BodyExt;
use support::{bundled_config, run, stdout_json, write_config};
use tower::ServiceExt;

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

async fn get(state: Arc<AppState>, uri: &str) -> (StatusCode, serde_json::Value) {
    let resp = router(state)
        .oneshot(Request::builder().uri(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn without_timings(mut v: serde_json::Value) -> serde_json::Value {
    v.as_object_mut().unwrap().remove("timings_ms");
    v
}

#[tokio::test]
async fn cli_and_http_return_the_same_body() {
    let dir = tempfile::tempdir().unwrap();
    let config = bundled_config(dir.path());
    let out = run(&["ingest", "--config", s(&config)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["nodes"]["Provider"], 220);

    let out = run(&[
        "query", "--config", s(&config), "--q", "kids doctor open on saturday near me", "--lat", "34.05", "--lon", "-118.24", "--k", "5",
    ]);
    assert!(out.status.success());
    let cli = stdout_json(&out);
    assert_eq!(cli["results"].as_array().unwrap().len(), 5);

    let engine = Engine::load(&Config::load(&config).unwrap()).unwrap();
    let state = Arc::new(AppState::new(Some(engine)));
    let (status, http) =
        get(state, "/search?q=kids%20doctor%20open%20on%20saturday%20near%20me&lat=34.05&lon=-118.24&k=5").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(without_timings(cli), without_timings(http));
}

#[tokio::test]
async fn http_status_codes() {
    let empty = Arc::new(AppState::new(None));
    assert_eq!(get(empty.clone(), "/health").await, (StatusCode::OK, serde_json::json!({"status": "ok"})));
    assert_eq!(get(empty, "/search?q=heart").await.0, StatusCode::SERVICE_UNAVAILABLE);

    let config = Config::load(&support::repo_root().join("data/fdl.json")).unwrap();
    let state = Arc::new(AppState::new(Some(Engine::build(&config).unwrap().0)));
    for bad in ["/search", "/search?q=%20", "/search?q=heart&lat=34", "/search?q=heart&k=0", "/search?q=heart&k=-3",
        "/search?q=heart&k=ten", "/search?q=heart&lat=95&lon=0", "/search?q=heart&lat=x&lon=1"]
    {
        let (status, body) = get(state.clone(), bad).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
        assert!(body["error"].is_string());
    }
    let (status, body) = get(state, "/search?q=heart%20doctor&city=Pasadena").await;
    assert_eq!(status, StatusCode::OK);
    for key in ["query", "corrected_query", "interpretation", "results", "timings_ms"] {
        assert!(body.get(key).is_some(), "{key}");
    }
}

#[test]
fn request_parameters() {
    let params: HashMap<String, String> =
        [("q", "heart"), ("lat", " 34.1 "), ("lon", "-118"), ("city", ""), ("k", "3")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
    let req = fdl_cli::server::request_from_params(&params).unwrap();
    assert_eq!((req.lat, req.lon, req.city, req.k), (Some(34.1), Some(-118.0), None, Some(3)));
}

#[test]
fn ingest_failures_exit_non_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("records");
    std::fs::create_dir(&data).unwrap();
    let small = support::repo_root().join("crates/core/tests/fixtures/small");
    for f in ["locations.jsonl", "specialties.jsonl"] {
        std::fs::copy(small.join(f), data.join(f)).unwrap();
    }
    let config = write_config(dir.path(), &data);

    // providers.jsonl is missing.
    assert!(!run(&["ingest", "--config", s(&config)]).status.success());

    let providers = std::fs::read_to_string(small.join("providers.jsonl")).unwrap().replace("\"loc-2\"]", "\"loc-9\"]");
    std::fs::write(data.join("providers.jsonl"), providers).unwrap();
    let out = run(&["ingest", "--config", s(&config)]);
    assert!(!out.status.success());
    assert!(!stdout_json(&out)["dangling_refs"].as_array().unwrap().is_empty());
    assert!(!dir.path().join("snapshot").exists());
}

#[test]
fn query_and_eval_need_a_snapshot_and_queries() {
    let dir = tempfile::tempdir().unwrap();
    let config = bundled_config(dir.path());
    assert!(!run(&["query", "--config", s(&config), "--q", "heart"]).status.success());
    assert!(run(&["ingest", "--config", s(&config)]).status.success());

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "\n \n").unwrap();
    let out = run(&["eval", "--config", s(&config), "--queries", s(&empty)]);
    assert!(!out.status.success());

    let out = run(&["query", "--config", s(&config), "--q", "heart", "--k", "0"]);
    assert!(!out.status.success());
}

#[test]
fn gen_fixtures_reproduces_the_bundled_records() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["gen-fixtures", "--out", s(dir.path())]).status.success());
    for f in ["providers.jsonl", "locations.jsonl", "specialties.jsonl", "lexicon.json", "queries.txt", "labels.tsv"] {
        let a = std::fs::read(dir.path().join(f)).unwrap();
        let b = std::fs::read(support::repo_root().join("data").join(f)).unwrap();
        assert!(a == b, "{f}");
    }
}
