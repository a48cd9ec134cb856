use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use vakb_core::analytics::{self, Property};
use vakb_core::corpus::{ingest, Corpus};
use vakb_core::grammar::{parse_spec, ParseMode};
use vakb_core::output::{canonical_json, cards, histogram_json, matrix_json, overview_json};
use vakb_core::query::{filter_query, structural_query, FilterQuery, QueryPattern};
use vakb_service::{router, CorsPolicy, ServiceConfig, ERROR_CODES};

fn data_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn load(name: &str) -> Arc<Corpus> {
    Arc::new(ingest(&data_dir(name), ParseMode::Strict).unwrap().0)
}

struct Reply {
    status: StatusCode,
    content_type: String,
    total: Option<usize>,
    body: Vec<u8>,
}

impl Reply {
    fn text(&self) -> String {
        String::from_utf8(self.body.clone()).unwrap()
    }

    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap()
    }

    fn code(&self) -> String {
        self.json()["code"].as_str().unwrap().to_string()
    }
}

async fn send(app: &Router, method: &str, uri: &str, body: &str) -> Reply {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::from(body.to_string()))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let headers = response.headers();
    let content_type = headers.get("content-type").map(|v| v.to_str().unwrap().to_string()).unwrap_or_default();
    let total = headers.get("x-total-count").map(|v| v.to_str().unwrap().parse().unwrap());
    let body = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply {
        status,
        content_type,
        total,
        body,
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    send(app, "GET", uri, "").await
}

fn app(corpus: &Arc<Corpus>) -> Router {
    router(corpus.clone(), &ServiceConfig::default())
}

#[tokio::test]
async fn designs_listing_matches_filter_query() {
    let corpus = load("sample");
    let app = app(&corpus);
    for query in ["", "mark=bar", "composition=facet&mark=line", "composite=true", "field=count", "year_min=2019"] {
        let reply = get(&app, &format!("/api/designs?{query}")).await;
        assert_eq!(reply.status, StatusCode::OK, "{query}");
        let q = FilterQuery::from_pairs(form_pairs(query)).unwrap();
        let ids = filter_query(&corpus, &q).unwrap();
        assert_eq!(reply.total, Some(ids.len()));
        assert_eq!(reply.text(), canonical_json(&cards(&corpus, &ids)), "{query}");
    }
}

fn form_pairs(query: &str) -> Vec<(String, String)> {
    query
        .split('&')
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[tokio::test]
async fn pagination_slices_and_reports_total() {
    let corpus = load("sample");
    let app = app(&corpus);
    let all: Vec<Value> = get(&app, "/api/designs?limit=100").await.json().as_array().unwrap().clone();
    assert_eq!(all.len(), 24);
    let page = get(&app, "/api/designs?offset=5&limit=7").await;
    assert_eq!(page.total, Some(24));
    assert_eq!(page.json().as_array().unwrap().as_slice(), &all[5..12]);
    let past = get(&app, "/api/designs?offset=40").await;
    assert_eq!(past.json(), Value::Array(vec![]));
    assert_eq!(past.total, Some(24));
    let bad = get(&app, "/api/designs?limit=-1").await;
    assert_eq!((bad.status, bad.code().as_str()), (StatusCode::BAD_REQUEST, "invalid_parameter"));
}

#[tokio::test]
async fn mismatch_corpus_keyword_versus_structure() {
    let corpus = load("mismatch");
    let app = app(&corpus);
    let listed = get(&app, "/api/designs?mark=bar&composition=facet").await.json();
    let ids: Vec<&str> = listed.as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["s-concat", "s-facet-bar"]);
    let reply = send(&app, "POST", "/api/query", r#"{"facet":{"spec":{"mark":"bar"}}}"#).await;
    assert_eq!(reply.json(), serde_json::json!(["s-facet-bar"]));
}

#[tokio::test]
async fn query_endpoint_matches_structural_query() {
    let corpus = load("sample");
    let app = app(&corpus);
    let all: Vec<String> = corpus.ids().map(str::to_string).collect();
    for body in ["{}", r#"{"mark":"*"}"#, r#"{"mark":"bar"}"#, r#"{"layer":[{"mark":"line"}]}"#, r#"{"encoding":{"x":{"type":"temporal"}}}"#] {
        let reply = send(&app, "POST", "/api/query", body).await;
        assert_eq!(reply.status, StatusCode::OK, "{body}");
        let expected = structural_query(&corpus, &QueryPattern::parse(body).unwrap());
        assert_eq!(reply.text(), canonical_json(&expected), "{body}");
        if body.len() <= 12 {
            assert_eq!(expected, all);
        }
    }
    for bad in ["{", r#"{"*":1}"#, "[1,"] {
        let reply = send(&app, "POST", "/api/query", bad).await;
        assert_eq!((reply.status, reply.code().as_str()), (StatusCode::BAD_REQUEST, "pattern_syntax"), "{bad}");
    }
}

#[tokio::test]
async fn detail_round_trips_spec_text() {
    let corpus = load("sample");
    let app = app(&corpus);
    for record in corpus.records() {
        let reply = get(&app, &format!("/api/designs/{}", record.id)).await;
        assert_eq!(reply.status, StatusCode::OK);
        let body = reply.json();
        assert_eq!(body["id"], record.id.as_str());
        let text = body["spec_text"].as_str().unwrap();
        let reparsed = parse_spec(text, corpus.vocab(), ParseMode::Strict).unwrap().spec;
        assert_eq!(reparsed, record.spec);
        assert_eq!(body["spec"], serde_json::from_str::<Value>(text).unwrap());
        assert_eq!(body["metrics"], serde_json::to_value(&record.metrics).unwrap());
        assert_eq!(body["meta"]["paper_title"], record.meta.paper_title.as_str());
    }
    let missing = get(&app, "/api/designs/nope").await;
    assert_eq!((missing.status, missing.code().as_str()), (StatusCode::NOT_FOUND, "not_found"));
}

#[tokio::test]
async fn stats_endpoints_match_library() {
    let corpus = load("sample");
    let app = app(&corpus);
    assert_eq!(get(&app, "/api/stats/overview").await.text(), overview_json(&analytics::overview(&corpus).unwrap()));
    for p in Property::COUNTED {
        let reply = get(&app, &format!("/api/stats/frequency/{p}")).await;
        assert_eq!(reply.text(), histogram_json(&analytics::frequency(&corpus, p).unwrap()), "{p}");
    }
    let words = get(&app, "/api/stats/frequency/field_word").await;
    assert_eq!(words.text(), histogram_json(&analytics::field_word_frequency(&corpus)));
    for (row, col) in analytics::COOCCURRENCE_PAIRS {
        let reply = get(&app, &format!("/api/stats/cooccurrence?row={row}&col={col}")).await;
        assert_eq!(reply.text(), matrix_json(&analytics::cooccurrence(&corpus, row, col).unwrap()));
    }
    let vocab = get(&app, "/api/vocab").await;
    assert_eq!(vocab.json(), corpus.vocab().to_json());
}

#[tokio::test]
async fn errors_use_documented_codes() {
    let corpus = load("sample");
    let app = app(&corpus);
    let cases = [
        ("GET", "/api/designs?mark=zzz", StatusCode::BAD_REQUEST, "unknown_identifier"),
        ("GET", "/api/designs?colour=red", StatusCode::BAD_REQUEST, "unknown_parameter"),
        ("GET", "/api/designs?year_min=2020&year_max=2010", StatusCode::BAD_REQUEST, "invalid_parameter"),
        ("GET", "/api/stats/frequency/nosuch", StatusCode::BAD_REQUEST, "unknown_property"),
        ("GET", "/api/stats/cooccurrence?row=action&col=mark", StatusCode::BAD_REQUEST, "unsupported_pair"),
        ("GET", "/api/stats/cooccurrence?row=action", StatusCode::BAD_REQUEST, "invalid_parameter"),
        ("GET", "/api/stats/cooccurrence?row=action&col=target&x=1", StatusCode::BAD_REQUEST, "unknown_parameter"),
        ("GET", "/api/nothing", StatusCode::NOT_FOUND, "not_found"),
        ("GET", "/elsewhere", StatusCode::NOT_FOUND, "not_found"),
        ("GET", "/api/query", StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed"),
        ("DELETE", "/api/designs/s01", StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed"),
    ];
    for (method, uri, status, code) in cases {
        let reply = send(&app, method, uri, "").await;
        assert_eq!(reply.status, status, "{method} {uri}");
        assert_eq!(reply.code(), code, "{method} {uri}");
        assert!(ERROR_CODES.contains(&code));
        assert!(reply.content_type.starts_with("application/json"));
        assert!(reply.json()["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[tokio::test]
async fn empty_corpus_overview_is_an_error() {
    let corpus = Arc::new(Corpus::new(vakb_core::vocab::default_vocabulary(), ParseMode::Strict, vec![]).unwrap());
    let app = app(&corpus);
    let reply = get(&app, "/api/stats/overview").await;
    assert_eq!((reply.status, reply.code().as_str()), (StatusCode::UNPROCESSABLE_ENTITY, "empty_corpus"));
    assert_eq!(get(&app, "/api/designs").await.json(), Value::Array(vec![]));
}

#[tokio::test]
async fn assets_serve_only_referenced_images() {
    let corpus = load("sample");
    let app = app(&corpus);
    let with_image = corpus.records().iter().find(|r| r.id == "s01").unwrap();
    let path = with_image.meta.image_path.clone().unwrap();
    let reply = get(&app, &format!("/assets/{path}")).await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.content_type, "image/png");
    assert_eq!(reply.body, std::fs::read(data_dir("sample").join(&path)).unwrap());

    // s09 references an image that is not on disk; the record itself still loads
    let dangling = corpus.get("s09").unwrap().meta.image_path.clone().unwrap();
    assert_eq!(get(&app, &format!("/assets/{dangling}")).await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/designs/s09").await.status, StatusCode::OK);
    assert_eq!(get(&app, "/assets/manifest.json").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/assets/../Cargo.toml").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn responses_are_stateless() {
    let corpus = load("sample");
    let app = app(&corpus);
    let uris = ["/api/designs?mark=bar", "/api/stats/overview", "/api/designs/s03", "/api/stats/frequency/mark"];
    let fresh: Vec<String> = futures_join(&app, &uris).await;
    for _ in 0..3 {
        for (uri, expected) in uris.iter().rev().zip(fresh.iter().rev()) {
            assert_eq!(&get(&app, uri).await.text(), expected);
        }
    }
}

async fn futures_join(app: &Router, uris: &[&str]) -> Vec<String> {
    let mut handles = Vec::new();
    for uri in uris {
        let app = app.clone();
        let uri = uri.to_string();
        handles.push(tokio::spawn(async move { get(&app, &uri).await.text() }));
    }
    let mut out = Vec::new();
    for h in handles {
        out.push(h.await.unwrap());
    }
    out
}

#[tokio::test]
async fn cors_headers_follow_policy() {
    let corpus = load("sample");
    let request = |origin: &str| {
        Request::builder()
            .uri("/api/vocab")
            .header("origin", origin)
            .body(Body::empty())
            .unwrap()
    };
    let any = router(corpus.clone(), &ServiceConfig::default());
    let r = any.oneshot(request("http://ui.example")).await.unwrap();
    assert_eq!(r.headers()["access-control-allow-origin"], "*");

    let config = ServiceConfig {
        cors: CorsPolicy::Origins(vec!["http://ui.example".into()]),
        ui_dir: None,
    };
    let listed = router(corpus.clone(), &config);
    let ok = listed.clone().oneshot(request("http://ui.example")).await.unwrap();
    assert_eq!(ok.headers()["access-control-allow-origin"], "http://ui.example");
    let other = listed.oneshot(request("http://evil.example")).await.unwrap();
    assert!(other.headers().get("access-control-allow-origin").is_none());

    let config = ServiceConfig {
        cors: CorsPolicy::Disabled,
        ui_dir: None,
    };
    let off = router(corpus, &config).oneshot(request("http://ui.example")).await.unwrap();
    assert!(off.headers().get("access-control-allow-origin").is_none());
}

#[tokio::test]
async fn ui_directory_is_served_at_root() {
    let corpus = load("sample");
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>kb</html>").unwrap();
    let config = ServiceConfig {
        cors: CorsPolicy::Disabled,
        ui_dir: Some(dir.path().to_path_buf()),
    };
    let app = router(corpus, &config);
    let root = get(&app, "/").await;
    assert_eq!(root.status, StatusCode::OK);
    assert_eq!(root.text(), "<html>kb</html>");
    assert_eq!(get(&app, "/api/nothing").await.code(), "not_found");
    assert_eq!(get(&app, "/api/vocab").await.status, StatusCode::OK);
}
