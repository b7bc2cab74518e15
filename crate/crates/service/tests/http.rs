use std::path::PathBuf;
use std::sync::Arc;

use aqs_core::ingest::IngestOptions;
use aqs_core::{ingest_readers, ColumnKind, Session};
use aqs_service::api::{app, ServiceConfig};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const BOUNDARY: &str = "aqs-test-boundary";

fn cars_csv() -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/cars.csv");
    std::fs::read(path).unwrap()
}

fn multipart(parts: &[(&str, &[u8])]) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, data) in parts {
        body.extend_from_slice(
            format!("--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\n\r\n")
                .as_bytes(),
        );
        body.extend_from_slice(data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn json(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = send(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn upload(app: &Router, parts: &[(&str, &[u8])]) -> (StatusCode, Value) {
    let req = Request::post("/sessions")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(multipart(parts)))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn cars_session(app: &Router) -> String {
    let config = json!({ "type_overrides": { "cylinders": "nominal" } }).to_string();
    let (status, handle) = upload(app, &[("nodes", &cars_csv()), ("config", config.as_bytes())]).await;
    assert_eq!(status, StatusCode::CREATED, "{handle}");
    handle["session_id"].as_str().unwrap().to_owned()
}

fn pivot(attr: &str, axis: &str) -> Value {
    json!({ "kind": "pivot_partition", "substrate": 0, "axis": axis, "attribute": attr })
}

#[tokio::test]
async fn fresh_session_is_one_cell() {
    let app = app(&ServiceConfig::default());
    let (status, handle) = upload(&app, &[("nodes", &cars_csv())]).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(handle["dataset"]["row_count"], 60);
    let id = handle["session_id"].as_str().unwrap();

    let (status, layout) = json(&app, Method::GET, &format!("/sessions/{id}/substrates/0/layout?w=400&h=300"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(layout["cells"].as_array().unwrap().len(), 1);
    assert_eq!(layout["cells"][0]["count"], 60);
    assert_eq!(layout["cell_size"], 300.0);

    let (_, view) = json(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(view["log"]["length"], 0);
    assert_eq!(view["substrates"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn ops_match_the_library() {
    let app = app(&ServiceConfig::default());
    let id = cars_session(&app).await;
    let ops = [
        pivot("cylinders", "horizontal"),
        pivot("origin", "vertical"),
        json!({
            "kind": "pile",
            "selection": { "substrate": 0, "mode": "column_facet",
                "facets": [{ "attribute": "cylinders", "category": "6" }, { "attribute": "cylinders", "category": "8" }] },
            "name": "big"
        }),
        json!({
            "kind": "project",
            "selection": { "substrate": 0, "mode": "row_facet",
                "facets": [{ "attribute": "origin", "category": "US" }] }
        }),
    ];
    let mut last = Value::Null;
    for op in &ops {
        let (status, body) = json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(op.clone())).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        last = body;
    }
    assert_eq!(last["created"], 1);
    assert_eq!(last["log"]["cursor"], 4);

    let mut options = IngestOptions::default();
    options.type_overrides.insert("cylinders".into(), ColumnKind::Nominal);
    let ds = ingest_readers(&cars_csv()[..], None::<&[u8]>, &options).unwrap();
    let mut lib = Session::new(Arc::new(ds));
    for op in &ops {
        lib.apply(serde_json::from_value::<aqs_core::SculptOp>(op.clone()).unwrap()).unwrap();
    }
    assert_eq!(last["digest"], lib.digest());

    let (_, bytes) = send(&app, Method::GET, &format!("/sessions/{id}/substrates/0/layout"), None).await;
    let lib_layout = serde_json::to_vec(&lib.layout(aqs_core::MAIN_SUBSTRATE, 1200.0, 800.0).unwrap()).unwrap();
    assert!(bytes == lib_layout);
    let layout: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(layout["n_x"], 2);

    let (_, log) = json(&app, Method::GET, &format!("/sessions/{id}/log"), None).await;
    assert_eq!(log["entries"].as_array().unwrap().len(), 4);

    let (status, after_undo) = json(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(after_undo["substrates"].as_array().unwrap().len(), 1);
    let (_, redone) = json(&app, Method::POST, &format!("/sessions/{id}/redo"), None).await;
    assert_eq!(redone["digest"], last["digest"]);
    let (_, start) = json(&app, Method::POST, &format!("/sessions/{id}/goto"), Some(json!({ "cursor": 0 }))).await;
    assert_eq!(start["log"]["can_redo"], true);

    let (status, bytes) = send(&app, Method::GET, &format!("/sessions/{id}/save"), None).await;
    assert_eq!(status, StatusCode::OK);
    let saved: aqs_core::SessionLog = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(saved.log.entries.len(), 4);
}

#[tokio::test]
async fn pivot_cylinders_gives_three_columns() {
    let app = app(&ServiceConfig::default());
    let id = cars_session(&app).await;
    let (status, _) = json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(pivot("cylinders", "horizontal"))).await;
    assert_eq!(status, StatusCode::OK);
    let (_, layout) = json(&app, Method::GET, &format!("/sessions/{id}/substrates/0/layout"), None).await;
    assert_eq!(layout["n_x"], 3);
    let counts: Vec<u64> = layout["cells"].as_array().unwrap().iter().map(|c| c["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, [30, 16, 14]);

    let (status, hist) = json(&app, Method::GET, &format!("/sessions/{id}/substrates/0/histogram?attr=cylinders"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(hist, json!([
        { "category": "4", "count": 30 }, { "category": "6", "count": 16 }, { "category": "8", "count": 14 }
    ]));

    let key = json!({ "horizontal": [{ "attribute": "cylinders", "category": "6" }], "vertical": [] }).to_string();
    let uri = format!("/sessions/{id}/substrates/0/highlight?key={}", urlencode(&key));
    let (status, hl) = json(&app, Method::GET, &uri, None).await;
    assert_eq!(status, StatusCode::OK, "{hl}");
    assert_eq!(hl["count"], 16);
    assert_eq!(hl["h_labels"].as_array().unwrap().len(), 1);

    let (status, csv) = send(&app, Method::GET, &format!("/sessions/{id}/substrates/0/export"), None).await;
    assert_eq!(status, StatusCode::OK);
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("name,origin,cylinders,mpg,horsepower,weight,year"));
    assert_eq!(text.lines().count(), 61);
}

fn urlencode(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

#[tokio::test]
async fn error_codes() {
    let app = app(&ServiceConfig::default());
    let (status, body) = json(&app, Method::GET, "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "unknown_session");

    let id = cars_session(&app).await;
    let (status, body) = json(&app, Method::GET, &format!("/sessions/{id}/substrates/7/layout"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "unknown_substrate");

    json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(pivot("origin", "horizontal"))).await;
    let (status, body) = json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(pivot("origin", "vertical"))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "already_partitioned");

    let (status, body) = json(&app, Method::POST, &format!("/sessions/{id}/redo"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "nothing_to_redo");

    let (status, body) = json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(pivot("colour", "vertical"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "unknown_attribute");

    let (status, body) = json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(json!({ "kind": "explode" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_op");

    let (status, body) = json(&app, Method::GET, &format!("/sessions/{id}/substrates/0/layout?w=0"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_parameter");

    let (status, body) = upload(&app, &[("nodes", b"a,b\n1,2\n3\n")]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "csv_parse");

    let (status, _) = send(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = send(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn links_need_edges() {
    let app = app(&ServiceConfig::default());
    let id = cars_session(&app).await;
    let op = json!({ "kind": "toggle_view", "substrate": 0, "flag": "links", "enabled": true });
    let (status, body) = json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(op.clone())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "no_edges");

    let nodes = b"id,track\np1,A\np2,A\np3,B\n";
    let edges = b"source,target\np1,p3\np2,p3\np3,p1\n";
    let config = json!({ "key_column": "id" }).to_string();
    let (status, handle) = upload(&app, &[("nodes", nodes), ("edges", edges), ("config", config.as_bytes())]).await;
    assert_eq!(status, StatusCode::CREATED, "{handle}");
    let id = handle["session_id"].as_str().unwrap();
    let (status, _) = json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(op)).await;
    assert_eq!(status, StatusCode::OK);
    json(&app, Method::POST, &format!("/sessions/{id}/ops"), Some(pivot("track", "horizontal"))).await;
    let (_, layout) = json(&app, Method::GET, &format!("/sessions/{id}/substrates/0/layout"), None).await;
    let weights: Vec<f64> = layout["links"].as_array().unwrap().iter().map(|l| l["weight"].as_f64().unwrap()).collect();
    assert_eq!(weights.iter().sum::<f64>(), 3.0);
    assert_eq!(weights.len(), 2);
}
