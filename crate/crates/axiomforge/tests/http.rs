use std::path::PathBuf;

use axiomforge::server::{router, AppState};
use axiomforge_core::store::OntologyStore;
use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/ontologies");
    router(AppState::new(OntologyStore::new(dir)))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
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
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

fn person() -> Value {
    json!({
        "verb": "createVariable",
        "concept": {"ontology": "http://example.org/sociology", "id": "Person"},
        "shared": false
    })
}

async fn session(app: &Router, mode: &str) -> String {
    let (status, body) = call(app, "POST", "/sessions", Some(json!({"mode": mode}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["revision"], 0);
    body["id"].as_str().unwrap().to_string()
}

async fn import_sociology(app: &Router) {
    let (status, _) = call(
        app,
        "POST",
        "/ontologies/import",
        Some(json!({"iri": "http://example.org/sociology"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
}

fn assert_error_shape(body: &Value, code: &str) {
    assert_eq!(body["code"], code, "{body}");
    assert!(body["message"].is_string());
    assert!(body.get("detail").is_some());
}

#[tokio::test]
async fn ontologies_are_listed_and_imported_by_iri() {
    let app = app();
    let (_, body) = call(&app, "GET", "/ontologies", None).await;
    assert_eq!(body["loaded"], json!([]));
    assert_eq!(body["available"].as_array().unwrap().len(), 2);

    import_sociology(&app).await;
    let (_, body) = call(&app, "GET", "/ontologies", None).await;
    let loaded = body["loaded"].as_array().unwrap();
    assert_eq!(loaded.len(), 1);
    assert_eq!(loaded[0]["imports"][0]["loaded"], false);
    assert_eq!(loaded[0]["tree"]["label"], "http://example.org/sociology");

    let (status, body) = call(
        &app,
        "POST",
        "/ontologies/import",
        Some(json!({"iri": "http://example.org/nowhere"})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "ontology_not_found");
}

#[tokio::test]
async fn commands_commit_and_advance_the_revision() {
    let app = app();
    import_sociology(&app).await;
    let id = session(&app, "standard").await;
    let uri = format!("/sessions/{id}/commands");

    let (status, body) = call(&app, "POST", &uri, Some(json!({"revision": 0, "command": person()}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["committed"], true);
    assert_eq!(body["revision"], 1);
    assert_eq!(body["wsml"]["text"], "definedBy ?person memberOf Person");

    let op = json!({"verb": "createOperator", "operator": "AND"});
    let (_, body) = call(&app, "POST", &uri, Some(json!({"revision": 1, "command": op}))).await;
    assert_eq!(body["committed"], false);
    assert_eq!(body["revision"], 1);
    assert_eq!(body["rejection"]["rule"], "mode restriction");

    let refine = json!({
        "verb": "refineAttribute", "node": 1, "slot": 0,
        "binding": {"kind": "subconcept", "concept": {"ontology": "http://example.org/sociology", "id": "Person"}}
    });
    let (_, body) = call(&app, "POST", &uri, Some(json!({"revision": 1, "command": refine}))).await;
    assert_eq!(body["committed"], false);
    assert_eq!(body["rejection"]["rule"], "subsumption violation");
    assert_eq!(body["revision"], 1);
}

#[tokio::test]
async fn stale_revisions_conflict() {
    let app = app();
    import_sociology(&app).await;
    let id = session(&app, "advanced").await;
    let uri = format!("/sessions/{id}/commands");
    call(&app, "POST", &uri, Some(json!({"revision": 0, "command": person()}))).await;
    let (status, body) = call(&app, "POST", &uri, Some(json!({"revision": 0, "command": person()}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error_shape(&body, "stale_revision");
    assert_eq!(body["detail"]["revision"], 1);
}

#[tokio::test]
async fn read_endpoints_describe_the_graph() {
    let app = app();
    import_sociology(&app).await;
    let id = session(&app, "standard").await;
    call(
        &app,
        "POST",
        &format!("/sessions/{id}/commands"),
        Some(json!({"revision": 0, "command": person()})),
    )
    .await;

    let (_, menu) = call(&app, "GET", &format!("/sessions/{id}/menu?selection=port:slot:1:0"), None).await;
    let commands = menu["commands"].as_array().unwrap();
    assert!(commands.iter().any(|c| c["verb"] == "refineAttribute"
        && c["binding"]["kind"] == "instance"
        && c["binding"]["instance"]["id"] == "Acme"));
    assert!(commands.iter().all(|c| c["verb"] == "refineAttribute"));

    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/menu?selection=bogus"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "bad_selection");

    let (_, outline) = call(&app, "GET", &format!("/sessions/{id}/outline"), None).await;
    assert_eq!(outline["outline"]["root"]["children"][0]["label"], "?person memberOf Person");

    let (_, node) = call(&app, "GET", &format!("/sessions/{id}/nodes/n1"), None).await;
    assert_eq!(node["label"], "?person memberOf Person");
    assert_eq!(node["incoming"].as_array().unwrap().len(), 1);

    let (_, model) = call(&app, "GET", &format!("/sessions/{id}/model"), None).await;
    assert_eq!(model["revision"], 1);
    assert_eq!(model["graph"]["nodes"].as_array().unwrap().len(), 2);

    let (_, wsml) = call(&app, "GET", &format!("/sessions/{id}/wsml?pretty=true"), None).await;
    assert_eq!(wsml["text"], "definedBy\n  ?person memberOf Person");
}

#[tokio::test]
async fn sessions_save_and_load_axiom_files() {
    let app = app();
    import_sociology(&app).await;
    let id = session(&app, "standard").await;
    call(
        &app,
        "POST",
        &format!("/sessions/{id}/commands"),
        Some(json!({"revision": 0, "command": person()})),
    )
    .await;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.axiom.json");
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/save"), Some(json!({"path": path}))).await;
    assert_eq!(status, StatusCode::OK);

    let other = session(&app, "advanced").await;
    let (status, body) = call(&app, "POST", &format!("/sessions/{other}/load"), Some(json!({"path": path}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["revision"], 1);
    assert_eq!(body["wsml"]["text"], "definedBy ?person memberOf Person");

    let missing = dir.path().join("missing.axiom.json");
    let (status, body) = call(&app, "POST", &format!("/sessions/{other}/load"), Some(json!({"path": missing}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "io_error");
}

#[tokio::test]
async fn errors_share_one_shape() {
    let app = app();
    let (status, body) = call(&app, "GET", "/sessions/nope/model", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "unknown_session");

    let id = session(&app, "standard").await;
    let (status, body) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/commands"),
        Some(json!({"revision": 0, "command": {"verb": "fly"}})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "bad_request");

    let (status, body) = call(&app, "GET", "/nowhere", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "not_found");
}

#[tokio::test]
async fn sessions_are_independent() {
    let app = app();
    import_sociology(&app).await;
    let (a, b) = (session(&app, "standard").await, session(&app, "standard").await);
    call(
        &app,
        "POST",
        &format!("/sessions/{a}/commands"),
        Some(json!({"revision": 0, "command": person()})),
    )
    .await;
    let (_, body) = call(&app, "GET", &format!("/sessions/{b}/wsml"), None).await;
    assert_eq!(body["revision"], 0);
    assert_eq!(body["incomplete"], json!(["empty axiom"]));
}
