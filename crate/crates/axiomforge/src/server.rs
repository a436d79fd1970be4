//! HTTP+JSON session service. Every error body is `{code, message, detail}`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axiomforge_core::engine::{list_allowed_operations, EditCommand, Mode, Selection};
use axiomforge_core::model::{Connection, Node, NodeId};
use axiomforge_core::ontology::Iri;
use axiomforge_core::persist::{self, LoadError, SaveError};
use axiomforge_core::session::{Session, SessionError};
use axiomforge_core::store::{OntologyStore, StoreError, TreeNode};
use axiomforge_core::textgen::{self, Outline};
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub struct AppState {
    store: RwLock<OntologyStore>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(store: OntologyStore) -> Arc<Self> {
        Arc::new(AppState {
            store: RwLock::new(store),
            sessions: Mutex::new(HashMap::new()),
        })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session {id}"))
            })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/ontologies", get(list_ontologies))
        .route("/ontologies/import", post(import_ontology))
        .route("/sessions/{id}/model", get(model))
        .route("/sessions/{id}/wsml", get(wsml))
        .route("/sessions/{id}/menu", get(menu))
        .route("/sessions/{id}/outline", get(outline))
        .route("/sessions/{id}/nodes/{node}", get(node_properties))
        .route("/sessions/{id}/commands", post(command))
        .route("/sessions/{id}/save", post(save))
        .route("/sessions/{id}/load", post(load))
        .fallback(|| async {
            ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
        })
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    detail: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"code": self.code, "message": self.message, "detail": self.detail});
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", r.body_text())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, code) = match &e {
            StoreError::NotFound(_) => (StatusCode::NOT_FOUND, "ontology_not_found"),
            StoreError::DuplicateIri(_) => (StatusCode::CONFLICT, "duplicate_iri"),
            StoreError::SuperConceptCycle(_) => (StatusCode::UNPROCESSABLE_ENTITY, "super_concept_cycle"),
            StoreError::Parse { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "parse_error"),
            StoreError::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "io_error"),
        };
        let detail = match &e {
            StoreError::Parse { diagnostics, .. } => json!(diagnostics),
            _ => Value::Null,
        };
        ApiError::new(status, code, e.to_string()).with_detail(detail)
    }
}

impl From<LoadError> for ApiError {
    fn from(e: LoadError) -> Self {
        let (status, code, detail) = match &e {
            LoadError::Io { .. } => (StatusCode::NOT_FOUND, "io_error", Value::Null),
            LoadError::Corrupt(_) => (StatusCode::UNPROCESSABLE_ENTITY, "corrupt_file", Value::Null),
            LoadError::UnsupportedVersion { found } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "unsupported_version", json!({"found": found}))
            }
            LoadError::MissingOntology(iri) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "missing_ontology", json!({"iri": iri}))
            }
            LoadError::Ontology { iri, .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "ontology_error", json!({"iri": iri}))
            }
            LoadError::DanglingReference(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "dangling_reference", Value::Null)
            }
            LoadError::Invalid(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_axiom", Value::Null),
        };
        ApiError::new(status, code, e.to_string()).with_detail(detail)
    }
}

impl From<SaveError> for ApiError {
    fn from(e: SaveError) -> Self {
        let (status, code) = match &e {
            SaveError::Invalid(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_axiom"),
            SaveError::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "io_error"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Default, Deserialize)]
struct CreateSession {
    #[serde(default)]
    mode: Mode,
}

#[derive(Debug, Serialize)]
struct SessionInfo {
    id: String,
    mode: Mode,
    revision: u64,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Option<Json<CreateSession>>,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let mode = body.map(|Json(b)| b.mode).unwrap_or_default();
    let session = Session::new(mode);
    let info = SessionInfo {
        id: session.id.to_string(),
        mode,
        revision: session.revision(),
    };
    state
        .sessions
        .lock()
        .unwrap()
        .insert(info.id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(info)))
}

#[derive(Debug, Serialize)]
struct OntologyInfo {
    iri: Iri,
    imports: Vec<ImportInfo>,
    tree: TreeNode,
}

#[derive(Debug, Serialize)]
struct ImportInfo {
    iri: Iri,
    loaded: bool,
}

#[derive(Debug, Serialize)]
struct AvailableOntology {
    iri: Iri,
    file: PathBuf,
    loaded: bool,
}

#[derive(Debug, Serialize)]
struct OntologyList {
    loaded: Vec<OntologyInfo>,
    available: Vec<AvailableOntology>,
}

async fn list_ontologies(State(state): State<Arc<AppState>>) -> ApiResult<OntologyList> {
    let store = state.store.read().unwrap();
    let loaded = store
        .ontologies()
        .map(|o| OntologyInfo {
            iri: o.iri.clone(),
            imports: o
                .imports
                .iter()
                .map(|iri| ImportInfo {
                    iri: iri.clone(),
                    loaded: store.contains(iri),
                })
                .collect(),
            tree: store.tree_view(&o.iri).expect("listed ontologies are loaded"),
        })
        .collect();
    let available = store
        .file_store_contents()?
        .into_iter()
        .map(|(iri, file)| AvailableOntology {
            loaded: store.contains(&iri),
            iri,
            file,
        })
        .collect();
    Ok(Json(OntologyList { loaded, available }))
}

#[derive(Debug, Deserialize)]
struct ImportRequest {
    iri: String,
}

async fn import_ontology(
    State(state): State<Arc<AppState>>,
    body: Result<Json<ImportRequest>, JsonRejection>,
) -> ApiResult<Value> {
    let Json(req) = body?;
    let iri = Iri::new(req.iri.clone())
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", "empty IRI"))?;
    let mut store = state.store.write().unwrap();
    let already = store.contains(&iri);
    store.load_imported_ontology(&iri)?;
    let loaded: Vec<&Iri> = store.ontologies().map(|o| &o.iri).collect();
    Ok(Json(json!({"iri": iri, "alreadyLoaded": already, "loaded": loaded})))
}

async fn model(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Value> {
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    Ok(Json(json!({
        "id": id,
        "mode": s.mode,
        "revision": s.revision(),
        "graph": persist::to_json(s.graph()),
    })))
}

#[derive(Debug, Default, Deserialize)]
struct WsmlQuery {
    #[serde(default)]
    pretty: bool,
}

async fn wsml(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    query: Result<Query<WsmlQuery>, QueryRejection>,
) -> ApiResult<Value> {
    let Query(q) = query?;
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    let body = match textgen::generate(s.graph(), q.pretty) {
        Ok(expr) => json!({"revision": s.revision(), "text": expr.text, "spans": expr.element_spans}),
        Err(incomplete) => {
            let violations: Vec<String> = incomplete.0.iter().map(ToString::to_string).collect();
            json!({"revision": s.revision(), "incomplete": violations})
        }
    };
    Ok(Json(body))
}

#[derive(Debug, Deserialize)]
struct MenuQuery {
    selection: String,
}

#[derive(Debug, Serialize)]
struct MenuResponse {
    revision: u64,
    selection: Selection,
    commands: Vec<EditCommand>,
}

async fn menu(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    query: Result<Query<MenuQuery>, QueryRejection>,
) -> ApiResult<MenuResponse> {
    let Query(q) = query?;
    let selection: Selection = q.selection.parse().map_err(|e: String| {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_selection", e)
            .with_detail(json!({"selection": q.selection}))
    })?;
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    let store = state.store.read().unwrap();
    Ok(Json(MenuResponse {
        revision: s.revision(),
        selection,
        commands: list_allowed_operations(s.graph(), &store, s.mode, selection),
    }))
}

#[derive(Debug, Serialize)]
struct OutlineResponse {
    revision: u64,
    outline: Outline,
}

async fn outline(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<OutlineResponse> {
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    Ok(Json(OutlineResponse {
        revision: s.revision(),
        outline: textgen::outline(s.graph()),
    }))
}

#[derive(Debug, Serialize)]
struct NodeProperties {
    revision: u64,
    label: String,
    node: Node,
    incoming: Vec<Connection>,
    outgoing: Vec<Connection>,
}

async fn node_properties(
    State(state): State<Arc<AppState>>,
    Path((id, node)): Path<(String, String)>,
) -> ApiResult<NodeProperties> {
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    let g = s.graph();
    let found = node
        .trim_start_matches('n')
        .parse::<u32>()
        .ok()
        .map(NodeId)
        .and_then(|n| g.node(n));
    let Some(found) = found else {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_node",
            format!("no node {node} in session {id}"),
        ));
    };
    Ok(Json(NodeProperties {
        revision: s.revision(),
        label: textgen::node_label(g, found.id),
        node: found.clone(),
        incoming: g.incoming(found.id).into_iter().cloned().collect(),
        outgoing: g.outgoing(found.id).into_iter().cloned().collect(),
    }))
}

#[derive(Debug, Deserialize)]
struct CommandRequest {
    revision: u64,
    command: EditCommand,
}

async fn command(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<CommandRequest>, JsonRejection>,
) -> ApiResult<Value> {
    let Json(req) = body?;
    let session = state.session(&id)?;
    let mut s = session.lock().unwrap();
    let store = state.store.read().unwrap();
    match s.apply_command(&store, req.revision, &req.command) {
        Ok(resp) => Ok(Json(json!(resp))),
        Err(e @ SessionError::StaleRevision { current, .. }) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "stale_revision",
            e.to_string(),
        )
        .with_detail(json!({"revision": current}))),
    }
}

#[derive(Debug, Deserialize)]
struct PathRequest {
    path: PathBuf,
}

async fn save(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<PathRequest>, JsonRejection>,
) -> ApiResult<Value> {
    let Json(req) = body?;
    let session = state.session(&id)?;
    let s = session.lock().unwrap();
    persist::save_axiom(s.graph(), &req.path)?;
    Ok(Json(json!({"path": req.path, "revision": s.revision()})))
}

async fn load(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<PathRequest>, JsonRejection>,
) -> ApiResult<Value> {
    let Json(req) = body?;
    let session = state.session(&id)?;
    let mut s = session.lock().unwrap();
    let graph = {
        let mut store = state.store.write().unwrap();
        persist::load_axiom(&mut store, &req.path)?
    };
    s.replace_graph(graph);
    Ok(Json(json!({"path": req.path, "revision": s.revision(), "wsml": s.wsml()})))
}
