use std::path::PathBuf;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{StatusCode, Uri};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, put};
use axum::{Json, Router};
use dialogd_core::catalog::SchemaChange;
use dialogd_core::dialog::{Dialog, ReadItemsRequest};
use dialogd_core::model::Cell;
use dialogd_core::storage::RowId;
use serde::Serialize;
use tower_http::services::ServeDir;

use crate::error::ApiError;

/// Page size used when a request has no `take` parameter.
pub const DEFAULT_TAKE: u64 = 100;

#[derive(Debug, Clone)]
pub struct AppState {
    pub dialog: Dialog,
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Serialize)]
struct Created {
    #[serde(rename = "RowId")]
    row_id: u64,
    #[serde(rename = "Epoch")]
    epoch: u64,
}

#[derive(Debug, Serialize)]
struct Committed {
    #[serde(rename = "Epoch")]
    epoch: u64,
}

#[derive(Debug, Serialize)]
struct ServerInfo {
    #[serde(rename = "MaxTake")]
    max_take: u64,
    #[serde(rename = "DefaultTake")]
    default_take: u64,
    #[serde(rename = "Epoch")]
    epoch: u64,
}

/// Runs a dialog call on the blocking pool so waiting for the writer never
/// stalls the async workers.
async fn blocking<T, F>(state: AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Dialog) -> dialogd_core::Result<T> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&state.dialog)).await {
        Ok(result) => result.map(Json).map_err(ApiError::from),
        Err(e) => Err(ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "Internal",
            format!("handler failed: {e}"),
        )),
    }
}

type Params = Vec<(String, String)>;

fn params(query: Result<Query<Params>, QueryRejection>) -> Result<Params, ApiError> {
    query
        .map(|Query(p)| p)
        .map_err(|e| ApiError::invalid_request(e.body_text()))
}

fn param<'p>(params: &'p Params, name: &str) -> Option<&'p str> {
    params
        .iter()
        .rev()
        .find(|(k, _)| k == name)
        .map(|(_, v)| v.as_str())
}

fn number(params: &Params, name: &str, default: u64) -> Result<u64, ApiError> {
    match param(params, name) {
        None | Some("") => Ok(default),
        Some(v) => v.trim().parse().map_err(|_| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "InvalidParameter",
                format!("query parameter {name} must be a non-negative integer, got {v:?}"),
            )
        }),
    }
}

fn items_request(
    state: &AppState,
    table: String,
    params: &Params,
) -> Result<ReadItemsRequest, ApiError> {
    let default_take = DEFAULT_TAKE.min(state.dialog.max_take());
    Ok(ReadItemsRequest::new(
        table,
        number(params, "skip", 0)?,
        number(params, "take", default_take)?,
    )
    .order(param(params, "order").unwrap_or_default())
    .filter(param(params, "filter").unwrap_or_default()))
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(v)| v)
        .map_err(|e| ApiError::invalid_request(e.body_text()))
}

fn row_id(raw: &str) -> Result<RowId, ApiError> {
    raw.parse().map(RowId).map_err(|_| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "InvalidParameter",
            format!("row id must be a non-negative integer, got {raw:?}"),
        )
    })
}

async fn tables(State(state): State<AppState>) -> impl IntoResponse {
    Json(state.dialog.read_table_headers())
}

async fn table(
    State(state): State<AppState>,
    Path(table): Path<String>,
    query: Result<Query<Params>, QueryRejection>,
) -> Response {
    let run = async {
        let req = items_request(&state, table, &params(query)?)?;
        blocking(state, move |d| d.read_table(&req)).await
    };
    run.await.into_response()
}

async fn fields(State(state): State<AppState>, Path(table): Path<String>) -> Response {
    blocking(state, move |d| d.read_fields(&table))
        .await
        .into_response()
}

async fn relations(State(state): State<AppState>, Path(table): Path<String>) -> Response {
    blocking(state, move |d| d.read_relations(&table))
        .await
        .into_response()
}

async fn items(
    State(state): State<AppState>,
    Path(table): Path<String>,
    query: Result<Query<Params>, QueryRejection>,
) -> Response {
    let run = async {
        let req = items_request(&state, table, &params(query)?)?;
        blocking(state, move |d| d.read_items(&req)).await
    };
    run.await.into_response()
}

async fn total(
    State(state): State<AppState>,
    Path(table): Path<String>,
    query: Result<Query<Params>, QueryRejection>,
) -> Response {
    let run = async {
        let filter = param(&params(query)?, "filter")
            .unwrap_or_default()
            .to_owned();
        blocking(state, move |d| d.read_total(&table, &filter)).await
    };
    run.await.into_response()
}

async fn create_item(
    State(state): State<AppState>,
    Path(table): Path<String>,
    body: Result<Json<Vec<Cell>>, JsonRejection>,
) -> Response {
    let run = async {
        let cells = json_body(body)?;
        blocking(state, move |d| {
            d.create_item(&table, &cells).map(|(row, epoch)| Created {
                row_id: row.0,
                epoch,
            })
        })
        .await
    };
    run.await.into_response()
}

async fn update_item(
    State(state): State<AppState>,
    Path((table, row)): Path<(String, String)>,
    body: Result<Json<Vec<Cell>>, JsonRejection>,
) -> Response {
    let run = async {
        let row = row_id(&row)?;
        let cells = json_body(body)?;
        blocking(state, move |d| {
            d.update_item(&table, row, &cells)
                .map(|epoch| Committed { epoch })
        })
        .await
    };
    run.await.into_response()
}

async fn delete_item(
    State(state): State<AppState>,
    Path((table, row)): Path<(String, String)>,
) -> Response {
    let run = async {
        let row = row_id(&row)?;
        blocking(state, move |d| {
            d.delete_item(&table, row).map(|epoch| Committed { epoch })
        })
        .await
    };
    run.await.into_response()
}

async fn change_schema(
    State(state): State<AppState>,
    body: Result<Json<SchemaChange>, JsonRejection>,
) -> Response {
    let run = async {
        let change = json_body(body)?;
        blocking(state, move |d| {
            d.change_schema(change).map(|epoch| Committed { epoch })
        })
        .await
    };
    run.await.into_response()
}

async fn config(State(state): State<AppState>) -> impl IntoResponse {
    let max_take = state.dialog.max_take();
    Json(ServerInfo {
        max_take,
        default_take: DEFAULT_TAKE.min(max_take),
        epoch: state.dialog.snapshot().epoch(),
    })
}

async fn api_not_found(uri: Uri) -> ApiError {
    ApiError::new(
        StatusCode::NOT_FOUND,
        "UnknownRoute",
        format!("no endpoint at {}", uri.path()),
    )
}

async fn placeholder() -> Html<&'static str> {
    Html(
        "<!doctype html><title>dialogd</title>\
         <p>dialogd is running. The JSON API is served under <code>/api</code>.</p>",
    )
}

/// The HTTP surface. `ui_dir`, when given, is served at `/`.
pub fn router(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/config", get(config))
        .route("/tables", get(tables))
        .route("/tables/{table}", get(table))
        .route("/tables/{table}/fields", get(fields))
        .route("/tables/{table}/relations", get(relations))
        .route("/tables/{table}/items", get(items).post(create_item))
        .route(
            "/tables/{table}/items/{row}",
            put(update_item).delete(delete_item),
        )
        .route("/tables/{table}/total", get(total))
        .route("/schema", axum::routing::post(change_schema))
        .fallback(api_not_found)
        .with_state(state);
    let router = Router::new().nest("/api", api);
    match ui_dir {
        Some(dir) => {
            router.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true))
        }
        None => router.route("/", get(placeholder)),
    }
}
