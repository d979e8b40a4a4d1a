use std::convert::Infallible;
use std::time::Duration;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use onboard_core::gateway::EphemeralVoiceToken;
use onboard_core::highlight::HighlightAnchor;
use onboard_core::model::RegionKind;
use onboard_core::orchestrator::SessionEvent;
use onboard_core::{resolve_anchor, AssistantReply, HelpMenuModel, LassoPath, Modality, Point, RegionHit, Session};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast::error::RecvError;

use crate::{ApiError, AppState, ErrorCode};

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/dashboards", get(list_dashboards).post(load_dashboard))
        .route("/dashboards/{id}", get(get_dashboard))
        .route("/dashboards/{id}/visuals/{visual_id}/menu", get(get_menu))
        .route("/dashboards/{id}/anchors/{anchor_id}", get(get_anchor))
        .route("/sessions", post(create_session))
        .route("/sessions/import", post(import_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/lasso", post(lasso))
        .route("/sessions/{id}/hover", post(hover))
        .route("/sessions/{id}/context", post(attach_context).delete(clear_context))
        .route("/sessions/{id}/turns", post(user_turn))
        .route("/sessions/{id}/voice-token", post(mint_voice_token))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/log", get(export_log))
        .route("/voice-tokens/redeem", post(redeem_voice_token))
        .fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such route") })
        .with_state(state)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

impl AppState {
    // persistence is best effort; a full disk must not fail the request
    async fn persist_session(&self, session_id: &str) {
        let Some(store) = &self.store else { return };
        match self.assistant.export_log(session_id).await {
            Ok(log) => {
                if let Err(e) = store.save_session(session_id, &log) {
                    tracing::warn!(session = %session_id, error = %e, "cannot persist session");
                }
            }
            Err(e) => tracing::warn!(session = %session_id, error = %e, "cannot export session"),
        }
    }
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn list_dashboards(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "dashboards": state.assistant.dashboard_ids() }))
}

/// Body is the raw dashboard document so schema errors keep their paths.
async fn load_dashboard(State(state): State<AppState>, document: String) -> ApiResult<impl IntoResponse> {
    let id = state.assistant.load_dashboard(&document)?;
    if let Some(store) = &state.store {
        if let Err(e) = store.save_dashboard(&id, &document) {
            tracing::warn!(dashboard = %id, error = %e, "cannot persist dashboard");
        }
    }
    Ok((StatusCode::CREATED, Json(json!({ "dashboardId": id }))))
}

async fn get_dashboard(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let dashboard = state.assistant.dashboard(&id)?;
    Ok(Json(serde_json::to_value(&dashboard.spec).expect("spec serializes")))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MenuQuery {
    region: Option<RegionKind>,
    session_id: Option<String>,
}

async fn get_menu(
    State(state): State<AppState>,
    Path((id, visual_id)): Path<(String, String)>,
    query: Result<Query<MenuQuery>, QueryRejection>,
) -> ApiResult<Json<HelpMenuModel>> {
    let Query(q) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let menu = state
        .assistant
        .open_menu(&id, &visual_id, q.region, q.session_id.as_deref())
        .await?;
    if let Some(sid) = &q.session_id {
        state.persist_session(sid).await;
    }
    Ok(Json(menu))
}

async fn get_anchor(
    State(state): State<AppState>,
    Path((id, anchor_id)): Path<(String, String)>,
) -> ApiResult<Json<HighlightAnchor>> {
    let dashboard = state.assistant.dashboard(&id)?;
    let anchor =
        resolve_anchor(&anchor_id, &dashboard.spec).map_err(|e| ApiError::new(ErrorCode::NotFound, e.to_string()))?;
    Ok(Json(anchor))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateSession {
    dashboard_id: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionCreated {
    session_id: String,
    dashboard_id: String,
}

async fn create_session(
    State(state): State<AppState>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let req = body(payload)?;
    let session_id = state.assistant.create_session(&req.dashboard_id)?;
    Ok((
        StatusCode::CREATED,
        Json(SessionCreated {
            session_id,
            dashboard_id: req.dashboard_id,
        }),
    ))
}

/// Body is an exported NDJSON log.
async fn import_session(State(state): State<AppState>, log: String) -> ApiResult<impl IntoResponse> {
    let session_id = state.assistant.import_log(&log)?;
    let session = state.assistant.session(&session_id).await?;
    state.persist_session(&session_id).await;
    Ok((
        StatusCode::CREATED,
        Json(SessionCreated {
            session_id,
            dashboard_id: session.dashboard_id,
        }),
    ))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    Ok(Json(state.assistant.session(&id).await?))
}

#[derive(Debug, Serialize)]
struct LassoResponse {
    hit: RegionHit,
    menu: HelpMenuModel,
}

async fn lasso(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<LassoPath>, JsonRejection>,
) -> ApiResult<Json<LassoResponse>> {
    let path = body(payload)?;
    let (hit, menu) = state.assistant.lasso(&id, &path).await?;
    state.persist_session(&id).await;
    Ok(Json(LassoResponse { hit, menu }))
}

async fn hover(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<Point>, JsonRejection>,
) -> ApiResult<Json<RegionHit>> {
    let point = body(payload)?;
    Ok(Json(state.assistant.hover(&id, point)?))
}

async fn attach_context(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<RegionHit>, JsonRejection>,
) -> ApiResult<StatusCode> {
    let hit = body(payload)?;
    state.assistant.attach_lasso_context(&id, hit).await?;
    state.persist_session(&id).await;
    Ok(StatusCode::NO_CONTENT)
}

async fn clear_context(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.assistant.clear_context(&id).await?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct TurnRequest {
    #[serde(default = "default_modality")]
    modality: Modality,
    text: String,
}

fn default_modality() -> Modality {
    Modality::Chat
}

async fn user_turn(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<TurnRequest>, JsonRejection>,
) -> ApiResult<Json<AssistantReply>> {
    let req = body(payload)?;
    let reply = state.assistant.handle_user_turn(&id, req.modality, &req.text).await?;
    state.persist_session(&id).await;
    Ok(Json(reply))
}

async fn mint_voice_token(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<EphemeralVoiceToken>> {
    Ok(Json(state.assistant.mint_voice_token(&id)?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RedeemRequest {
    token: String,
}

async fn redeem_voice_token(
    State(state): State<AppState>,
    payload: Result<Json<RedeemRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let req = body(payload)?;
    let session_id = state.assistant.redeem_voice_token(&req.token)?;
    Ok(Json(json!({ "sessionId": session_id })))
}

fn event_name(event: &SessionEvent) -> &'static str {
    match event {
        SessionEvent::TurnAppended { .. } => "turnAppended",
        SessionEvent::Highlight { .. } => "highlight",
        SessionEvent::ContextCleared => "contextCleared",
    }
}

async fn events(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let rx = state.assistant.subscribe(&id)?;
    let stream = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(event) => {
                    let sse = Event::default()
                        .event(event_name(&event))
                        .json_data(&event)
                        .expect("session events serialize");
                    return Some((Ok(sse), rx));
                }
                // a slow client misses events rather than stalling the session
                Err(RecvError::Lagged(n)) => tracing::debug!(skipped = n, "event subscriber lagged"),
                Err(RecvError::Closed) => return None,
            }
        }
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::new().interval(Duration::from_secs(15))))
}

async fn export_log(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let log = state.assistant.export_log(&id).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], log))
}
