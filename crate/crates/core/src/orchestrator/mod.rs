//! Multimodal onboarding sessions.
//!
//! [`Assistant`] owns the loaded dashboards, the sessions, the chat provider
//! and the voice-token store. Each session processes one turn at a time;
//! different sessions proceed concurrently.

mod digest;
mod session;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, Mutex};

use crate::gateway::{complete_chat, ChatProvider, EphemeralVoiceToken, TokenError, VoiceTokenStore};
use crate::geometry::Point;
use crate::highlight::{parse_anchors, render_anchors, resolve_anchor, HighlightCommand};
use crate::menu::{build_component_graph, region_to_category, HelpMenuModel};
use crate::model::{infer_sub_regions, parse_dashboard_spec, DashboardSpec, RegionKind, SpecError};
use crate::resolver::{resolve_lasso, resolve_point, LassoPath, RegionHit, ResolveError};

pub use digest::{
    build_prompt_digest, dashboard_digest, HistoryEntry, PromptDigest, DEFAULT_HISTORY_WINDOW, NOT_IN_DATA_SENTINEL,
    SYSTEM_INSTRUCTIONS,
};
pub(crate) use digest::{DATA_MODEL_HEADER, INSIGHTS_HEADER, SELECTION_PREFIX, VISUALS_HEADER};
pub use session::{AttachedContext, LogRecord, Modality, Outcome, Session, Turn, TurnRole};

/// Shown to the user when the provider fails.
pub const RETRY_TEXT: &str = "Sorry, I could not reach the assistant just now. Could you ask again in a moment?";

const EVENT_BUFFER: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error("unknown dashboard {0:?}")]
    UnknownDashboard(String),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("visual {visual_id:?} has no {region} region in dashboard {dashboard_id:?}")]
    UnknownVisual {
        dashboard_id: String,
        visual_id: String,
        region: RegionKind,
    },
    #[error("dashboard {0:?} is already loaded with different content")]
    DashboardConflict(String),
    #[error("turn text is empty")]
    EmptyText,
    #[error("modality {0:?} is not a conversational turn")]
    NotConversational(Modality),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Token(#[from] TokenError),
    #[error("log line {line}: {message}")]
    Log { line: usize, message: String },
}

/// A dashboard with its sub-regions inferred and its menus built.
#[derive(Debug, Clone)]
pub struct LoadedDashboard {
    pub spec: DashboardSpec,
    pub menus: BTreeMap<String, HelpMenuModel>,
}

impl LoadedDashboard {
    pub fn new(spec: &DashboardSpec) -> Result<Self, SpecError> {
        let spec = infer_sub_regions(spec)?;
        let menus = build_component_graph(&spec);
        Ok(Self { spec, menus })
    }

    /// Menu for a visual, opened at the category matching `region` when given.
    pub fn menu(&self, visual_id: &str, region: Option<RegionKind>) -> Option<HelpMenuModel> {
        let menu = self.menus.get(visual_id)?;
        let visual = self.spec.visual(visual_id)?;
        Some(match region {
            Some(r) => menu.opened(region_to_category(r, visual.kind), Some(r)),
            None => menu.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssistantReply {
    pub turn_index: usize,
    pub marked_up_text: String,
    pub anchors: Vec<String>,
    pub outcome: Outcome,
    pub highlights: Vec<HighlightCommand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum SessionEvent {
    TurnAppended {
        turn: Turn,
    },
    Highlight {
        turn_index: usize,
        command: HighlightCommand,
    },
    ContextCleared,
}

#[derive(Debug, Clone)]
pub struct AssistantConfig {
    pub model_name: String,
    pub history_window: usize,
}

impl Default for AssistantConfig {
    fn default() -> Self {
        Self {
            model_name: "mock".into(),
            history_window: DEFAULT_HISTORY_WINDOW,
        }
    }
}

struct SessionSlot {
    dashboard: Arc<LoadedDashboard>,
    state: Mutex<Session>,
    events: broadcast::Sender<SessionEvent>,
}

impl SessionSlot {
    fn emit(&self, event: SessionEvent) {
        // no subscribers is fine
        let _ = self.events.send(event);
    }
}

pub struct Assistant {
    config: AssistantConfig,
    provider: Arc<dyn ChatProvider>,
    tokens: VoiceTokenStore,
    dashboards: RwLock<HashMap<String, Arc<LoadedDashboard>>>,
    sessions: RwLock<HashMap<String, Arc<SessionSlot>>>,
}

/// Splits the sentinel line off a provider reply and classifies it.
/// Returns the outcome and the user-visible text.
pub fn classify_reply(reply: &str) -> (Outcome, String) {
    let trimmed = reply.trim();
    let (first, rest) = trimmed.split_once('\n').unwrap_or((trimmed, ""));
    if first.trim() == NOT_IN_DATA_SENTINEL {
        return (Outcome::NotInData, rest.trim().to_string());
    }
    let has_steps = trimmed.lines().any(is_step_line);
    if trimmed.ends_with('?') && !has_steps {
        (Outcome::Clarify, trimmed.to_string())
    } else {
        (Outcome::Answered, trimmed.to_string())
    }
}

pub fn classify_outcome(reply: &str) -> Outcome {
    classify_reply(reply).0
}

fn is_step_line(line: &str) -> bool {
    let line = line.trim_start();
    if line.starts_with("- ") || line.starts_with("* ") {
        return true;
    }
    let digits = line.chars().take_while(|c| c.is_ascii_digit()).count();
    digits > 0 && (line[digits..].starts_with(". ") || line[digits..].starts_with(") "))
}

impl Assistant {
    pub fn new(provider: Arc<dyn ChatProvider>, tokens: VoiceTokenStore, config: AssistantConfig) -> Self {
        Self {
            config,
            provider,
            tokens,
            dashboards: RwLock::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn tokens(&self) -> &VoiceTokenStore {
        &self.tokens
    }

    /// Parses, validates and registers a dashboard document.
    pub fn load_dashboard(&self, document: &str) -> Result<String, OrchestratorError> {
        let spec = parse_dashboard_spec(document)?;
        self.load_spec(&spec)
    }

    pub fn load_spec(&self, spec: &DashboardSpec) -> Result<String, OrchestratorError> {
        spec.validate()?;
        let loaded = LoadedDashboard::new(spec)?;
        let mut dashboards = self.dashboards.write().unwrap();
        if let Some(existing) = dashboards.get(&spec.id) {
            return if existing.spec == loaded.spec {
                Ok(spec.id.clone())
            } else {
                Err(OrchestratorError::DashboardConflict(spec.id.clone()))
            };
        }
        dashboards.insert(spec.id.clone(), Arc::new(loaded));
        Ok(spec.id.clone())
    }

    pub fn dashboard(&self, id: &str) -> Result<Arc<LoadedDashboard>, OrchestratorError> {
        self.dashboards
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| OrchestratorError::UnknownDashboard(id.to_string()))
    }

    pub fn dashboard_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.dashboards.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    fn slot(&self, session_id: &str) -> Result<Arc<SessionSlot>, OrchestratorError> {
        self.sessions
            .read()
            .unwrap()
            .get(session_id)
            .cloned()
            .ok_or_else(|| OrchestratorError::UnknownSession(session_id.to_string()))
    }

    pub fn create_session(&self, dashboard_id: &str) -> Result<String, OrchestratorError> {
        let id = uuid::Uuid::new_v4().to_string();
        self.insert_session(Session::new(id.clone(), dashboard_id))?;
        Ok(id)
    }

    fn insert_session(&self, session: Session) -> Result<(), OrchestratorError> {
        let dashboard = self.dashboard(&session.dashboard_id)?;
        let (events, _) = broadcast::channel(EVENT_BUFFER);
        let id = session.session_id.clone();
        let slot = Arc::new(SessionSlot {
            dashboard,
            state: Mutex::new(session),
            events,
        });
        self.sessions.write().unwrap().insert(id, slot);
        Ok(())
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    pub async fn session(&self, session_id: &str) -> Result<Session, OrchestratorError> {
        Ok(self.slot(session_id)?.state.lock().await.clone())
    }

    pub fn subscribe(&self, session_id: &str) -> Result<broadcast::Receiver<SessionEvent>, OrchestratorError> {
        Ok(self.slot(session_id)?.events.subscribe())
    }

    /// Resolves a lasso on the session's dashboard, attaches the hit as
    /// context and returns it with the menu opened at the matching category.
    pub async fn lasso(
        &self,
        session_id: &str,
        path: &LassoPath,
    ) -> Result<(RegionHit, HelpMenuModel), OrchestratorError> {
        let slot = self.slot(session_id)?;
        let hit = resolve_lasso(path, &slot.dashboard.spec)?;
        let menu = slot
            .dashboard
            .menu(&hit.visual_id, Some(hit.region))
            .expect("resolved visual has a menu");
        self.attach_on(&slot, hit.clone()).await?;
        Ok((hit, menu))
    }

    /// Hit-tests a pointer position without touching session state.
    pub fn hover(&self, session_id: &str, point: Point) -> Result<RegionHit, OrchestratorError> {
        let slot = self.slot(session_id)?;
        Ok(resolve_point(point, &slot.dashboard.spec)?)
    }

    pub async fn attach_lasso_context(&self, session_id: &str, hit: RegionHit) -> Result<(), OrchestratorError> {
        let slot = self.slot(session_id)?;
        self.attach_on(&slot, hit).await
    }

    async fn attach_on(&self, slot: &SessionSlot, hit: RegionHit) -> Result<(), OrchestratorError> {
        let spec = &slot.dashboard.spec;
        let valid = spec
            .visual(&hit.visual_id)
            .is_some_and(|v| hit.region.is_valid_for(v.kind) && v.region_bounds(hit.region).is_some());
        if !valid {
            return Err(OrchestratorError::UnknownVisual {
                dashboard_id: spec.id.clone(),
                visual_id: hit.visual_id,
                region: hit.region,
            });
        }
        let mut session = slot.state.lock().await;
        let turn = session.attach(hit).clone();
        slot.emit(SessionEvent::TurnAppended { turn });
        Ok(())
    }

    pub async fn clear_context(&self, session_id: &str) -> Result<(), OrchestratorError> {
        let slot = self.slot(session_id)?;
        slot.state.lock().await.attached_context = None;
        slot.emit(SessionEvent::ContextCleared);
        Ok(())
    }

    /// Menu for a visual on a dashboard. When a session is given, the
    /// opening is recorded in its history.
    pub async fn open_menu(
        &self,
        dashboard_id: &str,
        visual_id: &str,
        region: Option<RegionKind>,
        session_id: Option<&str>,
    ) -> Result<HelpMenuModel, OrchestratorError> {
        let dashboard = self.dashboard(dashboard_id)?;
        let menu = dashboard
            .menu(visual_id, region)
            .ok_or_else(|| OrchestratorError::UnknownVisual {
                dashboard_id: dashboard_id.to_string(),
                visual_id: visual_id.to_string(),
                region: region.unwrap_or(RegionKind::VisualBody),
            })?;
        if let Some(sid) = session_id {
            let slot = self.slot(sid)?;
            if slot.dashboard.spec.id != dashboard_id {
                return Err(OrchestratorError::UnknownVisual {
                    dashboard_id: slot.dashboard.spec.id.clone(),
                    visual_id: visual_id.to_string(),
                    region: region.unwrap_or(RegionKind::VisualBody),
                });
            }
            let content = match region {
                Some(r) => format!("{visual_id} {r}"),
                None => visual_id.to_string(),
            };
            let mut session = slot.state.lock().await;
            let turn = session
                .push(TurnRole::User, Modality::MenuOpen, content, Vec::new(), Outcome::None)
                .clone();
            slot.emit(SessionEvent::TurnAppended { turn });
        }
        Ok(menu)
    }

    /// Runs one conversational turn: digest, provider call, anchor
    /// validation, outcome classification and highlight events.
    pub async fn handle_user_turn(
        &self,
        session_id: &str,
        modality: Modality,
        text: &str,
    ) -> Result<AssistantReply, OrchestratorError> {
        if !matches!(modality, Modality::Chat | Modality::VoiceTranscript) {
            return Err(OrchestratorError::NotConversational(modality));
        }
        let text = text.trim();
        if text.is_empty() {
            return Err(OrchestratorError::EmptyText);
        }
        let slot = self.slot(session_id)?;
        let spec = &slot.dashboard.spec;
        let mut session = slot.state.lock().await;

        let digest = build_prompt_digest(spec, &session, self.config.history_window);
        let turn = session
            .push(TurnRole::User, modality, text.to_string(), Vec::new(), Outcome::None)
            .clone();
        slot.emit(SessionEvent::TurnAppended { turn });

        let (outcome, visible) =
            match complete_chat(self.provider.as_ref(), &self.config.model_name, &digest, text).await {
                Ok(raw) => classify_reply(&raw),
                Err(err) => {
                    tracing::warn!(session = %session_id, error = %err, "chat provider failed");
                    (Outcome::Clarify, RETRY_TEXT.to_string())
                }
            };

        let (plain, spans) = parse_anchors(&visible);
        let mut kept = Vec::new();
        let mut highlights = Vec::new();
        for span in spans {
            match resolve_anchor(&span.anchor_id, spec) {
                Ok(anchor) => {
                    highlights.push(HighlightCommand::new(anchor, highlights.len() as u32));
                    kept.push(span);
                }
                Err(err) => {
                    tracing::info!(session = %session_id, anchor = %span.anchor_id, error = %err, "dropping invalid anchor")
                }
            }
        }
        let marked_up_text = render_anchors(&plain, &kept).expect("spans from the parser are well formed");
        let anchors: Vec<String> = kept.into_iter().map(|s| s.anchor_id).collect();

        let turn = session
            .push(
                TurnRole::Assistant,
                modality,
                marked_up_text.clone(),
                anchors.clone(),
                outcome,
            )
            .clone();
        let turn_index = turn.index;
        slot.emit(SessionEvent::TurnAppended { turn });
        for command in &highlights {
            slot.emit(SessionEvent::Highlight {
                turn_index,
                command: command.clone(),
            });
        }

        Ok(AssistantReply {
            turn_index,
            marked_up_text,
            anchors,
            outcome,
            highlights,
        })
    }

    pub fn mint_voice_token(&self, session_id: &str) -> Result<EphemeralVoiceToken, OrchestratorError> {
        self.slot(session_id)?;
        Ok(self.tokens.mint(session_id))
    }

    /// Redeems a voice token, returning its session.
    pub fn redeem_voice_token(&self, token: &str) -> Result<String, OrchestratorError> {
        let session_id = self.tokens.redeem(token)?;
        self.slot(&session_id)
            .map_err(|_| OrchestratorError::Token(TokenError::UnknownSession(session_id.clone())))?;
        Ok(session_id)
    }

    /// Newline-delimited JSON, one turn per line.
    pub async fn export_log(&self, session_id: &str) -> Result<String, OrchestratorError> {
        let session = self.session(session_id).await?;
        Ok(session_log(&session))
    }

    /// Restores a session from an exported log, keeping its id. Returns the
    /// session id.
    pub fn import_log(&self, ndjson: &str) -> Result<String, OrchestratorError> {
        let session = session_from_log(ndjson)?;
        let id = session.session_id.clone();
        self.insert_session(session)?;
        Ok(id)
    }
}

pub fn session_log(session: &Session) -> String {
    let mut out = String::new();
    for turn in &session.history {
        let record = LogRecord {
            session_id: session.session_id.clone(),
            dashboard_id: session.dashboard_id.clone(),
            turn: turn.clone(),
        };
        out.push_str(&serde_json::to_string(&record).expect("log record serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_log(ndjson: &str) -> Result<Vec<LogRecord>, OrchestratorError> {
    ndjson
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| OrchestratorError::Log {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn session_from_log(ndjson: &str) -> Result<Session, OrchestratorError> {
    let records = parse_log(ndjson)?;
    let first = records.first().ok_or(OrchestratorError::Log {
        line: 1,
        message: "log is empty".into(),
    })?;
    let mut session = Session::new(first.session_id.clone(), first.dashboard_id.clone());
    session.created_at = first.turn.at;
    for (i, record) in records.into_iter().enumerate() {
        if record.session_id != session.session_id || record.turn.index != i {
            return Err(OrchestratorError::Log {
                line: i + 1,
                message: "records must belong to one session and be in order".into(),
            });
        }
        if record.turn.modality == Modality::LassoAttach {
            let hit: RegionHit = serde_json::from_str(&record.turn.content).map_err(|e| OrchestratorError::Log {
                line: i + 1,
                message: e.to_string(),
            })?;
            session.attached_context = Some(AttachedContext { hit, turn_index: i });
        }
        session.history.push(record.turn);
    }
    Ok(session)
}
