use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::resolver::RegionHit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TurnRole {
    User,
    Assistant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    Chat,
    VoiceTranscript,
    LassoAttach,
    MenuOpen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Answered,
    NotInData,
    Clarify,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Turn {
    pub index: usize,
    pub role: TurnRole,
    pub modality: Modality,
    pub content: String,
    #[serde(default)]
    pub anchors: Vec<String>,
    pub outcome: Outcome,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttachedContext {
    pub hit: RegionHit,
    /// Index of the LassoAttach turn that attached it.
    pub turn_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub session_id: String,
    pub dashboard_id: String,
    pub history: Vec<Turn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attached_context: Option<AttachedContext>,
    pub created_at: DateTime<Utc>,
}

impl Session {
    pub fn new(session_id: impl Into<String>, dashboard_id: impl Into<String>) -> Self {
        Self {
            session_id: session_id.into(),
            dashboard_id: dashboard_id.into(),
            history: Vec::new(),
            attached_context: None,
            created_at: Utc::now(),
        }
    }

    /// Appends a turn and returns it. History only grows.
    pub(crate) fn push(
        &mut self,
        role: TurnRole,
        modality: Modality,
        content: String,
        anchors: Vec<String>,
        outcome: Outcome,
    ) -> &Turn {
        let index = self.history.len();
        self.history.push(Turn {
            index,
            role,
            modality,
            content,
            anchors,
            outcome,
            at: Utc::now(),
        });
        &self.history[index]
    }

    pub(crate) fn attach(&mut self, hit: RegionHit) -> &Turn {
        let content = serde_json::to_string(&hit).expect("region hit serializes");
        let index = self.history.len();
        self.attached_context = Some(AttachedContext { hit, turn_index: index });
        self.push(
            TurnRole::User,
            Modality::LassoAttach,
            content,
            Vec::new(),
            Outcome::None,
        )
    }
}

/// One line of an exported session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogRecord {
    pub session_id: String,
    pub dashboard_id: String,
    #[serde(flatten)]
    pub turn: Turn,
}
