//! Scripted interaction traces.
//!
//! A trace is a human-editable JSON file describing one onboarding task as
//! an ordered list of lasso, chat, voice, menu and hover steps, each with the
//! observable results it expects.

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, Rect};
use crate::menu::MenuCategory;
use crate::model::RegionKind;
use crate::orchestrator::{LogRecord, Modality, Outcome, TurnRole};
use crate::resolver::RegionHit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskType {
    Lookup,
    Exploratory,
    Interpretive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceAction {
    Lasso,
    Chat,
    Voice,
    MenuOpen,
    Hover,
}

/// Action-specific inputs. Lasso takes `path`, `rect` or an already
/// resolved `hit`; Chat and Voice take `text`; MenuOpen takes `visualId`
/// and optionally `region`; Hover takes `point`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StepPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rect: Option<Rect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hit: Option<RegionHit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionExpectation {
    pub visual_id: String,
    pub region: RegionKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StepExpectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors_include: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu_opened_at: Option<MenuCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_is: Option<RegionExpectation>,
    /// Minimum number of distinct visuals referenced by the reply's anchors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_visuals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceStep {
    pub action: TraceAction,
    #[serde(default)]
    pub payload: StepPayload,
    #[serde(default)]
    pub expect: StepExpectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskTrace {
    pub name: String,
    pub task_type: TaskType,
    pub difficulty: Difficulty,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dashboard_id: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace is not valid JSON: {0}")]
    Syntax(String),
    #[error("trace {0:?} has no steps")]
    Empty(String),
    #[error("step {index}: {message}")]
    Step { index: usize, message: String },
}

impl TraceStep {
    fn validate(&self, index: usize) -> Result<(), TraceError> {
        let p = &self.payload;
        let err = |message: &str| TraceError::Step {
            index,
            message: message.to_string(),
        };
        match self.action {
            TraceAction::Lasso => {
                let given = [p.path.is_some(), p.rect.is_some(), p.hit.is_some()]
                    .iter()
                    .filter(|b| **b)
                    .count();
                if given != 1 {
                    return Err(err("Lasso needs exactly one of path, rect or hit"));
                }
            }
            TraceAction::Chat | TraceAction::Voice => {
                if p.text.as_deref().is_none_or(|t| t.trim().is_empty()) {
                    return Err(err("Chat and Voice need non-empty text"));
                }
            }
            TraceAction::MenuOpen => {
                if p.visual_id.is_none() {
                    return Err(err("MenuOpen needs visualId"));
                }
            }
            TraceAction::Hover => {
                if p.point.is_none() {
                    return Err(err("Hover needs point"));
                }
            }
        }
        let e = &self.expect;
        let conversational = matches!(self.action, TraceAction::Chat | TraceAction::Voice);
        if !conversational && (e.outcome.is_some() || !e.anchors_include.is_empty() || e.min_visuals.is_some()) {
            return Err(err(
                "outcome and anchor expectations apply to Chat and Voice steps only",
            ));
        }
        if e.menu_opened_at.is_some() && !matches!(self.action, TraceAction::Lasso | TraceAction::MenuOpen) {
            return Err(err("menuOpenedAt applies to Lasso and MenuOpen steps only"));
        }
        if e.region_is.is_some() && !matches!(self.action, TraceAction::Lasso | TraceAction::Hover) {
            return Err(err("regionIs applies to Lasso and Hover steps only"));
        }
        Ok(())
    }
}

impl TaskTrace {
    pub fn validate(&self) -> Result<(), TraceError> {
        if self.steps.is_empty() {
            return Err(TraceError::Empty(self.name.clone()));
        }
        self.steps.iter().enumerate().try_for_each(|(i, s)| s.validate(i))
    }
}

pub fn parse_trace(document: &str) -> Result<TaskTrace, TraceError> {
    let trace: TaskTrace = serde_json::from_str(document).map_err(|e| TraceError::Syntax(e.to_string()))?;
    trace.validate()?;
    Ok(trace)
}

/// Turns an exported session log into a trace that replays the user's
/// actions and expects the recorded assistant outcomes and anchors.
pub fn trace_from_log(name: &str, records: &[LogRecord]) -> Result<TaskTrace, TraceError> {
    let mut steps: Vec<TraceStep> = Vec::new();
    for (i, record) in records.iter().enumerate() {
        let turn = &record.turn;
        match (turn.role, turn.modality) {
            (TurnRole::User, Modality::Chat | Modality::VoiceTranscript) => {
                let action = if turn.modality == Modality::Chat {
                    TraceAction::Chat
                } else {
                    TraceAction::Voice
                };
                steps.push(TraceStep {
                    action,
                    payload: StepPayload {
                        text: Some(turn.content.clone()),
                        ..Default::default()
                    },
                    expect: StepExpectation::default(),
                });
            }
            (TurnRole::Assistant, _) => {
                let Some(step) = steps
                    .last_mut()
                    .filter(|s| matches!(s.action, TraceAction::Chat | TraceAction::Voice))
                else {
                    return Err(TraceError::Step {
                        index: i,
                        message: "assistant turn without a preceding user turn".into(),
                    });
                };
                step.expect.outcome = Some(turn.outcome);
                step.expect.anchors_include = turn.anchors.clone();
            }
            (TurnRole::User, Modality::LassoAttach) => {
                let hit: RegionHit = serde_json::from_str(&turn.content).map_err(|e| TraceError::Step {
                    index: i,
                    message: e.to_string(),
                })?;
                steps.push(TraceStep {
                    action: TraceAction::Lasso,
                    expect: StepExpectation {
                        region_is: Some(RegionExpectation {
                            visual_id: hit.visual_id.clone(),
                            region: hit.region,
                        }),
                        ..Default::default()
                    },
                    payload: StepPayload {
                        hit: Some(hit),
                        ..Default::default()
                    },
                });
            }
            (TurnRole::User, Modality::MenuOpen) => {
                let mut parts = turn.content.split_whitespace();
                let visual_id = parts.next().map(str::to_string);
                let region = parts
                    .next()
                    .and_then(|r| serde_json::from_value(serde_json::Value::String(r.into())).ok());
                steps.push(TraceStep {
                    action: TraceAction::MenuOpen,
                    payload: StepPayload {
                        visual_id,
                        region,
                        ..Default::default()
                    },
                    expect: StepExpectation::default(),
                });
            }
        }
    }
    let trace = TaskTrace {
        name: name.to_string(),
        task_type: TaskType::Exploratory,
        difficulty: Difficulty::Medium,
        dashboard_id: records.first().map(|r| r.dashboard_id.clone()),
        description: "Replay of a recorded session.".into(),
        steps,
    };
    trace.validate()?;
    Ok(trace)
}
