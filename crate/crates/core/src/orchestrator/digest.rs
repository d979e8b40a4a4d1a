//! Metadata-only prompt digests.
//!
//! The digest is assembled from the dashboard's structural metadata: titles,
//! bounds, encodings, the data-model schema, author notes and interaction
//! capabilities. Display-only sample data is never read.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::session::{Modality, Session, Turn, TurnRole};
use crate::gateway::{ChatMessage, Role};
use crate::highlight::{anchor_parts_for, AnchorPart};
use crate::model::{AxisSpec, DashboardSpec, VisualSpec};

/// Number of most recent turns carried into each prompt.
pub const DEFAULT_HISTORY_WINDOW: usize = 12;

/// First line a provider must emit when the request needs data it cannot see.
pub const NOT_IN_DATA_SENTINEL: &str = "NOT_IN_DATA";

pub(crate) const DASHBOARD_HEADER: &str = "DASHBOARD";
pub(crate) const VISUALS_HEADER: &str = "VISUALS";
pub(crate) const DATA_MODEL_HEADER: &str = "DATA MODEL";
pub(crate) const INSIGHTS_HEADER: &str = "AUTHOR INSIGHTS";
pub(crate) const SELECTION_PREFIX: &str = "SELECTED REGION:";

pub const SYSTEM_INSTRUCTIONS: &str = "\
You are an onboarding guide for the dashboard described below. Your job is to teach the user how to read, navigate and interact with it.
Rules:
- Do not hand out final answers. Give numbered steps the user can follow on the dashboard to reach the answer themselves.
- You only know the dashboard's structure: visuals, axes, legends, fields, interactions and author notes. You cannot see data values, query the dataset, apply filters or change the dashboard.
- Basic descriptive questions about the structure, such as what an axis shows, may be answered directly from the description.
- If the request needs data values or anything else not described below, start the reply with a line containing only NOT_IN_DATA, then give the steps that lead the user to the right visuals and filters.
- When referring to a part of the dashboard, link it as [[hl:ANCHOR|words]] using only anchors listed below.
- If it is unclear which visual the user means, ask one short clarifying question.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HistoryEntry {
    pub role: TurnRole,
    pub modality: Modality,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PromptDigest {
    pub system_instructions: String,
    pub dashboard_digest: String,
    pub context_note: String,
    pub history: Vec<HistoryEntry>,
}

impl PromptDigest {
    /// System message text: instructions, dashboard description, selection.
    pub fn system_message(&self) -> String {
        let mut out = format!("{}\n\n{}", self.system_instructions, self.dashboard_digest);
        if !self.context_note.is_empty() {
            out.push_str("\n\n");
            out.push_str(&self.context_note);
        }
        out
    }

    pub fn to_messages(&self, user_text: &str) -> Vec<ChatMessage> {
        let mut messages = vec![ChatMessage::new(Role::System, self.system_message())];
        for entry in &self.history {
            let role = match entry.role {
                TurnRole::User => Role::User,
                TurnRole::Assistant => Role::Assistant,
            };
            messages.push(ChatMessage::new(role, entry.text.clone()));
        }
        messages.push(ChatMessage::new(Role::User, user_text));
        messages
    }

    /// The parts derived from dashboard metadata (everything except the
    /// user's own words echoed in history).
    pub fn metadata_text(&self) -> String {
        let mut out = self.system_message();
        for entry in self.history.iter().filter(|e| e.role == TurnRole::Assistant) {
            out.push('\n');
            out.push_str(&entry.text);
        }
        out
    }
}

pub fn build_prompt_digest(spec: &DashboardSpec, session: &Session, history_window: usize) -> PromptDigest {
    let context_note = session
        .attached_context
        .as_ref()
        .map(|ctx| {
            let hit = &ctx.hit;
            let title = spec.visual(&hit.visual_id).map(|v| v.title.as_str()).unwrap_or("");
            format!(
                "{SELECTION_PREFIX} {} {} ({} of \"{}\"), covering {}% of that region. Questions like \"this\" refer to it.",
                hit.visual_id,
                hit.region,
                hit.region.describe(),
                title,
                (hit.overlap_fraction * 100.0).round()
            )
        })
        .unwrap_or_default();

    let start = session.history.len().saturating_sub(history_window);
    let history = session.history[start..].iter().map(history_entry).collect();

    PromptDigest {
        system_instructions: SYSTEM_INSTRUCTIONS.to_string(),
        dashboard_digest: dashboard_digest(spec),
        context_note,
        history,
    }
}

fn history_entry(turn: &Turn) -> HistoryEntry {
    let text = match turn.modality {
        Modality::LassoAttach => match serde_json::from_str::<crate::resolver::RegionHit>(&turn.content) {
            Ok(hit) => format!("(selected {} {} with the lasso)", hit.visual_id, hit.region),
            Err(_) => "(lasso selection)".to_string(),
        },
        Modality::MenuOpen => format!("(opened help menu: {})", turn.content),
        Modality::Chat | Modality::VoiceTranscript => turn.content.clone(),
    };
    HistoryEntry {
        role: turn.role,
        modality: turn.modality,
        text,
    }
}

/// Renders the structural description of a dashboard.
pub fn dashboard_digest(spec: &DashboardSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{DASHBOARD_HEADER} {} \"{}\"", spec.id, spec.title);
    if !spec.description.is_empty() {
        let _ = writeln!(out, "Overview: {}", spec.description);
    }
    let _ = writeln!(out, "Page: {}x{} px", spec.page_bounds.w, spec.page_bounds.h);
    let _ = writeln!(out, "{VISUALS_HEADER} ({}, listed back to front)", spec.visuals.len());
    for v in &spec.visuals {
        visual_digest(&mut out, v);
    }

    let _ = writeln!(out, "{DATA_MODEL_HEADER}");
    for t in &spec.data_model.tables {
        let cols: Vec<String> = t
            .columns
            .iter()
            .map(|c| format!("{} ({:?}, {:?})", c.name, c.value_type, c.role))
            .collect();
        let _ = writeln!(out, "- table {}: {}", t.name, cols.join(", "));
    }
    for r in &spec.data_model.relationships {
        let _ = writeln!(out, "- relationship {} -> {}", r.from, r.to);
    }

    if !spec.insights.is_empty() {
        let _ = writeln!(out, "{INSIGHTS_HEADER}");
        for i in &spec.insights {
            let _ = writeln!(out, "- [{}] {:?}: {}", i.visual_id, i.kind, i.text);
        }
    }
    out.trim_end().to_string()
}

fn axis_line(out: &mut String, name: &str, axis: &AxisSpec) {
    let mut line = format!("  {name}: {} | scale {:?}", axis.field, axis.scale_type);
    if !axis.unit.is_empty() {
        let _ = write!(line, " | unit {}", axis.unit);
    }
    if !axis.label.is_empty() {
        let _ = write!(line, " | label \"{}\"", axis.label);
    }
    let _ = writeln!(out, "{line}");
}

fn visual_digest(out: &mut String, v: &VisualSpec) {
    let b = v.bounds;
    let _ = writeln!(
        out,
        "- [{}] {} \"{}\" at x={} y={} w={} h={}",
        v.id, v.kind, v.title, b.x, b.y, b.w, b.h
    );
    if !v.description.is_empty() {
        let _ = writeln!(out, "  note: {}", v.description);
    }
    let enc = &v.encodings;
    if let Some(a) = &enc.axis_x {
        axis_line(out, "axis-x", a);
    }
    if let Some(a) = &enc.axis_y {
        axis_line(out, "axis-y", a);
    }
    if let Some(l) = &enc.legend {
        let entries: Vec<String> = l.entries.iter().map(|e| format!("\"{e}\"")).collect();
        let _ = writeln!(
            out,
            "  legend: {} | position {:?} | entries {}",
            l.field,
            l.position,
            entries.join(", ")
        );
    }
    if let Some(f) = &enc.category {
        let _ = writeln!(out, "  category: {f}");
    }
    if let Some(f) = &enc.value {
        let _ = writeln!(out, "  value: {f}");
    }
    let caps = &v.interactions;
    if !caps.self_interactions.is_empty() {
        let names: Vec<String> = caps.self_interactions.iter().map(|s| format!("{s:?}")).collect();
        let _ = writeln!(out, "  self-interactions: {}", names.join(", "));
    }
    if !caps.cross_filter_targets.is_empty() {
        let _ = writeln!(out, "  filters: {}", caps.cross_filter_targets.join(", "));
    }
    if caps.drill_down {
        let levels: Vec<String> = caps.drill_hierarchy.iter().map(|f| f.to_string()).collect();
        let _ = writeln!(out, "  drill: {}", levels.join(" > "));
    }
    let anchors: Vec<String> = anchor_parts_for(v)
        .into_iter()
        .map(|p: AnchorPart| format!("{}.{}", v.id, p.as_str()))
        .collect();
    let _ = writeln!(out, "  anchors: {}", anchors.join(" "));
}
