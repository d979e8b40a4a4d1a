//! Core of the dashboard onboarding assistant.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: rectangles, polygon clipping and containment.
//! - [`model`]: the dashboard document format and sub-region layout.
//! - [`menu`]: per-visual help menus (Read / Data / Interact / Insight).
//! - [`resolver`]: lasso and pointer hit-testing against the layout.
//! - [`highlight`]: highlight anchors and the inline `[[hl:…]]` markup.
//! - [`gateway`]: chat providers (mock and HTTP) and voice session tokens.
//! - [`orchestrator`]: multimodal sessions, prompt digests and replies.
//! - [`trace`]: scripted interaction traces for end-to-end replay.
//! - [`sample`]: the bundled sample sales dashboard.

pub mod gateway;
pub mod geometry;
pub mod highlight;
pub mod menu;
pub mod model;
pub mod orchestrator;
pub mod resolver;
pub mod sample;
pub mod trace;

pub use gateway::{ChatProvider, GatewayError, MockProvider, ProviderConfig, ProviderMode, VoiceTokenStore};
pub use geometry::{Point, Rect};
pub use highlight::{parse_anchors, render_anchors, resolve_anchor, AnchorSpan, HighlightAnchor, HighlightCommand};
pub use menu::{build_component_graph, prune_categories, region_to_category, HelpMenuModel, MenuCategory};
pub use model::{
    infer_sub_regions, parse_dashboard_spec, DashboardSpec, FieldRef, RegionKind, SpecError, VisualKind, VisualSpec,
};
pub use orchestrator::{Assistant, AssistantConfig, AssistantReply, Modality, OrchestratorError, Outcome, Session};
pub use resolver::{resolve_lasso, resolve_point, LassoPath, RegionHit, ResolveError};
pub use trace::{parse_trace, TaskTrace, TraceStep};
