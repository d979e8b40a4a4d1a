//! Contextual help menus.
//!
//! Each visual gets a [`HelpMenuModel`]: a tree of explanation nodes under
//! up to four categories. Structure and wording come from the spec by
//! deterministic templates; an optional language-model pass may rephrase a
//! node's text but only if every unit, field name and number survives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gateway::{ChatMessage, ChatProvider, ChatRequest, Role, POLISH_INSTRUCTIONS};
use crate::model::{
    AxisSpec, ColumnRole, DashboardSpec, FieldRef, InsightKind, LegendPosition, RegionKind, ScaleType, SelfInteraction,
    VisualKind, VisualSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MenuCategory {
    Read,
    Data,
    Interact,
    Insight,
}

impl MenuCategory {
    pub const ALL: [MenuCategory; 4] = [
        MenuCategory::Read,
        MenuCategory::Data,
        MenuCategory::Interact,
        MenuCategory::Insight,
    ];

    fn slug(self) -> &'static str {
        match self {
            MenuCategory::Read => "read",
            MenuCategory::Data => "data",
            MenuCategory::Interact => "interact",
            MenuCategory::Insight => "insight",
        }
    }
}

impl fmt::Display for MenuCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Icon {
    ReadIcon,
    DataIcon,
    InteractIcon,
    InsightIcon,
    TitleIcon,
    AxisIcon,
    LegendIcon,
    ScaleIcon,
    TableIcon,
    ColumnIcon,
    KeyIcon,
    MeasureIcon,
    HighlightIcon,
    CompareIcon,
    HoverIcon,
    FilterIcon,
    DrillIcon,
    TrendIcon,
    DriverIcon,
    InfoIcon,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentNode {
    pub id: String,
    pub category: MenuCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    pub label: String,
    pub narrative: String,
    pub icon: Icon,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_region: Option<RegionKind>,
    /// Terms (units, field names) any rephrasing must keep verbatim.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ground_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MenuNode {
    #[serde(flatten)]
    pub node: ComponentNode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<MenuNode>,
}

impl MenuNode {
    fn leaf(node: ComponentNode) -> Self {
        Self {
            node,
            children: Vec::new(),
        }
    }

    /// Depth-first iteration over this node and its descendants.
    pub fn walk(&self) -> Vec<&MenuNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }

    pub fn leaves(&self) -> Vec<&MenuNode> {
        self.walk().into_iter().filter(|n| n.children.is_empty()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HelpMenuModel {
    pub visual_id: String,
    pub categories: Vec<MenuCategory>,
    pub nodes: Vec<MenuNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opened_at: Option<MenuCategory>,
    pub info_text: String,
}

impl HelpMenuModel {
    pub fn root(&self, category: MenuCategory) -> Option<&MenuNode> {
        self.nodes.iter().find(|n| n.node.category == category)
    }

    pub fn all_nodes(&self) -> Vec<&MenuNode> {
        self.nodes.iter().flat_map(|n| n.walk()).collect()
    }

    pub fn find(&self, id: &str) -> Option<&MenuNode> {
        self.all_nodes().into_iter().find(|n| n.node.id == id)
    }

    /// The menu opened at `category`, with the info box showing the node
    /// describing `region` when there is one, else the category summary.
    pub fn opened(&self, category: MenuCategory, region: Option<RegionKind>) -> HelpMenuModel {
        let mut out = self.clone();
        let Some(root) = self.root(category) else {
            return out;
        };
        out.opened_at = Some(category);
        let focused = region.and_then(|r| root.walk().into_iter().find(|n| n.node.source_region == Some(r)));
        out.info_text = focused.unwrap_or(root).node.narrative.clone();
        out
    }
}

/// Categories shown for a visual kind. KPI cards cannot be interacted
/// with and filters encode no findings.
pub fn prune_categories(kind: VisualKind) -> BTreeSet<MenuCategory> {
    MenuCategory::ALL
        .into_iter()
        .filter(|c| {
            !matches!(
                (kind, c),
                (VisualKind::Kpi, MenuCategory::Interact) | (VisualKind::Slicer, MenuCategory::Insight)
            )
        })
        .collect()
}

/// Category a menu opens at for a selected region, falling back to Read
/// when the preferred category is pruned for `kind`.
pub fn region_to_category(region: RegionKind, kind: VisualKind) -> MenuCategory {
    let preferred = match region {
        RegionKind::AxisX | RegionKind::AxisY | RegionKind::Legend | RegionKind::Title | RegionKind::VisualBody => {
            MenuCategory::Read
        }
        RegionKind::DataArea => MenuCategory::Insight,
        RegionKind::FilterControl => MenuCategory::Interact,
    };
    if prune_categories(kind).contains(&preferred) {
        preferred
    } else {
        MenuCategory::Read
    }
}

pub fn build_component_graph(spec: &DashboardSpec) -> BTreeMap<String, HelpMenuModel> {
    spec.visuals
        .iter()
        .map(|v| (v.id.clone(), build_help_menu(spec, v)))
        .collect()
}

struct NodeFactory<'a> {
    visual: &'a VisualSpec,
    category: MenuCategory,
}

impl NodeFactory<'_> {
    fn root_id(&self) -> String {
        format!("{}.{}", self.visual.id, self.category.slug())
    }

    fn node(
        &self,
        suffix: &str,
        parent: Option<String>,
        label: impl Into<String>,
        narrative: String,
        icon: Icon,
    ) -> ComponentNode {
        ComponentNode {
            id: format!("{}.{}", self.root_id(), suffix),
            category: self.category,
            parent_id: Some(parent.unwrap_or_else(|| self.root_id())),
            label: label.into(),
            narrative,
            icon,
            source_region: None,
            ground_terms: Vec::new(),
        }
    }

    fn root(&self, narrative: String, icon: Icon, children: Vec<MenuNode>) -> MenuNode {
        MenuNode {
            node: ComponentNode {
                id: self.root_id(),
                category: self.category,
                parent_id: None,
                label: self.category.to_string(),
                narrative,
                icon,
                source_region: None,
                ground_terms: Vec::new(),
            },
            children,
        }
    }
}

fn with_region(mut node: ComponentNode, region: RegionKind) -> ComponentNode {
    node.source_region = Some(region);
    node
}

fn with_terms(mut node: ComponentNode, terms: impl IntoIterator<Item = String>) -> ComponentNode {
    node.ground_terms = terms.into_iter().filter(|t| !t.is_empty()).collect();
    node
}

pub fn build_help_menu(spec: &DashboardSpec, visual: &VisualSpec) -> HelpMenuModel {
    let categories: Vec<MenuCategory> = prune_categories(visual.kind).into_iter().collect();
    let nodes = categories
        .iter()
        .map(|&c| {
            let f = NodeFactory { visual, category: c };
            match c {
                MenuCategory::Read => read_tree(&f),
                MenuCategory::Data => data_tree(spec, &f),
                MenuCategory::Interact => interact_tree(spec, &f),
                MenuCategory::Insight => insight_tree(spec, &f),
            }
        })
        .collect();
    let info_text = if visual.description.is_empty() {
        format!("\"{}\" is a {}.", visual.title, visual.kind.noun())
    } else {
        format!(
            "\"{}\" is a {}. {}",
            visual.title,
            visual.kind.noun(),
            visual.description
        )
    };
    HelpMenuModel {
        visual_id: visual.id.clone(),
        categories,
        nodes,
        opened_at: None,
        info_text,
    }
}

/// Sentence describing how an axis encodes values.
pub fn axis_narrative(which: char, axis: &AxisSpec) -> String {
    let column = &axis.field.column;
    match axis.scale_type {
        ScaleType::Linear | ScaleType::Log => {
            let scale = if axis.scale_type == ScaleType::Linear {
                "a continuous scale"
            } else {
                "a logarithmic scale, so equal steps mean equal ratios"
            };
            if axis.unit.is_empty() {
                format!("The {which}-axis represents {column} values on {scale}.")
            } else {
                format!("The {which}-axis represents values in {} on {scale}.", axis.unit)
            }
        }
        ScaleType::Categorical => format!("The {which}-axis lists each {column} as a separate category."),
        ScaleType::Temporal => format!("The {which}-axis shows time as {column}, from earliest to latest."),
    }
}

fn axis_terms(axis: &AxisSpec) -> Vec<String> {
    let unit_in_text = matches!(axis.scale_type, ScaleType::Linear | ScaleType::Log) && !axis.unit.is_empty();
    if unit_in_text {
        vec![axis.unit.clone()]
    } else {
        vec![axis.field.column.clone()]
    }
}

fn position_words(p: LegendPosition) -> &'static str {
    match p {
        LegendPosition::Top => "top",
        LegendPosition::Bottom => "bottom",
        LegendPosition::Left => "left side",
        LegendPosition::Right => "right side",
        LegendPosition::TopRight => "top right corner",
    }
}

fn read_tree(f: &NodeFactory<'_>) -> MenuNode {
    let v = f.visual;
    let enc = &v.encodings;
    let content = v.content_region();

    let mut title_text = format!("The title \"{}\" names what this {} shows.", v.title, v.kind.noun());
    if !v.description.is_empty() {
        title_text.push(' ');
        title_text.push_str(&v.description);
    }
    let mut children: Vec<MenuNode> = Vec::new();
    children.push(
        with_region(
            f.node("title", None, "Title", title_text, Icon::TitleIcon),
            RegionKind::Title,
        )
        .into(),
    );

    for (which, suffix, region, axis) in [
        ('X', "axis-x", RegionKind::AxisX, &enc.axis_x),
        ('Y', "axis-y", RegionKind::AxisY, &enc.axis_y),
    ] {
        if let Some(axis) = axis {
            let label = if axis.label.is_empty() {
                axis.field.column.clone()
            } else {
                axis.label.clone()
            };
            let node = f.node(suffix, None, label, axis_narrative(which, axis), Icon::AxisIcon);
            children.push(MenuNode::leaf(with_terms(with_region(node, region), axis_terms(axis))));
        }
    }

    if let Some(legend) = &enc.legend {
        let text = format!(
            "The legend on the {} colors the marks by {}, in this order: {}.",
            position_words(legend.position),
            legend.field.column,
            legend.entries.join(", ")
        );
        let node = f.node("legend", None, "Legend", text, Icon::LegendIcon);
        let terms = std::iter::once(legend.field.column.clone()).chain(legend.entries.iter().cloned());
        children.push(MenuNode::leaf(with_terms(with_region(node, RegionKind::Legend), terms)));
    }

    if let Some(field) = &enc.category {
        let column = &field.column;
        let text = match v.kind {
            VisualKind::FunnelChart => {
                format!("Each band of the funnel is one {column}, from the first stage at the top to the last.")
            }
            VisualKind::MapChart => format!("Each bubble on the map marks one {column}."),
            VisualKind::Slicer => {
                format!("Use this control to choose which {column} values the rest of the dashboard shows.")
            }
            _ => format!("Marks are grouped by {column}."),
        };
        let node = f.node("category", None, column.clone(), text, Icon::ScaleIcon);
        children.push(MenuNode::leaf(with_terms(with_region(node, content), [column.clone()])));
    }
    if let Some(field) = &enc.value {
        let column = &field.column;
        let text = match v.kind {
            VisualKind::Kpi => format!(
                "The card shows a single number: the {column} measure from {}.",
                field.table
            ),
            VisualKind::FunnelChart => format!("The width of each band shows {column}."),
            VisualKind::MapChart => format!("Bubble size shows {column}."),
            _ => format!("Mark size shows {column}."),
        };
        let node = f.node("value", None, column.clone(), text, Icon::ScaleIcon);
        children.push(MenuNode::leaf(with_terms(with_region(node, content), [column.clone()])));
    }

    f.root(
        format!(
            "How to read the {} \"{}\": its title, scales and encodings.",
            v.kind.noun(),
            v.title
        ),
        Icon::ReadIcon,
        children,
    )
}

impl From<ComponentNode> for MenuNode {
    fn from(node: ComponentNode) -> Self {
        MenuNode::leaf(node)
    }
}

fn column_narrative(field: &FieldRef, role: ColumnRole, value_type: crate::model::ValueType) -> String {
    let (column, table) = (&field.column, &field.table);
    match role {
        ColumnRole::Measure => {
            format!("{column} is a numeric measure from the {table} table; the visual aggregates it.")
        }
        ColumnRole::Dimension => format!(
            "{column} is a {} dimension from the {table} table used to group the data.",
            format!("{value_type:?}").to_lowercase()
        ),
        ColumnRole::Key => {
            format!("{column} is a key of the {table} table; it identifies rows and links related tables.")
        }
    }
}

fn data_tree(spec: &DashboardSpec, f: &NodeFactory<'_>) -> MenuNode {
    let v = f.visual;
    let mut fields: Vec<&FieldRef> = v.encoded_fields();
    for level in &v.interactions.drill_hierarchy {
        if !fields.contains(&level) {
            fields.push(level);
        }
    }

    // tables in first-use order
    let mut tables: Vec<&str> = Vec::new();
    for field in &fields {
        if !tables.contains(&field.table.as_str()) {
            tables.push(&field.table);
        }
    }

    let mut children = Vec::new();
    for table in tables {
        let table_id = format!("{}.{}", f.root_id(), table);
        let mut leaves: Vec<MenuNode> = Vec::new();
        let mut listed: Vec<FieldRef> = Vec::new();
        for field in fields.iter().filter(|fr| fr.table == table) {
            let Some(col) = spec.data_model.column(field) else {
                continue;
            };
            let icon = match col.role {
                ColumnRole::Measure => Icon::MeasureIcon,
                ColumnRole::Key => Icon::KeyIcon,
                ColumnRole::Dimension => Icon::ColumnIcon,
            };
            let node = f.node(
                &format!("{table}.{}", field.column),
                Some(table_id.clone()),
                field.column.clone(),
                column_narrative(field, col.role, col.value_type),
                icon,
            );
            leaves.push(with_terms(node, [field.column.clone(), table.to_string()]).into());
            listed.push((*field).clone());
        }
        let keys: Vec<&str> = spec
            .data_model
            .table(table)
            .map(|t| {
                t.columns
                    .iter()
                    .filter(|c| c.role == ColumnRole::Key)
                    .map(|c| c.name.as_str())
                    .collect()
            })
            .unwrap_or_default();
        for key in &keys {
            let field = FieldRef::new(table, *key);
            if listed.contains(&field) {
                continue;
            }
            let node = f.node(
                &format!("{table}.{key}"),
                Some(table_id.clone()),
                key.to_string(),
                column_narrative(&field, ColumnRole::Key, crate::model::ValueType::Text),
                Icon::KeyIcon,
            );
            leaves.push(with_terms(node, [key.to_string(), table.to_string()]).into());
        }

        let links: Vec<String> = spec
            .data_model
            .relationships
            .iter()
            .filter_map(|r| {
                if r.from.table == table {
                    Some(format!("{} via {}", r.to.table, r.from.column))
                } else if r.to.table == table {
                    Some(format!("{} via {}", r.from.table, r.to.column))
                } else {
                    None
                }
            })
            .collect();
        let used: Vec<&str> = listed.iter().map(|f| f.column.as_str()).collect();
        let mut text = format!("This visual uses {} from the {table} table.", used.join(", "));
        if !links.is_empty() {
            text.push_str(&format!(" It links to {}.", links.join(", ")));
        }
        children.push(MenuNode {
            node: with_terms(
                f.node(table, None, table.to_string(), text, Icon::TableIcon),
                [table.to_string()],
            ),
            children: leaves,
        });
    }
    f.root(
        format!(
            "Where the data in \"{}\" comes from: tables, columns, keys and measures.",
            v.title
        ),
        Icon::DataIcon,
        children,
    )
}

fn interact_tree(spec: &DashboardSpec, f: &NodeFactory<'_>) -> MenuNode {
    let v = f.visual;
    let caps = &v.interactions;
    let content = v.content_region();
    let mut children = Vec::new();

    for si in &caps.self_interactions {
        let (suffix, label, text, icon) = match si {
            SelfInteraction::HighlightCategory => (
                "highlight",
                "Highlight",
                "Click a category to highlight it; the other categories fade.".to_string(),
                Icon::HighlightIcon,
            ),
            SelfInteraction::CompareCategories => (
                "compare",
                "Compare",
                "Ctrl+click several categories to compare them side by side.".to_string(),
                Icon::CompareIcon,
            ),
            SelfInteraction::Hover => (
                "hover",
                "Hover",
                "Hover over a mark to see its details in a tooltip.".to_string(),
                Icon::HoverIcon,
            ),
        };
        children.push(with_region(f.node(suffix, None, label, text, icon), content).into());
    }

    if !caps.cross_filter_targets.is_empty() {
        let filters_id = format!("{}.filters", f.root_id());
        let verb = if v.kind == VisualKind::Slicer {
            "Changing this filter updates"
        } else {
            "Selecting here filters"
        };
        let targets: Vec<MenuNode> = caps
            .cross_filter_targets
            .iter()
            .filter_map(|t| spec.visual(t))
            .map(|target| {
                let node = f.node(
                    &format!("filters.{}", target.id),
                    Some(filters_id.clone()),
                    target.title.clone(),
                    format!("{verb} \"{}\".", target.title),
                    Icon::FilterIcon,
                );
                with_terms(node, [target.title.clone()]).into()
            })
            .collect();
        let text = if v.kind == VisualKind::Slicer {
            format!("Changing \"{}\" filters {} other visuals.", v.title, targets.len())
        } else {
            format!(
                "Selecting a mark in \"{}\" cross-filters {} other visuals.",
                v.title,
                targets.len()
            )
        };
        children.push(MenuNode {
            node: with_region(
                f.node("filters", None, "Filters other visuals", text, Icon::FilterIcon),
                content,
            ),
            children: targets,
        });
    }

    if caps.drill_down {
        let levels: Vec<String> = caps.drill_hierarchy.iter().map(|l| l.column.clone()).collect();
        let text = format!(
            "Drill down through {}: right-click a mark and choose Drill down to go one level deeper, or Drill up to go back.",
            levels.join(" → ")
        );
        let node = f.node("drill", None, "Drill down", text, Icon::DrillIcon);
        children.push(with_terms(with_region(node, content), levels).into());
    }

    let summary = if children.is_empty() {
        format!("\"{}\" offers no interactions.", v.title)
    } else {
        format!("What you can click, hover, filter or drill in \"{}\".", v.title)
    };
    f.root(summary, Icon::InteractIcon, children)
}

fn insight_tree(spec: &DashboardSpec, f: &NodeFactory<'_>) -> MenuNode {
    let v = f.visual;
    let children: Vec<MenuNode> = spec
        .insights_for(&v.id)
        .enumerate()
        .map(|(i, insight)| {
            let (label, icon) = match insight.kind {
                InsightKind::Trend => ("Trend", Icon::TrendIcon),
                InsightKind::Driver => ("Driver", Icon::DriverIcon),
                InsightKind::Descriptive => ("Description", Icon::InfoIcon),
            };
            with_region(
                f.node(&i.to_string(), None, label, insight.text.clone(), icon),
                v.content_region(),
            )
            .into()
        })
        .collect();
    let summary = if children.is_empty() {
        format!("The author has not noted any insights for \"{}\" yet.", v.title)
    } else {
        format!("Author notes on trends and drivers in \"{}\".", v.title)
    };
    f.root(summary, Icon::InsightIcon, children)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NarrationMode {
    Template,
    LlmPolish,
}

/// Numeric tokens of `text` (digit runs with inner decimal points).
fn numeric_tokens(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_digit()
                    || (bytes[i] == b'.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit()))
            {
                i += 1;
            }
            out.push(&text[start..i]);
        } else {
            i += 1;
        }
    }
    out
}

/// True when `polished` keeps every grounding term and number of `node`.
pub fn is_grounded(node: &ComponentNode, polished: &str) -> bool {
    !polished.trim().is_empty()
        && node.ground_terms.iter().all(|t| polished.contains(t.as_str()))
        && numeric_tokens(&node.narrative)
            .into_iter()
            .all(|n| polished.contains(n))
}

/// Text for a node. `LlmPolish` asks the provider to rephrase the template
/// and keeps the template when the reply fails, or drops a unit, field
/// name or number.
pub async fn narrate(node: &ComponentNode, mode: NarrationMode, provider: Option<&dyn ChatProvider>) -> String {
    let template = node.narrative.clone();
    let (NarrationMode::LlmPolish, Some(provider)) = (mode, provider) else {
        return template;
    };
    let request = ChatRequest {
        model: String::new(),
        messages: vec![
            ChatMessage::new(Role::System, POLISH_INSTRUCTIONS),
            ChatMessage::new(Role::User, template.clone()),
        ],
    };
    match provider.complete(&request).await {
        Ok(reply) if is_grounded(node, &reply) => reply.trim().to_string(),
        Ok(_) => {
            tracing::info!(node = %node.id, "polished narrative dropped grounding terms; keeping template");
            template
        }
        Err(err) => {
            tracing::warn!(node = %node.id, error = %err, "narrative polish failed; keeping template");
            template
        }
    }
}
