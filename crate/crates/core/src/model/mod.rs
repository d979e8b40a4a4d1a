//! Dashboard specification format.
//!
//! A [`DashboardSpec`] is a declarative description of one dashboard page:
//! its visuals with their layout bounds and encodings, the data model they
//! bind to, and author-provided insight annotations. Documents are JSON with
//! camelCase keys; rectangles are `{x, y, w, h}` in page pixels.
//!
//! [`parse_dashboard_spec`] validates every structural invariant. Sub-region
//! geometry (axis strips, legends, titles, data areas) is filled afterwards
//! by [`infer_sub_regions`].

mod layout;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Rect;

pub use layout::{infer_sub_regions, LayoutConstants, LAYOUT};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("reference error at {path}: {message}")]
    Reference { path: String, message: String },
    #[error("geometry error at {path}: {message}")]
    Geometry { path: String, message: String },
}

impl SpecError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    fn reference(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError::Reference {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn geometry(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError::Geometry {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn path(&self) -> &str {
        match self {
            SpecError::Schema { path, .. } | SpecError::Reference { path, .. } | SpecError::Geometry { path, .. } => {
                path
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DashboardSpec {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub page_bounds: Rect,
    #[serde(default)]
    pub visuals: Vec<VisualSpec>,
    pub data_model: DataModelSpec,
    #[serde(default)]
    pub insights: Vec<InsightAnnotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VisualKind {
    Kpi,
    BarChart,
    LineChart,
    FunnelChart,
    MapChart,
    Slicer,
}

impl VisualKind {
    pub const ALL: [VisualKind; 6] = [
        VisualKind::Kpi,
        VisualKind::BarChart,
        VisualKind::LineChart,
        VisualKind::FunnelChart,
        VisualKind::MapChart,
        VisualKind::Slicer,
    ];

    /// Human wording used in narratives and prompts.
    pub fn noun(self) -> &'static str {
        match self {
            VisualKind::Kpi => "KPI card",
            VisualKind::BarChart => "bar chart",
            VisualKind::LineChart => "line chart",
            VisualKind::FunnelChart => "funnel chart",
            VisualKind::MapChart => "map",
            VisualKind::Slicer => "filter",
        }
    }
}

impl fmt::Display for VisualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionKind {
    VisualBody,
    AxisX,
    AxisY,
    Legend,
    Title,
    DataArea,
    FilterControl,
}

impl RegionKind {
    pub const ALL: [RegionKind; 7] = [
        RegionKind::VisualBody,
        RegionKind::AxisX,
        RegionKind::AxisY,
        RegionKind::Legend,
        RegionKind::Title,
        RegionKind::DataArea,
        RegionKind::FilterControl,
    ];

    /// Sub-regions that name a specific element rather than the plotted
    /// content or the whole visual.
    pub fn is_specific(self) -> bool {
        matches!(
            self,
            RegionKind::AxisX | RegionKind::AxisY | RegionKind::Legend | RegionKind::Title | RegionKind::FilterControl
        )
    }

    pub fn describe(self) -> &'static str {
        match self {
            RegionKind::VisualBody => "whole visual",
            RegionKind::AxisX => "x-axis",
            RegionKind::AxisY => "y-axis",
            RegionKind::Legend => "legend",
            RegionKind::Title => "title",
            RegionKind::DataArea => "data area",
            RegionKind::FilterControl => "filter control",
        }
    }

    pub fn is_valid_for(self, kind: VisualKind) -> bool {
        match self {
            RegionKind::FilterControl => kind == VisualKind::Slicer,
            RegionKind::DataArea => kind != VisualKind::Slicer,
            RegionKind::AxisX | RegionKind::AxisY | RegionKind::Legend => {
                !matches!(kind, VisualKind::Kpi | VisualKind::Slicer)
            }
            RegionKind::VisualBody | RegionKind::Title => true,
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VisualSpec {
    pub id: String,
    pub kind: VisualKind,
    pub title: String,
    pub bounds: Rect,
    #[serde(default)]
    pub encodings: EncodingSet,
    #[serde(default)]
    pub interactions: InteractionCaps,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Title strip; inferred when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title_bounds: Option<Rect>,
    /// Plotted area (filter control for slicers); always derived by layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_bounds: Option<Rect>,
    /// Display-only sample values for the UI. Opaque to everything here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_data: Option<serde_json::Value>,
}

impl VisualSpec {
    /// Region covering the plotted content: `FilterControl` for slicers,
    /// `DataArea` otherwise.
    pub fn content_region(&self) -> RegionKind {
        if self.kind == VisualKind::Slicer {
            RegionKind::FilterControl
        } else {
            RegionKind::DataArea
        }
    }

    pub fn region_bounds(&self, region: RegionKind) -> Option<Rect> {
        match region {
            RegionKind::VisualBody => Some(self.bounds),
            RegionKind::Title => self.title_bounds,
            RegionKind::AxisX => self.encodings.axis_x.as_ref().and_then(|a| a.sub_bounds),
            RegionKind::AxisY => self.encodings.axis_y.as_ref().and_then(|a| a.sub_bounds),
            RegionKind::Legend => self.encodings.legend.as_ref().and_then(|l| l.sub_bounds),
            RegionKind::DataArea | RegionKind::FilterControl => {
                (region == self.content_region()).then_some(self.data_bounds).flatten()
            }
        }
    }

    /// The non-overlapping sub-regions (everything except `VisualBody`) that
    /// have geometry, in a fixed order.
    pub fn partition(&self) -> Vec<(RegionKind, Rect)> {
        [
            RegionKind::Title,
            RegionKind::AxisX,
            RegionKind::AxisY,
            RegionKind::Legend,
            self.content_region(),
        ]
        .into_iter()
        .filter_map(|r| self.region_bounds(r).map(|b| (r, b)))
        .collect()
    }

    /// Every field bound by an encoding slot, in slot order, deduplicated.
    pub fn encoded_fields(&self) -> Vec<&FieldRef> {
        let mut seen = HashSet::new();
        self.encodings
            .slots()
            .into_iter()
            .map(|(_, f)| f)
            .filter(|f| seen.insert(*f))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EncodingSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_x: Option<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_y: Option<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legend: Option<LegendSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<FieldRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<FieldRef>,
}

impl EncodingSet {
    /// (slot name, field) for each present slot.
    pub fn slots(&self) -> Vec<(&'static str, &FieldRef)> {
        let mut out = Vec::new();
        if let Some(a) = &self.axis_x {
            out.push(("axisX", &a.field));
        }
        if let Some(a) = &self.axis_y {
            out.push(("axisY", &a.field));
        }
        if let Some(l) = &self.legend {
            out.push(("legend", &l.field));
        }
        if let Some(f) = &self.category {
            out.push(("category", f));
        }
        if let Some(f) = &self.value {
            out.push(("value", f));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScaleType {
    Linear,
    Log,
    Categorical,
    Temporal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AxisSpec {
    pub field: FieldRef,
    pub scale_type: ScaleType,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub unit: String,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_bounds: Option<Rect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LegendPosition {
    Top,
    Bottom,
    Left,
    Right,
    TopRight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LegendSpec {
    pub field: FieldRef,
    pub position: LegendPosition,
    pub entries: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_bounds: Option<Rect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SelfInteraction {
    HighlightCategory,
    CompareCategories,
    Hover,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InteractionCaps {
    #[serde(default)]
    pub self_interactions: BTreeSet<SelfInteraction>,
    #[serde(default)]
    pub cross_filter_targets: Vec<String>,
    #[serde(default)]
    pub drill_down: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drill_hierarchy: Vec<FieldRef>,
}

impl InteractionCaps {
    pub fn is_empty(&self) -> bool {
        self.self_interactions.is_empty() && self.cross_filter_targets.is_empty() && !self.drill_down
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueType {
    Text,
    Number,
    Date,
    Geo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnRole {
    Key,
    Dimension,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ColumnSpec {
    pub name: String,
    pub value_type: ValueType,
    pub role: ColumnRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableSpec {
    pub name: String,
    pub columns: Vec<ColumnSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Relationship {
    pub from: FieldRef,
    pub to: FieldRef,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DataModelSpec {
    #[serde(default)]
    pub tables: Vec<TableSpec>,
    #[serde(default)]
    pub relationships: Vec<Relationship>,
}

impl DataModelSpec {
    pub fn table(&self, name: &str) -> Option<&TableSpec> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn column(&self, field: &FieldRef) -> Option<&ColumnSpec> {
        self.table(&field.table)?
            .columns
            .iter()
            .find(|c| c.name == field.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldRef {
    pub table: String,
    pub column: String,
}

impl FieldRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        Self {
            table: table.into(),
            column: column.into(),
        }
    }
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InsightKind {
    Trend,
    Driver,
    Descriptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InsightAnnotation {
    pub visual_id: String,
    pub kind: InsightKind,
    pub text: String,
}

impl DashboardSpec {
    pub fn visual(&self, id: &str) -> Option<&VisualSpec> {
        self.visuals.iter().find(|v| v.id == id)
    }

    /// Position in the stacking order; higher is drawn later (on top).
    pub fn z_index(&self, id: &str) -> Option<usize> {
        self.visuals.iter().position(|v| v.id == id)
    }

    pub fn insights_for<'a>(&'a self, visual_id: &'a str) -> impl Iterator<Item = &'a InsightAnnotation> {
        self.insights.iter().filter(move |i| i.visual_id == visual_id)
    }

    /// Every rectangle, including inferred sub-regions, multiplied by
    /// `factor`. Sub-regions are scaled as laid out, not re-inferred.
    pub fn scaled(&self, factor: f64) -> DashboardSpec {
        let scale = |r: &mut Option<Rect>| *r = r.map(|r| r.scaled(factor));
        let mut out = self.clone();
        out.page_bounds = out.page_bounds.scaled(factor);
        for v in &mut out.visuals {
            v.bounds = v.bounds.scaled(factor);
            scale(&mut v.title_bounds);
            scale(&mut v.data_bounds);
            let e = &mut v.encodings;
            for axis in [&mut e.axis_x, &mut e.axis_y].into_iter().flatten() {
                scale(&mut axis.sub_bounds);
            }
            if let Some(legend) = &mut e.legend {
                scale(&mut legend.sub_bounds);
            }
        }
        out
    }

    /// Serializes back into the document format.
    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Checks every structural invariant of the format.
    pub fn validate(&self) -> Result<(), SpecError> {
        validate(self)
    }
}

/// Parses and validates a dashboard document. Inferred sub-regions are not
/// filled; see [`infer_sub_regions`].
pub fn parse_dashboard_spec(document: &str) -> Result<DashboardSpec, SpecError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let spec: DashboardSpec = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        SpecError::schema(path, err.into_inner().to_string())
    })?;
    spec.validate()?;
    Ok(spec)
}

fn validate(spec: &DashboardSpec) -> Result<(), SpecError> {
    if spec.id.trim().is_empty() {
        return Err(SpecError::schema("id", "dashboard id must not be empty"));
    }
    if !spec.page_bounds.is_positive() {
        return Err(SpecError::geometry("pageBounds", "page bounds must have positive size"));
    }
    validate_data_model(&spec.data_model)?;

    let mut ids = HashSet::new();
    for (i, v) in spec.visuals.iter().enumerate() {
        if v.id.is_empty()
            || v.id
                .contains(|c: char| c == '.' || c == '|' || c == ']' || c.is_whitespace())
        {
            return Err(SpecError::schema(
                format!("visuals[{i}].id"),
                format!(
                    "visual id {:?} must be non-empty without '.', '|', ']' or whitespace",
                    v.id
                ),
            ));
        }
        if !ids.insert(v.id.as_str()) {
            return Err(SpecError::schema(
                format!("visuals[{i}].id"),
                format!("duplicate visual id {:?}", v.id),
            ));
        }
    }

    for (i, v) in spec.visuals.iter().enumerate() {
        validate_visual(spec, i, v, &ids)?;
    }

    for (i, insight) in spec.insights.iter().enumerate() {
        let path = format!("insights[{i}].visualId");
        let Some(v) = spec.visual(&insight.visual_id) else {
            return Err(SpecError::reference(
                path,
                format!("unknown visual {:?}", insight.visual_id),
            ));
        };
        if v.kind == VisualKind::Slicer {
            return Err(SpecError::schema(path, "slicer visuals carry no insights"));
        }
    }
    Ok(())
}

fn validate_data_model(model: &DataModelSpec) -> Result<(), SpecError> {
    let mut names = HashSet::new();
    for (i, t) in model.tables.iter().enumerate() {
        if !names.insert(t.name.as_str()) {
            return Err(SpecError::schema(
                format!("dataModel.tables[{i}].name"),
                format!("duplicate table {:?}", t.name),
            ));
        }
        let mut cols = HashSet::new();
        for (j, c) in t.columns.iter().enumerate() {
            if !cols.insert(c.name.as_str()) {
                return Err(SpecError::schema(
                    format!("dataModel.tables[{i}].columns[{j}].name"),
                    format!("duplicate column {:?}", c.name),
                ));
            }
        }
    }
    let mut related: HashMap<&str, String> = HashMap::new();
    for (i, rel) in model.relationships.iter().enumerate() {
        for (end, field) in [("from", &rel.from), ("to", &rel.to)] {
            let path = format!("dataModel.relationships[{i}].{end}");
            if model.column(field).is_none() {
                return Err(SpecError::reference(path, format!("unknown column {field}")));
            }
            related.entry(field.table.as_str()).or_insert(path);
        }
    }
    for (table, path) in related {
        let has_key = model
            .table(table)
            .is_some_and(|t| t.columns.iter().any(|c| c.role == ColumnRole::Key));
        if !has_key {
            return Err(SpecError::schema(
                path,
                format!("related table {table:?} has no Key column"),
            ));
        }
    }
    Ok(())
}

fn validate_visual(spec: &DashboardSpec, i: usize, v: &VisualSpec, ids: &HashSet<&str>) -> Result<(), SpecError> {
    let base = format!("visuals[{i}]");
    if !v.bounds.is_positive() {
        return Err(SpecError::geometry(
            format!("{base}.bounds"),
            "bounds must have positive width and height",
        ));
    }
    if !spec.page_bounds.contains_rect(&v.bounds) {
        return Err(SpecError::geometry(
            format!("{base}.bounds"),
            "bounds must lie inside pageBounds",
        ));
    }

    let enc = &v.encodings;
    let has_guides = enc.axis_x.is_some() || enc.axis_y.is_some() || enc.legend.is_some();
    match v.kind {
        VisualKind::Kpi if has_guides => {
            return Err(SpecError::schema(
                format!("{base}.encodings"),
                "KPI cards have no axes or legend",
            ));
        }
        VisualKind::Slicer if has_guides || enc.slots().len() != 1 => {
            return Err(SpecError::schema(
                format!("{base}.encodings"),
                "slicers bind exactly one field through category or value",
            ));
        }
        _ => {}
    }

    for (slot, field) in enc.slots() {
        if spec.data_model.column(field).is_none() {
            return Err(SpecError::reference(
                format!("{base}.encodings.{slot}"),
                format!("field {field} does not resolve in the data model"),
            ));
        }
    }
    if let Some(legend) = &enc.legend {
        if legend.entries.is_empty() {
            return Err(SpecError::schema(
                format!("{base}.encodings.legend.entries"),
                "legend entries must not be empty",
            ));
        }
    }
    let sub_rects = [
        (
            "encodings.axisX.subBounds",
            enc.axis_x.as_ref().and_then(|a| a.sub_bounds),
        ),
        (
            "encodings.axisY.subBounds",
            enc.axis_y.as_ref().and_then(|a| a.sub_bounds),
        ),
        (
            "encodings.legend.subBounds",
            enc.legend.as_ref().and_then(|l| l.sub_bounds),
        ),
        ("titleBounds", v.title_bounds),
        ("dataBounds", v.data_bounds),
    ];
    for (path, rect) in sub_rects {
        if let Some(r) = rect {
            if !r.is_positive() || !v.bounds.contains_rect(&r) {
                return Err(SpecError::geometry(
                    format!("{base}.{path}"),
                    "sub-region must be non-empty and inside the visual's bounds",
                ));
            }
        }
    }

    let caps = &v.interactions;
    for (j, target) in caps.cross_filter_targets.iter().enumerate() {
        let path = format!("{base}.interactions.crossFilterTargets[{j}]");
        if target == &v.id {
            return Err(SpecError::reference(path, "a visual cannot cross-filter itself"));
        }
        if !ids.contains(target.as_str()) {
            return Err(SpecError::reference(path, format!("unknown visual {target:?}")));
        }
    }
    if caps.drill_down && caps.drill_hierarchy.len() < 2 {
        return Err(SpecError::schema(
            format!("{base}.interactions.drillHierarchy"),
            "drill-down needs a hierarchy of at least two fields",
        ));
    }
    if !caps.drill_down && !caps.drill_hierarchy.is_empty() {
        return Err(SpecError::schema(
            format!("{base}.interactions.drillHierarchy"),
            "drillHierarchy given without drillDown",
        ));
    }
    for (j, field) in caps.drill_hierarchy.iter().enumerate() {
        if spec.data_model.column(field).is_none() {
            return Err(SpecError::reference(
                format!("{base}.interactions.drillHierarchy[{j}]"),
                format!("field {field} does not resolve in the data model"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(visuals: serde_json::Value) -> String {
        serde_json::json!({
            "id": "d",
            "title": "T",
            "pageBounds": {"x": 0, "y": 0, "w": 800, "h": 600},
            "visuals": visuals,
            "dataModel": {
                "tables": [{"name": "Sales", "columns": [
                    {"name": "Id", "valueType": "Text", "role": "Key"},
                    {"name": "Amount", "valueType": "Number", "role": "Measure"},
                    {"name": "Country", "valueType": "Geo", "role": "Dimension"}
                ]}],
                "relationships": []
            }
        })
        .to_string()
    }

    fn bar(id: &str, targets: &[&str]) -> serde_json::Value {
        serde_json::json!({
            "id": id, "kind": "BarChart", "title": "Bar",
            "bounds": {"x": 0, "y": 0, "w": 400, "h": 300},
            "encodings": {
                "axisX": {"field": {"table": "Sales", "column": "Amount"}, "scaleType": "Linear", "unit": "USD", "label": "Amount"},
                "axisY": {"field": {"table": "Sales", "column": "Country"}, "scaleType": "Categorical", "label": "Country"}
            },
            "interactions": {"crossFilterTargets": targets}
        })
    }

    #[test]
    fn zero_visuals_is_valid() {
        let spec = parse_dashboard_spec(&minimal(serde_json::json!([]))).unwrap();
        assert!(spec.visuals.is_empty());
    }

    #[test]
    fn self_cross_filter_is_reference_error() {
        let err = parse_dashboard_spec(&minimal(serde_json::json!([bar("bar-01", &["bar-01"])]))).unwrap_err();
        assert!(matches!(err, SpecError::Reference { .. }), "{err}");
        assert_eq!(err.path(), "visuals[0].interactions.crossFilterTargets[0]");
    }

    #[test]
    fn dangling_field_is_reference_error() {
        let mut v = bar("bar-01", &[]);
        v["encodings"]["axisX"]["field"]["column"] = "Nope".into();
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        assert!(matches!(err, SpecError::Reference { .. }));
        assert_eq!(err.path(), "visuals[0].encodings.axisX");
    }

    #[test]
    fn missing_field_reports_path() {
        let mut v = bar("bar-01", &[]);
        v.as_object_mut().unwrap().remove("bounds");
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        match err {
            SpecError::Schema { path, message } => {
                assert_eq!(path, "visuals[0]");
                assert!(message.contains("bounds"), "{message}");
            }
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn mistyped_field_reports_path() {
        let mut v = bar("bar-01", &[]);
        v["kind"] = "PieChart".into();
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        assert!(matches!(err, SpecError::Schema { .. }));
        assert_eq!(err.path(), "visuals[0].kind");
    }

    #[test]
    fn out_of_page_bounds_is_geometry_error() {
        let mut v = bar("bar-01", &[]);
        v["bounds"]["x"] = 500.into();
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        assert!(matches!(err, SpecError::Geometry { .. }));
    }

    #[test]
    fn non_positive_bounds_is_geometry_error() {
        let mut v = bar("bar-01", &[]);
        v["bounds"]["w"] = 0.into();
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        assert!(matches!(err, SpecError::Geometry { .. }));
    }

    #[test]
    fn duplicate_visual_ids_rejected() {
        let err = parse_dashboard_spec(&minimal(serde_json::json!([bar("a", &[]), bar("a", &[])]))).unwrap_err();
        assert!(matches!(err, SpecError::Schema { .. }));
    }

    #[test]
    fn kpi_with_axis_rejected() {
        let mut v = bar("kpi-01", &[]);
        v["kind"] = "Kpi".into();
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        assert!(matches!(err, SpecError::Schema { .. }));
    }

    #[test]
    fn slicer_needs_exactly_one_field() {
        let v = serde_json::json!({
            "id": "s", "kind": "Slicer", "title": "S",
            "bounds": {"x": 0, "y": 0, "w": 200, "h": 80},
            "encodings": {"category": {"table": "Sales", "column": "Country"}, "value": {"table": "Sales", "column": "Amount"}}
        });
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        assert!(matches!(err, SpecError::Schema { .. }));
    }

    #[test]
    fn drill_requires_two_levels() {
        let mut v = bar("bar-01", &[]);
        v["interactions"]["drillDown"] = true.into();
        v["interactions"]["drillHierarchy"] = serde_json::json!([{"table": "Sales", "column": "Country"}]);
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        assert!(matches!(err, SpecError::Schema { .. }));
    }

    #[test]
    fn legend_entries_required() {
        let mut v = bar("bar-01", &[]);
        v["encodings"]["legend"] =
            serde_json::json!({"field": {"table": "Sales", "column": "Country"}, "position": "Right", "entries": []});
        let err = parse_dashboard_spec(&minimal(serde_json::json!([v]))).unwrap_err();
        assert!(matches!(err, SpecError::Schema { .. }));
    }

    #[test]
    fn relationship_endpoints_must_exist() {
        let mut doc: serde_json::Value = serde_json::from_str(&minimal(serde_json::json!([]))).unwrap();
        doc["dataModel"]["relationships"] =
            serde_json::json!([{"from": {"table": "Sales", "column": "Id"}, "to": {"table": "Other", "column": "Id"}}]);
        let err = parse_dashboard_spec(&doc.to_string()).unwrap_err();
        assert!(matches!(err, SpecError::Reference { .. }));
    }

    #[test]
    fn region_validity_per_kind() {
        assert!(RegionKind::FilterControl.is_valid_for(VisualKind::Slicer));
        assert!(!RegionKind::FilterControl.is_valid_for(VisualKind::BarChart));
        assert!(!RegionKind::AxisX.is_valid_for(VisualKind::Kpi));
        assert!(RegionKind::DataArea.is_valid_for(VisualKind::Kpi));
    }
}
