//! Deterministic rule-based provider.
//!
//! The mock reads nothing but the request messages: it parses the dashboard
//! description out of the system message and routes the last user message
//! by keyword. Replies are therefore a pure function of the request, which
//! is what replay and golden transcripts rely on.

use async_trait::async_trait;

use super::{ChatProvider, ChatRequest, GatewayError};
use crate::highlight::link;
use crate::model::{RegionKind, SelfInteraction, VisualKind};
use crate::orchestrator::{DATA_MODEL_HEADER, INSIGHTS_HEADER, NOT_IN_DATA_SENTINEL, SELECTION_PREFIX, VISUALS_HEADER};

/// System message used when asking a provider to rephrase menu text.
pub const POLISH_INSTRUCTIONS: &str = "Rephrase the help text in the user message so it reads naturally. \
Keep every unit, field name and number exactly as written. Reply with the rephrased text only.";

#[derive(Debug, Default, Clone, Copy)]
pub struct MockProvider;

impl MockProvider {
    pub fn new() -> Self {
        Self
    }
}

#[async_trait]
impl ChatProvider for MockProvider {
    async fn complete(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        let system = request.system_text();
        if system.starts_with(POLISH_INSTRUCTIONS) {
            return Ok(request.last_user_text().to_string());
        }
        let digest = Digest::parse(system);
        Ok(respond(&digest, request.last_user_text()))
    }
}

#[derive(Debug, Clone, Default)]
struct Axis {
    field: String,
    column: String,
    scale: String,
    unit: String,
    label: String,
}

#[derive(Debug, Clone, Default)]
struct Legend {
    column: String,
    position: String,
    entries: Vec<String>,
}

#[derive(Debug, Clone)]
struct Visual {
    id: String,
    kind: VisualKind,
    title: String,
    note: String,
    axis_x: Option<Axis>,
    axis_y: Option<Axis>,
    legend: Option<Legend>,
    category: Option<String>,
    value: Option<String>,
    interactions: Vec<SelfInteraction>,
    filters: Vec<String>,
    drill: Vec<String>,
    anchors: Vec<String>,
}

impl Visual {
    fn has_anchor(&self, part: &str) -> bool {
        self.anchors
            .iter()
            .any(|a| a.strip_prefix(self.id.as_str()).and_then(|r| r.strip_prefix('.')) == Some(part))
    }

    /// Markup for `part`, or for the whole visual when the part is not listed.
    fn link(&self, part: &str, label: &str) -> String {
        let part = if self.has_anchor(part) { part } else { "body" };
        link(&format!("{}.{part}", self.id), label)
    }

    fn title_link(&self) -> String {
        self.link("body", &self.title)
    }

    fn axis(&self, which: char) -> Option<&Axis> {
        if which == 'x' {
            self.axis_x.as_ref()
        } else {
            self.axis_y.as_ref()
        }
    }

    /// Column names this visual groups or colors by.
    fn grouping_columns(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in [&self.axis_x, &self.axis_y].into_iter().flatten() {
            if a.scale == "Categorical" || a.scale == "Temporal" {
                out.push(&a.column);
            }
        }
        if let Some(l) = &self.legend {
            out.push(&l.column);
        }
        if let Some(c) = &self.category {
            out.push(column_of(c));
        }
        for d in &self.drill {
            out.push(column_of(d));
        }
        out.dedup();
        out
    }

    /// Column names of the measures this visual plots.
    fn measure_columns(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in [&self.axis_x, &self.axis_y].into_iter().flatten() {
            if a.scale == "Linear" || a.scale == "Log" {
                out.push(&a.column);
            }
        }
        if let Some(v) = &self.value {
            out.push(column_of(v));
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Selection {
    visual_id: String,
    region: RegionKind,
}

#[derive(Debug, Clone, Default)]
struct Digest {
    visuals: Vec<Visual>,
    measures: Vec<String>,
    insights: Vec<(String, String)>,
    selection: Option<Selection>,
}

#[derive(PartialEq)]
enum Section {
    Preamble,
    Visuals,
    DataModel,
    Insights,
}

fn column_of(field: &str) -> &str {
    field.rsplit_once('.').map(|(_, c)| c).unwrap_or(field)
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Option<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
}

fn unquote(s: &str) -> &str {
    s.trim().trim_start_matches('"').trim_end_matches('"')
}

fn parse_axis(rest: &str) -> Axis {
    let mut parts = rest.split(" | ");
    let field = parts.next().unwrap_or("").trim().to_string();
    let mut axis = Axis {
        column: column_of(&field).to_string(),
        field,
        ..Default::default()
    };
    for p in parts {
        if let Some(v) = p.strip_prefix("scale ") {
            axis.scale = v.trim().to_string();
        } else if let Some(v) = p.strip_prefix("unit ") {
            axis.unit = v.trim().to_string();
        } else if let Some(v) = p.strip_prefix("label ") {
            axis.label = unquote(v).to_string();
        }
    }
    axis
}

fn parse_legend(rest: &str) -> Legend {
    let mut parts = rest.split(" | ");
    let field = parts.next().unwrap_or("").trim();
    let mut legend = Legend {
        column: column_of(field).to_string(),
        ..Default::default()
    };
    for p in parts {
        if let Some(v) = p.strip_prefix("position ") {
            legend.position = v.trim().to_string();
        } else if let Some(v) = p.strip_prefix("entries ") {
            legend.entries = unquote(v)
                .split("\", \"")
                .map(str::to_string)
                .filter(|e| !e.is_empty())
                .collect();
        }
    }
    legend
}

fn parse_visual_header(rest: &str) -> Option<Visual> {
    let (id, rest) = rest.split_once("] ")?;
    let (kind, rest) = rest.split_once(' ')?;
    let end = rest.rfind("\" at x=")?;
    let title = rest.get(1..end)?.to_string();
    Some(Visual {
        id: id.to_string(),
        kind: parse_enum(kind)?,
        title,
        note: String::new(),
        axis_x: None,
        axis_y: None,
        legend: None,
        category: None,
        value: None,
        interactions: Vec::new(),
        filters: Vec::new(),
        drill: Vec::new(),
        anchors: Vec::new(),
    })
}

impl Digest {
    fn parse(system: &str) -> Digest {
        let mut d = Digest::default();
        let mut section = Section::Preamble;
        for line in system.lines() {
            if line.starts_with(VISUALS_HEADER) {
                section = Section::Visuals;
                continue;
            }
            if line == DATA_MODEL_HEADER {
                section = Section::DataModel;
                continue;
            }
            if line == INSIGHTS_HEADER {
                section = Section::Insights;
                continue;
            }
            if let Some(rest) = line.strip_prefix(SELECTION_PREFIX) {
                let mut words = rest.split_whitespace();
                if let (Some(id), Some(region)) = (words.next(), words.next().and_then(parse_enum)) {
                    d.selection = Some(Selection {
                        visual_id: id.to_string(),
                        region,
                    });
                }
                section = Section::Preamble;
                continue;
            }
            match section {
                Section::Preamble => {}
                Section::Visuals => {
                    if let Some(rest) = line.strip_prefix("- [") {
                        if let Some(v) = parse_visual_header(rest) {
                            d.visuals.push(v);
                        }
                    } else if let (Some(v), Some((key, rest))) = (
                        d.visuals.last_mut(),
                        line.strip_prefix("  ").and_then(|l| l.split_once(": ")),
                    ) {
                        match key {
                            "note" => v.note = rest.to_string(),
                            "axis-x" => v.axis_x = Some(parse_axis(rest)),
                            "axis-y" => v.axis_y = Some(parse_axis(rest)),
                            "legend" => v.legend = Some(parse_legend(rest)),
                            "category" => v.category = Some(rest.trim().to_string()),
                            "value" => v.value = Some(rest.trim().to_string()),
                            "self-interactions" => v.interactions = rest.split(", ").filter_map(parse_enum).collect(),
                            "filters" => v.filters = rest.split(", ").map(str::to_string).collect(),
                            "drill" => v.drill = rest.split(" > ").map(str::to_string).collect(),
                            "anchors" => v.anchors = rest.split_whitespace().map(str::to_string).collect(),
                            _ => {}
                        }
                    }
                }
                Section::DataModel => {
                    if let Some((_, cols)) = line.strip_prefix("- table ").and_then(|l| l.split_once(": ")) {
                        for col in cols.split("), ") {
                            if let Some((name, meta)) = col.split_once(" (") {
                                if meta.trim_end_matches(')').ends_with("Measure") {
                                    d.measures.push(name.trim().to_string());
                                }
                            }
                        }
                    }
                }
                Section::Insights => {
                    if let Some((id, rest)) = line.strip_prefix("- [").and_then(|l| l.split_once("] ")) {
                        let text = rest.split_once(": ").map(|(_, t)| t).unwrap_or(rest);
                        d.insights.push((id.to_string(), text.to_string()));
                    }
                }
            }
        }
        d
    }

    fn visual(&self, id: &str) -> Option<&Visual> {
        self.visuals.iter().find(|v| v.id == id)
    }

    fn selected(&self) -> Option<(&Visual, RegionKind)> {
        let s = self.selection.as_ref()?;
        Some((self.visual(&s.visual_id)?, s.region))
    }
}

/// Lowercase words of a camel-case column name: `RevenueGoal` → `revenue goal`.
fn phrase(column: &str) -> String {
    let mut out = String::new();
    let mut prev_lower = false;
    for c in column.chars() {
        if c.is_uppercase() && prev_lower {
            out.push(' ');
        }
        prev_lower = c.is_lowercase() || c.is_ascii_digit();
        out.extend(c.to_lowercase());
    }
    out
}

fn plural(word: &str) -> String {
    let bytes = word.as_bytes();
    if word.ends_with('y') && bytes.len() > 1 && !b"aeiou".contains(&bytes[bytes.len() - 2]) {
        format!("{}ies", &word[..word.len() - 1])
    } else if word.ends_with('s') || word.ends_with('x') || word.ends_with("ch") || word.ends_with("sh") {
        format!("{word}es")
    } else {
        format!("{word}s")
    }
}

/// Spellings of a column a user might type. `loose` also accepts the last
/// word of a compound name (`SalesStage` → `stage`).
fn column_terms(column: &str, loose: bool) -> Vec<String> {
    let p = phrase(column);
    let compact = p.replace(' ', "");
    let mut out = vec![plural(&p), p.clone(), plural(&compact), compact];
    // "opportunity count" is also asked as "count of opportunities"
    if let Some((head, last)) = p.rsplit_once(' ') {
        if AGGREGATE_WORDS.contains(&last) {
            out.push(format!("{last} of {}", plural(head)));
            out.push(format!("number of {}", plural(head)));
        }
    }
    if loose {
        if let Some((_, last)) = p.rsplit_once(' ') {
            if last.len() >= 4 {
                out.push(plural(last));
                out.push(last.to_string());
            }
        }
    }
    out.dedup();
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Whether `term` occurs in `text` starting at a word boundary. With
/// `whole`, it must also end at one.
fn has_term(text: &str, term: &str, whole: bool) -> bool {
    if term.is_empty() {
        return false;
    }
    text.match_indices(term).any(|(i, _)| {
        let before_ok = text[..i].chars().next_back().is_none_or(|c| !is_word_char(c));
        let after = &text[i + term.len()..];
        let after_ok = !whole || after.chars().next().is_none_or(|c| !is_word_char(c));
        before_ok && after_ok
    })
}

fn mentions_column(u: &str, column: &str, loose: bool) -> bool {
    column_terms(column, loose).iter().any(|t| has_term(u, t, true))
}

fn any_cue(u: &str, cues: &[&str]) -> bool {
    cues.iter().any(|c| has_term(u, c, false))
}

const AGGREGATE_WORDS: &[&str] = &["count", "total", "amount", "sum", "number"];
const VALUE_CUES: &[&str] = &[
    "exact",
    "value",
    "how much",
    "how many",
    "highest",
    "lowest",
    "largest",
    "smallest",
    "biggest",
    "what is the",
    "what was the",
    "what's the",
    "which",
    "find",
    "total",
    "amount",
];
const STRUCTURE_CUES: &[&str] = &[
    "axis",
    "axes",
    "scale",
    "scaling",
    "legend",
    "unit",
    "drill",
    "mean",
    "represent",
    "interact",
    "color",
    "colour",
    "insight",
    "driver",
    "trend",
    "describe",
    "explain",
    "show",
    "read",
    "filter",
    "click",
    "hover",
    "use ",
    "work",
    "navigate",
    "title",
];
const DEICTIC: &[&str] = &["this", "here", "that", "selected", "selection", "it"];
const PERIOD_WORDS: &[&str] = &["date", "month", "year", "quarter", "week", "period", "when"];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Topic {
    Axis(Option<char>),
    Legend,
    Drill,
    Filter,
    Insight,
    Describe,
}

fn topic_of(u: &str) -> Option<Topic> {
    if u.contains("x-axis") || u.contains("x axis") || has_term(u, "horizontal", false) {
        return Some(Topic::Axis(Some('x')));
    }
    if u.contains("y-axis") || u.contains("y axis") || has_term(u, "vertical", false) {
        return Some(Topic::Axis(Some('y')));
    }
    if any_cue(u, &["axis", "axes", "scale", "scaling", "unit"]) {
        return Some(Topic::Axis(None));
    }
    if any_cue(u, &["legend", "color", "colour"]) {
        return Some(Topic::Legend);
    }
    if any_cue(u, &["drill", "hierarchy", "zoom into", "level"]) {
        return Some(Topic::Drill);
    }
    if any_cue(u, &["filter", "interact", "click", "select", "cross", "slice"]) {
        return Some(Topic::Filter);
    }
    if any_cue(
        u,
        &["insight", "driver", "trend", "why", "pattern", "takeaway", "drive"],
    ) {
        return Some(Topic::Insight);
    }
    if any_cue(
        u,
        &[
            "what does",
            "what is",
            "what's",
            "explain",
            "describe",
            "show",
            "mean",
            "represent",
            "tell me about",
        ],
    ) {
        return Some(Topic::Describe);
    }
    None
}

fn supports(v: &Visual, topic: Topic) -> bool {
    match topic {
        Topic::Axis(Some(w)) => v.axis(w).is_some(),
        Topic::Axis(None) => v.axis_x.is_some() || v.axis_y.is_some(),
        Topic::Legend => v.legend.is_some(),
        Topic::Drill => !v.drill.is_empty(),
        Topic::Filter => !v.filters.is_empty() || !v.interactions.is_empty(),
        Topic::Insight | Topic::Describe => true,
    }
}

fn kind_words(kind: VisualKind) -> &'static [&'static str] {
    match kind {
        VisualKind::Kpi => &["kpi", "card"],
        VisualKind::BarChart => &["bar chart", "bar", "bars"],
        VisualKind::LineChart => &["line chart", "line"],
        VisualKind::FunnelChart => &["funnel"],
        VisualKind::MapChart => &["map"],
        VisualKind::Slicer => &["slicer", "date filter", "date range"],
    }
}

enum Target<'a> {
    Named(&'a Visual),
    Context(&'a Visual, RegionKind),
    Ambiguous(Vec<&'a Visual>),
    None,
}

fn find_target<'a>(d: &'a Digest, u: &str, topic: Option<Topic>) -> Target<'a> {
    let mut titled: Vec<&Visual> = d
        .visuals
        .iter()
        .filter(|v| !v.title.is_empty() && has_term(u, &v.title.to_lowercase(), true))
        .collect();
    titled.sort_by_key(|v| std::cmp::Reverse(v.title.len()));
    if let Some(v) = titled.first() {
        return Target::Named(v);
    }

    let by_kind: Vec<&Visual> = d
        .visuals
        .iter()
        .filter(|v| kind_words(v.kind).iter().any(|w| has_term(u, w, true)))
        .collect();
    if by_kind.len() == 1 {
        return Target::Named(by_kind[0]);
    }

    let context = d.selected();
    if let Some((v, region)) = context {
        if DEICTIC.iter().any(|w| has_term(u, w, true)) || by_kind.iter().any(|k| k.id == v.id) {
            return Target::Context(v, region);
        }
    }
    if by_kind.len() > 1 {
        return narrow(by_kind, topic);
    }

    let scored: Vec<(usize, &Visual)> = d
        .visuals
        .iter()
        .map(|v| {
            (
                v.grouping_columns()
                    .iter()
                    .filter(|c| mentions_column(u, c, true))
                    .count(),
                v,
            )
        })
        .filter(|(n, _)| *n > 0)
        .collect();
    let best = scored.iter().map(|(n, _)| *n).max().unwrap_or(0);
    let by_column: Vec<&Visual> = scored.into_iter().filter(|(n, _)| *n == best).map(|(_, v)| v).collect();
    if !by_column.is_empty() {
        return narrow(by_column, topic);
    }

    if let Some((v, region)) = context {
        return Target::Context(v, region);
    }
    if let Some(t) = topic.filter(|t| !matches!(t, Topic::Insight | Topic::Describe)) {
        let able: Vec<&Visual> = d.visuals.iter().filter(|v| supports(v, t)).collect();
        if able.len() == 1 {
            return Target::Named(able[0]);
        }
        if !able.is_empty() {
            return Target::Ambiguous(able);
        }
    }
    Target::None
}

fn narrow<'a>(candidates: Vec<&'a Visual>, topic: Option<Topic>) -> Target<'a> {
    if candidates.len() == 1 {
        return Target::Named(candidates[0]);
    }
    let able: Vec<&Visual> = match topic {
        Some(t) => candidates.iter().copied().filter(|v| supports(v, t)).collect(),
        None => Vec::new(),
    };
    match able.len() {
        1 => Target::Named(able[0]),
        0 => Target::Ambiguous(candidates),
        _ => Target::Ambiguous(able),
    }
}

fn respond(d: &Digest, user: &str) -> String {
    let u = user.to_lowercase();
    if d.visuals.is_empty() {
        return "Which dashboard would you like help with?".to_string();
    }
    if let Some(reply) = value_request(d, &u) {
        return reply;
    }

    let topic = topic_of(&u);
    match find_target(d, &u, topic) {
        Target::Named(v) => answer(d, v, topic.unwrap_or(Topic::Describe), &u),
        Target::Context(v, region) => {
            let topic = match (topic, region) {
                (None | Some(Topic::Describe), RegionKind::AxisX) => Topic::Axis(Some('x')),
                (None | Some(Topic::Describe), RegionKind::AxisY) => Topic::Axis(Some('y')),
                (None | Some(Topic::Describe), RegionKind::Legend) => Topic::Legend,
                (None | Some(Topic::Describe), RegionKind::FilterControl) => Topic::Filter,
                (Some(t), _) => t,
                (None, _) => Topic::Describe,
            };
            let descriptive_default = topic_of(&u).is_none_or(|t| t == Topic::Describe);
            answer_with(d, v, topic, &u, descriptive_default || is_descriptive(&u))
        }
        Target::Ambiguous(options) => clarify(&options),
        Target::None => {
            if any_cue(&u, &["dashboard", "overview", "start", "begin", "tour", "help"]) {
                overview(d)
            } else {
                clarify(
                    &d.visuals
                        .iter()
                        .filter(|v| v.kind != VisualKind::Kpi)
                        .collect::<Vec<_>>(),
                )
            }
        }
    }
}

fn is_descriptive(u: &str) -> bool {
    let u = u.trim_start();
    (u.starts_with("what is") || u.starts_with("what's") || u.starts_with("what does")) && !has_term(u, "how", true)
}

fn answer(d: &Digest, v: &Visual, topic: Topic, u: &str) -> String {
    answer_with(d, v, topic, u, is_descriptive(u))
}

fn answer_with(d: &Digest, v: &Visual, topic: Topic, u: &str, descriptive: bool) -> String {
    match topic {
        Topic::Axis(which) => {
            let which = which.or_else(|| {
                // prefer the axis carrying a unit or numeric scale for scale questions
                let numeric = |w: char| v.axis(w).is_some_and(|a| a.scale == "Linear" || a.scale == "Log");
                if any_cue(u, &["scale", "scaling", "unit"]) && !numeric('x') && numeric('y') {
                    Some('y')
                } else if v.axis_x.is_some() {
                    Some('x')
                } else if v.axis_y.is_some() {
                    Some('y')
                } else {
                    None
                }
            });
            match which.and_then(|w| v.axis(w).map(|a| (w, a))) {
                Some((w, a)) if descriptive => axis_sentence(v, w, a),
                Some((w, a)) => axis_steps(v, w, a),
                None => format!("{} has no axes. {}", v.title_link(), describe_visual(d, v)),
            }
        }
        Topic::Legend => match &v.legend {
            Some(l) if descriptive => legend_sentence(v, l),
            Some(l) => legend_steps(v, l),
            None => format!("{} has no legend. {}", v.title_link(), describe_visual(d, v)),
        },
        Topic::Drill => drill_steps(d, v),
        Topic::Filter => filter_steps(d, v),
        Topic::Insight => insight_steps(d, v),
        Topic::Describe => describe_visual(d, v),
    }
}

fn axis_noun(which: char) -> String {
    format!("{which}-axis")
}

fn axis_meaning(a: &Axis) -> String {
    match a.scale.as_str() {
        "Linear" | "Log" if !a.unit.is_empty() => format!("{} ({}) in {}", a.column, a.field, a.unit),
        "Categorical" => format!("one {} per tick ({})", a.column, a.field),
        "Temporal" => format!("time as {} ({}), earliest to latest", a.column, a.field),
        _ => format!("{} ({})", a.column, a.field),
    }
}

fn axis_sentence(v: &Visual, which: char, a: &Axis) -> String {
    let scale = match a.scale.as_str() {
        "Linear" => " on a continuous scale",
        "Log" => " on a logarithmic scale",
        _ => "",
    };
    format!(
        "The {} of \"{}\" shows {}{scale}.",
        v.link(&format!("axis-{which}"), &axis_noun(which)),
        v.title,
        axis_meaning(a)
    )
}

fn axis_steps(v: &Visual, which: char, a: &Axis) -> String {
    let edge = if which == 'x' {
        "along the bottom"
    } else {
        "along the left edge"
    };
    let mut steps = vec![format!(
        "Find the {} {edge} of \"{}\".",
        v.link(&format!("axis-{which}"), &axis_noun(which)),
        v.title
    )];
    let label = if a.label.is_empty() {
        String::new()
    } else {
        format!("Its label \"{}\" tells you it ", a.label)
    };
    let shows = if label.is_empty() {
        "It shows ".to_string()
    } else {
        format!("{label}shows ")
    };
    steps.push(format!("{shows}{}.", axis_meaning(a)));
    steps.push(match a.scale.as_str() {
        "Linear" => {
            let unit = if a.unit.is_empty() { a.column.clone() } else { a.unit.clone() };
            format!(
                "The scale is linear: equal distances along the axis are equal differences in {unit}, so read the tick marks and compare mark lengths against them."
            )
        }
        "Log" => "The scale is logarithmic: each equal step multiplies the value, so compare ratios rather than differences.".to_string(),
        "Temporal" => format!("Time runs along the axis from earliest to latest {}.", a.column),
        _ => format!("Each tick is one {}; the order of the ticks is not a numeric scale.", a.column),
    });
    if v.interactions.contains(&SelfInteraction::Hover) {
        steps.push(format!(
            "Hover over a mark in {} to see its exact value in the tooltip.",
            v.link("data", "the plot")
        ));
    }
    format!("Here is how to read it:\n{}", numbered(&steps))
}

fn position_words(position: &str) -> &'static str {
    match position {
        "Top" => "at the top",
        "Bottom" => "at the bottom",
        "Left" => "on the left",
        "TopRight" => "in the top right corner",
        _ => "on the right",
    }
}

fn quoted_list(items: &[String]) -> String {
    items.iter().map(|e| format!("\"{e}\"")).collect::<Vec<_>>().join(", ")
}

fn legend_sentence(v: &Visual, l: &Legend) -> String {
    format!(
        "The {} of \"{}\" shows which color belongs to each {}: {}.",
        v.link("legend", "legend"),
        v.title,
        l.column,
        quoted_list(&l.entries)
    )
}

fn legend_steps(v: &Visual, l: &Legend) -> String {
    let mut steps = vec![
        format!(
            "Look at the {} {} of \"{}\".",
            v.link("legend", "legend"),
            position_words(&l.position),
            v.title
        ),
        format!("Each color is one {}: {}.", l.column, quoted_list(&l.entries)),
    ];
    if v.interactions.contains(&SelfInteraction::HighlightCategory) {
        steps.push(format!(
            "Click an entry in the legend to highlight that {} in {}; the others fade.",
            l.column,
            v.link("data", "the plot")
        ));
    }
    format!("Here is how to use the legend:\n{}", numbered(&steps))
}

fn drill_steps(d: &Digest, v: &Visual) -> String {
    if v.drill.is_empty() {
        let able: Vec<String> = d
            .visuals
            .iter()
            .filter(|o| !o.drill.is_empty())
            .map(|o| o.title_link())
            .collect();
        return if able.is_empty() {
            format!(
                "\"{}\" has no drill-down, and no other visual on this dashboard offers one.",
                v.title
            )
        } else {
            format!(
                "\"{}\" has no drill-down. These visuals do: {}.",
                v.title,
                able.join(", ")
            )
        };
    }
    let levels: Vec<&str> = v.drill.iter().map(|f| column_of(f)).collect();
    let mut steps = vec![format!(
        "In {}, right-click a {} and choose Drill down.",
        v.link("data", &v.title),
        levels[0]
    )];
    for w in levels.windows(2) {
        steps.push(format!("The view now splits each {} into its {} values.", w[0], w[1]));
    }
    steps.push(format!(
        "Right-click again and choose Drill up to return to {}.",
        levels[0]
    ));
    format!("Drill-down goes {}:\n{}", levels.join(" → "), numbered(&steps))
}

fn filter_steps(d: &Digest, v: &Visual) -> String {
    let targets: Vec<String> = v
        .filters
        .iter()
        .filter_map(|id| d.visual(id))
        .map(|t| t.title_link())
        .collect();
    let mut steps = Vec::new();
    if v.kind == VisualKind::Slicer {
        let column = v.category.as_deref().map(column_of).unwrap_or("value");
        steps.push(format!(
            "Use the {} in \"{}\" to choose a range of {column}.",
            v.link("data", "control"),
            v.title
        ));
        if !targets.is_empty() {
            steps.push(format!("The choice filters {}.", targets.join(", ")));
        }
        steps.push("Clear the selection to see everything again.".to_string());
        return format!("Here is how to filter:\n{}", numbered(&steps));
    }
    for si in &v.interactions {
        steps.push(match si {
            SelfInteraction::HighlightCategory => {
                format!(
                    "Click a mark in {} to highlight it; the rest fade.",
                    v.link("data", &v.title)
                )
            }
            SelfInteraction::CompareCategories => "Ctrl+click several marks to compare them side by side.".to_string(),
            SelfInteraction::Hover => "Hover over a mark to see its details in a tooltip.".to_string(),
        });
    }
    if !targets.is_empty() {
        steps.push(format!("Selecting a mark also filters {}.", targets.join(", ")));
    }
    if steps.is_empty() {
        let sources: Vec<String> = d
            .visuals
            .iter()
            .filter(|o| o.filters.contains(&v.id))
            .map(|o| o.link(if o.kind == VisualKind::Slicer { "data" } else { "body" }, &o.title))
            .collect();
        if sources.is_empty() {
            return format!(
                "\"{}\" cannot be interacted with and no other visual filters it.",
                v.title
            );
        }
        steps.push(format!("\"{}\" cannot be clicked or filtered directly.", v.title));
        steps.push(format!(
            "Change what it shows by selecting in {}.",
            sources.join(" or ")
        ));
        steps.push(format!("Then read the updated {}.", v.link("data", "value")));
    }
    format!("Here is how to interact with \"{}\":\n{}", v.title, numbered(&steps))
}

fn insight_steps(d: &Digest, v: &Visual) -> String {
    let notes: Vec<&str> = d
        .insights
        .iter()
        .filter(|(id, _)| *id == v.id)
        .map(|(_, t)| t.as_str())
        .collect();
    let mut steps = vec![format!(
        "Look at {} in \"{}\".",
        v.link("data", "the plotted marks"),
        v.title
    )];
    if notes.is_empty() {
        steps.push("The author has not noted any trends or drivers here; compare the marks against each other and the axis scale.".to_string());
    } else {
        for n in notes {
            steps.push(format!("Author note: {n}"));
        }
    }
    format!("What to look for:\n{}", numbered(&steps))
}

fn describe_visual(d: &Digest, v: &Visual) -> String {
    let mut out = format!("{} is a {}.", v.title_link(), v.kind.noun());
    if !v.note.is_empty() {
        out.push(' ');
        out.push_str(&v.note);
    }
    let mut parts = Vec::new();
    for w in ['x', 'y'] {
        if let Some(a) = v.axis(w) {
            parts.push(format!(
                "The {} shows {}.",
                v.link(&format!("axis-{w}"), &axis_noun(w)),
                axis_meaning(a)
            ));
        }
    }
    if let Some(l) = &v.legend {
        parts.push(format!(
            "The {} colors marks by {}.",
            v.link("legend", "legend"),
            l.column
        ));
    }
    if v.kind == VisualKind::Kpi {
        if let Some(val) = &v.value {
            parts.push(format!("The {} is a single number: {}.", v.link("data", "value"), val));
        }
    } else if let (Some(c), None, None) = (&v.category, &v.axis_x, &v.axis_y) {
        parts.push(format!(
            "Each mark in {} is one {}.",
            v.link("data", "the plot"),
            column_of(c)
        ));
    }
    if !v.filters.is_empty() {
        let names: Vec<&str> = v
            .filters
            .iter()
            .filter_map(|id| d.visual(id))
            .map(|t| t.title.as_str())
            .collect();
        parts.push(format!(
            "Selecting in it filters {} other visuals ({}).",
            names.len(),
            names.join(", ")
        ));
    }
    for p in parts {
        out.push(' ');
        out.push_str(&p);
    }
    out
}

fn overview(d: &Digest) -> String {
    let steps: Vec<String> = d
        .visuals
        .iter()
        .map(|v| format!("{} ({})", v.title_link(), v.kind.noun()))
        .collect();
    format!(
        "The dashboard has {} visuals. A good order to explore them:\n{}",
        d.visuals.len(),
        numbered(&steps)
    )
}

fn clarify(options: &[&Visual]) -> String {
    let names: Vec<String> = options.iter().take(4).map(|v| format!("\"{}\"", v.title)).collect();
    match names.len() {
        0 => "Which part of the dashboard do you mean?".to_string(),
        1 => format!("Do you mean {}?", names[0]),
        n => format!(
            "Which visual do you mean: {} or {}?",
            names[..n - 1].join(", "),
            names[n - 1]
        ),
    }
}

fn numbered(steps: &[String]) -> String {
    steps
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Measure the user names, longest spelling first (`revenue goal` beats
/// `revenue`), or a KPI named by title.
fn mentioned_measure(d: &Digest, u: &str) -> Option<String> {
    let mut best: Option<(usize, String)> = None;
    for m in &d.measures {
        for t in column_terms(m, false) {
            if has_term(u, &t, true) && best.as_ref().is_none_or(|(len, _)| t.len() > *len) {
                best = Some((t.len(), m.clone()));
            }
        }
    }
    for v in d.visuals.iter().filter(|v| v.kind == VisualKind::Kpi) {
        let t = v.title.to_lowercase();
        if let (true, Some(val)) = (has_term(u, &t, true), &v.value) {
            if best.as_ref().is_none_or(|(len, _)| t.len() > *len) {
                best = Some((t.len(), column_of(val).to_string()));
            }
        }
    }
    best.map(|(_, m)| m)
}

fn value_request(d: &Digest, u: &str) -> Option<String> {
    let measure = mentioned_measure(d, u)?;
    if !any_cue(u, VALUE_CUES) || any_cue(u, STRUCTURE_CUES) {
        return None;
    }

    let mut steps = Vec::new();
    let mut used: Vec<&str> = Vec::new();

    let slicer = d.visuals.iter().find(|v| v.kind == VisualKind::Slicer);
    if let Some(s) = slicer {
        let lead = if any_cue(u, PERIOD_WORDS) {
            "Set"
        } else {
            "If you need a particular period, set"
        };
        steps.push(format!(
            "{lead} {} first; it filters the other visuals.",
            s.link("data", &s.title)
        ));
        used.push(&s.id);
    }

    for v in d
        .visuals
        .iter()
        .filter(|v| !matches!(v.kind, VisualKind::Kpi | VisualKind::Slicer))
    {
        if let Some(l) = &v.legend {
            let entries: Vec<&String> = l
                .entries
                .iter()
                .filter(|e| has_term(u, &e.to_lowercase(), true))
                .collect();
            if let Some(e) = entries.first() {
                steps.push(format!(
                    "In {}, click \"{e}\" in the {} to highlight that {}.",
                    v.title_link(),
                    v.link("legend", "legend"),
                    l.column
                ));
                used.push(&v.id);
                continue;
            }
        }
        let columns = v.grouping_columns();
        if let Some(c) = columns.iter().find(|c| mentions_column(u, c, true)) {
            let place = if v.axis_y.as_ref().is_some_and(|a| a.column == *c) {
                format!(" on the {}", v.link("axis-y", "y-axis"))
            } else if v.axis_x.as_ref().is_some_and(|a| a.column == *c) {
                format!(" on the {}", v.link("axis-x", "x-axis"))
            } else {
                String::new()
            };
            steps.push(format!(
                "In {}, find the {c} you need{place} and click it to select it.",
                v.title_link()
            ));
            used.push(&v.id);
        }
    }

    let kpi = d
        .visuals
        .iter()
        .find(|v| v.kind == VisualKind::Kpi && v.value.as_deref().map(column_of) == Some(measure.as_str()));
    let chart = d
        .visuals
        .iter()
        .filter(|v| v.kind != VisualKind::Kpi)
        .find(|v| v.measure_columns().contains(&measure.as_str()));

    if !used.iter().any(|id| slicer.is_none_or(|s| s.id != *id)) {
        // nothing named a grouping: point at the visuals that filter the result
        let result_id = kpi.or(chart).map(|v| v.id.as_str());
        let sources: Vec<String> = d
            .visuals
            .iter()
            .filter(|v| v.kind != VisualKind::Slicer)
            .filter(|v| result_id.is_some_and(|r| v.filters.iter().any(|t| t == r)))
            .map(|v| v.link("data", &v.title))
            .collect();
        if !sources.is_empty() {
            steps.push(format!(
                "Select the item you are asking about in {}.",
                sources.join(" or ")
            ));
        }
    }

    match (kpi, chart) {
        (Some(k), _) => steps.push(format!(
            "Read the {} on {} once your selections are applied.",
            measure,
            k.link("data", &k.title)
        )),
        (None, Some(c)) if c.interactions.contains(&SelfInteraction::Hover) => steps.push(format!(
            "Hover over the matching mark in {} to see its exact {} in the tooltip.",
            c.link("data", &c.title),
            measure
        )),
        (None, Some(c)) => steps.push(format!(
            "Read the {} in {} against its axis.",
            measure,
            c.link("data", &c.title)
        )),
        (None, None) => {}
    }

    Some(format!(
        "{NOT_IN_DATA_SENTINEL}\nI can't look up data values, but the dashboard can show you:\n{}",
        numbered(&steps)
    ))
}
