//! Highlight anchors and the inline highlight markup.
//!
//! An anchor id has the form `<visualId>.<part>` with part one of `body`,
//! `axis-x`, `axis-y`, `legend`, `title` or `data`. Replies embed anchors as
//! `[[hl:<anchorId>|<label>]]`; inside a label `\`, `|` and `]` are escaped
//! with a backslash.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::Rect;
use crate::model::{DashboardSpec, RegionKind, VisualSpec};

pub const DEFAULT_DURATION_MS: u32 = 4000;

const MARKER_OPEN: &str = "[[hl:";
const MARKER_CLOSE: &str = "]]";

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum HighlightError {
    #[error("unknown anchor {0:?}")]
    UnknownAnchor(String),
    #[error("anchor spans overlap")]
    OverlappingSpans,
    #[error("span {start}..{end} is outside the text or not on a character boundary")]
    InvalidSpan { start: usize, end: usize },
    #[error("anchor id {0:?} cannot be written as markup")]
    InvalidAnchorId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnchorPart {
    Body,
    AxisX,
    AxisY,
    Legend,
    Title,
    Data,
}

impl AnchorPart {
    pub fn as_str(self) -> &'static str {
        match self {
            AnchorPart::Body => "body",
            AnchorPart::AxisX => "axis-x",
            AnchorPart::AxisY => "axis-y",
            AnchorPart::Legend => "legend",
            AnchorPart::Title => "title",
            AnchorPart::Data => "data",
        }
    }

    /// Region addressed by this part on `visual`; `data` is the filter
    /// control on slicers.
    pub fn region_for(self, visual: &VisualSpec) -> RegionKind {
        match self {
            AnchorPart::Body => RegionKind::VisualBody,
            AnchorPart::AxisX => RegionKind::AxisX,
            AnchorPart::AxisY => RegionKind::AxisY,
            AnchorPart::Legend => RegionKind::Legend,
            AnchorPart::Title => RegionKind::Title,
            AnchorPart::Data => visual.content_region(),
        }
    }

    pub fn for_region(region: RegionKind) -> AnchorPart {
        match region {
            RegionKind::VisualBody => AnchorPart::Body,
            RegionKind::AxisX => AnchorPart::AxisX,
            RegionKind::AxisY => AnchorPart::AxisY,
            RegionKind::Legend => AnchorPart::Legend,
            RegionKind::Title => AnchorPart::Title,
            RegionKind::DataArea | RegionKind::FilterControl => AnchorPart::Data,
        }
    }
}

impl fmt::Display for AnchorPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnchorPart {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "body" => AnchorPart::Body,
            "axis-x" => AnchorPart::AxisX,
            "axis-y" => AnchorPart::AxisY,
            "legend" => AnchorPart::Legend,
            "title" => AnchorPart::Title,
            "data" => AnchorPart::Data,
            _ => return Err(()),
        })
    }
}

/// Parts a visual actually has, in a stable order.
pub fn anchor_parts_for(visual: &VisualSpec) -> Vec<AnchorPart> {
    let enc = &visual.encodings;
    let mut parts = vec![AnchorPart::Body, AnchorPart::Title];
    if enc.axis_x.is_some() {
        parts.push(AnchorPart::AxisX);
    }
    if enc.axis_y.is_some() {
        parts.push(AnchorPart::AxisY);
    }
    if enc.legend.is_some() {
        parts.push(AnchorPart::Legend);
    }
    parts.push(AnchorPart::Data);
    parts
}

pub fn anchor_id(visual_id: &str, region: RegionKind) -> String {
    format!("{visual_id}.{}", AnchorPart::for_region(region))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HighlightAnchor {
    pub anchor_id: String,
    pub visual_id: String,
    pub region: RegionKind,
    pub bounds: Rect,
}

/// Resolves `<visualId>.<part>` against a laid-out spec.
pub fn resolve_anchor(anchor_id: &str, spec: &DashboardSpec) -> Result<HighlightAnchor, HighlightError> {
    let unknown = || HighlightError::UnknownAnchor(anchor_id.to_string());
    let (visual_id, part) = anchor_id.rsplit_once('.').ok_or_else(unknown)?;
    let part: AnchorPart = part.parse().map_err(|_| unknown())?;
    let visual = spec.visual(visual_id).ok_or_else(unknown)?;
    if !anchor_parts_for(visual).contains(&part) {
        return Err(unknown());
    }
    let region = part.region_for(visual);
    let bounds = visual.region_bounds(region).ok_or_else(unknown)?;
    Ok(HighlightAnchor {
        anchor_id: anchor_id.to_string(),
        visual_id: visual_id.to_string(),
        region,
        bounds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HighlightStyle {
    #[default]
    PulsatingBar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HighlightCommand {
    pub anchor: HighlightAnchor,
    pub style: HighlightStyle,
    pub duration_ms: u32,
    pub sequence_index: u32,
}

impl HighlightCommand {
    pub fn new(anchor: HighlightAnchor, sequence_index: u32) -> Self {
        Self {
            anchor,
            style: HighlightStyle::PulsatingBar,
            duration_ms: DEFAULT_DURATION_MS,
            sequence_index,
        }
    }
}

/// A byte range of plain text linked to an anchor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnchorSpan {
    pub start: usize,
    pub end: usize,
    pub anchor_id: String,
}

impl AnchorSpan {
    pub fn new(range: Range<usize>, anchor_id: impl Into<String>) -> Self {
        Self {
            start: range.start,
            end: range.end,
            anchor_id: anchor_id.into(),
        }
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

fn is_valid_anchor_id(id: &str) -> bool {
    !id.is_empty() && !id.contains(|c: char| c == '|' || c == '[' || c == ']' || c.is_whitespace())
}

fn escape_label(label: &str, out: &mut String) {
    for c in label.chars() {
        if matches!(c, '\\' | '|' | ']') {
            out.push('\\');
        }
        out.push(c);
    }
}

/// A single highlight link `[[hl:anchor|label]]`.
pub fn link(anchor_id: &str, label: &str) -> String {
    let mut out = String::with_capacity(anchor_id.len() + label.len() + 8);
    out.push_str(MARKER_OPEN);
    out.push_str(anchor_id);
    out.push('|');
    escape_label(label, &mut out);
    out.push_str(MARKER_CLOSE);
    out
}

/// Wraps each span of `text` in highlight markup. Text outside spans is
/// copied unchanged.
pub fn render_anchors(text: &str, anchors: &[AnchorSpan]) -> Result<String, HighlightError> {
    let mut sorted: Vec<&AnchorSpan> = anchors.iter().collect();
    sorted.sort_by_key(|a| (a.start, a.end));
    for a in &sorted {
        if a.start > a.end || a.end > text.len() || !text.is_char_boundary(a.start) || !text.is_char_boundary(a.end) {
            return Err(HighlightError::InvalidSpan {
                start: a.start,
                end: a.end,
            });
        }
        if !is_valid_anchor_id(&a.anchor_id) {
            return Err(HighlightError::InvalidAnchorId(a.anchor_id.clone()));
        }
    }
    if sorted.windows(2).any(|w| w[1].start < w[0].end) {
        return Err(HighlightError::OverlappingSpans);
    }

    let mut out = String::with_capacity(text.len() + anchors.len() * 16);
    let mut cursor = 0;
    for a in sorted {
        out.push_str(&text[cursor..a.start]);
        out.push_str(MARKER_OPEN);
        out.push_str(&a.anchor_id);
        out.push('|');
        escape_label(&text[a.start..a.end], &mut out);
        out.push_str(MARKER_CLOSE);
        cursor = a.end;
    }
    out.push_str(&text[cursor..]);
    Ok(out)
}

/// Parses one marker at the start of `s`: (anchor id, label, bytes consumed).
fn parse_marker(s: &str) -> Option<(&str, String, usize)> {
    let rest = s.strip_prefix(MARKER_OPEN)?;
    let bar = rest.find('|')?;
    let id = &rest[..bar];
    if !is_valid_anchor_id(id) {
        return None;
    }
    let body = &rest[bar + 1..];
    let mut label = String::new();
    let mut chars = body.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some((_, e @ ('\\' | '|' | ']'))) => label.push(e),
                Some((_, other)) => {
                    label.push('\\');
                    label.push(other);
                }
                None => return None,
            },
            ']' => {
                if body[i..].starts_with(MARKER_CLOSE) {
                    let consumed = MARKER_OPEN.len() + bar + 1 + i + MARKER_CLOSE.len();
                    return Some((id, label, consumed));
                }
                return None;
            }
            '|' => return None,
            _ => label.push(c),
        }
    }
    None
}

/// Splits marked-up text into plain text and anchor spans. Malformed
/// markers are kept as literal text.
pub fn parse_anchors(marked_up: &str) -> (String, Vec<AnchorSpan>) {
    let mut plain = String::with_capacity(marked_up.len());
    let mut spans = Vec::new();
    let mut i = 0;
    while i < marked_up.len() {
        let rest = &marked_up[i..];
        if rest.starts_with(MARKER_OPEN) {
            if let Some((id, label, consumed)) = parse_marker(rest) {
                let start = plain.len();
                plain.push_str(&label);
                spans.push(AnchorSpan::new(start..plain.len(), id));
                i += consumed;
                continue;
            }
        }
        let c = rest.chars().next().expect("non-empty");
        plain.push(c);
        i += c.len_utf8();
    }
    (plain, spans)
}

/// Anchor ids referenced by well-formed markers, in order of appearance.
pub fn anchor_ids(marked_up: &str) -> Vec<String> {
    parse_anchors(marked_up).1.into_iter().map(|a| a.anchor_id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn render_example() {
        let out = render_anchors("check the y-axis", &[AnchorSpan::new(10..16, "bar-01.axis-y")]).unwrap();
        assert_eq!(out, "check the [[hl:bar-01.axis-y|y-axis]]");
    }

    #[test]
    fn render_without_anchors_is_identity() {
        assert_eq!(
            render_anchors("plain [text] | here", &[]).unwrap(),
            "plain [text] | here"
        );
    }

    #[test]
    fn overlapping_spans_rejected() {
        let spans = [AnchorSpan::new(0..5, "a.body"), AnchorSpan::new(3..8, "b.body")];
        assert_eq!(
            render_anchors("0123456789", &spans),
            Err(HighlightError::OverlappingSpans)
        );
    }

    #[test]
    fn adjacent_spans_allowed() {
        let spans = [AnchorSpan::new(0..2, "a.body"), AnchorSpan::new(2..4, "b.body")];
        let out = render_anchors("abcd", &spans).unwrap();
        assert_eq!(out, "[[hl:a.body|ab]][[hl:b.body|cd]]");
        assert_eq!(parse_anchors(&out), ("abcd".to_string(), spans.to_vec()));
    }

    #[test]
    fn span_outside_text_rejected() {
        let err = render_anchors("abc", &[AnchorSpan::new(1..9, "a.body")]).unwrap_err();
        assert!(matches!(err, HighlightError::InvalidSpan { .. }));
    }

    #[test]
    fn escaped_label_round_trip() {
        let text = r"a|b]c\d";
        let out = render_anchors(text, &[AnchorSpan::new(0..text.len(), "v.legend")]).unwrap();
        assert_eq!(out, r"[[hl:v.legend|a\|b\]c\\d]]");
        assert_eq!(parse_anchors(&out).0, text);
    }

    #[test]
    fn malformed_markers_are_literal() {
        assert_eq!(parse_anchors("[[hl:bad"), ("[[hl:bad".to_string(), vec![]));
        assert_eq!(
            parse_anchors("[[hl:x.body|open"),
            ("[[hl:x.body|open".to_string(), vec![])
        );
        assert_eq!(parse_anchors("[[hl:|x]]").1.len(), 0);
        assert_eq!(parse_anchors("[[hl:a b|x]]").1.len(), 0);
        assert_eq!(parse_anchors("[[hl:a.body|x]y]]").1.len(), 0);
    }

    #[test]
    fn two_markers_in_reply() {
        let reply = "1. Open [[hl:slicer-01.data|Close Date]].\n2. Then read [[hl:kpi-02.body|Revenue Goal]].";
        let (plain, spans) = parse_anchors(reply);
        assert_eq!(plain, "1. Open Close Date.\n2. Then read Revenue Goal.");
        assert_eq!(spans.len(), 2);
        assert_eq!(&plain[spans[0].range()], "Close Date");
        assert_eq!(spans[0].anchor_id, "slicer-01.data");
        assert_eq!(&plain[spans[1].range()], "Revenue Goal");
        assert_eq!(spans[1].anchor_id, "kpi-02.body");
    }

    #[test]
    fn marker_after_stray_bracket() {
        let (plain, spans) = parse_anchors("x [[[hl:a.body|y]]");
        assert_eq!(plain, "x [y");
        assert_eq!(spans, vec![AnchorSpan::new(3..4, "a.body")]);
    }

    fn segments() -> impl Strategy<Value = (String, Vec<AnchorSpan>)> {
        let plain = "[a-z |\\]\\\\é日.]{0,8}";
        let label = "[a-z \\[\\]|\\\\é日]{0,8}";
        let id = "[a-z0-9-]{1,8}\\.(body|axis-x|axis-y|legend|title|data)";
        prop::collection::vec((plain, label, id), 0..6)
            .prop_flat_map(move |parts| (Just(parts), plain))
            .prop_map(|(parts, tail)| {
                let mut text = String::new();
                let mut spans = Vec::new();
                for (p, l, id) in parts {
                    text.push_str(&p);
                    let start = text.len();
                    text.push_str(&l);
                    spans.push(AnchorSpan::new(start..text.len(), id));
                }
                text.push_str(&tail);
                (text, spans)
            })
    }

    proptest! {
        #[test]
        fn parse_inverts_render((text, spans) in segments()) {
            let marked = render_anchors(&text, &spans).unwrap();
            let (plain, parsed) = parse_anchors(&marked);
            prop_assert_eq!(plain, text);
            prop_assert_eq!(parsed, spans);
        }
    }
}
