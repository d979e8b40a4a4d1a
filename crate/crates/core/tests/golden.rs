//! Snapshot tests for help menus and mock-provider transcripts.
//!
//! Run with `UPDATE_GOLDEN=1` to rewrite the snapshots after an intended
//! change, then review the diff.

use std::path::PathBuf;
use std::sync::Arc;

use onboard_core::gateway::MockProvider;
use onboard_core::highlight::anchor_ids;
use onboard_core::menu::{build_component_graph, prune_categories, MenuCategory};
use onboard_core::model::{infer_sub_regions, RegionKind, VisualKind};
use onboard_core::orchestrator::{Assistant, AssistantConfig, Modality};
use onboard_core::resolver::RegionHit;
use onboard_core::sample::{sample_dashboard, SAMPLE_DASHBOARD};
use onboard_core::{resolve_anchor, VoiceTokenStore};
use serde::{Deserialize, Serialize};

fn golden_dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(sub)
}

fn check_golden(path: PathBuf, actual: &str) {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing snapshot {}; run with UPDATE_GOLDEN=1", path.display()));
    assert_eq!(expected, actual, "snapshot {} differs", path.display());
}

#[test]
fn menus_match_snapshots() {
    let spec = infer_sub_regions(&sample_dashboard()).unwrap();
    let menus = build_component_graph(&spec);
    assert_eq!(menus.len(), 8);
    for (id, menu) in &menus {
        let kind = spec.visual(id).unwrap().kind;
        let roots: Vec<MenuCategory> = menu.nodes.iter().map(|n| n.node.category).collect();
        assert_eq!(roots, prune_categories(kind).into_iter().collect::<Vec<_>>(), "{id}");
        let json = serde_json::to_string_pretty(menu).unwrap() + "\n";
        check_golden(golden_dir("menus").join(format!("{id}.json")), &json);
    }
}

#[test]
fn bar_chart_read_subtree() {
    let spec = infer_sub_regions(&sample_dashboard()).unwrap();
    let menus = build_component_graph(&spec);
    let read = menus["bar-01"].root(MenuCategory::Read).unwrap();
    assert!(read.leaves().len() >= 3);
    assert!(read
        .leaves()
        .iter()
        .any(|n| n.node.narrative == "The X-axis represents values in USD on a continuous scale."));
    let interact = menus["bar-01"].root(MenuCategory::Interact).unwrap();
    assert!(interact
        .walk()
        .iter()
        .any(|n| n.node.narrative.contains("Country → City")));
    for (id, menu) in &menus {
        if spec.visual(id).unwrap().kind == VisualKind::Kpi {
            assert!(menu.root(MenuCategory::Interact).is_none());
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
struct Exchange {
    #[serde(skip_serializing_if = "Option::is_none")]
    context: Option<String>,
    user: String,
    reply: String,
    outcome: String,
    anchors: Vec<String>,
}

/// (optional lasso context "visual Region", question)
type Exchanges = &'static [(Option<&'static str>, &'static str)];

const CONVERSATIONS: &[(&str, Exchanges)] = &[
    (
        "lookup",
        &[
            (None, "How do I figure out the scaling of the x-axis of the bar chart?"),
            (None, "What is the exact revenue value for Australia?"),
            (
                None,
                "What is the revenue goal for Australia in the Services subcategory for the Proposal stage?",
            ),
            (None, "How many open opportunities are there?"),
        ],
    ),
    (
        "context",
        &[
            (Some("bar-01 AxisY"), "what is the y-axis?"),
            (Some("funnel-01 Legend"), "what does this show?"),
            (Some("slicer-01 FilterControl"), "how does this work?"),
            (Some("map-01 DataArea"), "what are the trends here?"),
            (None, "How do I drill down from here?"),
        ],
    ),
    (
        "navigation",
        &[
            (None, "Give me an overview of the dashboard"),
            (None, "How do I drill down from country to city?"),
            (None, "How can I interact with the Total Revenue card?"),
            (None, "What does the legend of the line chart show?"),
            (None, "What does the legend mean?"),
            (None, "Why does revenue peak in the Revenue Trend?"),
            (None, "What does the Sales Funnel show?"),
        ],
    ),
];

#[tokio::test]
async fn mock_transcripts_match_snapshots() {
    let assistant = Assistant::new(
        Arc::new(MockProvider::new()),
        VoiceTokenStore::default(),
        AssistantConfig::default(),
    );
    let dashboard = assistant.load_dashboard(SAMPLE_DASHBOARD).unwrap();
    let spec = assistant.dashboard(&dashboard).unwrap().spec.clone();

    for (name, turns) in CONVERSATIONS {
        let sid = assistant.create_session(&dashboard).unwrap();
        let mut transcript = Vec::new();
        for (context, question) in *turns {
            if let Some(ctx) = context {
                let (vid, region) = ctx.split_once(' ').unwrap();
                let region: RegionKind = serde_json::from_value(region.into()).unwrap();
                let visual = spec.visual(vid).unwrap();
                let hit = RegionHit {
                    visual_id: vid.into(),
                    region,
                    overlap_fraction: 1.0,
                    anchor_bounds: visual.region_bounds(region).unwrap(),
                    alternates: Vec::new(),
                };
                assistant.attach_lasso_context(&sid, hit).await.unwrap();
            }
            let reply = assistant
                .handle_user_turn(&sid, Modality::Chat, question)
                .await
                .unwrap();
            for id in anchor_ids(&reply.marked_up_text) {
                assert!(resolve_anchor(&id, &spec).is_ok(), "{question}: {id}");
            }
            transcript.push(Exchange {
                context: context.map(str::to_string),
                user: question.to_string(),
                reply: reply.marked_up_text,
                outcome: format!("{:?}", reply.outcome),
                anchors: reply.anchors,
            });
        }
        let json = serde_json::to_string_pretty(&transcript).unwrap() + "\n";
        check_golden(golden_dir("transcripts").join(format!("{name}.json")), &json);
    }
}

#[test]
fn snapshot_anchors_resolve() {
    // also checks snapshots written by earlier runs, independent of the generator
    let spec = infer_sub_regions(&sample_dashboard()).unwrap();
    let Ok(entries) = std::fs::read_dir(golden_dir("transcripts")) else {
        return;
    };
    for entry in entries {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let transcript: Vec<Exchange> = serde_json::from_str(&text).unwrap();
        for ex in transcript {
            for id in anchor_ids(&ex.reply) {
                assert!(resolve_anchor(&id, &spec).is_ok(), "{id}");
            }
        }
    }
}
