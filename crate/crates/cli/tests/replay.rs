mod common;

use std::process::Command;

use onboard_cli::{load_traces, run_trace, trace_from_log_text, Replayer, TransportError};
use onboard_core::trace::{parse_trace, TraceAction};
use onboard_core::Outcome;
use serde_json::Value;

#[tokio::test]
async fn shipped_suite_passes() {
    let base = common::start_mock().await;
    let traces = load_traces(&common::traces_dir()).unwrap();
    assert_eq!(traces.len(), 10);
    for (path, trace) in &traces {
        let report = run_trace(trace, &base).await.unwrap();
        assert!(
            report.passed,
            "{}: {:#?}",
            path.display(),
            report.failures().collect::<Vec<_>>()
        );
        assert_eq!(report.passed_steps, trace.steps.len());
    }
}

#[tokio::test]
async fn failing_expectation_names_step_and_field() {
    let base = common::start_mock().await;
    let trace = parse_trace(
        r#"{"name":"wrong","taskType":"Lookup","difficulty":"Easy","steps":[
            {"action":"Chat","payload":{"text":"What does the Sales Funnel show?"},"expect":{"outcome":"Answered"}},
            {"action":"Chat","payload":{"text":"What is the exact revenue value for Australia?"},
             "expect":{"outcome":"Answered","anchorsInclude":["map-01.legend"]}}
        ]}"#,
    )
    .unwrap();
    let report = run_trace(&trace, &base).await.unwrap();
    assert!(!report.passed);
    assert_eq!((report.passed_steps, report.failed_steps), (1, 1));
    let failed: Vec<_> = report.failures().collect();
    assert_eq!(failed[0].index, 1);
    let fields: Vec<&str> = failed[0].diffs.iter().map(|d| d.field.as_str()).collect();
    assert_eq!(fields, ["outcome", "anchorsInclude"]);
    assert_eq!(failed[0].diffs[0].actual, "NotInData");
}

#[tokio::test]
async fn rejected_request_is_a_step_failure() {
    let base = common::start_mock().await;
    let trace = parse_trace(
        r#"{"name":"bad-visual","taskType":"Exploratory","difficulty":"Easy","dashboardId":"sales-pipeline",
            "steps":[{"action":"MenuOpen","payload":{"visualId":"pie-99"}}]}"#,
    )
    .unwrap();
    let report = run_trace(&trace, &base).await.unwrap();
    let step = &report.steps[0];
    assert!(!step.passed);
    assert_eq!(step.diffs[0].field, "status");
    assert_eq!(step.error.as_ref().unwrap()["code"], "NotFound");
}

#[tokio::test]
async fn unreachable_service_is_a_transport_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let (_, trace) = load_traces(&common::traces_dir()).unwrap().remove(0);
    let err = run_trace(&trace, &format!("http://{addr}")).await.unwrap_err();
    assert!(matches!(err, TransportError::Request { .. }), "{err}");

    let base = common::start_mock().await;
    let mut trace = trace;
    trace.dashboard_id = Some("missing".into());
    assert!(matches!(run_trace(&trace, &base).await, Err(TransportError::Setup(_))));
}

#[tokio::test]
async fn exported_logs_replay_with_identical_outcomes() {
    let base = common::start_mock().await;
    let replayer = Replayer::new(&base);
    for (_, trace) in load_traces(&common::traces_dir()).unwrap() {
        let first = replayer.run_trace(&trace).await.unwrap();
        let log = replayer.export_log(&first.session_id).await.unwrap();
        let ndjson: String = log.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
        let replay = trace_from_log_text(&trace.name, &ndjson).unwrap();
        let second = replayer.run_trace(&replay).await.unwrap();
        assert!(
            second.passed,
            "{}: {:#?}",
            trace.name,
            second.failures().collect::<Vec<_>>()
        );

        let again = replayer.export_log(&second.session_id).await.unwrap();
        let shape = |records: &[onboard_core::orchestrator::LogRecord]| -> Vec<(String, Outcome, Vec<String>, String)> {
            records
                .iter()
                .map(|r| {
                    (
                        format!("{:?}/{:?}", r.turn.role, r.turn.modality),
                        r.turn.outcome,
                        r.turn.anchors.clone(),
                        r.turn.content.clone(),
                    )
                })
                .collect()
        };
        assert_eq!(shape(&log), shape(&again), "{}", trace.name);
        assert!(replay.steps.iter().all(|s| s.action != TraceAction::Hover));
    }
}

fn replay_bin(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_replay")).args(args).output().unwrap();
    (out.status.code(), String::from_utf8(out.stdout).unwrap())
}

#[tokio::test(flavor = "multi_thread")]
async fn binary_reports_json_and_exit_codes() {
    let base = common::start_mock().await;
    let dir = common::traces_dir().display().to_string();
    let b = base.clone();
    let (code, stdout) =
        tokio::task::spawn_blocking(move || replay_bin(&["run", &dir, "--endpoint", &b, "--jobs", "3"]))
            .await
            .unwrap();
    assert_eq!(code, Some(0));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["traces"], 10);

    let tmp = tempfile::tempdir().unwrap();
    let failing = tmp.path().join("failing.json");
    std::fs::write(
        &failing,
        r#"{"name":"f","taskType":"Lookup","difficulty":"Easy","steps":[
            {"action":"Chat","payload":{"text":"What does the Sales Funnel show?"},"expect":{"outcome":"Clarify"}}]}"#,
    )
    .unwrap();
    let path = failing.display().to_string();
    let b = base.clone();
    let (code, stdout) = tokio::task::spawn_blocking(move || replay_bin(&["run", &path, "--endpoint", &b]))
        .await
        .unwrap();
    assert_eq!(code, Some(1));
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["reports"][0]["steps"][0]["diffs"][0]["field"], "outcome");

    let (code, _) =
        tokio::task::spawn_blocking(|| replay_bin(&["run", "/nonexistent-traces", "--endpoint", "http://127.0.0.1:1"]))
            .await
            .unwrap();
    assert_eq!(code, Some(2));
}

#[tokio::test(flavor = "multi_thread")]
async fn binary_converts_logs_to_traces() {
    let base = common::start_mock().await;
    let replayer = Replayer::new(&base);
    let (_, trace) = load_traces(&common::traces_dir()).unwrap().remove(6);
    let report = replayer.run_trace(&trace).await.unwrap();
    let log = reqwest::get(format!("{base}/sessions/{}/log", report.session_id))
        .await
        .unwrap()
        .text()
        .await
        .unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let log_path = tmp.path().join("session.ndjson");
    std::fs::write(&log_path, log).unwrap();
    let out_path = tmp.path().join("replayed.json");
    let (lp, op) = (log_path.display().to_string(), out_path.display().to_string());
    let (code, _) =
        tokio::task::spawn_blocking(move || replay_bin(&["from-log", &lp, "--name", "recorded", "--output", &op]))
            .await
            .unwrap();
    assert_eq!(code, Some(0));
    let converted = parse_trace(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(converted.name, "recorded");
    assert_eq!(converted.steps.len(), 3);
    assert!(run_trace(&converted, &base).await.unwrap().passed);
}
