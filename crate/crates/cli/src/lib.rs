//! Replays scripted interaction traces against a running service and
//! reports, per step, which expectations held.
//!
//! Assertion failures land in the [`TraceReport`]; only problems with the
//! harness itself (unreachable service, malformed responses) surface as
//! [`TransportError`].

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use onboard_core::model::RegionKind;
use onboard_core::orchestrator::LogRecord;
use onboard_core::trace::{
    parse_trace, trace_from_log, Difficulty, StepExpectation, TaskType, TraceAction, TraceError,
};
use onboard_core::{LassoPath, MenuCategory, Outcome, RegionHit, TaskTrace, TraceStep};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("request to {url} failed: {message}")]
    Request { url: String, message: String },
    #[error("unexpected response from {url}: {message}")]
    Protocol { url: String, message: String },
    #[error("cannot start trace: {0}")]
    Setup(String),
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Trace { path: PathBuf, source: TraceError },
    #[error("no trace files under {0}")]
    Empty(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiff {
    pub field: String,
    pub expected: Value,
    pub actual: Value,
}

/// What a step's responses showed, whether or not it was expected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Observed {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu_opened_at: Option<MenuCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StepReport {
    pub index: usize,
    pub action: TraceAction,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diffs: Vec<FieldDiff>,
    /// Service error body when the request itself was rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
    pub observed: Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceReport {
    pub name: String,
    pub task_type: TaskType,
    pub difficulty: Difficulty,
    pub session_id: String,
    pub passed: bool,
    pub passed_steps: usize,
    pub failed_steps: usize,
    pub duration_ms: u64,
    pub steps: Vec<StepReport>,
}

impl TraceReport {
    pub fn failures(&self) -> impl Iterator<Item = &StepReport> {
        self.steps.iter().filter(|s| !s.passed)
    }
}

/// Compares what a step observed with what it expected.
pub fn diff_step(expect: &StepExpectation, observed: &Observed) -> Vec<FieldDiff> {
    let mut diffs = Vec::new();
    let mut check = |field: &str, expected: Value, actual: Value| {
        if expected != actual {
            diffs.push(FieldDiff {
                field: field.to_string(),
                expected,
                actual,
            });
        }
    };
    if let Some(outcome) = expect.outcome {
        check("outcome", json!(outcome), json!(observed.outcome));
    }
    let missing: Vec<&String> = expect
        .anchors_include
        .iter()
        .filter(|a| !observed.anchors.contains(a))
        .collect();
    if !missing.is_empty() {
        check("anchorsInclude", json!(expect.anchors_include), json!(observed.anchors));
    }
    if let Some(category) = expect.menu_opened_at {
        check("menuOpenedAt", json!(category), json!(observed.menu_opened_at));
    }
    if let Some(region) = &expect.region_is {
        check(
            "regionIs",
            json!({ "visualId": region.visual_id, "region": region.region }),
            json!({ "visualId": observed.visual_id, "region": observed.region }),
        );
    }
    if let Some(min) = expect.min_visuals {
        let visuals = distinct_visuals(&observed.anchors);
        if visuals.len() < min {
            check("minVisuals", json!(min), json!(visuals));
        }
    }
    diffs
}

/// Visual ids referenced by anchor ids of the form `<visualId>.<part>`.
pub fn distinct_visuals(anchors: &[String]) -> BTreeSet<String> {
    anchors
        .iter()
        .map(|a| a.rsplit_once('.').map_or(a.as_str(), |(v, _)| v).to_string())
        .collect()
}

enum Reply {
    Ok(Value),
    Rejected(Value),
}

/// HTTP client for one service endpoint.
#[derive(Debug, Clone)]
pub struct Replayer {
    client: reqwest::Client,
    endpoint: String,
}

impl Replayer {
    pub fn new(endpoint: &str) -> Self {
        Self {
            client: reqwest::Client::new(),
            endpoint: endpoint.trim_end_matches('/').to_string(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.endpoint, path)
    }

    async fn send(&self, request: reqwest::RequestBuilder, url: &str) -> Result<Reply, TransportError> {
        let response = request.send().await.map_err(|e| TransportError::Request {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        let status = response.status();
        let text = response.text().await.map_err(|e| TransportError::Request {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        let body = if text.trim().is_empty() {
            Value::Null
        } else {
            serde_json::from_str(&text).map_err(|e| TransportError::Protocol {
                url: url.to_string(),
                message: format!("status {status}, body is not JSON: {e}"),
            })?
        };
        Ok(if status.is_success() {
            Reply::Ok(body)
        } else {
            Reply::Rejected(body)
        })
    }

    async fn get(&self, path: &str) -> Result<Reply, TransportError> {
        let url = self.url(path);
        self.send(self.client.get(&url), &url).await
    }

    async fn post(&self, path: &str, body: &impl Serialize) -> Result<Reply, TransportError> {
        let url = self.url(path);
        self.send(self.client.post(&url).json(body), &url).await
    }

    /// Fetches a session's exported log.
    pub async fn export_log(&self, session_id: &str) -> Result<Vec<LogRecord>, TransportError> {
        let url = self.url(&format!("/sessions/{session_id}/log"));
        let protocol = |message: String| TransportError::Protocol {
            url: url.clone(),
            message,
        };
        let response = self
            .client
            .get(&url)
            .send()
            .await
            .map_err(|e| TransportError::Request {
                url: url.clone(),
                message: e.to_string(),
            })?;
        if !response.status().is_success() {
            return Err(protocol(format!("status {}", response.status())));
        }
        let text = response.text().await.map_err(|e| protocol(e.to_string()))?;
        onboard_core::orchestrator::parse_log(&text).map_err(|e| protocol(e.to_string()))
    }

    async fn start_session(&self, trace: &TaskTrace) -> Result<String, TransportError> {
        let dashboard_id = match &trace.dashboard_id {
            Some(id) => id.clone(),
            None => match self.get("/dashboards").await? {
                Reply::Ok(body) => body["dashboards"][0]
                    .as_str()
                    .ok_or_else(|| TransportError::Setup("service has no dashboards loaded".into()))?
                    .to_string(),
                Reply::Rejected(body) => return Err(TransportError::Setup(body.to_string())),
            },
        };
        match self.post("/sessions", &json!({ "dashboardId": dashboard_id })).await? {
            Reply::Ok(body) => body["sessionId"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| TransportError::Setup(format!("session response without sessionId: {body}"))),
            Reply::Rejected(body) => Err(TransportError::Setup(body.to_string())),
        }
    }

    /// Runs every step of `trace` in order within one fresh session.
    pub async fn run_trace(&self, trace: &TaskTrace) -> Result<TraceReport, TransportError> {
        let started = Instant::now();
        let session_id = self.start_session(trace).await?;
        let mut steps = Vec::with_capacity(trace.steps.len());
        for (index, step) in trace.steps.iter().enumerate() {
            steps.push(self.run_step(&session_id, index, step).await?);
        }
        let failed_steps = steps.iter().filter(|s| !s.passed).count();
        Ok(TraceReport {
            name: trace.name.clone(),
            task_type: trace.task_type,
            difficulty: trace.difficulty,
            session_id,
            passed: failed_steps == 0,
            passed_steps: steps.len() - failed_steps,
            failed_steps,
            duration_ms: started.elapsed().as_millis() as u64,
            steps,
        })
    }

    async fn run_step(&self, sid: &str, index: usize, step: &TraceStep) -> Result<StepReport, TransportError> {
        let p = &step.payload;
        let mut observed = Observed::default();
        let reply = match step.action {
            TraceAction::Lasso => {
                if let Some(hit) = &p.hit {
                    self.attach_hit(sid, hit, &mut observed).await?
                } else {
                    let path = match (&p.path, &p.rect) {
                        (Some(points), _) => LassoPath::new(points.clone()),
                        (None, Some(rect)) => LassoPath::from_rect(rect),
                        (None, None) => unreachable!("validated traces carry a path, rect or hit"),
                    };
                    let reply = self.post(&format!("/sessions/{sid}/lasso"), &path).await?;
                    if let Reply::Ok(body) = &reply {
                        read_hit(&body["hit"], &mut observed);
                        observed.menu_opened_at = field(&body["menu"]["openedAt"]);
                    }
                    reply
                }
            }
            TraceAction::Chat | TraceAction::Voice => {
                let text = p.text.clone().unwrap_or_default();
                let modality = if step.action == TraceAction::Voice {
                    // push-to-talk: the browser mints and redeems a token before it transcribes
                    if let Reply::Rejected(e) = self.voice_handshake(sid).await? {
                        return Ok(rejected(index, step, observed, e));
                    }
                    "VoiceTranscript"
                } else {
                    "Chat"
                };
                let reply = self
                    .post(
                        &format!("/sessions/{sid}/turns"),
                        &json!({ "modality": modality, "text": text }),
                    )
                    .await?;
                if let Reply::Ok(body) = &reply {
                    observed.outcome = field(&body["outcome"]);
                    observed.anchors = field(&body["anchors"]).unwrap_or_default();
                }
                reply
            }
            TraceAction::MenuOpen => {
                let vid = p.visual_id.as_deref().unwrap_or_default();
                let mut path = format!(
                    "/dashboards/{}/visuals/{vid}/menu?sessionId={sid}",
                    self.dashboard_of(sid).await?
                );
                if let Some(r) = p.region {
                    path.push_str(&format!("&region={r}"));
                }
                let reply = self.get(&path).await?;
                if let Reply::Ok(body) = &reply {
                    observed.menu_opened_at = field(&body["openedAt"]);
                    observed.visual_id = Some(vid.to_string());
                    observed.region = p.region;
                }
                reply
            }
            TraceAction::Hover => {
                let reply = self.post(&format!("/sessions/{sid}/hover"), &p.point).await?;
                if let Reply::Ok(body) = &reply {
                    read_hit(body, &mut observed);
                }
                reply
            }
        };
        Ok(match reply {
            Reply::Ok(_) => {
                let diffs = diff_step(&step.expect, &observed);
                StepReport {
                    index,
                    action: step.action,
                    passed: diffs.is_empty(),
                    diffs,
                    error: None,
                    observed,
                }
            }
            Reply::Rejected(body) => rejected(index, step, observed, body),
        })
    }

    async fn attach_hit(&self, sid: &str, hit: &RegionHit, observed: &mut Observed) -> Result<Reply, TransportError> {
        let reply = self.post(&format!("/sessions/{sid}/context"), hit).await?;
        if let Reply::Rejected(_) = reply {
            return Ok(reply);
        }
        observed.visual_id = Some(hit.visual_id.clone());
        observed.region = Some(hit.region);
        // opening the menu here must not add a turn, so no session id
        let path = format!(
            "/dashboards/{}/visuals/{}/menu?region={}",
            self.dashboard_of(sid).await?,
            hit.visual_id,
            hit.region
        );
        let reply = self.get(&path).await?;
        if let Reply::Ok(body) = &reply {
            observed.menu_opened_at = field(&body["openedAt"]);
        }
        Ok(reply)
    }

    async fn voice_handshake(&self, sid: &str) -> Result<Reply, TransportError> {
        let minted = match self.post(&format!("/sessions/{sid}/voice-token"), &json!({})).await? {
            Reply::Ok(body) => body,
            rejected => return Ok(rejected),
        };
        self.post("/voice-tokens/redeem", &json!({ "token": minted["token"] }))
            .await
    }

    async fn dashboard_of(&self, sid: &str) -> Result<String, TransportError> {
        match self.get(&format!("/sessions/{sid}")).await? {
            Reply::Ok(body) => {
                body["dashboardId"]
                    .as_str()
                    .map(str::to_string)
                    .ok_or_else(|| TransportError::Protocol {
                        url: self.url(&format!("/sessions/{sid}")),
                        message: "session without dashboardId".into(),
                    })
            }
            Reply::Rejected(body) => Err(TransportError::Protocol {
                url: self.url(&format!("/sessions/{sid}")),
                message: body.to_string(),
            }),
        }
    }
}

fn field<T: serde::de::DeserializeOwned>(value: &Value) -> Option<T> {
    serde_json::from_value(value.clone()).ok()
}

fn read_hit(hit: &Value, observed: &mut Observed) {
    observed.visual_id = field(&hit["visualId"]);
    observed.region = field(&hit["region"]);
}

fn rejected(index: usize, step: &TraceStep, observed: Observed, body: Value) -> StepReport {
    StepReport {
        index,
        action: step.action,
        passed: false,
        diffs: vec![FieldDiff {
            field: "status".into(),
            expected: json!("success"),
            actual: body.get("code").cloned().unwrap_or(Value::Null),
        }],
        error: Some(body),
        observed,
    }
}

pub async fn run_trace(trace: &TaskTrace, endpoint: &str) -> Result<TraceReport, TransportError> {
    Replayer::new(endpoint).run_trace(trace).await
}

/// Loads one trace file, or every `*.json` file directly under a directory
/// in name order.
pub fn load_traces(path: &Path) -> Result<Vec<(PathBuf, TaskTrace)>, LoadError> {
    let io = |p: &Path, e: std::io::Error| LoadError::Io {
        path: p.to_path_buf(),
        message: e.to_string(),
    };
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    if files.is_empty() {
        return Err(LoadError::Empty(path.to_path_buf()));
    }
    files
        .into_iter()
        .map(|f| {
            let text = std::fs::read_to_string(&f).map_err(|e| io(&f, e))?;
            let trace = parse_trace(&text).map_err(|source| LoadError::Trace {
                path: f.clone(),
                source,
            })?;
            Ok((f, trace))
        })
        .collect()
}

/// Builds a trace from a session log so that replaying it checks the
/// recorded outcomes.
pub fn trace_from_log_text(name: &str, ndjson: &str) -> anyhow::Result<TaskTrace> {
    let records = onboard_core::orchestrator::parse_log(ndjson)?;
    Ok(trace_from_log(name, &records)?)
}
