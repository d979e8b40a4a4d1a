//! The sample sales dashboard shipped with the crate.

use serde_json::Value;

use crate::model::{parse_dashboard_spec, DashboardSpec};

pub const SAMPLE_DASHBOARD: &str = include_str!("../data/sample-dashboard.json");

pub fn sample_dashboard() -> DashboardSpec {
    parse_dashboard_spec(SAMPLE_DASHBOARD).expect("shipped sample dashboard is valid")
}

/// Every string and number stored in the visuals' display-only sample
/// data, as it would be printed.
pub fn sample_value_tokens(spec: &DashboardSpec) -> Vec<String> {
    fn walk(v: &Value, out: &mut Vec<String>) {
        match v {
            Value::String(s) => out.push(s.clone()),
            Value::Number(n) => out.push(n.to_string()),
            Value::Array(items) => items.iter().for_each(|i| walk(i, out)),
            Value::Object(map) => map.values().for_each(|i| walk(i, out)),
            Value::Bool(_) | Value::Null => {}
        }
    }
    let mut out = Vec::new();
    for v in &spec.visuals {
        if let Some(data) = &v.sample_data {
            walk(data, &mut out);
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VisualKind;

    #[test]
    fn composition() {
        let spec = sample_dashboard();
        assert_eq!(spec.visuals.len(), 8);
        let count = |k| spec.visuals.iter().filter(|v| v.kind == k).count();
        assert_eq!(count(VisualKind::Kpi), 3);
        assert_eq!(count(VisualKind::Slicer), 1);
        for k in [
            VisualKind::BarChart,
            VisualKind::LineChart,
            VisualKind::FunnelChart,
            VisualKind::MapChart,
        ] {
            assert_eq!(count(k), 1);
        }
    }

    #[test]
    fn value_tokens_are_collected() {
        let tokens = sample_value_tokens(&sample_dashboard());
        assert!(tokens.contains(&"Australia".to_string()));
        assert!(tokens.contains(&"18432175.62".to_string()));
    }
}
