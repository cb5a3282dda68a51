//! Report assembly: jobs run in parallel, results are reassembled in stable
//! key order, and payloads serialize with sorted keys so identical configs
//! produce identical reports (the `timing` section is the one exception).

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub struct Job {
    pub key: String,
    pub kind: &'static str,
    pub run: Box<dyn Fn() -> anyhow::Result<Value> + Send + Sync>,
}

impl Job {
    pub fn new<T: Serialize>(
        key: impl Into<String>,
        kind: &'static str,
        run: impl Fn() -> anyhow::Result<T> + Send + Sync + 'static,
    ) -> Self {
        Job {
            key: key.into(),
            kind,
            run: Box::new(move || Ok(serde_json::to_value(run()?)?)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultEntry {
    pub key: String,
    pub kind: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub config: Value,
    pub results: Vec<ResultEntry>,
    pub warnings: Vec<String>,
    pub timing: Value,
}

/// Executes all jobs (in parallel) and assembles the bundle deterministically.
/// A failing job becomes an error entry plus a warning; it does not abort
/// the bundle.
pub fn run_jobs(config: Value, jobs: Vec<Job>) -> ReportBundle {
    let start = std::time::Instant::now();
    let mut results: Vec<ResultEntry> = jobs
        .par_iter()
        .map(|job| match (job.run)() {
            Ok(payload) => ResultEntry {
                key: job.key.clone(),
                kind: job.kind.into(),
                status: "ok".into(),
                payload: Some(payload),
                error: None,
            },
            Err(err) => ResultEntry {
                key: job.key.clone(),
                kind: job.kind.into(),
                status: "error".into(),
                payload: None,
                error: Some(err.to_string()),
            },
        })
        .collect();
    results.sort_by(|a, b| a.key.cmp(&b.key));

    let mut warnings = Vec::new();
    let mut inconclusive = 0usize;
    for entry in &results {
        if entry.status == "error" {
            warnings.push(format!(
                "job `{}` failed: {}",
                entry.key,
                entry.error.as_deref().unwrap_or("unknown")
            ));
        } else if let Some(payload) = &entry.payload {
            inconclusive += count_matches(payload, "verdict", "inconclusive");
        }
    }
    if inconclusive > 0 {
        warnings.push(format!("{inconclusive} inconclusive verdict(s)"));
    }

    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    ReportBundle {
        config,
        results,
        warnings,
        timing: json!({
            "wall_ms": start.elapsed().as_millis() as u64,
            "timestamp_unix_ms": timestamp,
        }),
    }
}

impl ReportBundle {
    /// True when any result carries a violated verdict or a failed identity.
    pub fn has_violation(&self) -> bool {
        self.results.iter().any(|entry| {
            entry
                .payload
                .as_ref()
                .map(|p| count_matches(p, "verdict", "violated") > 0 || has_failed_identity(p))
                .unwrap_or(false)
        })
    }

    /// Canonical JSON: serde_json maps are BTree-backed, so keys come out
    /// sorted.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("bundle serializes");
        serde_json::to_string_pretty(&value).expect("json renders")
    }

    /// Flat CSV, one row per result with the headline numbers extracted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "key,kind,status,value,uncertainty,samples,method,ratio,relative_gap,verdict,error\n",
        );
        for entry in &self.results {
            let p = entry.payload.as_ref();
            let field = |path: &[&str]| -> String {
                p.and_then(|v| lookup(v, path))
                    .map(render_scalar)
                    .unwrap_or_default()
            };
            let value = first_nonempty(&[
                field(&["value"]),
                field(&["total", "value"]),
                field(&["lhs", "value"]),
                field(&["slope"]),
            ]);
            let uncertainty = first_nonempty(&[
                field(&["uncertainty"]),
                field(&["total", "uncertainty"]),
                field(&["lhs", "uncertainty"]),
                field(&["slope_uncertainty"]),
            ]);
            let samples = first_nonempty(&[field(&["samples"]), field(&["lhs", "samples"])]);
            let method = first_nonempty(&[field(&["method"]), field(&["lhs", "method"])]);
            let verdict = first_nonempty(&[
                field(&["verdict"]),
                p.and_then(|v| lookup(v, &["passed"]))
                    .map(|v| {
                        if v.as_bool() == Some(true) {
                            "holds".into()
                        } else {
                            "violated".into()
                        }
                    })
                    .unwrap_or_default(),
            ]);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                entry.key,
                entry.kind,
                entry.status,
                value,
                uncertainty,
                samples,
                method,
                field(&["ratio"]),
                field(&["relative_gap"]),
                verdict,
                entry.error.clone().unwrap_or_default().replace(',', ";"),
            ));
        }
        out
    }
}

fn first_nonempty(candidates: &[String]) -> String {
    candidates
        .iter()
        .find(|s| !s.is_empty())
        .cloned()
        .unwrap_or_default()
}

fn lookup<'v>(value: &'v Value, path: &[&str]) -> Option<&'v Value> {
    let mut cursor = value;
    for key in path {
        cursor = cursor.get(key)?;
    }
    Some(cursor)
}

fn render_scalar(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        _ => String::new(),
    }
}

fn count_matches(value: &Value, key: &str, needle: &str) -> usize {
    match value {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| {
                let own = (k == key && v.as_str() == Some(needle)) as usize;
                own + count_matches(v, key, needle)
            })
            .sum(),
        Value::Array(items) => items.iter().map(|v| count_matches(v, key, needle)).sum(),
        _ => 0,
    }
}

fn has_failed_identity(value: &Value) -> bool {
    match value {
        Value::Object(map) => {
            let own = map.get("passed").and_then(Value::as_bool) == Some(false)
                && map.contains_key("relative_gap");
            own || map.values().any(has_failed_identity)
        }
        Value::Array(items) => items.iter().any(has_failed_identity),
        _ => false,
    }
}
