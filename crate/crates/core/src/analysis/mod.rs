//! Judging model responses against ground truth and measuring how well the
//! number of intermediate tokens tracks the A* trace length.
//!
//! The correlation coefficients are our own quantification of the scatter;
//! `x` is always the ground-truth trace length in tokens (5 per A* operation)
//! and `y` the number of tokens the model produced before its first `plan`.

pub mod stats;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{parse_response, replay_trace, tokenize, Malformed};
use crate::dataset::{DatasetError, InstanceRecord};
use crate::maze::GeneratorKind;
use crate::search::{validate_plan, InvalidReason, Verdict};

pub use stats::{average_ranks, pearson, spearman};

/// Context limit used when none is given.
pub const DEFAULT_LIMIT: usize = 32_000;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("response for {response} judged against record {record}")]
    IdMismatch { record: String, response: String },
    #[error("response id {0} has no matching record")]
    UnknownId(String),
    #[error("two responses for id {0}")]
    DuplicateResponse(String),
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate sample: zero variance in {0}")]
    DegenerateSample(&'static str),
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JudgeOptions {
    pub limit: usize,
    /// Replay the reasoning prefix under A* legality rules.
    pub strict_trace: bool,
    /// Use the full response length as `y` instead of the pre-plan prefix.
    pub count_all_tokens: bool,
}

impl Default for JudgeOptions {
    fn default() -> Self {
        Self {
            limit: DEFAULT_LIMIT,
            strict_trace: false,
            count_all_tokens: false,
        }
    }
}

impl JudgeOptions {
    pub fn with_limit(limit: usize) -> Self {
        Self {
            limit,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelResponse {
    pub id: String,
    pub text: String,
    pub token_count: usize,
}

impl ModelResponse {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Self {
            id: id.into(),
            token_count: text.split_whitespace().count(),
            text,
        }
    }

    /// The generation hit the context limit.
    pub fn truncated(&self, limit: usize) -> bool {
        self.token_count >= limit
    }
}

/// Parses a responses file: one `id<TAB>tokens` record per line.
pub fn parse_responses(text: &str, path: &Path) -> Result<Vec<ModelResponse>, AnalysisError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let (id, body) = line.split_once('\t').ok_or_else(|| AnalysisError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected `id<TAB>tokens`".into(),
            })?;
            Ok(ModelResponse::new(id.trim(), body))
        })
        .collect()
}

pub fn read_responses(path: &Path) -> Result<Vec<ModelResponse>, AnalysisError> {
    let text = fs::read_to_string(path).map_err(|source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_responses(&text, path)
}

pub fn render_responses(responses: &[ModelResponse]) -> String {
    responses.iter().map(|r| format!("{}\t{}\n", r.id, r.text)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub id: String,
    pub kind: GeneratorKind,
    /// Ground-truth trace length in tokens.
    pub x: usize,
    /// Generated intermediate token count.
    pub y: usize,
    pub verdict: Verdict,
    pub truncated: bool,
}

pub fn judge_response(
    record: &InstanceRecord,
    response: &ModelResponse,
    opts: &JudgeOptions,
) -> Result<ScatterPoint, AnalysisError> {
    if record.id != response.id {
        return Err(AnalysisError::IdMismatch {
            record: record.id.clone(),
            response: response.id.clone(),
        });
    }
    let tokens = tokenize(&response.text);
    let parsed = parse_response(&tokens);
    let truncated = response.truncated(opts.limit);
    let verdict = match parsed.plan.clone() {
        Err(Malformed::NoPlan) => Verdict::Invalid(InvalidReason::NoPlan),
        Err(m) => Verdict::Invalid(InvalidReason::MalformedPlan {
            position: m.position().unwrap_or(0),
        }),
        Ok(_) if truncated => Verdict::Invalid(InvalidReason::Truncated),
        Ok(plan) => {
            let grid = record.grid()?;
            match opts.strict_trace {
                true => match replay_trace(&grid, &tokens[..parsed.trace_prefix_len]) {
                    Ok(()) => validate_plan(&grid, &plan),
                    Err(e) => Verdict::Invalid(InvalidReason::IllegalTrace { event: e.event }),
                },
                false => validate_plan(&grid, &plan),
            }
        }
    };
    Ok(ScatterPoint {
        id: record.id.clone(),
        kind: record.kind,
        x: record.trace_tokens(),
        y: if opts.count_all_tokens {
            parsed.total_tokens
        } else {
            parsed.intermediate_token_count()
        },
        verdict,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStats {
    pub pearson: f64,
    pub spearman: f64,
    pub n: usize,
    pub mean_abs_diff: f64,
    /// Share of points with `|y - x| <= 0.1 x`.
    pub within_10pct: f64,
}

pub fn correlate(points: &[ScatterPoint]) -> Result<CorrelationStats, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewPoints(points.len()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y as f64).collect();
    correlate_xy(&xs, &ys)
}

/// [`correlate`] on raw samples.
pub fn correlate_xy(xs: &[f64], ys: &[f64]) -> Result<CorrelationStats, AnalysisError> {
    let n = xs.len();
    if n < 2 {
        return Err(AnalysisError::TooFewPoints(n));
    }
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if constant(xs) {
        return Err(AnalysisError::DegenerateSample("x"));
    }
    if constant(ys) {
        return Err(AnalysisError::DegenerateSample("y"));
    }
    let pearson = pearson(xs, ys).ok_or(AnalysisError::DegenerateSample("x or y"))?;
    let spearman = spearman(xs, ys).ok_or(AnalysisError::DegenerateSample("ranks"))?;
    let mean_abs_diff = xs.iter().zip(ys).map(|(x, y)| (y - x).abs()).sum::<f64>() / n as f64;
    let close = xs.iter().zip(ys).filter(|(x, y)| (*y - *x).abs() <= 0.1 * *x).count();
    Ok(CorrelationStats {
        pearson,
        spearman,
        n,
        mean_abs_diff,
        within_10pct: close as f64 / n as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub count: usize,
    pub valid: usize,
    pub optimal: usize,
    pub truncated: usize,
    pub valid_rate: f64,
    pub optimal_rate: f64,
    pub truncation_rate: f64,
    pub correlation: Option<CorrelationStats>,
    /// Why `correlation` is missing, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_undefined: Option<String>,
}

impl KindSummary {
    fn from_points(points: &[&ScatterPoint]) -> Self {
        let count = points.len();
        let valid = points.iter().filter(|p| p.verdict.is_valid()).count();
        let optimal = points.iter().filter(|p| p.verdict.is_optimal()).count();
        let truncated = points.iter().filter(|p| p.truncated).count();
        let rate = |k: usize| if count == 0 { 0.0 } else { k as f64 / count as f64 };
        let owned: Vec<ScatterPoint> = points.iter().map(|p| (*p).clone()).collect();
        let (correlation, correlation_undefined) = match correlate(&owned) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            count,
            valid,
            optimal,
            truncated,
            valid_rate: rate(valid),
            optimal_rate: rate(optimal),
            truncation_rate: rate(truncated),
            correlation,
            correlation_undefined,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub limit: usize,
    pub per_kind: BTreeMap<GeneratorKind, KindSummary>,
    pub global: KindSummary,
    /// Records that received no response.
    pub missing_responses: Vec<String>,
    /// Sorted by kind, then x, then y, then id.
    pub scatter: Vec<ScatterPoint>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Judges every response and aggregates per generator kind. The result does
/// not depend on the order of `records` or `responses`.
pub fn build_report(
    records: &[InstanceRecord],
    responses: &[ModelResponse],
    opts: &JudgeOptions,
) -> Result<AnalysisReport, AnalysisError> {
    let by_id: HashMap<&str, &InstanceRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut answered: HashMap<&str, &ModelResponse> = HashMap::with_capacity(responses.len());
    for resp in responses {
        if !by_id.contains_key(resp.id.as_str()) {
            return Err(AnalysisError::UnknownId(resp.id.clone()));
        }
        if answered.insert(resp.id.as_str(), resp).is_some() {
            return Err(AnalysisError::DuplicateResponse(resp.id.clone()));
        }
    }

    let judge = |resp: &&ModelResponse| judge_response(by_id[resp.id.as_str()], resp, opts);
    #[cfg(feature = "parallel")]
    let points: Result<Vec<_>, _> = {
        use rayon::prelude::*;
        responses.iter().collect::<Vec<_>>().par_iter().map(judge).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let points: Result<Vec<_>, _> = responses.iter().collect::<Vec<_>>().iter().map(judge).collect();
    let mut scatter = points?;
    scatter.sort_by(|a, b| (a.kind, a.x, a.y, &a.id).cmp(&(b.kind, b.x, b.y, &b.id)));

    let mut groups: BTreeMap<GeneratorKind, Vec<&ScatterPoint>> = BTreeMap::new();
    for p in &scatter {
        groups.entry(p.kind).or_default().push(p);
    }
    let per_kind = groups
        .iter()
        .map(|(k, pts)| (*k, KindSummary::from_points(pts)))
        .collect();
    let global = KindSummary::from_points(&scatter.iter().collect::<Vec<_>>());

    let mut missing_responses: Vec<String> = records
        .iter()
        .filter(|r| !answered.contains_key(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect();
    missing_responses.sort();

    Ok(AnalysisReport {
        limit: opts.limit,
        per_kind,
        global,
        missing_responses,
        scatter,
    })
}

pub const SCATTER_CSV_HEADER: &str = "kind,x,y,verdict,truncated";

pub fn scatter_csv(report: &AnalysisReport) -> String {
    let mut out = String::from(SCATTER_CSV_HEADER);
    out.push('\n');
    for p in &report.scatter {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.kind,
            p.x,
            p.y,
            p.verdict.label(),
            p.truncated
        ));
    }
    out
}

pub fn emit_scatter_csv(report: &AnalysisReport, path: &Path) -> Result<(), AnalysisError> {
    fs::write(path, scatter_csv(report)).map_err(|source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `(kind, x, y)` rows of a scatter CSV.
pub fn parse_scatter_csv(text: &str) -> Result<Vec<(GeneratorKind, usize, usize)>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(SCATTER_CSV_HEADER) {
        return Err("missing header".into());
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(format!("row {}: expected 5 columns", i + 2));
            }
            let kind = f[0].parse().map_err(|e| format!("row {}: {e}", i + 2))?;
            let x = f[1].parse().map_err(|e| format!("row {}: {e}", i + 2))?;
            let y = f[2].parse().map_err(|e| format!("row {}: {e}", i + 2))?;
            Ok((kind, x, y))
        })
        .collect()
}
