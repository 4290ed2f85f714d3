//! Result files: a `#meta` header line followed by one JSON task per line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use rolescore_core::{RecordError, RunMeta, RunRecord, TaskResult};

pub const META_PREFIX: &str = "#meta";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResultsError {
    #[error("line {line}: malformed line: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    SchemaViolation {
        field: String,
        line: usize,
        message: String,
    },
    #[error("line {line}: duplicate task_id `{id}`")]
    DuplicateTaskId { id: String, line: usize },
    #[error("run contains no tasks")]
    EmptyRun,
    #[error("missing `{META_PREFIX}` header line")]
    MissingHeader,
}

/// Parses one run from result-file text. Blank lines are skipped; line
/// numbers in errors are 1-based.
pub fn parse_results(text: &str) -> Result<RunRecord, ResultsError> {
    let mut meta: Option<RunMeta> = None;
    let mut tasks = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(META_PREFIX) {
            if meta.is_some() || !tasks.is_empty() {
                return Err(ResultsError::MalformedLine {
                    line,
                    message: "header must precede every task line".into(),
                });
            }
            meta = Some(decode(rest.trim(), line)?);
            continue;
        }
        if meta.is_none() {
            return Err(ResultsError::MissingHeader);
        }
        tasks.push(decode::<TaskResult>(trimmed, line)?);
        lines.push(line);
    }
    let meta = meta.ok_or(ResultsError::MissingHeader)?;

    let duplicate_line = |id: &str| {
        let second = tasks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.task_id == id)
            .nth(1)
            .map_or(0, |(i, _)| i);
        lines.get(second).copied().unwrap_or(0)
    };
    let dup_lines: Vec<(String, usize)> = tasks
        .iter()
        .map(|t| (t.task_id.clone(), duplicate_line(&t.task_id)))
        .collect();

    RunRecord::new(meta, tasks).map_err(|e| match e {
        RecordError::EmptyRun => ResultsError::EmptyRun,
        RecordError::DuplicateTaskId(id) => {
            let line = dup_lines
                .iter()
                .find(|(d, _)| *d == id)
                .map_or(0, |(_, l)| *l);
            ResultsError::DuplicateTaskId { id, line }
        }
        RecordError::SchemaViolation {
            index,
            field,
            message,
        } => ResultsError::SchemaViolation {
            field: field.to_string(),
            line: lines[index],
            message,
        },
        RecordError::InvalidRange { start, end } => ResultsError::SchemaViolation {
            field: "line_range".into(),
            line: 0,
            message: format!("invalid range [{start}, {end}]"),
        },
    })
}

fn decode<T: DeserializeOwned>(text: &str, line: usize) -> Result<T, ResultsError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ResultsError::MalformedLine {
            line,
            message: e.to_string(),
        })?;
    if !value.is_object() {
        return Err(ResultsError::MalformedLine {
            line,
            message: "expected a JSON object".into(),
        });
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let field = if path == "." {
            missing_field(&inner).unwrap_or("?").to_string()
        } else {
            path
        };
        ResultsError::SchemaViolation {
            field,
            line,
            message: inner,
        }
    })
}

/// Extracts `x` from serde's "missing field `x`" message.
fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

/// Serializes a run in the result-file format. Parsing the output yields an
/// equal run.
pub fn write_results(run: &RunRecord) -> String {
    let mut out = String::new();
    out.push_str(META_PREFIX);
    out.push(' ');
    out.push_str(&serde_json::to_string(run.meta()).expect("run metadata serializes"));
    out.push('\n');
    for task in run.tasks() {
        out.push_str(&serde_json::to_string(task).expect("tasks serialize"));
        out.push('\n');
    }
    out
}

/// Failure to obtain a run from disk.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ResultsError },
}

pub fn load_file(path: &Path) -> Result<RunRecord, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_results(&text).map_err(|source| LoadError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a single file, or every `*.jsonl` file of a directory in file-name
/// order.
pub fn load_path(path: &Path) -> Result<Vec<RunRecord>, LoadError> {
    if !path.is_dir() {
        return load_file(path).map(|r| vec![r]);
    }
    let io_err = |source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io_err)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    files.sort();
    files.iter().map(|p| load_file(p)).collect()
}
