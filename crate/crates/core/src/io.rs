//! Plain-text file formats.
//!
//! * edge list: one `source target` pair per line, whitespace separated,
//!   0-indexed; `#` lines and blank lines are skipped.
//! * labels: one integer class per line, line `i` is node `i`.
//! * probabilities: CSV, one row per node, optional `class_*` header.
//! * node lists: one node id per line.
//! * metadata / config: `key=value` lines, `#` comments.
//!
//! Writers emit the canonical form, which the readers map back to the
//! same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::aps::ProbabilityMatrix;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabels};
use crate::harness::Dataset;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_id(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(path, line, format!("`{tok}` is not a non-negative integer")))
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<Vec<(usize, usize)>> {
    Ok(parse_edge_lines(text, path)?.into_iter().map(|e| (e.1, e.2)).collect())
}

/// Edges with the line they came from.
fn parse_edge_lines(text: &str, path: &Path) -> Result<Vec<(usize, usize, usize)>> {
    content_lines(text)
        .map(|(line, l)| {
            let mut toks = l.split_whitespace();
            match (toks.next(), toks.next(), toks.next()) {
                (Some(a), Some(b), None) => {
                    Ok((line, parse_id(path, line, a)?, parse_id(path, line, b)?))
                }
                _ => Err(parse_err(path, line, "expected two node ids")),
            }
        })
        .collect()
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Labels are one per line; blank lines are not allowed since line
/// numbers are node ids.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_id(path, i + 1, l.trim()))
        .collect()
}

pub fn format_labels(labels: &NodeLabels) -> String {
    let mut out = String::new();
    for &y in labels.as_slice() {
        let _ = writeln!(out, "{y}");
    }
    out
}

pub fn parse_probabilities(text: &str, path: &Path) -> Result<ProbabilityMatrix> {
    let mut classes = None;
    let mut values = Vec::new();
    let mut rows = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if rows == 0 && classes.is_none() && l.starts_with("class_") {
            classes = Some(l.split(',').count());
            continue;
        }
        let start = values.len();
        for tok in l.split(',') {
            let tok = tok.trim();
            let p: f64 = tok
                .parse()
                .map_err(|_| parse_err(path, line, format!("`{tok}` is not a number")))?;
            values.push(p);
        }
        let width = values.len() - start;
        match classes {
            None => classes = Some(width),
            Some(k) if k != width => {
                return Err(parse_err(path, line, format!("expected {k} columns, found {width}")))
            }
            _ => {}
        }
        crate::aps::normalize_row(&mut values[start..]).map_err(|m| parse_err(path, line, m))?;
        rows += 1;
    }
    let classes = classes.ok_or_else(|| parse_err(path, 1, "no probability rows"))?;
    ProbabilityMatrix::new(rows, classes, values)
}

pub fn format_probabilities(probs: &ProbabilityMatrix) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..probs.classes()).map(|c| format!("class_{c}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..probs.rows() {
        let row: Vec<String> = probs.row(i).iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_node_list(text: &str, path: &Path) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(line, l)| parse_id(path, line, l))
        .collect()
}

pub fn format_node_list(nodes: &[usize]) -> String {
    nodes.iter().map(|v| format!("{v}\n")).collect()
}

/// `key=value` pairs in file order, with line numbers.
pub fn parse_key_values(text: &str, path: &Path) -> Result<Vec<(usize, String, String)>> {
    content_lines(text)
        .map(|(line, l)| {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| parse_err(path, line, "expected key=value"))?;
            Ok((line, k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

pub fn format_key_values(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

/// Paths of the files that make up one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub edges: PathBuf,
    pub labels: PathBuf,
    pub probs: PathBuf,
    pub test_nodes: Option<PathBuf>,
}

impl DatasetPaths {
    /// Standard file names under a common prefix, as written by `synth`.
    pub fn with_prefix(prefix: &Path) -> Self {
        let p = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        Self {
            edges: p(".edges"),
            labels: p(".labels"),
            probs: p(".probs.csv"),
            test_nodes: None,
        }
    }

    pub fn metadata(prefix: &Path) -> PathBuf {
        let mut s = prefix.as_os_str().to_owned();
        s.push(".meta");
        PathBuf::from(s)
    }
}

/// Reads and cross-checks a dataset. The labels file fixes the node count;
/// the other files must agree with it.
pub fn load_dataset(paths: &DatasetPaths) -> Result<Dataset> {
    let labels_raw = parse_labels(&read_text(&paths.labels)?, &paths.labels)?;
    let probs = parse_probabilities(&read_text(&paths.probs)?, &paths.probs)?;
    let n = labels_raw.len();
    if n != probs.rows() {
        return Err(parse_err(
            &paths.labels,
            n.min(probs.rows()) + 1,
            format!("{n} labels but {} probability rows in {}", probs.rows(), paths.probs.display()),
        ));
    }
    let k = probs.classes();
    if let Some((i, &y)) = labels_raw.iter().enumerate().find(|(_, &y)| y >= k) {
        return Err(parse_err(
            &paths.labels,
            i + 1,
            format!("label {y} exceeds the {k} probability columns"),
        ));
    }
    let labels = NodeLabels::new(labels_raw, k.max(2))?;

    let edges = parse_edge_lines(&read_text(&paths.edges)?, &paths.edges)?;
    if let Some(&(line, u, v)) = edges.iter().find(|e| e.1 >= n || e.2 >= n) {
        return Err(parse_err(
            &paths.edges,
            line,
            format!("edge ({u}, {v}) references a node outside [0, {n})"),
        ));
    }
    let graph = Graph::from_edges(n, edges.into_iter().map(|e| (e.1, e.2)))?;

    let test_nodes = match &paths.test_nodes {
        Some(p) => {
            let text = read_text(p)?;
            let nodes: Vec<(usize, usize)> = content_lines(&text)
                .map(|(line, l)| Ok((line, parse_id(p, line, l)?)))
                .collect::<Result<_>>()?;
            if let Some(&(line, v)) = nodes.iter().find(|e| e.1 >= n) {
                return Err(parse_err(p, line, format!("node {v} outside [0, {n})")));
            }
            Some(nodes.into_iter().map(|e| e.1).collect())
        }
        None => None,
    };
    Dataset::new(graph, labels, probs, test_nodes)
}

/// Writes the canonical edge, label and probability files under `prefix`.
pub fn write_dataset(prefix: &Path, data: &Dataset) -> Result<DatasetPaths> {
    let paths = DatasetPaths::with_prefix(prefix);
    write_text(&paths.edges, &format_edge_list(&data.graph))?;
    write_text(&paths.labels, &format_labels(&data.labels))?;
    write_text(&paths.probs, &format_probabilities(&data.probs))?;
    Ok(paths)
}
