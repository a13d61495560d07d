//! Adaptive Prediction Sets: the cumulative-mass conformity score and the
//! randomised set construction that breaks the boundary label at random.
//!
//! All functions here are pure; the uniform draw `u` used for the boundary
//! label is always supplied by the caller.

use crate::conformal::ScoreSet;
use crate::error::{Error, Result};
use crate::graph::NodeLabels;

/// Maximum allowed deviation of a row sum from 1 before a row is rejected.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

const RESCALE_EPS: f64 = 1e-12;

/// Slack used when comparing cumulative sums against a level, so that
/// rounding in partial sums (0.6 + 0.3 < 0.9) does not skip a rank.
const CUMSUM_SLACK: f64 = 1e-12;

/// Dense `rows x classes` matrix of class probabilities, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    rows: usize,
    classes: usize,
    values: Vec<f64>,
}

impl ProbabilityMatrix {
    /// Validates and renormalises a row-major matrix.
    ///
    /// Entries must be finite and non-negative and each row must sum to 1
    /// within [`SIMPLEX_TOLERANCE`]; rows inside the tolerance are rescaled
    /// to sum to 1.
    pub fn new(rows: usize, classes: usize, mut values: Vec<f64>) -> Result<Self> {
        if classes == 0 {
            return Err(Error::invalid("probability matrix needs at least one class"));
        }
        if values.len() != rows * classes {
            return Err(Error::invalid(format!(
                "expected {} values for a {rows}x{classes} matrix, got {}",
                rows * classes,
                values.len()
            )));
        }
        for (i, row) in values.chunks_mut(classes).enumerate() {
            normalize_row(row).map_err(|msg| Error::invalid(format!("row {i}: {msg}")))?;
        }
        Ok(Self {
            rows,
            classes,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != classes) {
            return Err(Error::invalid(format!(
                "row {i} has {} columns, expected {classes}",
                rows[i].len()
            )));
        }
        Self::new(rows.len(), classes, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.classes..(i + 1) * self.classes]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn normalize_row(row: &mut [f64]) -> std::result::Result<(), String> {
    if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(format!("entry {p} is not a finite non-negative probability"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(format!("row sums to {sum}, not 1"));
    }
    // rows already within rounding of 1 are left untouched so that
    // re-loading a written matrix is the identity
    if (sum - 1.0).abs() > RESCALE_EPS {
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(())
}

/// One probability row sorted in descending order, ties broken by
/// ascending class index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    order: Vec<usize>,
    rank: Vec<usize>,
    sorted: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RankedRow {
    pub fn new(row: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..row.len()).collect();
        // stable sort keeps ascending class index among equal probabilities
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
        let mut rank = vec![0; row.len()];
        for (r, &c) in order.iter().enumerate() {
            rank[c] = r;
        }
        let sorted: Vec<f64> = order.iter().map(|&c| row[c]).collect();
        let cumulative = sorted
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Self {
            order,
            rank,
            sorted,
            cumulative,
        }
    }

    pub fn classes(&self) -> usize {
        self.order.len()
    }

    /// Classes in descending probability order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Zero-based rank of `class` in the descending order.
    pub fn rank_of(&self, class: usize) -> usize {
        self.rank[class]
    }

    /// Deterministic APS score of `class`: the probability mass of every
    /// class ranked at or above it.
    pub fn score(&self, class: usize) -> f64 {
        self.cumulative[self.rank[class]]
    }

    /// Randomised APS score: the mass strictly above `class` plus the
    /// `(1 - u)` fraction of its own probability.
    ///
    /// `class` belongs to `randomized_aps_set(row, tau, u)` exactly when
    /// this score is below `tau`, so calibrating on these scores keeps the
    /// set construction and the quantile on the same footing.
    pub fn randomized_score(&self, class: usize, u: f64) -> f64 {
        let r = self.rank[class];
        let above = if r == 0 { 0.0 } else { self.cumulative[r - 1] };
        above + (1.0 - u) * self.sorted[r]
    }
}

fn check_label(classes: usize, label: usize) -> Result<()> {
    if label >= classes {
        return Err(Error::invalid(format!(
            "label {label} out of range for {classes} classes"
        )));
    }
    Ok(())
}

/// Cumulative sorted probability up to and including `true_label`'s rank.
pub fn aps_score(row: &[f64], true_label: usize) -> Result<f64> {
    check_label(row.len(), true_label)?;
    Ok(RankedRow::new(row).score(true_label))
}

pub fn randomized_aps_score(row: &[f64], true_label: usize, u: f64) -> Result<f64> {
    check_label(row.len(), true_label)?;
    Ok(RankedRow::new(row).randomized_score(true_label, u))
}

/// Smallest number of top classes whose mass reaches `tau`, in `1..=K`.
pub fn generalized_quantile(ranked: &RankedRow, tau: f64) -> usize {
    ranked
        .cumulative
        .iter()
        .position(|&c| c >= tau - CUMSUM_SLACK)
        .map_or(ranked.classes(), |i| i + 1)
}

/// Fraction of the boundary class's mass that overshoots `tau`; the
/// probability of dropping that class from the set.
pub fn tie_break_v(ranked: &RankedRow, tau: f64) -> Result<f64> {
    let l = generalized_quantile(ranked, tau);
    let boundary = ranked.sorted[l - 1];
    if boundary <= 0.0 {
        return Err(Error::DegenerateDistribution(format!(
            "boundary class at rank {l} has zero probability"
        )));
    }
    Ok(((ranked.cumulative[l - 1] - tau) / boundary).clamp(0.0, 1.0))
}

/// Randomised APS set at level `tau`: the `L - 1` most likely classes when
/// `u <= V`, otherwise the `L` most likely. Labels are returned ascending.
pub fn randomized_aps_set(row: &[f64], tau: f64, u: f64) -> Result<Vec<usize>> {
    randomized_set_ranked(&RankedRow::new(row), tau, u)
}

pub fn randomized_set_ranked(ranked: &RankedRow, tau: f64, u: f64) -> Result<Vec<usize>> {
    let l = generalized_quantile(ranked, tau);
    let v = tie_break_v(ranked, tau)?;
    let size = if u <= v { l - 1 } else { l };
    let mut labels = ranked.order[..size].to_vec();
    labels.sort_unstable();
    Ok(labels)
}

fn check_node(probs: &ProbabilityMatrix, labels: &NodeLabels, v: usize) -> Result<()> {
    if v >= probs.rows() {
        return Err(Error::invalid(format!("node {v} has no probability row")));
    }
    if v >= labels.len() {
        return Err(Error::invalid(format!("node {v} has no label")));
    }
    check_label(probs.classes(), labels.get(v))
}

/// Deterministic APS scores for `nodes`, paired with their ids.
pub fn score_calibration_set(
    probs: &ProbabilityMatrix,
    labels: &NodeLabels,
    nodes: &[usize],
) -> Result<ScoreSet> {
    let entries = nodes
        .iter()
        .map(|&v| {
            check_node(probs, labels, v)?;
            Ok((v, RankedRow::new(probs.row(v)).score(labels.get(v))))
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreSet::new(entries)
}

/// Randomised APS scores for `nodes`; `u[v]` is node `v`'s uniform draw.
pub fn score_calibration_set_randomized(
    probs: &ProbabilityMatrix,
    labels: &NodeLabels,
    nodes: &[usize],
    u: &[f64],
) -> Result<ScoreSet> {
    let entries = nodes
        .iter()
        .map(|&v| {
            check_node(probs, labels, v)?;
            let draw = *u
                .get(v)
                .ok_or_else(|| Error::invalid(format!("no uniform draw for node {v}")))?;
            Ok((v, RankedRow::new(probs.row(v)).randomized_score(labels.get(v), draw)))
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreSet::new(entries)
}
