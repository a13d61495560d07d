//! Split-conformal and weighted (non-exchangeable) calibration of APS
//! thresholds, neighbourhood-weighted prediction and the coverage-gap
//! bound.
//!
//! The weighted quantile places mass `w_i / (W + 1)` on each calibration
//! score, with `W = sum_i w_i`, and the remaining `1 / (W + 1)` on `+inf`
//! for the test point. With unit weights this reduces exactly to the
//! split-conformal rule: the `ceil((n + 1)(1 - alpha))`-th smallest score.
//! Both paths compare un-normalised cumulative weight against the same
//! target `(1 - alpha)(W + 1)`, so they agree bit for bit.

use std::cell::OnceCell;
use std::fmt;

use crate::aps::{randomized_set_ranked, ProbabilityMatrix, RankedRow};
use crate::error::{Error, Result};
use crate::graph::{Graph, HopWalker, NodeLabels};

/// Default neighbourhood depth.
pub const DEFAULT_K: usize = 2;
/// Default per-hop decay for [`WeightScheme::HopDecay`].
pub const DEFAULT_DECAY: f64 = 0.5;

/// Slack subtracted from the cumulative-mass target so that products such
/// as `100 * 0.9` that land a hair above an integer do not skip an index.
const TARGET_SLACK: f64 = 1e-9;

/// Calibration scores keyed by node id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    entries: Vec<(usize, f64)>,
}

impl ScoreSet {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut ids: Vec<usize> = entries.iter().map(|e| e.0).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("node {} scored twice", w[0])));
        }
        if let Some(&(v, s)) = entries.iter().find(|e| !e.1.is_finite()) {
            return Err(Error::invalid(format!("score {s} of node {v} is not finite")));
        }
        Ok(Self { entries })
    }

    /// Builds a set from bare scores, numbering entries `0..n`.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        Self::new(scores.iter().copied().enumerate().collect())
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A calibrated score threshold. `value` is `f64::INFINITY` when the
/// requested mass is never reached by finite scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileThreshold {
    pub value: f64,
    pub effective_sample_size: f64,
}

impl QuantileThreshold {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

impl fmt::Display for QuantileThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// How calibration nodes around a test node are weighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// Every pool node gets weight 1; the graph is ignored.
    UniformFull,
    /// Weight 1 within `k` hops, 0 elsewhere.
    KHopIndicator { k: usize },
    /// Weight `decay^(d - 1)` at hop `d <= k`.
    HopDecay { k: usize, decay: f64 },
    /// Weight 1 at even hop distances `2, 4, .., 2 * floor(k / 2)`.
    AlternatingHeterophilic { k: usize },
}

impl WeightScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightScheme::UniformFull => Ok(()),
            WeightScheme::KHopIndicator { k } | WeightScheme::AlternatingHeterophilic { k }
                if k == 0 =>
            {
                Err(Error::invalid("neighbourhood depth k must be at least 1"))
            }
            WeightScheme::HopDecay { k, decay } => {
                if k == 0 {
                    Err(Error::invalid("neighbourhood depth k must be at least 1"))
                } else if !(decay > 0.0 && decay <= 1.0) {
                    Err(Error::invalid(format!("hop decay {decay} must lie in (0, 1]")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Search depth, or `None` for the graph-free scheme.
    pub fn depth(&self) -> Option<usize> {
        match *self {
            WeightScheme::UniformFull => None,
            WeightScheme::KHopIndicator { k }
            | WeightScheme::HopDecay { k, .. }
            | WeightScheme::AlternatingHeterophilic { k } => Some(k),
        }
    }

    /// Weight of a node at shortest-path distance `hop >= 1`.
    pub fn weight_at(&self, hop: usize) -> f64 {
        match *self {
            WeightScheme::UniformFull => 1.0,
            WeightScheme::KHopIndicator { k } => f64::from(u8::from(hop <= k)),
            WeightScheme::HopDecay { k, decay } => {
                if hop <= k {
                    decay.powi(hop as i32 - 1)
                } else {
                    0.0
                }
            }
            WeightScheme::AlternatingHeterophilic { k } => {
                f64::from(u8::from(hop.is_multiple_of(2) && hop <= 2 * (k / 2)))
            }
        }
    }
}

/// What to do when a test node has no weighted calibration neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyNeighborhoodPolicy {
    /// Return every label and flag the set as a fallback.
    #[default]
    FullSet,
    Error,
}

/// Prediction set for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub node: usize,
    /// Ascending class indices.
    pub labels: Vec<usize>,
    pub threshold: QuantileThreshold,
    pub contains_truth: Option<bool>,
    /// Set when the full label set was returned because no calibration
    /// node carried positive weight.
    pub fallback: bool,
}

impl PredictionSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

fn mass_target(alpha: f64, total_weight: f64) -> f64 {
    (1.0 - alpha) * (total_weight + 1.0) - TARGET_SLACK
}

/// Threshold at the `ceil((n + 1)(1 - alpha))`-th smallest of `sorted`
/// (ascending), or `+inf` when that index exceeds `n`.
fn split_from_sorted(sorted: &[f64], alpha: f64) -> QuantileThreshold {
    let n = sorted.len();
    let index = (mass_target(alpha, n as f64).ceil().max(1.0)) as usize;
    QuantileThreshold {
        value: if index > n { f64::INFINITY } else { sorted[index - 1] },
        effective_sample_size: n as f64,
    }
}

/// Split-conformal threshold.
pub fn split_threshold(scores: &ScoreSet, alpha: f64) -> Result<QuantileThreshold> {
    check_alpha(alpha)?;
    if scores.is_empty() {
        return Err(Error::InsufficientCalibration("no calibration scores".into()));
    }
    let mut sorted: Vec<f64> = scores.scores().collect();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(split_from_sorted(&sorted, alpha))
}

/// Weighted quantile over `(score, weight)` pairs with positive weights.
/// Reorders `pairs`.
fn weighted_from_pairs(pairs: &mut [(f64, f64)], alpha: f64) -> QuantileThreshold {
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let target = mass_target(alpha, total);
    let mut cumulative = 0.0;
    let mut value = f64::INFINITY;
    for &(score, weight) in pairs.iter() {
        cumulative += weight;
        if cumulative >= target {
            value = score;
            break;
        }
    }
    QuantileThreshold {
        value,
        effective_sample_size: total,
    }
}

/// Non-exchangeable threshold: the `(1 - alpha)` quantile of the weighted
/// score distribution with a point mass at `+inf` for the test point.
pub fn weighted_threshold(
    scores: &ScoreSet,
    weights: &[f64],
    alpha: f64,
) -> Result<QuantileThreshold> {
    check_alpha(alpha)?;
    if weights.len() != scores.len() {
        return Err(Error::invalid(format!(
            "{} weights for {} scores",
            weights.len(),
            scores.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::invalid(format!("weight {w} outside [0, 1]")));
    }
    let mut pairs: Vec<(f64, f64)> = scores
        .scores()
        .zip(weights.iter().copied())
        .filter(|p| p.1 > 0.0)
        .collect();
    if pairs.is_empty() {
        return Err(Error::InsufficientCalibration(
            "every calibration weight is zero".into(),
        ));
    }
    Ok(weighted_from_pairs(&mut pairs, alpha))
}

/// Upper bound on the coverage gap: `sum_i w_i t_i / (1 + sum_i w_i)`,
/// where `t_i` bounds the total-variation distance incurred by swapping
/// the test point with calibration point `i`.
pub fn coverage_gap_bound(weights: &[f64], tv_bounds: &[f64]) -> Result<f64> {
    if weights.len() != tv_bounds.len() {
        return Err(Error::invalid(format!(
            "{} weights but {} total-variation bounds",
            weights.len(),
            tv_bounds.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::invalid(format!("weight {w} is negative or not finite")));
    }
    if let Some(t) = tv_bounds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::invalid(format!("total-variation bound {t} outside [0, 1]")));
    }
    let total: f64 = weights.iter().sum();
    let weighted: f64 = weights.iter().zip(tv_bounds).map(|(w, t)| w * t).sum();
    Ok(weighted / (1.0 + total))
}

/// How calibration scores are computed.
#[derive(Debug, Clone, Copy)]
pub enum Scoring<'u> {
    /// Cumulative mass through the true label's rank.
    Deterministic,
    /// Randomised score using `u[v]` as node `v`'s draw. Consistent with
    /// the randomised set construction, so coverage is not inflated.
    Randomized(&'u [f64]),
}

/// Calibration nodes and their scores, indexed by node id.
#[derive(Debug, Clone)]
pub struct CalibrationPool {
    nodes: Vec<usize>,
    in_pool: Vec<bool>,
    scores: Vec<f64>,
}

impl CalibrationPool {
    pub fn new(
        probs: &ProbabilityMatrix,
        labels: &NodeLabels,
        nodes: &[usize],
        scoring: Scoring<'_>,
    ) -> Result<Self> {
        Self::build(probs.rows(), labels, nodes, scoring, |v| RankedRow::new(probs.row(v)))
    }

    /// Same as [`CalibrationPool::new`] with rows already ranked.
    pub fn from_ranked(
        ranked: &[RankedRow],
        labels: &NodeLabels,
        nodes: &[usize],
        scoring: Scoring<'_>,
    ) -> Result<Self> {
        Self::build(ranked.len(), labels, nodes, scoring, |v| ranked[v].clone())
    }

    fn build<F>(
        rows: usize,
        labels: &NodeLabels,
        nodes: &[usize],
        scoring: Scoring<'_>,
        rank: F,
    ) -> Result<Self>
    where
        F: Fn(usize) -> RankedRow,
    {
        let mut in_pool = vec![false; rows];
        let mut scores = vec![f64::NAN; rows];
        let mut sorted_nodes = nodes.to_vec();
        sorted_nodes.sort_unstable();
        for &v in &sorted_nodes {
            if v >= rows {
                return Err(Error::invalid(format!("calibration node {v} has no probability row")));
            }
            if v >= labels.len() {
                return Err(Error::invalid(format!("calibration node {v} has no label")));
            }
            if in_pool[v] {
                return Err(Error::invalid(format!("calibration node {v} listed twice")));
            }
            let ranked = rank(v);
            let y = labels.get(v);
            if y >= ranked.classes() {
                return Err(Error::invalid(format!(
                    "label {y} of node {v} exceeds the probability columns"
                )));
            }
            scores[v] = match scoring {
                Scoring::Deterministic => ranked.score(y),
                Scoring::Randomized(u) => {
                    let draw = *u
                        .get(v)
                        .ok_or_else(|| Error::invalid(format!("no uniform draw for node {v}")))?;
                    ranked.randomized_score(y, draw)
                }
            };
            in_pool[v] = true;
        }
        Ok(Self {
            nodes: sorted_nodes,
            in_pool,
            scores,
        })
    }

    /// Pool node ids, ascending.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.in_pool.get(v).copied().unwrap_or(false)
    }

    pub fn score(&self, v: usize) -> Option<f64> {
        self.contains(v).then(|| self.scores[v])
    }

    pub fn score_set(&self) -> ScoreSet {
        ScoreSet {
            entries: self.nodes.iter().map(|&v| (v, self.scores[v])).collect(),
        }
    }
}

/// Reusable prediction context over one calibration pool.
///
/// Holds BFS scratch space and caches the sorted pool scores for the
/// graph-free baseline, so many test nodes can be served cheaply.
pub struct Predictor<'a> {
    graph: &'a Graph,
    probs: &'a ProbabilityMatrix,
    labels: Option<&'a NodeLabels>,
    pool: &'a CalibrationPool,
    policy: EmptyNeighborhoodPolicy,
    walker: HopWalker,
    pairs: Vec<(f64, f64)>,
    pool_sorted: OnceCell<Vec<f64>>,
}

impl<'a> Predictor<'a> {
    pub fn new(
        graph: &'a Graph,
        probs: &'a ProbabilityMatrix,
        labels: Option<&'a NodeLabels>,
        pool: &'a CalibrationPool,
    ) -> Self {
        Self {
            graph,
            probs,
            labels,
            pool,
            policy: EmptyNeighborhoodPolicy::default(),
            walker: HopWalker::new(graph.node_count()),
            pairs: Vec::new(),
            pool_sorted: OnceCell::new(),
        }
    }

    pub fn with_policy(mut self, policy: EmptyNeighborhoodPolicy) -> Self {
        self.policy = policy;
        self
    }

    fn check_test(&self, test: usize) -> Result<()> {
        if test >= self.probs.rows() {
            return Err(Error::invalid(format!("test node {test} has no probability row")));
        }
        if self.pool.contains(test) {
            return Err(Error::invalid(format!(
                "test node {test} is part of the calibration pool"
            )));
        }
        Ok(())
    }

    fn finish(
        &self,
        test: usize,
        threshold: QuantileThreshold,
        u: f64,
        fallback: bool,
    ) -> Result<PredictionSet> {
        let row = self.probs.row(test);
        let labels = if threshold.is_infinite() {
            (0..row.len()).collect()
        } else {
            randomized_set_ranked(&RankedRow::new(row), threshold.value, u)?
        };
        let contains_truth = self
            .labels
            .filter(|l| test < l.len())
            .map(|l| labels.binary_search(&l.get(test)).is_ok());
        Ok(PredictionSet {
            node: test,
            labels,
            threshold,
            contains_truth,
            fallback,
        })
    }

    /// Baseline APS: every pool node calibrates with unit weight.
    pub fn naive(&mut self, test: usize, alpha: f64, u: f64) -> Result<PredictionSet> {
        check_alpha(alpha)?;
        self.check_test(test)?;
        if self.pool.is_empty() {
            return Err(Error::InsufficientCalibration("calibration pool is empty".into()));
        }
        let pool = self.pool;
        let sorted = self.pool_sorted.get_or_init(|| {
            let mut s: Vec<f64> = pool.nodes().iter().map(|&v| pool.scores[v]).collect();
            s.sort_unstable_by(f64::total_cmp);
            s
        });
        let threshold = split_from_sorted(sorted, alpha);
        self.finish(test, threshold, u, false)
    }

    /// Neighbourhood-weighted APS around `test`.
    pub fn naps(
        &mut self,
        test: usize,
        alpha: f64,
        scheme: WeightScheme,
        u: f64,
    ) -> Result<PredictionSet> {
        check_alpha(alpha)?;
        scheme.validate()?;
        self.check_test(test)?;
        let Some(k) = scheme.depth() else {
            return self.naive(test, alpha, u);
        };
        self.graph.check_node(test)?;

        let mut pairs = std::mem::take(&mut self.pairs);
        pairs.clear();
        let pool = self.pool;
        self.walker.walk(self.graph, test, k, |w, hop| {
            if pool.contains(w) {
                let weight = scheme.weight_at(hop);
                if weight > 0.0 {
                    pairs.push((pool.scores[w], weight));
                }
            }
        });
        let result = if pairs.is_empty() {
            match self.policy {
                EmptyNeighborhoodPolicy::FullSet => {
                    let threshold = QuantileThreshold {
                        value: f64::INFINITY,
                        effective_sample_size: 0.0,
                    };
                    self.finish(test, threshold, u, true)
                }
                EmptyNeighborhoodPolicy::Error => Err(Error::InsufficientCalibration(format!(
                    "node {test} has no weighted calibration nodes within {k} hops"
                ))),
            }
        } else {
            let threshold = weighted_from_pairs(&mut pairs, alpha);
            self.finish(test, threshold, u, false)
        };
        self.pairs = pairs;
        result
    }
}

/// Positive calibration weights assigned by `scheme` around `test`, as
/// `(node, weight)` pairs sorted by node id.
pub fn scheme_weights(
    g: &Graph,
    pool: &CalibrationPool,
    test: usize,
    scheme: WeightScheme,
) -> Result<Vec<(usize, f64)>> {
    scheme.validate()?;
    let mut out = Vec::new();
    match scheme.depth() {
        None => out.extend(pool.nodes().iter().filter(|&&v| v != test).map(|&v| (v, 1.0))),
        Some(k) => {
            g.check_node(test)?;
            HopWalker::new(g.node_count()).walk(g, test, k, |w, hop| {
                let weight = scheme.weight_at(hop);
                if pool.contains(w) && weight > 0.0 {
                    out.push((w, weight));
                }
            });
            out.sort_unstable_by_key(|p| p.0);
        }
    }
    Ok(out)
}

/// One-shot neighbourhood-weighted prediction for a single test node.
#[allow(clippy::too_many_arguments)]
pub fn naps_predict(
    g: &Graph,
    probs: &ProbabilityMatrix,
    labels: &NodeLabels,
    pool: &CalibrationPool,
    test: usize,
    alpha: f64,
    scheme: WeightScheme,
    u: f64,
    policy: EmptyNeighborhoodPolicy,
) -> Result<PredictionSet> {
    Predictor::new(g, probs, Some(labels), pool)
        .with_policy(policy)
        .naps(test, alpha, scheme, u)
}

/// One-shot baseline prediction calibrated on the whole pool.
pub fn naive_predict(
    probs: &ProbabilityMatrix,
    labels: &NodeLabels,
    pool: &CalibrationPool,
    test: usize,
    alpha: f64,
    u: f64,
) -> Result<PredictionSet> {
    let g = Graph::empty(probs.rows());
    Predictor::new(&g, probs, Some(labels), pool).naive(test, alpha, u)
}
