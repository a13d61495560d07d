//! Repeated calibration/evaluation experiments and their reports.
//!
//! Each repetition draws a fresh evaluation batch from the nodes with large
//! enough neighbourhoods, calibrates every method on the remaining test
//! nodes, and records coverage and set sizes. All methods in a repetition
//! share the same batch and the same per-node uniform draws.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index::sample;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::aps::{ProbabilityMatrix, RankedRow};
use crate::conformal::{
    CalibrationPool, EmptyNeighborhoodPolicy, PredictionSet, Predictor, Scoring, WeightScheme,
    DEFAULT_DECAY, DEFAULT_K,
};
use crate::error::{Error, Result};
use crate::graph::{
    calibration_eligible_nodes, expected_random_homophily, node_homophily_ratio, Graph, NodeLabels,
};
use crate::io;
use crate::rng::{derive_seed, node_uniforms, stream, stream_rng};

/// A graph with labels and classifier outputs, plus the nodes that form
/// the test scope (evaluation and calibration both draw from it).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub labels: NodeLabels,
    pub probs: ProbabilityMatrix,
    /// Sorted, deduplicated test-scope node ids.
    pub test_nodes: Vec<usize>,
}

impl Dataset {
    /// Checks that all parts describe the same nodes. Without explicit
    /// `test_nodes`, every node is in scope.
    pub fn new(
        graph: Graph,
        labels: NodeLabels,
        probs: ProbabilityMatrix,
        test_nodes: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = graph.node_count();
        if labels.len() != n || probs.rows() != n {
            return Err(Error::invalid(format!(
                "graph has {n} nodes, labels {} and probabilities {} rows",
                labels.len(),
                probs.rows()
            )));
        }
        if let Some((v, &y)) = labels
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, &y)| y >= probs.classes())
        {
            return Err(Error::invalid(format!(
                "label {y} of node {v} exceeds the {} probability columns",
                probs.classes()
            )));
        }
        let mut test_nodes = test_nodes.unwrap_or_else(|| (0..n).collect());
        test_nodes.sort_unstable();
        test_nodes.dedup();
        if let Some(&v) = test_nodes.last().filter(|&&v| v >= n) {
            return Err(Error::NodeOutOfRange { node: v, node_count: n });
        }
        Ok(Self {
            graph,
            labels,
            probs,
            test_nodes,
        })
    }

    pub fn from_synthetic(data: crate::synthetic::SyntheticDataset) -> Result<Self> {
        Self::new(data.graph, data.labels, data.probs, None)
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// SHA-256 over the canonical serialisation of every part.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(io::format_edge_list(&self.graph));
        h.update([0u8]);
        h.update(io::format_labels(&self.labels));
        h.update([0u8]);
        h.update(io::format_probabilities(&self.probs));
        h.update([0u8]);
        h.update(io::format_node_list(&self.test_nodes));
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    NaiveAps,
    Naps,
    NapsHopDecay,
    NapsAlternating,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::NaiveAps,
        Method::Naps,
        Method::NapsHopDecay,
        Method::NapsAlternating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NaiveAps => "naive_aps",
            Method::Naps => "naps",
            Method::NapsHopDecay => "naps_hop_decay",
            Method::NapsAlternating => "naps_alternating",
        }
    }

    /// Weighting used by this method, `UniformFull` for the baseline.
    pub fn scheme(self, k: usize, decay: f64) -> WeightScheme {
        match self {
            Method::NaiveAps => WeightScheme::UniformFull,
            Method::Naps => WeightScheme::KHopIndicator { k },
            Method::NapsHopDecay => WeightScheme::HopDecay { k, decay },
            Method::NapsAlternating => WeightScheme::AlternatingHeterophilic { k },
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}`")))
    }
}

/// Parses a comma-separated method list, keeping first occurrences.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for m in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let m: Method = m.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("method list is empty"));
    }
    Ok(out)
}

/// Which nodes calibrate the graph-free baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NaivePool {
    /// All test-scope nodes outside the evaluation batch.
    #[default]
    TestScope,
    /// Only eligible nodes outside the evaluation batch.
    Eligible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    #[default]
    Randomized,
    Deterministic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub k: usize,
    pub eval_batch: usize,
    pub repetitions: usize,
    pub min_neighborhood: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub decay: f64,
    pub empty_policy: EmptyNeighborhoodPolicy,
    pub naive_pool: NaivePool,
    pub score_mode: ScoreMode,
    /// Worker threads; `None` uses every available core. Never affects
    /// results.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            k: DEFAULT_K,
            eval_batch: 1000,
            repetitions: 100,
            min_neighborhood: 50,
            methods: vec![Method::NaiveAps, Method::Naps],
            master_seed: 0,
            decay: DEFAULT_DECAY,
            empty_policy: EmptyNeighborhoodPolicy::FullSet,
            naive_pool: NaivePool::TestScope,
            score_mode: ScoreMode::Randomized,
            threads: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("bad value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {} must lie in (0, 1)", self.alpha)));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.eval_batch == 0 || self.repetitions == 0 {
            return Err(Error::invalid("eval_batch and repetitions must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods selected"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        WeightScheme::HopDecay {
            k: self.k,
            decay: self.decay,
        }
        .validate()
    }

    /// Applies one `key=value` setting, using the same names as
    /// [`ExperimentConfig::to_key_values`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "alpha" => self.alpha = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "eval_batch" => self.eval_batch = parse_value(key, value)?,
            "repetitions" | "reps" => self.repetitions = parse_value(key, value)?,
            "min_neighborhood" => self.min_neighborhood = parse_value(key, value)?,
            "methods" => self.methods = parse_methods(value)?,
            "master_seed" | "seed" => self.master_seed = parse_value(key, value)?,
            "decay" => self.decay = parse_value(key, value)?,
            "threads" => self.threads = Some(parse_value(key, value)?),
            "empty_policy" => {
                self.empty_policy = match value {
                    "full_set" => EmptyNeighborhoodPolicy::FullSet,
                    "error" => EmptyNeighborhoodPolicy::Error,
                    _ => return Err(Error::invalid(format!("bad empty_policy `{value}`"))),
                }
            }
            "naive_pool" => {
                self.naive_pool = match value {
                    "test_scope" => NaivePool::TestScope,
                    "ncal" => NaivePool::Eligible,
                    _ => return Err(Error::invalid(format!("bad naive_pool `{value}`"))),
                }
            }
            "scores" => {
                self.score_mode = match value {
                    "randomized" => ScoreMode::Randomized,
                    "deterministic" => ScoreMode::Deterministic,
                    _ => return Err(Error::invalid(format!("bad scores `{value}`"))),
                }
            }
            _ => return Err(Error::invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Every result-affecting setting, in a fixed order. Thread count is
    /// left out since it cannot change results.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        let kv = |k: &str, v: String| (k.to_string(), v);
        vec![
            kv("alpha", self.alpha.to_string()),
            kv("k", self.k.to_string()),
            kv("eval_batch", self.eval_batch.to_string()),
            kv("repetitions", self.repetitions.to_string()),
            kv("min_neighborhood", self.min_neighborhood.to_string()),
            kv("methods", methods.join(",")),
            kv("master_seed", self.master_seed.to_string()),
            kv("decay", self.decay.to_string()),
            kv(
                "empty_policy",
                match self.empty_policy {
                    EmptyNeighborhoodPolicy::FullSet => "full_set",
                    EmptyNeighborhoodPolicy::Error => "error",
                }
                .into(),
            ),
            kv(
                "naive_pool",
                match self.naive_pool {
                    NaivePool::TestScope => "test_scope",
                    NaivePool::Eligible => "ncal",
                }
                .into(),
            ),
            kv(
                "scores",
                match self.score_mode {
                    ScoreMode::Randomized => "randomized",
                    ScoreMode::Deterministic => "deterministic",
                }
                .into(),
            ),
        ]
    }
}

/// Per-repetition results for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub coverage: f64,
    pub avg_size: f64,
    /// Mean size over sets containing the truth; `None` if none did.
    pub size_given_coverage: Option<f64>,
    pub n_eval: usize,
    pub covered: usize,
    /// Sets that fell back to all labels for lack of calibration nodes.
    pub fallbacks: usize,
}

impl Metrics {
    pub fn from_sets(sets: &[PredictionSet]) -> Self {
        let n = sets.len();
        let mut covered = 0usize;
        let mut total_size = 0usize;
        let mut covered_size = 0usize;
        let mut fallbacks = 0usize;
        for s in sets {
            total_size += s.len();
            if s.contains_truth == Some(true) {
                covered += 1;
                covered_size += s.len();
            }
            fallbacks += usize::from(s.fallback);
        }
        Self {
            coverage: covered as f64 / n as f64,
            avg_size: total_size as f64 / n as f64,
            size_given_coverage: (covered > 0).then(|| covered_size as f64 / covered as f64),
            n_eval: n,
            covered,
            fallbacks,
        }
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    /// Accumulates in the given order; `None` for an empty input.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub coverage: Stat,
    pub avg_size: Stat,
    pub size_given_coverage: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRuns {
    pub method: Method,
    /// Indexed by repetition.
    pub reps: Vec<Metrics>,
}

impl MethodRuns {
    pub fn summary(&self) -> MethodSummary {
        let stat = |f: &dyn Fn(&Metrics) -> f64| {
            Stat::of(self.reps.iter().map(f)).expect("at least one repetition")
        };
        MethodSummary {
            method: self.method,
            coverage: stat(&|m| m.coverage),
            avg_size: stat(&|m| m.avg_size),
            size_given_coverage: Stat::of(self.reps.iter().filter_map(|m| m.size_given_coverage)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub fingerprint: String,
    pub eligible_nodes: usize,
    pub runs: Vec<MethodRuns>,
}

impl ExperimentReport {
    pub fn method(&self, m: Method) -> Option<&MethodRuns> {
        self.runs.iter().find(|r| r.method == m)
    }

    pub fn summaries(&self) -> Vec<MethodSummary> {
        self.runs.iter().map(MethodRuns::summary).collect()
    }

    fn metadata_lines(&self) -> Vec<(String, String)> {
        let mut meta = self.config.to_key_values();
        meta.push(("dataset_fingerprint".into(), self.fingerprint.clone()));
        meta.push(("eligible_nodes".into(), self.eligible_nodes.to_string()));
        meta.push(("generator".into(), crate::rng::GENERATOR_NAME.into()));
        meta.push(("generator_version".into(), env!("CARGO_PKG_VERSION").into()));
        meta
    }

    /// One row per (method, repetition) after `#` metadata comments.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.metadata_lines() {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("method,rep,coverage,avg_size,size_given_cov,n_eval\n");
        for run in &self.runs {
            for (rep, m) in run.reps.iter().enumerate() {
                let sgc = m
                    .size_given_coverage
                    .map_or_else(|| "nan".to_string(), |v| format!("{v:.6}"));
                let _ = writeln!(
                    out,
                    "{},{rep},{:.6},{:.6},{sgc},{}",
                    run.method, m.coverage, m.avg_size, m.n_eval
                );
            }
        }
        out
    }

    /// Aligned text table: mean ± sd of coverage, size and size given
    /// coverage per method.
    pub fn to_table(&self) -> String {
        let cell = |s: Option<Stat>, prec: usize| match s {
            Some(s) => format!("{:.prec$} ± {:.prec$}", s.mean, s.sd),
            None => "-".to_string(),
        };
        let rows: Vec<[String; 4]> = self
            .summaries()
            .into_iter()
            .map(|s| {
                [
                    s.method.to_string(),
                    cell(Some(s.coverage), 3),
                    cell(Some(s.avg_size), 2),
                    cell(s.size_given_coverage, 2),
                ]
            })
            .collect();
        let header = ["Method", "Coverage", "Size", "Size | Coverage"];
        let mut widths = header.map(str::len);
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = format!(
            "alpha={}  k={}  eval_batch={}  repetitions={}  eligible_nodes={}\n",
            self.config.alpha,
            self.config.k,
            self.config.eval_batch,
            self.config.repetitions,
            self.eligible_nodes
        );
        out += &line(&header.map(String::from));
        out += &line(&widths.map(|w| "-".repeat(w)));
        for r in &rows {
            out += &line(r);
        }
        out
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn complement(scope: &[usize], removed: &[usize], n: usize) -> Vec<usize> {
    let mut drop = vec![false; n];
    removed.iter().for_each(|&v| drop[v] = true);
    scope.iter().copied().filter(|&v| !drop[v]).collect()
}

struct Prepared<'a> {
    data: &'a Dataset,
    ranked: Vec<RankedRow>,
    eligible: Vec<usize>,
}

fn prepare<'a>(data: &'a Dataset, cfg: &ExperimentConfig) -> Prepared<'a> {
    let ranked = (0..data.node_count())
        .into_par_iter()
        .map(|v| RankedRow::new(data.probs.row(v)))
        .collect();
    let eligible =
        calibration_eligible_nodes(&data.graph, &data.test_nodes, cfg.k, cfg.min_neighborhood);
    Prepared {
        data,
        ranked,
        eligible,
    }
}

impl Prepared<'_> {
    fn run_repetition(&self, cfg: &ExperimentConfig, rep: usize) -> Result<Vec<Metrics>> {
        let data = self.data;
        let n = data.node_count();
        let seed = derive_seed(cfg.master_seed, rep as u64);
        let mut rng = stream_rng(seed, stream::EVAL_SAMPLE);
        let mut batch: Vec<usize> = sample(&mut rng, self.eligible.len(), cfg.eval_batch)
            .into_iter()
            .map(|i| self.eligible[i])
            .collect();
        batch.sort_unstable();
        let u = node_uniforms(seed, n);
        let scoring = match cfg.score_mode {
            ScoreMode::Randomized => Scoring::Randomized(&u),
            ScoreMode::Deterministic => Scoring::Deterministic,
        };

        let pool_nodes = complement(&data.test_nodes, &batch, n);
        let pool = CalibrationPool::from_ranked(&self.ranked, &data.labels, &pool_nodes, scoring)?;
        let naive_pool = match cfg.naive_pool {
            NaivePool::TestScope => None,
            NaivePool::Eligible => {
                let nodes = complement(&self.eligible, &batch, n);
                Some(CalibrationPool::from_ranked(&self.ranked, &data.labels, &nodes, scoring)?)
            }
        };

        let mut predictor = Predictor::new(&data.graph, &data.probs, Some(&data.labels), &pool)
            .with_policy(cfg.empty_policy);
        let mut naive_predictor = naive_pool.as_ref().map(|p| {
            Predictor::new(&data.graph, &data.probs, Some(&data.labels), p)
                .with_policy(cfg.empty_policy)
        });

        cfg.methods
            .iter()
            .map(|&method| {
                let sets = batch
                    .iter()
                    .map(|&v| match method {
                        Method::NaiveAps => naive_predictor
                            .as_mut()
                            .unwrap_or(&mut predictor)
                            .naive(v, cfg.alpha, u[v]),
                        _ => predictor.naps(v, cfg.alpha, method.scheme(cfg.k, cfg.decay), u[v]),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Metrics::from_sets(&sets))
            })
            .collect()
    }
}

/// Runs the repeated-split protocol.
///
/// Repetition `r` uses seed `derive_seed(master_seed, r)`: the evaluation
/// batch is sampled from the eligible nodes on the eval-sample stream, and
/// one uniform per node comes from the uniforms stream. Repetitions run in
/// parallel and are assembled by index.
pub fn run_experiment(data: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || {
        let prep = prepare(data, cfg);
        if prep.eligible.len() < cfg.eval_batch {
            return Err(Error::invalid(format!(
                "only {} nodes have at least {} other test nodes within {} hops, fewer than \
                 eval_batch = {}; lower min_neighborhood or eval_batch",
                prep.eligible.len(),
                cfg.min_neighborhood,
                cfg.k,
                cfg.eval_batch
            )));
        }
        let per_rep = (0..cfg.repetitions)
            .into_par_iter()
            .map(|rep| prep.run_repetition(cfg, rep))
            .collect::<Result<Vec<_>>>()?;
        let runs = cfg
            .methods
            .iter()
            .enumerate()
            .map(|(i, &method)| MethodRuns {
                method,
                reps: per_rep.iter().map(|r| r[i].clone()).collect(),
            })
            .collect();
        Ok(ExperimentReport {
            config: cfg.clone(),
            fingerprint: data.fingerprint(),
            eligible_nodes: prep.eligible.len(),
            runs,
        })
    })?
}

/// Uniform draw assigned to each node by [`predict_nodes`].
pub fn prediction_uniforms(master_seed: u64, n: usize) -> Vec<f64> {
    node_uniforms(derive_seed(master_seed, 0), n)
}

/// Ad-hoc prediction sets for `nodes`, calibrated on the rest of the test
/// scope with the uniforms of [`prediction_uniforms`].
pub fn predict_nodes(
    data: &Dataset,
    cfg: &ExperimentConfig,
    nodes: &[usize],
    method: Method,
) -> Result<Vec<PredictionSet>> {
    cfg.validate()?;
    let n = data.node_count();
    if let Some(&v) = nodes.iter().find(|&&v| v >= n) {
        return Err(Error::NodeOutOfRange { node: v, node_count: n });
    }
    let u = prediction_uniforms(cfg.master_seed, n);
    let scoring = match cfg.score_mode {
        ScoreMode::Randomized => Scoring::Randomized(&u),
        ScoreMode::Deterministic => Scoring::Deterministic,
    };
    let pool_nodes = complement(&data.test_nodes, nodes, n);
    let pool = CalibrationPool::new(&data.probs, &data.labels, &pool_nodes, scoring)?;
    let mut predictor = Predictor::new(&data.graph, &data.probs, Some(&data.labels), &pool)
        .with_policy(cfg.empty_policy);
    nodes
        .iter()
        .map(|&v| match method {
            Method::NaiveAps => predictor.naive(v, cfg.alpha, u[v]),
            _ => predictor.naps(v, cfg.alpha, method.scheme(cfg.k, cfg.decay), u[v]),
        })
        .collect()
}

/// Dataset statistics in the layout of a benchmark summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub nodes: usize,
    pub edges: usize,
    pub classes: usize,
    pub test_nodes: usize,
    pub eligible_nodes: usize,
    /// Homophily ratio over the subgraph induced by the test scope.
    pub homophily: Option<f64>,
    pub random_homophily: Option<f64>,
}

impl DatasetSummary {
    pub const HEADER: &'static str = "nodes,edges,classes,test_nodes,n_cal,h_hat,h_rand";

    pub fn to_csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "undefined".into(), |v| format!("{v:.6}"));
        format!(
            "{},{},{},{},{},{},{}",
            self.nodes,
            self.edges,
            self.classes,
            self.test_nodes,
            self.eligible_nodes,
            opt(self.homophily),
            opt(self.random_homophily)
        )
    }
}

pub fn summarize_dataset(data: &Dataset, k: usize, min_neighborhood: usize) -> DatasetSummary {
    let scope = &data.test_nodes;
    DatasetSummary {
        nodes: data.node_count(),
        edges: data.graph.edge_count(),
        classes: data.probs.classes(),
        test_nodes: scope.len(),
        eligible_nodes: calibration_eligible_nodes(&data.graph, scope, k, min_neighborhood).len(),
        homophily: node_homophily_ratio(&data.graph, &data.labels, Some(scope)).ok(),
        random_homophily: expected_random_homophily(&data.labels, Some(scope)).ok(),
    }
}
