//! Stochastic block model graphs with simulated classifier outputs.
//!
//! Block membership doubles as the class label. Classifier probabilities
//! are a tempered softmax of Gaussian logits centred on the true class,
//! with one temperature per block, so calibration quality can differ
//! between regions of the graph.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::aps::ProbabilityMatrix;
use crate::error::{Error, Result};
use crate::graph::{expected_random_homophily, node_homophily_ratio, Graph, NodeLabels};
use crate::rng::{stream, stream_rng, GENERATOR_NAME};

#[derive(Debug, Clone, PartialEq)]
pub struct SbmConfig {
    pub n: usize,
    /// Probability of each block; its length is the block count.
    pub block_probs: Vec<f64>,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl SbmConfig {
    pub fn blocks(&self) -> usize {
        self.block_probs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks() < 2 {
            return Err(Error::invalid("an SBM needs at least two blocks"));
        }
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        if self.block_probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid("block probabilities must be non-negative"));
        }
        let total: f64 = self.block_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "block probabilities sum to {total}, not 1"
            )));
        }
        Ok(())
    }

    /// Validation for configurations meant to be homophilous.
    pub fn validate_homophilous(&self) -> Result<()> {
        self.validate()?;
        if self.p_in <= self.p_out {
            return Err(Error::invalid(format!(
                "homophilous SBM needs p_in > p_out (got {} <= {})",
                self.p_in, self.p_out
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierProfile {
    /// Logit mass added to the true class.
    pub signal: f64,
    /// Standard deviation of the per-class logit noise.
    pub noise: f64,
    /// Softmax temperature for each block; 1 leaves logits untouched.
    pub temperatures: Vec<f64>,
}

impl ClassifierProfile {
    pub fn validate(&self, classes: usize) -> Result<()> {
        if !self.signal.is_finite() || !self.noise.is_finite() || self.noise < 0.0 {
            return Err(Error::invalid("signal must be finite and noise finite and >= 0"));
        }
        if self.temperatures.len() != classes {
            return Err(Error::invalid(format!(
                "{} temperatures for {classes} blocks",
                self.temperatures.len()
            )));
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::invalid(format!("temperature {t} must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub graph: Graph,
    pub labels: NodeLabels,
    pub probs: ProbabilityMatrix,
    /// Bayes posterior of the class given the simulated logits.
    pub true_conditionals: Option<ProbabilityMatrix>,
    /// Generator settings as `key=value` pairs, for the metadata file.
    pub metadata: Vec<(String, String)>,
}

fn sample_block(block_probs: &[f64], r: f64) -> usize {
    let mut acc = 0.0;
    for (b, &p) in block_probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return b;
        }
    }
    // rounding left r above the last partial sum
    block_probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Visits the indices in `0..total` that succeed in independent
/// Bernoulli(p) trials, jumping between successes with geometric gaps.
fn for_each_success<R: Rng, F: FnMut(u64)>(rng: &mut R, total: u64, p: f64, mut hit: F) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(hit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut idx: u64 = 0;
    loop {
        let r: f64 = rng.gen();
        let gap = ((1.0 - r).ln() / log_q).floor();
        if !gap.is_finite() || gap >= (total - idx) as f64 {
            return;
        }
        idx += gap as u64;
        hit(idx);
        idx += 1;
        if idx >= total {
            return;
        }
    }
}

/// Maps a linear index over pairs `i < j` of `0..s` (ordered by `j`, then
/// `i`) back to the pair.
fn triangular_pair(idx: u64) -> (u64, u64) {
    // j is the largest value with j * (j - 1) / 2 <= idx
    let mut j = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0).floor() as u64;
    while j * (j - 1) / 2 > idx {
        j -= 1;
    }
    while (j + 1) * j / 2 <= idx {
        j += 1;
    }
    (idx - j * (j - 1) / 2, j)
}

/// Samples block labels and an SBM graph. Pairs in the same block are
/// joined with probability `p_in`, other pairs with `p_out`.
pub fn generate_sbm(cfg: &SbmConfig) -> Result<(Graph, NodeLabels)> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, stream::LABELS);
    let labels: Vec<usize> = (0..cfg.n)
        .map(|_| sample_block(&cfg.block_probs, rng.gen::<f64>()))
        .collect();

    let mut members = vec![Vec::new(); cfg.blocks()];
    for (v, &b) in labels.iter().enumerate() {
        members[b].push(v);
    }

    let mut rng = stream_rng(cfg.seed, stream::EDGES);
    let mut edges = Vec::new();
    for a in 0..cfg.blocks() {
        let inside = &members[a];
        let pairs = (inside.len() as u64) * (inside.len() as u64).saturating_sub(1) / 2;
        for_each_success(&mut rng, pairs, cfg.p_in, |idx| {
            let (i, j) = triangular_pair(idx);
            edges.push((inside[i as usize], inside[j as usize]));
        });
        for other in &members[a + 1..] {
            let width = other.len() as u64;
            for_each_success(&mut rng, inside.len() as u64 * width, cfg.p_out, |idx| {
                edges.push((inside[(idx / width) as usize], other[(idx % width) as usize]));
            });
        }
    }
    let graph = Graph::from_edges(cfg.n, edges)?;
    Ok((graph, NodeLabels::new(labels, cfg.blocks())?))
}

fn softmax_into(logits: &[f64], scale: f64, out: &mut Vec<f64>) {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &z| m.max(z * scale));
    out.clear();
    out.extend(logits.iter().map(|&z| (z * scale - max).exp()));
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
}

/// Simulated classifier output for every node.
///
/// Node `v` with label `y` gets logits `signal * e_y + noise * N(0, I)`
/// (K normal draws per node, in node order, from the logits stream) and
/// probabilities `softmax(logits / T_y)`. The second matrix is the Bayes
/// posterior of the label given the logits, using the empirical label
/// frequencies as the prior.
pub fn simulate_classifier(
    labels: &NodeLabels,
    profile: &ClassifierProfile,
    seed: u64,
) -> Result<(ProbabilityMatrix, ProbabilityMatrix)> {
    let k = labels.num_classes();
    profile.validate(k)?;
    let n = labels.len();

    let mut counts = vec![0usize; k];
    labels.as_slice().iter().for_each(|&y| counts[y] += 1);
    let log_prior: Vec<f64> = counts
        .iter()
        .map(|&c| if n == 0 { 0.0 } else { (c as f64 / n as f64).ln() })
        .collect();

    let mut rng = stream_rng(seed, stream::LOGITS);
    let mut probs = Vec::with_capacity(n * k);
    let mut posterior = Vec::with_capacity(n * k);
    let mut logits = vec![0.0; k];
    let mut row = Vec::with_capacity(k);
    for v in 0..n {
        let y = labels.get(v);
        for (c, z) in logits.iter_mut().enumerate() {
            let eps: f64 = rng.sample(StandardNormal);
            *z = profile.noise * eps + if c == y { profile.signal } else { 0.0 };
        }
        softmax_into(&logits, 1.0 / profile.temperatures[y], &mut row);
        probs.extend_from_slice(&row);

        if profile.noise > 0.0 {
            // log N(z; signal * e_c, noise^2 I) = signal * z_c / noise^2 + const
            let scale = profile.signal / (profile.noise * profile.noise);
            let tilted: Vec<f64> = logits
                .iter()
                .zip(&log_prior)
                .map(|(&z, &lp)| z * scale + lp)
                .collect();
            softmax_into(&tilted, 1.0, &mut row);
        } else {
            row.clear();
            row.extend((0..k).map(|c| f64::from(u8::from(c == y))));
        }
        posterior.extend_from_slice(&row);
    }
    Ok((
        ProbabilityMatrix::new(n, k, probs)?,
        ProbabilityMatrix::new(n, k, posterior)?,
    ))
}

/// Generates an SBM together with classifier outputs.
pub fn generate_dataset(sbm: &SbmConfig, profile: &ClassifierProfile) -> Result<SyntheticDataset> {
    let (graph, labels) = generate_sbm(sbm)?;
    let (probs, truth) = simulate_classifier(&labels, profile, sbm.seed)?;
    let join = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let metadata = vec![
        ("generator".into(), GENERATOR_NAME.into()),
        ("generator_version".into(), env!("CARGO_PKG_VERSION").into()),
        ("seed".into(), sbm.seed.to_string()),
        ("n".into(), sbm.n.to_string()),
        ("blocks".into(), sbm.blocks().to_string()),
        ("block_probs".into(), join(&sbm.block_probs)),
        ("p_in".into(), sbm.p_in.to_string()),
        ("p_out".into(), sbm.p_out.to_string()),
        ("signal".into(), profile.signal.to_string()),
        ("noise".into(), profile.noise.to_string()),
        ("temperatures".into(), join(&profile.temperatures)),
    ];
    Ok(SyntheticDataset {
        graph,
        labels,
        probs,
        true_conditionals: Some(truth),
        metadata,
    })
}

/// SBM settings of the showcase dataset.
pub fn showcase_config(seed: u64) -> (SbmConfig, ClassifierProfile) {
    (
        SbmConfig {
            n: 4000,
            block_probs: vec![0.375, 0.375, 0.125, 0.125],
            p_in: 0.011,
            p_out: 0.00005,
            seed,
        },
        ClassifierProfile {
            signal: 2.0,
            noise: 1.0,
            temperatures: vec![2.0, 1.5, 0.5, 0.75],
        },
    )
}

/// Four-block homophilous graph where a global calibration pool is
/// misleading for most evaluation nodes.
///
/// The two large blocks are dense (2-hop neighbourhoods of ~250 nodes)
/// and under-confident (T = 2.0, 1.5), which gives them low APS scores.
/// The two small blocks are sparse, over-confident (T = 0.5, 0.75) and
/// mostly fall below a 50-node 2-hop neighbourhood, so they rarely get
/// evaluated but still feed a global calibration pool, pulling its
/// quantile up. Neighbourhood calibration sees mostly same-block scores.
pub fn make_naps_showcase(seed: u64) -> Result<SyntheticDataset> {
    let (sbm, profile) = showcase_config(seed);
    sbm.validate_homophilous()?;
    let mut data = generate_dataset(&sbm, &profile)?;
    let h = node_homophily_ratio(&data.graph, &data.labels, None)?;
    let h_rand = expected_random_homophily(&data.labels, None)?;
    if h <= h_rand {
        return Err(Error::invalid(format!(
            "showcase graph is not homophilous (H = {h}, H_rand = {h_rand})"
        )));
    }
    data.metadata.insert(0, ("kind".into(), "showcase".into()));
    Ok(data)
}

/// SBM settings of the exchangeable control dataset: no block structure in
/// the edges and every block calibrated (T = 1). Dense enough (mean degree
/// 20) that every node passes a 50-node 2-hop eligibility filter, so the
/// evaluation batch and the calibration pool stay exchangeable for a fixed
/// graph.
pub fn exchangeable_config(seed: u64) -> (SbmConfig, ClassifierProfile) {
    (
        SbmConfig {
            n: 2000,
            block_probs: vec![0.25; 4],
            p_in: 0.01,
            p_out: 0.01,
            seed,
        },
        ClassifierProfile {
            signal: 2.0,
            noise: 1.0,
            temperatures: vec![1.0; 4],
        },
    )
}

pub fn make_exchangeable(seed: u64) -> Result<SyntheticDataset> {
    let (sbm, profile) = exchangeable_config(seed);
    let mut data = generate_dataset(&sbm, &profile)?;
    data.metadata.insert(0, ("kind".into(), "exchangeable".into()));
    Ok(data)
}
