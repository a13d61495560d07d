//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi edge list over `n` nodes.
pub fn random_edges(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in edges {
        if u != v {
            a[u][v] = true;
            a[v][u] = true;
        }
    }
    a
}

fn bool_product(x: &[Vec<bool>], y: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = x.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if x[i][k] {
                for j in 0..n {
                    out[i][j] |= y[k][j];
                }
            }
        }
    }
    out
}

/// Hop layers for every node from powers of the boolean adjacency
/// matrix: `R_d = R_{d-1} | R_{d-1} A`, layer `d` is `R_d \ R_{d-1}`.
pub fn matrix_power_layers(a: &[Vec<bool>], k: usize) -> Vec<Vec<Vec<usize>>> {
    let n = a.len();
    let mut reach: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    let mut layers = vec![Vec::with_capacity(k); n];
    for _ in 0..k {
        let step = bool_product(&reach, a);
        for v in 0..n {
            let layer: Vec<usize> = (0..n).filter(|&w| step[v][w] && !reach[v][w]).collect();
            layers[v].push(layer);
        }
        for v in 0..n {
            for w in 0..n {
                reach[v][w] |= step[v][w];
            }
        }
    }
    layers
}

/// Node homophily by enumeration over adjacency-matrix rows.
pub fn enumerate_homophily(a: &[Vec<bool>], labels: &[usize]) -> Option<f64> {
    let mut total = 0.0;
    let mut counted = 0;
    for v in 0..a.len() {
        let nbrs: Vec<usize> = (0..a.len()).filter(|&w| a[v][w]).collect();
        if nbrs.is_empty() {
            continue;
        }
        let same = nbrs.iter().filter(|&&w| labels[w] == labels[v]).count();
        total += same as f64 / nbrs.len() as f64;
        counted += 1;
    }
    (counted > 0).then(|| total / counted as f64)
}

pub fn enumerate_random_homophily(labels: &[usize], classes: usize) -> f64 {
    (0..classes)
        .map(|c| {
            let p = labels.iter().filter(|&&y| y == c).count() as f64 / labels.len() as f64;
            p * p
        })
        .sum()
}

/// Quantile of the discrete distribution with mass `w_i / (W + 1)` at each
/// score and `1 / (W + 1)` at infinity, by walking the atoms in order and
/// comparing normalised mass (with a small tolerance for rounding).
pub fn reference_weighted_quantile(scores: &[f64], weights: &[f64], alpha: f64) -> f64 {
    let total: f64 = weights.iter().sum();
    let mut atoms: Vec<(f64, f64)> = scores
        .iter()
        .zip(weights)
        .map(|(&s, &w)| (s, w / (total + 1.0)))
        .collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut mass = 0.0;
    for (s, w) in atoms {
        mass += w;
        if mass >= 1.0 - alpha - 1e-9 {
            return s;
        }
    }
    f64::INFINITY
}

/// Randomised oracle set written straight from the set-valued definition:
/// sort, find the generalised quantile L, compute V, keep L - 1 or L.
pub fn reference_aps_set(row: &[f64], tau: f64, u: f64) -> Vec<usize> {
    let k = row.len();
    if tau.is_infinite() {
        return (0..k).collect();
    }
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
    let mut cum = 0.0;
    let mut l = k;
    let mut cum_at_l = 0.0;
    for (r, &c) in idx.iter().enumerate() {
        cum += row[c];
        if cum >= tau - 1e-12 {
            l = r + 1;
            cum_at_l = cum;
            break;
        }
    }
    if l == k && cum_at_l == 0.0 {
        cum_at_l = cum;
    }
    let v = ((cum_at_l - tau) / row[idx[l - 1]]).clamp(0.0, 1.0);
    let keep = if u <= v { l - 1 } else { l };
    let mut out: Vec<usize> = idx[..keep].to_vec();
    out.sort();
    out
}

/// Randomised APS score: mass strictly above the label plus (1 - u) of its
/// own mass.
pub fn reference_randomized_score(row: &[f64], label: usize, u: f64) -> f64 {
    let above: f64 = (0..row.len())
        .filter(|&c| row[c] > row[label] || (row[c] == row[label] && c < label))
        .map(|c| row[c])
        .sum();
    above + (1.0 - u) * row[label]
}
