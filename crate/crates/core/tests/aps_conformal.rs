#![allow(clippy::needless_range_loop)]

mod common;

use naps::aps::{aps_score, randomized_aps_score, randomized_aps_set, RankedRow};
use naps::conformal::{
    coverage_gap_bound, naive_predict, naps_predict, split_threshold, weighted_threshold,
    CalibrationPool, EmptyNeighborhoodPolicy, ScoreSet, Scoring, WeightScheme,
};
use naps::graph::k_hop_neighborhood;
use naps::rng::node_uniforms;
use naps::synthetic::{generate_dataset, ClassifierProfile, SbmConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn random_scores(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Coarse grid so ties are common.
    (0..n).map(|_| f64::from(rng.gen_range(0..200u32)) / 199.0).collect()
}

proptest! {
    #[test]
    fn argmax_score_is_its_own_probability(row in (2usize..8).prop_flat_map(simplex)) {
        let top = RankedRow::new(&row).order()[0];
        prop_assert_eq!(aps_score(&row, top).unwrap(), row[top]);
    }

    #[test]
    fn scores_follow_the_classes_under_permutation(
        row in (2usize..8).prop_flat_map(simplex),
        shift in 0usize..8,
        u in 0.0f64..1.0,
    ) {
        // Distinct values so the ranking does not depend on class ids.
        prop_assume!((1..row.len()).all(|i| (0..i).all(|j| row[i] != row[j])));
        let k = row.len();
        let perm: Vec<usize> = (0..k).map(|c| (c + shift) % k).collect();
        let mut moved = vec![0.0; k];
        for c in 0..k {
            moved[perm[c]] = row[c];
        }
        for c in 0..k {
            prop_assert_eq!(aps_score(&row, c).unwrap(), aps_score(&moved, perm[c]).unwrap());
            prop_assert_eq!(
                randomized_aps_score(&row, c, u).unwrap(),
                randomized_aps_score(&moved, perm[c], u).unwrap()
            );
        }
    }

    #[test]
    fn sets_are_nested_in_tau(
        row in (2usize..8).prop_flat_map(simplex),
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        u in 0.0f64..1.0,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = randomized_aps_set(&row, lo, u).unwrap();
        let big = randomized_aps_set(&row, hi, u).unwrap();
        prop_assert!(small.iter().all(|c| big.contains(c)));
    }

    #[test]
    fn set_membership_is_the_randomized_score_below_tau(
        row in (2usize..8).prop_flat_map(simplex),
        tau in 0.0f64..1.0,
        u in 0.0f64..1.0,
    ) {
        let set = randomized_aps_set(&row, tau, u).unwrap();
        prop_assert_eq!(&set, &common::reference_aps_set(&row, tau, u));
        for c in 0..row.len() {
            let s = randomized_aps_score(&row, c, u).unwrap();
            prop_assert!((s - common::reference_randomized_score(&row, c, u)).abs() < 1e-12);
            // Away from the boundary, membership is exactly `score < tau`.
            if (s - tau).abs() > 1e-9 {
                prop_assert_eq!(set.contains(&c), s < tau, "class {} score {} tau {}", c, s, tau);
            }
        }
    }

    #[test]
    fn thresholds_are_monotone_and_nested_in_alpha(
        seed in any::<u64>(),
        n in 1usize..300,
        a1 in 0.01f64..0.99,
        a2 in 0.01f64..0.99,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores = random_scores(&mut rng, n);
        let set = ScoreSet::from_scores(&scores).unwrap();
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        // Smaller alpha, larger threshold.
        prop_assert!(split_threshold(&set, lo).unwrap().value >= split_threshold(&set, hi).unwrap().value);
        // Raising every score never lowers the threshold.
        let bumped: Vec<f64> = scores.iter().map(|s| s + rng.gen::<f64>() * 0.1).collect();
        let bumped = ScoreSet::from_scores(&bumped).unwrap();
        prop_assert!(split_threshold(&bumped, lo).unwrap().value >= split_threshold(&set, lo).unwrap().value);
    }

    #[test]
    fn gap_bound_is_monotone_and_below_max_t(
        w in prop::collection::vec(0.0f64..1.0, 1..20),
        t in prop::collection::vec(0.0f64..1.0, 20),
        bump in 0.0f64..1.0,
        idx in 0usize..20,
    ) {
        let t = &t[..w.len()];
        let g = coverage_gap_bound(&w, t).unwrap();
        let max_t = t.iter().cloned().fold(0.0, f64::max);
        prop_assert!(g <= max_t + 1e-12);
        let mut t2 = t.to_vec();
        let i = idx % t2.len();
        t2[i] = (t2[i] + bump).min(1.0);
        prop_assert!(coverage_gap_bound(&w, &t2).unwrap() >= g - 1e-12);
    }
}

#[test]
fn unit_weights_reproduce_the_split_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=2000);
        let alpha = [0.01, 0.05, 0.1, 0.5][rng.gen_range(0..4)];
        let scores = random_scores(&mut rng, n);
        let set = ScoreSet::from_scores(&scores).unwrap();
        let split = split_threshold(&set, alpha).unwrap();
        let weighted = weighted_threshold(&set, &vec![1.0; n], alpha).unwrap();
        assert_eq!(split.value, weighted.value, "n={n} alpha={alpha}");
        assert_eq!(
            weighted.value,
            common::reference_weighted_quantile(&scores, &vec![1.0; n], alpha)
        );
    }
}

#[test]
fn zero_weights_are_inert() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n = rng.gen_range(1..100);
        let scores = random_scores(&mut rng, n);
        let weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let extra = random_scores(&mut rng, 10);
        let mut all_scores = scores.clone();
        all_scores.extend(&extra);
        let mut all_weights = weights.clone();
        all_weights.extend([0.0; 10]);
        let a = weighted_threshold(&ScoreSet::from_scores(&scores).unwrap(), &weights, 0.1).unwrap();
        let b = weighted_threshold(&ScoreSet::from_scores(&all_scores).unwrap(), &all_weights, 0.1)
            .unwrap();
        assert_eq!(a.value, b.value);
    }
}

#[test]
fn oracle_probabilities_give_exact_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let row = [0.5, 0.3, 0.15, 0.05];
    let draws = 100_000;
    let mut covered = 0;
    for _ in 0..draws {
        let r: f64 = rng.gen();
        let mut y = 0;
        let mut acc = row[0];
        while r >= acc && y + 1 < row.len() {
            y += 1;
            acc += row[y];
        }
        let set = randomized_aps_set(&row, 0.9, rng.gen()).unwrap();
        covered += usize::from(set.contains(&y));
    }
    let cov = covered as f64 / draws as f64;
    assert!((cov - 0.9).abs() < 0.005, "coverage {cov}");
}

fn sbm_fixture(seed: u64) -> naps::synthetic::SyntheticDataset {
    generate_dataset(
        &SbmConfig {
            n: 300,
            block_probs: vec![0.5, 0.3, 0.2],
            p_in: 0.05,
            p_out: 0.005,
            seed,
        },
        &ClassifierProfile {
            signal: 2.0,
            noise: 1.0,
            temperatures: vec![1.0, 0.7, 1.5],
        },
    )
    .unwrap()
}

#[test]
fn naps_matches_reference_implementation() {
    let data = sbm_fixture(42);
    let n = data.labels.len();
    let u = node_uniforms(99, n);
    let pool_nodes: Vec<usize> = (1..n).collect();
    for scoring in [Scoring::Deterministic, Scoring::Randomized(&u)] {
        let pool = CalibrationPool::new(&data.probs, &data.labels, &pool_nodes, scoring).unwrap();
        for k in 1..=3 {
            let set = naps_predict(
                &data.graph,
                &data.probs,
                &data.labels,
                &pool,
                0,
                0.1,
                WeightScheme::KHopIndicator { k },
                u[0],
                EmptyNeighborhoodPolicy::FullSet,
            )
            .unwrap();

            let hood = k_hop_neighborhood(&data.graph, 0, k).unwrap();
            let scores: Vec<f64> = hood
                .members()
                .map(|(w, _)| {
                    let row = data.probs.row(w);
                    let y = data.labels.get(w);
                    match scoring {
                        Scoring::Deterministic => common::reference_randomized_score(row, y, 0.0),
                        Scoring::Randomized(u) => common::reference_randomized_score(row, y, u[w]),
                    }
                })
                .collect();
            let tau = common::reference_weighted_quantile(&scores, &vec![1.0; scores.len()], 0.1);
            assert!((set.threshold.value - tau).abs() < 1e-12 || set.threshold.value == tau);
            assert_eq!(set.labels, common::reference_aps_set(data.probs.row(0), tau, u[0]), "k={k}");
        }
    }
}

#[test]
fn naps_with_everything_in_reach_equals_naive() {
    let data = sbm_fixture(8);
    let n = data.labels.len();
    let u = node_uniforms(5, n);
    // Only the component of node 0 is reachable; restrict the pool to it.
    let comp: Vec<usize> = k_hop_neighborhood(&data.graph, 0, n).unwrap().members().map(|m| m.0).collect();
    let pool = CalibrationPool::new(&data.probs, &data.labels, &comp, Scoring::Randomized(&u)).unwrap();
    let naps = naps_predict(
        &data.graph,
        &data.probs,
        &data.labels,
        &pool,
        0,
        0.1,
        WeightScheme::KHopIndicator { k: n },
        u[0],
        EmptyNeighborhoodPolicy::FullSet,
    )
    .unwrap();
    let naive = naive_predict(&data.probs, &data.labels, &pool, 0, 0.1, u[0]).unwrap();
    assert_eq!(naps.threshold.value, naive.threshold.value);
    assert_eq!(naps.labels, naive.labels);
}
