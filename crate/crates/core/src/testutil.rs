//! Shared fixtures and seeded generators for unit tests.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, InfluenceMatrix, OpinionVector, SusceptibilityProfile};

/// The six-node worked example: a chain of two homophilic communities
/// joined by a repulsive edge between nodes 2 and 3.
pub fn figure1() -> (Graph, InfluenceMatrix, SusceptibilityProfile, OpinionVector) {
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)];
    let g = Graph::build(6, &edges).unwrap();
    let mut w = InfluenceMatrix::new(6);
    for &(i, j) in &edges {
        let sign = if (i, j) == (2, 3) { -1 } else { 1 };
        w.set(i, j, sign).unwrap();
    }
    let lam = SusceptibilityProfile::new(vec![0.9, 0.0, 1.0, 1.0, 0.9, 0.0]).unwrap();
    let s = OpinionVector::new(vec![0.4, 0.9, 0.0, 0.0, -0.9, -0.9]).unwrap();
    (g, w, lam, s)
}

/// Seeded random graph with no isolated nodes: a ring plus random chords.
/// For n = 1 the graph has a single node and no edges.
pub fn random_graph(seed: u64, n: usize, chord_prob: f64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    if n >= 2 {
        for i in 0..n {
            edges.push((i, (i + 1) % n));
        }
        for i in 0..n {
            for j in (i + 2)..n {
                if rng.random::<f64>() < chord_prob {
                    edges.push((i, j));
                }
            }
        }
    }
    Graph::build(n, &edges).unwrap()
}

/// Seeded vector with entries uniform in [-1, 1].
pub fn random_unit_range_vec(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

pub fn random_opinions(seed: u64, n: usize) -> OpinionVector {
    OpinionVector::new(random_unit_range_vec(seed, n)).unwrap()
}

/// Seeded susceptibilities uniform in [0, max_lambda].
pub fn random_susceptibility(seed: u64, n: usize, max_lambda: f64) -> SusceptibilityProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SusceptibilityProfile::new((0..n).map(|_| rng.random::<f64>() * max_lambda).collect()).unwrap()
}

/// Seeded random signs on the edge set of `g`.
pub fn random_influence(seed: u64, g: &Graph, neg_prob: f64) -> InfluenceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = InfluenceMatrix::new(g.n());
    for &(i, j) in g.edges() {
        let sign = if rng.random::<f64>() < neg_prob { -1 } else { 1 };
        w.set(i, j, sign).unwrap();
    }
    w
}
