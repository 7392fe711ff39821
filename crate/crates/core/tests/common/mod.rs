//! Shared helpers for the integration suites: instance sampling wrappers
//! and small self-contained statistics oracles kept independent of the
//! library paths they check.

use opinet::graph::{Graph, InfluenceMatrix, OpinionVector, SusceptibilityProfile};
use opinet::testutil;

pub struct ExtendedInstance {
    pub graph: Graph,
    pub influence: InfluenceMatrix,
    pub susceptibility: SusceptibilityProfile,
    pub opinions: OpinionVector,
}

/// Seeded random extended-model instance with no isolated nodes and
/// susceptibility capped at `max_lambda`.
pub fn random_instance(seed: u64, n: usize, max_lambda: f64) -> ExtendedInstance {
    let graph = testutil::random_graph(seed, n, 0.3);
    let influence = testutil::random_influence(seed ^ 0x11, &graph, 0.4);
    let susceptibility = testutil::random_susceptibility(seed ^ 0x22, n, max_lambda);
    let opinions = testutil::random_opinions(seed ^ 0x33, n);
    ExtendedInstance { graph, influence, susceptibility, opinions }
}

/// Pearson correlation, written out from the definition.
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>().sqrt();
    let sy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson_oracle(&ranks(x), &ranks(y))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Exact shortest-path betweenness by all-pairs BFS path counting, each
/// unordered pair counted once.
pub fn betweenness_brute_force(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let bfs = |src: usize| -> (Vec<i64>, Vec<f64>) {
        let mut dist = vec![-1i64; n];
        let mut count = vec![0.0f64; n];
        dist[src] = 0;
        count[src] = 1.0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    count[w] += count[v];
                }
            }
        }
        (dist, count)
    };
    let all: Vec<(Vec<i64>, Vec<f64>)> = (0..n).map(bfs).collect();
    let mut result = vec![0.0f64; n];
    for s in 0..n {
        for t in (s + 1)..n {
            let (ds, cs) = &all[s];
            let (dt, ct) = &all[t];
            if ds[t] < 0 {
                continue;
            }
            for v in 0..n {
                if v == s || v == t || ds[v] < 0 || dt[v] < 0 {
                    continue;
                }
                if ds[v] + dt[v] == ds[t] {
                    result[v] += cs[v] * ct[v] / cs[t];
                }
            }
        }
    }
    result
}
