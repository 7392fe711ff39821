//! Centrality measures and the disruption-vs-centrality correlation study.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::graph::Graph;
use crate::perturb::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CentralityMeasure {
    Degree,
    Betweenness,
    Eigenvector,
}

impl fmt::Display for CentralityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CentralityMeasure::Degree => "degree",
            CentralityMeasure::Betweenness => "betweenness",
            CentralityMeasure::Eigenvector => "eigenvector",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityVector {
    pub measure: CentralityMeasure,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub measure: CentralityMeasure,
    pub rho: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    /// Eigenvector centrality needs at least one edge.
    EmptyGraph,
    NotConverged { iterations: usize },
    /// Pearson correlation is undefined for a zero-variance argument.
    ConstantInput,
    TooFewPoints { n: usize },
    SizeMismatch { expected: usize, actual: usize },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::EmptyGraph => write!(f, "graph has no edges"),
            AnalysisError::NotConverged { iterations } => {
                write!(f, "power iteration did not converge in {iterations} iterations")
            }
            AnalysisError::ConstantInput => write!(f, "no correlation computable: constant input"),
            AnalysisError::TooFewPoints { n } => {
                write!(f, "correlation needs at least 2 points, got {n}")
            }
            AnalysisError::SizeMismatch { expected, actual } => {
                write!(f, "vector length {actual} does not match {expected}")
            }
        }
    }
}

impl std::error::Error for AnalysisError {}

pub fn degree_centrality(g: &Graph) -> CentralityVector {
    CentralityVector {
        measure: CentralityMeasure::Degree,
        values: g.degree().iter().map(|&d| d as f64).collect(),
    }
}

/// Exact unnormalized shortest-path betweenness, each unordered pair
/// counted once. Single-source BFS with dependency back-propagation.
pub fn betweenness_centrality(g: &Graph) -> CentralityVector {
    let n = g.n();
    let mut centrality = vec![0.0f64; n];

    for source in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[source] = 1.0;
        dist[source] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    predecessors[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &predecessors[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != source {
                centrality[w] += delta[w];
            }
        }
    }
    // Each unordered pair was accumulated from both endpoints.
    for c in &mut centrality {
        *c /= 2.0;
    }
    CentralityVector {
        measure: CentralityMeasure::Betweenness,
        values: centrality,
    }
}

const EIGEN_TOL: f64 = 1e-10;
const EIGEN_MAX_ITER: usize = 10_000;

/// Eigenvector centrality with its dominant eigenvalue and the iteration
/// count that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvectorCentrality {
    pub vector: CentralityVector,
    pub eigenvalue: f64,
    pub iterations: usize,
}

/// Dominant adjacency eigenvector, normalized to unit max-norm.
///
/// Power iteration runs on `A + I` from a fixed all-ones start vector: the
/// shift leaves eigenvectors unchanged but keeps the iteration from
/// oscillating on bipartite graphs, where `-lambda_max` is also an
/// adjacency eigenvalue. The reported eigenvalue is the Rayleigh quotient
/// with respect to `A` itself. On disconnected graphs the mass settles on
/// the component(s) with the largest spectral radius.
pub fn eigenvector_centrality(g: &Graph) -> Result<EigenvectorCentrality, AnalysisError> {
    let n = g.n();
    if g.m() == 0 {
        return Err(AnalysisError::EmptyGraph);
    }
    let mut v = vec![1.0f64; n];
    for iteration in 1..=EIGEN_MAX_ITER {
        // (A + I) v
        let mut next: Vec<f64> = (0..n)
            .map(|i| v[i] + g.neighbors(i).iter().map(|&j| v[j]).sum::<f64>())
            .collect();
        let max = next.iter().copied().fold(0.0f64, f64::max);
        for x in &mut next {
            *x /= max;
        }
        let change = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if change <= EIGEN_TOL {
            let av: Vec<f64> = (0..n)
                .map(|i| g.neighbors(i).iter().map(|&j| v[j]).sum::<f64>())
                .collect();
            let num: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
            let den: f64 = v.iter().map(|a| a * a).sum();
            return Ok(EigenvectorCentrality {
                vector: CentralityVector {
                    measure: CentralityMeasure::Eigenvector,
                    values: v,
                },
                eigenvalue: num / den,
                iterations: iteration,
            });
        }
    }
    Err(AnalysisError::NotConverged { iterations: EIGEN_MAX_ITER })
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::SizeMismatch { expected: x.len(), actual: y.len() });
    }
    if x.len() < 2 {
        return Err(AnalysisError::TooFewPoints { n: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(AnalysisError::ConstantInput);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Pearson correlation between a centrality measure and the normalized
/// induced disruption of a full sweep.
pub fn correlate_disruption(
    g: &Graph,
    sweep: &SweepResult,
    measure: CentralityMeasure,
) -> Result<CorrelationReport, AnalysisError> {
    if sweep.normalized.len() != g.n() {
        return Err(AnalysisError::SizeMismatch {
            expected: g.n(),
            actual: sweep.normalized.len(),
        });
    }
    let centrality = match measure {
        CentralityMeasure::Degree => degree_centrality(g),
        CentralityMeasure::Betweenness => betweenness_centrality(g),
        CentralityMeasure::Eigenvector => eigenvector_centrality(g)?.vector,
    };
    let rho = pearson(&centrality.values, &sweep.normalized)?;
    Ok(CorrelationReport { measure, rho, n_points: g.n() })
}
