//! Undirected simple graphs, signed influence matrices, and the per-node
//! opinion/susceptibility vectors shared by every other module.
//!
//! Nodes are identified by dense indices `0..n`. Edges are stored normalized
//! (`i < j`), sorted, and deduplicated, so two graphs built from the same
//! edge set compare equal regardless of input order.

use std::collections::BTreeMap;
use std::fmt;

/// Errors raised while constructing graphs or per-node vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    /// An edge connects a node to itself.
    SelfLoop { node: usize },
    /// An edge endpoint is outside `0..n`.
    EndpointOutOfRange { node: usize, n: usize },
    /// An opinion value falls outside `[-1, 1]` (or is not finite).
    OpinionOutOfRange { index: usize, value: f64 },
    /// A susceptibility value falls outside `[0, 1]` (or is not finite).
    SusceptibilityOutOfRange { index: usize, value: f64 },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            GraphError::EndpointOutOfRange { node, n } => {
                write!(f, "edge endpoint {node} out of range (n = {n})")
            }
            GraphError::OpinionOutOfRange { index, value } => {
                write!(f, "opinion[{index}] = {value} outside [-1, 1]")
            }
            GraphError::SusceptibilityOutOfRange { index, value } => {
                write!(f, "susceptibility[{index}] = {value} outside [0, 1]")
            }
        }
    }
}

impl std::error::Error for GraphError {}

/// Undirected simple graph with degree bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    degree: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Build a graph from an edge list. Pairs are normalized to unordered
    /// form and deduplicated; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn build(n: usize, edge_list: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(a, b) in edge_list {
            if a == b {
                return Err(GraphError::SelfLoop { node: a });
            }
            for node in [a, b] {
                if node >= n {
                    return Err(GraphError::EndpointOutOfRange { node, n });
                }
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();

        let mut degree = vec![0usize; n];
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &edges {
            degree[i] += 1;
            degree[j] += 1;
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Graph {
            n,
            edges,
            degree,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges as normalized `(i, j)` pairs with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self) -> &[usize] {
        &self.degree
    }

    /// Sorted neighbor list of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    /// Combinatorial Laplacian `L = D - A` as a dense matrix. Entries are
    /// small integers, exact in f64, so `L * 1 = 0` holds exactly.
    pub fn laplacian_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut l = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            l[(i, i)] = self.degree[i] as f64;
        }
        for &(i, j) in &self.edges {
            l[(i, j)] = -1.0;
            l[(j, i)] = -1.0;
        }
        l
    }

    /// Laplacian quadratic form `x' L x = sum over edges of (x_i - x_j)^2`.
    pub fn laplacian_quadratic(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j)| {
                let d = x[i] - x[j];
                d * d
            })
            .sum()
    }
}

/// Signed influence weights over the edge set, entries in `{-1, 0, +1}`.
///
/// Entries are stored per directed pair so that asymmetric or off-support
/// input (e.g. from a malformed file) can be represented and reported by
/// [`validate_influence`]; `set` keeps the matrix symmetric by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceMatrix {
    n: usize,
    entries: BTreeMap<(usize, usize), i8>,
}

impl InfluenceMatrix {
    pub fn new(n: usize) -> InfluenceMatrix {
        InfluenceMatrix {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Set `W[i][j] = W[j][i] = sign`. A sign of 0 clears the entry.
    pub fn set(&mut self, i: usize, j: usize, sign: i8) -> Result<(), GraphError> {
        for node in [i, j] {
            if node >= self.n {
                return Err(GraphError::EndpointOutOfRange { node, n: self.n });
            }
        }
        if sign == 0 {
            self.entries.remove(&(i, j));
            self.entries.remove(&(j, i));
        } else {
            self.entries.insert((i, j), sign);
            self.entries.insert((j, i), sign);
        }
        Ok(())
    }

    /// Set a single directed entry without mirroring. Only useful for
    /// representing invalid states that `validate_influence` should flag.
    pub fn set_directed(&mut self, i: usize, j: usize, sign: i8) {
        if sign == 0 {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), sign);
        }
    }

    /// `W[i][j]`, 0 when absent.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Nonzero entries in sorted `(i, j)` order (both directions included).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.entries.iter().map(|(&(i, j), &s)| (i, j, s))
    }
}

/// A single violation found by [`validate_influence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InfluenceViolation {
    /// Matrix size does not match the graph.
    SizeMismatch { expected: usize, actual: usize },
    /// Nonzero entry on a pair that is not an edge (includes the diagonal).
    OffSupport { i: usize, j: usize },
    /// Edge with no influence entry.
    MissingEdge { i: usize, j: usize },
    /// `W[i][j] != W[j][i]`.
    Asymmetric { i: usize, j: usize },
    /// Entry outside `{-1, +1}`.
    BadValue { i: usize, j: usize, value: i8 },
}

impl fmt::Display for InfluenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfluenceViolation::SizeMismatch { expected, actual } => {
                write!(f, "influence matrix size {actual} does not match graph n = {expected}")
            }
            InfluenceViolation::OffSupport { i, j } => {
                write!(f, "nonzero influence on non-edge ({i}, {j})")
            }
            InfluenceViolation::MissingEdge { i, j } => {
                write!(f, "edge ({i}, {j}) has no influence entry")
            }
            InfluenceViolation::Asymmetric { i, j } => {
                write!(f, "influence asymmetric at ({i}, {j})")
            }
            InfluenceViolation::BadValue { i, j, value } => {
                write!(f, "influence[{i}][{j}] = {value} not in {{-1, +1}}")
            }
        }
    }
}

/// Check that the influence support equals the edge set, entries are
/// symmetric, and every value is in `{-1, +1}`. Returns every violation
/// found; an empty list means the matrix is valid for `g`.
pub fn validate_influence(g: &Graph, w: &InfluenceMatrix) -> Vec<InfluenceViolation> {
    let mut violations = Vec::new();
    if w.n() != g.n() {
        violations.push(InfluenceViolation::SizeMismatch {
            expected: g.n(),
            actual: w.n(),
        });
        return violations;
    }
    for (i, j, sign) in w.entries() {
        if sign != 1 && sign != -1 {
            violations.push(InfluenceViolation::BadValue { i, j, value: sign });
        }
        if i == j || !g.has_edge(i, j) {
            // Report each unordered off-support pair once.
            if i <= j {
                violations.push(InfluenceViolation::OffSupport { i, j });
            }
            continue;
        }
        if i < j && w.get(j, i) != sign {
            violations.push(InfluenceViolation::Asymmetric { i, j });
        }
    }
    for &(i, j) in g.edges() {
        if w.get(i, j) == 0 && w.get(j, i) == 0 {
            violations.push(InfluenceViolation::MissingEdge { i, j });
        }
    }
    violations
}

/// Innate or expressed opinions, one value per node, each in `[-1, 1]`.
///
/// Equilibrium vectors produced by the solvers are plain `Vec<f64>` and are
/// not range-checked: with negative influence an equilibrium can leave
/// `[-1, 1]`, and callers that care count violations as a diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Result<OpinionVector, GraphError> {
        for (index, &value) in values.iter().enumerate() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(GraphError::OpinionOutOfRange { index, value });
            }
        }
        Ok(OpinionVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.clone()
    }
}

impl std::ops::Index<usize> for OpinionVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-node susceptibility to neighbor influence, each value in `[0, 1]`.
/// 0 means fully stubborn.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityProfile(Vec<f64>);

impl SusceptibilityProfile {
    pub fn new(values: Vec<f64>) -> Result<SusceptibilityProfile, GraphError> {
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(GraphError::SusceptibilityOutOfRange { index, value });
            }
        }
        Ok(SusceptibilityProfile(values))
    }

    pub fn zeros(n: usize) -> SusceptibilityProfile {
        SusceptibilityProfile(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for SusceptibilityProfile {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
