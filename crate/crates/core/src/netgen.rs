//! Synthetic benchmark generation: stochastic block model graphs,
//! Beta-distributed opinions and susceptibilities, distance-thresholded
//! signed influence, and degree-proportional susceptibility for ingested
//! networks.
//!
//! All sampling is driven by ChaCha streams derived from the config seed,
//! one stream per phase in a fixed draw order: edges first, then opinions,
//! then susceptibilities. Each generator op re-derives its own phase stream,
//! so sampling a full instance and sampling the pieces separately produce
//! identical results.

use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, InfluenceMatrix, OpinionVector, SusceptibilityProfile};

const EDGE_PHASE: u64 = 0;
const OPINION_PHASE: u64 = 1;
const SUSCEPTIBILITY_PHASE: u64 = 2;

fn phase_rng(seed: u64, phase: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(phase.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Configuration for one synthetic instance.
///
/// `opinion_beta` holds `(alpha1, beta1, alpha2, beta2)`: the first
/// community samples opinions from `Beta(alpha1, beta1)`, every later
/// community from `Beta(alpha2, beta2)`. Raw Beta draws `b` in `[0, 1]` are
/// rescaled to opinions `2b - 1` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub community_sizes: Vec<usize>,
    pub p_intra: f64,
    pub p_inter: f64,
    pub opinion_beta: (f64, f64, f64, f64),
    pub susceptibility_beta: (f64, f64),
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    /// Two communities of 50, dense inside (0.4) and sparse across (0.01),
    /// strongly mirrored opinions (Beta(1,15) vs Beta(15,1)), uniform
    /// susceptibility, and a zero influence threshold.
    fn default() -> Self {
        SbmConfig {
            community_sizes: vec![50, 50],
            p_intra: 0.4,
            p_inter: 0.01,
            opinion_beta: (1.0, 15.0, 15.0, 1.0),
            susceptibility_beta: (1.0, 1.0),
            epsilon: 0.0,
            seed: 0,
        }
    }
}

impl SbmConfig {
    pub fn n(&self) -> usize {
        self.community_sizes.iter().sum()
    }

    /// Community index of node `i` under contiguous block layout.
    pub fn community_of(&self, i: usize) -> usize {
        let mut offset = 0;
        for (k, &size) in self.community_sizes.iter().enumerate() {
            offset += size;
            if i < offset {
                return k;
            }
        }
        panic!("node {i} out of range for config with n = {}", self.n());
    }

    pub fn validate(&self) -> Result<(), NetgenError> {
        if self.community_sizes.is_empty() || self.community_sizes.iter().any(|&s| s == 0) {
            return Err(NetgenError::EmptyCommunity);
        }
        for (name, p) in [("p_intra", self.p_intra), ("p_inter", self.p_inter)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(NetgenError::InvalidProbability { name, value: p });
            }
        }
        let (a1, b1, a2, b2) = self.opinion_beta;
        let (al, bl) = self.susceptibility_beta;
        for (name, v) in [
            ("opinion alpha1", a1),
            ("opinion beta1", b1),
            ("opinion alpha2", a2),
            ("opinion beta2", b2),
            ("susceptibility alpha", al),
            ("susceptibility beta", bl),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(NetgenError::InvalidBetaParameter { name, value: v });
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(NetgenError::InvalidEpsilon { value: self.epsilon });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetgenError {
    EmptyCommunity,
    InvalidProbability { name: &'static str, value: f64 },
    InvalidBetaParameter { name: &'static str, value: f64 },
    InvalidEpsilon { value: f64 },
}

impl fmt::Display for NetgenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetgenError::EmptyCommunity => {
                write!(f, "community sizes must be nonempty and positive")
            }
            NetgenError::InvalidProbability { name, value } => {
                write!(f, "{name} = {value} outside [0, 1]")
            }
            NetgenError::InvalidBetaParameter { name, value } => {
                write!(f, "{name} = {value} must be a positive finite Beta parameter")
            }
            NetgenError::InvalidEpsilon { value } => {
                write!(f, "epsilon = {value} must be finite and nonnegative")
            }
        }
    }
}

impl std::error::Error for NetgenError {}

/// Sample the stochastic block model graph: each intra-community pair is an
/// edge with `p_intra`, each inter-community pair with `p_inter`. Pairs are
/// visited in lexicographic order, one uniform draw per pair.
pub fn gen_sbm(cfg: &SbmConfig) -> Result<Graph, NetgenError> {
    cfg.validate()?;
    let n = cfg.n();
    let mut rng = phase_rng(cfg.seed, EDGE_PHASE);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if cfg.community_of(i) == cfg.community_of(j) {
                cfg.p_intra
            } else {
                cfg.p_inter
            };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::build(n, &edges).expect("generated edges are valid"))
}

/// Sample innate opinions: node `i` in community `k` draws
/// `b ~ Beta(alpha_k, beta_k)` and gets `s_i = 2b - 1`.
pub fn sample_opinions(cfg: &SbmConfig) -> Result<OpinionVector, NetgenError> {
    cfg.validate()?;
    let (a1, b1, a2, b2) = cfg.opinion_beta;
    let first = Beta::new(a1, b1).expect("validated parameters");
    let rest = Beta::new(a2, b2).expect("validated parameters");
    let mut rng = phase_rng(cfg.seed, OPINION_PHASE);
    let mut values = Vec::with_capacity(cfg.n());
    for i in 0..cfg.n() {
        let dist = if cfg.community_of(i) == 0 { &first } else { &rest };
        let b: f64 = dist.sample(&mut rng);
        values.push(2.0 * b - 1.0);
    }
    Ok(OpinionVector::new(values).expect("Beta rescale stays in range"))
}

/// Sample susceptibilities `lambda_i ~ Beta(alpha, beta)` independently.
pub fn sample_susceptibility(cfg: &SbmConfig) -> Result<SusceptibilityProfile, NetgenError> {
    cfg.validate()?;
    let (a, b) = cfg.susceptibility_beta;
    let dist = Beta::new(a, b).expect("validated parameters");
    let mut rng = phase_rng(cfg.seed, SUSCEPTIBILITY_PHASE);
    let values: Vec<f64> = (0..cfg.n()).map(|_| dist.sample(&mut rng)).collect();
    Ok(SusceptibilityProfile::new(values).expect("Beta stays in range"))
}

/// Assign influence signs from opinions: an edge gets -1 when the endpoint
/// opinions have strictly opposite signs (`s_i * s_j < 0`, so zeros never
/// count as opposing) and differ by at least `epsilon`; otherwise +1.
pub fn derive_influence(g: &Graph, s: &OpinionVector, epsilon: f64) -> InfluenceMatrix {
    assert_eq!(s.len(), g.n(), "opinion vector must match graph size");
    let mut w = InfluenceMatrix::new(g.n());
    for &(i, j) in g.edges() {
        let opposing = s[i] * s[j] < 0.0 && (s[i] - s[j]).abs() >= epsilon;
        let sign = if opposing { -1 } else { 1 };
        w.set(i, j, sign).expect("edge endpoints in range");
    }
    w
}

/// Degree-proportional susceptibility `lambda_i = d_i / max_j d_j`; the
/// edgeless graph maps to all zeros.
pub fn degree_susceptibility(g: &Graph) -> SusceptibilityProfile {
    let max_d = g.max_degree();
    let values: Vec<f64> = if max_d == 0 {
        vec![0.0; g.n()]
    } else {
        g.degree().iter().map(|&d| d as f64 / max_d as f64).collect()
    };
    SusceptibilityProfile::new(values).expect("ratios stay in [0, 1]")
}

/// A fully sampled synthetic instance.
#[derive(Debug, Clone)]
pub struct SbmInstance {
    pub graph: Graph,
    pub opinions: OpinionVector,
    pub susceptibility: SusceptibilityProfile,
    pub influence: InfluenceMatrix,
}

/// Sample graph, opinions, and susceptibility from their phase streams and
/// derive the influence signs with the config's epsilon.
pub fn generate_instance(cfg: &SbmConfig) -> Result<SbmInstance, NetgenError> {
    let graph = gen_sbm(cfg)?;
    let opinions = sample_opinions(cfg)?;
    let susceptibility = sample_susceptibility(cfg)?;
    let influence = derive_influence(&graph, &opinions, cfg.epsilon);
    Ok(SbmInstance { graph, opinions, susceptibility, influence })
}
