//! Single-node innate-opinion perturbation maximizing equilibrium
//! disruption, plus the all-nodes sweep behind the centrality analyses.
//!
//! Writing the perturbed vector as `s' = s - alpha * e_u` with
//! `s_u - 1 <= alpha <= s_u + 1`, the objective `z*(s')' X z*(s')` is a
//! convex quadratic in `alpha` (its leading coefficient is a diagonal entry
//! of a positive semi-definite matrix), so the maximum sits at one of the
//! two interval endpoints, i.e. at `s'_u = +1` or `s'_u = -1`. The optimizer
//! therefore evaluates two equilibria per node and never materializes the
//! dense objective matrix; sweeps reuse a single factorization for all
//! right-hand sides.

use std::fmt;

use serde::Serialize;

use crate::disruption::{disruption_quadratic, MetricError};
use crate::fj::{build_operator, ExtendedOperator, FjError};
use crate::graph::{Graph, InfluenceMatrix, OpinionVector, SusceptibilityProfile};

#[derive(Debug, Clone, PartialEq)]
pub enum PerturbError {
    InvalidNode { node: usize, n: usize },
    /// Grid scans need at least 3 points to say anything.
    GridTooSmall { points: usize },
    Solver(FjError),
    Metric(MetricError),
}

impl fmt::Display for PerturbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbError::InvalidNode { node, n } => {
                write!(f, "node {node} out of range (n = {n})")
            }
            PerturbError::GridTooSmall { points } => {
                write!(f, "grid needs at least 3 points, got {points}")
            }
            PerturbError::Solver(e) => write!(f, "solver: {e}"),
            PerturbError::Metric(e) => write!(f, "metric: {e}"),
        }
    }
}

impl std::error::Error for PerturbError {}

impl From<FjError> for PerturbError {
    fn from(e: FjError) -> Self {
        PerturbError::Solver(e)
    }
}

impl From<MetricError> for PerturbError {
    fn from(e: MetricError) -> Self {
        PerturbError::Metric(e)
    }
}

/// Which endpoint of the feasible interval won.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChosenBound {
    /// `alpha = s_u - 1`, pushing `s'_u` to +1.
    LowBound,
    /// `alpha = s_u + 1`, pushing `s'_u` to -1.
    HighBound,
    /// Both endpoints score equally; resolved toward `alpha = s_u - 1`.
    Tie,
}

/// The optimal single-node perturbation for one target node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationPlan {
    pub node: usize,
    /// The winning shift; `s'_u = s_u - alpha`.
    pub alpha: f64,
    /// Perturbed innate opinions; differs from `s` only at `node`.
    pub s_prime: Vec<f64>,
    /// Equilibrium disruption with `s'_u = +1` (alpha at the low bound).
    pub objective_low: f64,
    /// Equilibrium disruption with `s'_u = -1` (alpha at the high bound).
    pub objective_high: f64,
    pub chosen: ChosenBound,
}

impl PerturbationPlan {
    /// Disruption achieved by the chosen endpoint.
    pub fn objective(&self) -> f64 {
        self.objective_low.max(self.objective_high)
    }

    /// The perturbed opinion at the target node (+1 or -1).
    pub fn s_prime_u(&self) -> f64 {
        self.s_prime[self.node]
    }
}

/// Maximum of the objective over a uniform alpha grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridScan {
    pub max_objective: f64,
    pub argmax_alpha: f64,
}

/// Per-node plans with raw and min-max-normalized induced disruption.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub plans: Vec<PerturbationPlan>,
    pub induced: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl SweepResult {
    /// Index of the node whose best perturbation disrupts most. Ties go to
    /// the lowest index.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.induced.iter().enumerate() {
            if best.is_none_or(|b| v > self.induced[b]) {
                best = Some(i);
            }
        }
        best
    }
}

fn objective_at(
    op: &ExtendedOperator,
    g: &Graph,
    s: &[f64],
    u: usize,
    s_prime_u: f64,
) -> Result<f64, PerturbError> {
    let mut s_prime = s.to_vec();
    s_prime[u] = s_prime_u;
    let z = op.apply(&s_prime)?;
    Ok(disruption_quadratic(g, &z)?)
}

fn best_alpha_with(
    op: &ExtendedOperator,
    g: &Graph,
    s: &[f64],
    u: usize,
) -> Result<PerturbationPlan, PerturbError> {
    // The endpoints alpha = s_u -+ 1 correspond exactly to s'_u = +-1, so
    // the perturbed entry is assigned rather than computed by subtraction.
    let objective_low = objective_at(op, g, s, u, 1.0)?;
    let objective_high = objective_at(op, g, s, u, -1.0)?;
    let (chosen, s_prime_u) = if objective_low > objective_high {
        (ChosenBound::LowBound, 1.0)
    } else if objective_high > objective_low {
        (ChosenBound::HighBound, -1.0)
    } else {
        (ChosenBound::Tie, 1.0)
    };
    let alpha = if s_prime_u > 0.0 { s[u] - 1.0 } else { s[u] + 1.0 };
    let mut s_prime = s.to_vec();
    s_prime[u] = s_prime_u;
    Ok(PerturbationPlan {
        node: u,
        alpha,
        s_prime,
        objective_low,
        objective_high,
        chosen,
    })
}

/// Find the endpoint perturbation of node `u` that maximizes equilibrium
/// disruption.
pub fn best_alpha(
    g: &Graph,
    w: &InfluenceMatrix,
    lam: &SusceptibilityProfile,
    s: &OpinionVector,
    u: usize,
) -> Result<PerturbationPlan, PerturbError> {
    if u >= g.n() {
        return Err(PerturbError::InvalidNode { node: u, n: g.n() });
    }
    let op = build_operator(g, w, lam)?;
    best_alpha_with(&op, g, s.as_slice(), u)
}

/// Evaluate the objective on a uniform `grid_points`-point alpha grid over
/// `[s_u - 1, s_u + 1]` and return the maximum. Serves as the verification
/// oracle for the endpoint rule: the endpoint maximum must dominate the
/// grid maximum up to rounding.
pub fn grid_check(
    g: &Graph,
    w: &InfluenceMatrix,
    lam: &SusceptibilityProfile,
    s: &OpinionVector,
    u: usize,
    grid_points: usize,
) -> Result<GridScan, PerturbError> {
    if u >= g.n() {
        return Err(PerturbError::InvalidNode { node: u, n: g.n() });
    }
    if grid_points < 3 {
        return Err(PerturbError::GridTooSmall { points: grid_points });
    }
    let op = build_operator(g, w, lam)?;
    let s = s.as_slice();
    let low = s[u] - 1.0;
    let width = 2.0;
    let mut best = (f64::NEG_INFINITY, low);
    for k in 0..grid_points {
        let alpha = low + width * k as f64 / (grid_points - 1) as f64;
        let value = objective_at(&op, g, s, u, s[u] - alpha)?;
        if value > best.0 {
            best = (value, alpha);
        }
    }
    Ok(GridScan { max_objective: best.0, argmax_alpha: best.1 })
}

/// Best endpoint perturbation for every node, sharing one factorization.
/// Output order is fixed by node index; the normalized scores use min-max
/// scaling, with an all-zero result when every node induces the same value.
pub fn sweep_nodes(
    g: &Graph,
    w: &InfluenceMatrix,
    lam: &SusceptibilityProfile,
    s: &OpinionVector,
) -> Result<SweepResult, PerturbError> {
    let op = build_operator(g, w, lam)?;
    let s = s.as_slice();
    let mut plans = Vec::with_capacity(g.n());
    for u in 0..g.n() {
        plans.push(best_alpha_with(&op, g, s, u)?);
    }
    let induced: Vec<f64> = plans.iter().map(|p| p.objective()).collect();
    let normalized = min_max_normalize(&induced);
    Ok(SweepResult { plans, induced, normalized })
}

/// Min-max scaling into `[0, 1]`. A degenerate range (all values equal up
/// to roundoff) maps to all zeros so that no node stands out; without the
/// tolerance, solver noise on symmetric instances would stretch a span of
/// a few ulps across the whole unit interval.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * 1.0f64.max(min.abs()).max(max.abs());
    if values.is_empty() || max - min <= tol {
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| (v - min) / (max - min)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disruption::disruption_quadratic;
    use crate::fj::solve_extended;
    use crate::graph::{Graph, InfluenceMatrix, SusceptibilityProfile};
    use crate::testutil::{
        figure1, random_graph, random_influence, random_opinions, random_susceptibility,
    };

    fn p2_unsusceptible() -> (Graph, InfluenceMatrix, SusceptibilityProfile, OpinionVector) {
        let g = Graph::build(2, &[(0, 1)]).unwrap();
        let mut w = InfluenceMatrix::new(2);
        w.set(0, 1, 1).unwrap();
        let lam = SusceptibilityProfile::zeros(2);
        let s = OpinionVector::new(vec![0.5, -0.5]).unwrap();
        (g, w, lam, s)
    }

    #[test]
    fn p2_endpoint_values() {
        // With lam = 0 the equilibrium is s' itself and the objective is
        // s'' X s' = 1.5 (s'_0 - s'_1)^2 = 1.5 (1 - alpha)^2 for u = 0.
        let (g, w, lam, s) = p2_unsusceptible();
        let plan = best_alpha(&g, &w, &lam, &s, 0).unwrap();
        assert!((plan.objective_low - 3.375).abs() < 1e-12);
        assert!((plan.objective_high - 0.375).abs() < 1e-12);
        assert_eq!(plan.chosen, ChosenBound::LowBound);
        assert!((plan.alpha - (-0.5)).abs() < 1e-15);
        assert_eq!(plan.s_prime, vec![1.0, -0.5]);
    }

    #[test]
    fn zero_opinions_tie_toward_plus_one() {
        let g = random_graph(5, 8, 0.4);
        let w = random_influence(6, &g, 0.3);
        let lam = SusceptibilityProfile::zeros(8);
        let s = OpinionVector::new(vec![0.0; 8]).unwrap();
        for u in 0..8 {
            let plan = best_alpha(&g, &w, &lam, &s, u).unwrap();
            assert_eq!(plan.chosen, ChosenBound::Tie);
            assert_eq!(plan.s_prime_u(), 1.0);
            assert!((plan.alpha - (-1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn p2_grid_check_matches_closed_form() {
        let (g, w, lam, s) = p2_unsusceptible();
        let scan = grid_check(&g, &w, &lam, &s, 0, 101).unwrap();
        assert!((scan.max_objective - 3.375).abs() < 1e-12);
        assert!((scan.argmax_alpha - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn grid_needs_three_points() {
        let (g, w, lam, s) = p2_unsusceptible();
        assert_eq!(
            grid_check(&g, &w, &lam, &s, 0, 2),
            Err(PerturbError::GridTooSmall { points: 2 })
        );
    }

    #[test]
    fn figure1_sweep_dominates_unperturbed_equilibrium() {
        let (g, w, lam, s) = figure1();
        let sweep = sweep_nodes(&g, &w, &lam, &s).unwrap();
        assert_eq!(sweep.plans.len(), 6);
        let best = sweep.argmax().unwrap();
        assert!(sweep.induced[best] >= 8.02);
        // Exhaustive oracle over all 6 nodes x 2 endpoints.
        let mut oracle_best = f64::NEG_INFINITY;
        for u in 0..6 {
            for target in [1.0, -1.0] {
                let mut sp = s.to_vec();
                sp[u] = target;
                let sp = OpinionVector::new(sp).unwrap();
                let z = solve_extended(&g, &w, &lam, &sp).unwrap().z_star;
                oracle_best = oracle_best.max(disruption_quadratic(&g, &z).unwrap());
            }
        }
        let scale = 1.0f64.max(oracle_best.abs());
        assert!((sweep.induced[best] - oracle_best).abs() <= 1e-9 * scale);
    }

    #[test]
    fn symmetric_instance_normalizes_to_zeros() {
        // Complete graph, uniform opinions and susceptibility: all nodes
        // are interchangeable, so the normalized vector degenerates.
        let mut edges = Vec::new();
        for i in 0..5 {
            for j in (i + 1)..5 {
                edges.push((i, j));
            }
        }
        let g = Graph::build(5, &edges).unwrap();
        let mut w = InfluenceMatrix::new(5);
        for &(i, j) in g.edges() {
            w.set(i, j, 1).unwrap();
        }
        let lam = SusceptibilityProfile::new(vec![0.5; 5]).unwrap();
        let s = OpinionVector::new(vec![0.3; 5]).unwrap();
        let sweep = sweep_nodes(&g, &w, &lam, &s).unwrap();
        let first = sweep.induced[0];
        for &v in &sweep.induced {
            assert!((v - first).abs() < 1e-9);
        }
        assert!(sweep.normalized.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn plan_objective_consistent_with_direct_solve() {
        for seed in 0..25u64 {
            let n = 3 + (seed as usize % 12);
            let g = random_graph(seed, n, 0.3);
            let w = random_influence(seed ^ 40, &g, 0.4);
            let lam = random_susceptibility(seed ^ 41, n, 0.9);
            let s = random_opinions(seed ^ 42, n);
            let u = seed as usize % n;
            let plan = best_alpha(&g, &w, &lam, &s, u).unwrap();
            let sp = OpinionVector::new(plan.s_prime.clone()).unwrap();
            let z = solve_extended(&g, &w, &lam, &sp).unwrap().z_star;
            let direct = disruption_quadratic(&g, &z).unwrap();
            let scale = 1.0f64.max(direct.abs());
            assert!((plan.objective() - direct).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn endpoint_rule_beats_grid_on_random_instances() {
        for seed in 200..230u64 {
            let n = 3 + (seed as usize % 10);
            let g = random_graph(seed, n, 0.35);
            let w = random_influence(seed ^ 50, &g, 0.5);
            let lam = random_susceptibility(seed ^ 51, n, 0.9);
            let s = random_opinions(seed ^ 52, n);
            let u = (seed as usize / 3) % n;
            let plan = best_alpha(&g, &w, &lam, &s, u).unwrap();
            let scan = grid_check(&g, &w, &lam, &s, u, 51).unwrap();
            let scale = 1.0f64.max(scan.max_objective.abs());
            assert!(plan.objective() >= scan.max_objective - 1e-9 * scale);
        }
    }

    #[test]
    fn effective_quadratic_coefficient_nonnegative() {
        // Finite differences of the objective in alpha estimate B_uu >= 0.
        for seed in 300..320u64 {
            let n = 4 + (seed as usize % 8);
            let g = random_graph(seed, n, 0.3);
            let w = random_influence(seed ^ 60, &g, 0.5);
            let lam = random_susceptibility(seed ^ 61, n, 0.9);
            let s = random_opinions(seed ^ 62, n);
            let u = seed as usize % n;
            let op = build_operator(&g, &w, &lam).unwrap();
            let f = |alpha: f64| {
                objective_at(&op, &g, s.as_slice(), u, s.as_slice()[u] - alpha).unwrap()
            };
            let h = 0.25;
            let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            assert!(second >= -1e-8, "B_uu estimate {second}");
        }
    }

    #[test]
    fn min_max_preserves_argmax_and_argmin() {
        let values = [3.0, 9.5, -1.0, 4.0];
        let norm = min_max_normalize(&values);
        assert_eq!(norm[1], 1.0);
        assert_eq!(norm[2], 0.0);
        assert!(norm.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn invalid_node_rejected() {
        let (g, w, lam, s) = p2_unsusceptible();
        assert_eq!(
            best_alpha(&g, &w, &lam, &s, 9),
            Err(PerturbError::InvalidNode { node: 9, n: 2 })
        );
    }
}
