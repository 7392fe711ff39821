//! Graph opinion-dynamics toolkit.
//!
//! Computes equilibria of the averaging opinion model and its signed,
//! susceptibility-weighted extension; quantifies social disruption
//! (polarization plus disagreement); finds the single-node innate-opinion
//! perturbation that maximizes equilibrium disruption; generates synthetic
//! benchmark networks; and simulates a content-generation feedback loop
//! against a pluggable stance generator.
//!
//! Modules:
//! - [`graph`]: graph, influence, and per-node vector types with validation
//! - [`fj`]: direct equilibrium solvers and a fixed-point cross-check
//! - [`disruption`]: metrics and spectral certificates
//! - [`perturb`]: endpoint perturbation optimizer and node sweeps
//! - [`netgen`]: seeded synthetic instance generation
//! - [`analysis`]: centralities and disruption correlation
//! - [`campaign`]: the content-generation control loop
//! - [`io`]: dataset file formats

pub mod analysis;
pub mod campaign;
pub mod disruption;
pub mod fj;
pub mod graph;
pub mod io;
pub mod netgen;
pub mod perturb;

#[doc(hidden)]
pub mod testutil;

pub use analysis::{
    betweenness_centrality, correlate_disruption, degree_centrality, eigenvector_centrality,
    pearson, CentralityMeasure, CentralityVector, CorrelationReport,
};
pub use campaign::{
    end_to_end_disruption, reference_generator, reward, run_campaign, CampaignConfig,
    CampaignOutcome, CampaignTrace, StanceGenerator,
};
pub use disruption::{
    disagreement, disruption_quadratic, disruption_report, polarization, verify_theorem1,
    x_matrix_psd_check, DisruptionReport, StateTag, TheoremOneCertificate,
};
pub use fj::{
    build_operator, iterate_extended, solve_basic, solve_extended, EquilibriumResult, FjError,
    FjModel,
};
pub use graph::{
    validate_influence, Graph, GraphError, InfluenceMatrix, OpinionVector, SusceptibilityProfile,
};
pub use netgen::{
    degree_susceptibility, derive_influence, gen_sbm, generate_instance, sample_opinions,
    sample_susceptibility, SbmConfig, SbmInstance,
};
pub use perturb::{
    best_alpha, grid_check, min_max_normalize, sweep_nodes, PerturbationPlan, SweepResult,
};
