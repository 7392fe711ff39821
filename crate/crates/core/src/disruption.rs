//! Polarization, disagreement, and disruption functionals, plus spectral
//! certificates showing that plain averaging dynamics can never increase
//! disruption at equilibrium.
//!
//! Disruption is computed along two distinct routes that are cross-checked
//! on every report: the sum form `P + D` (mean-centered squares plus edge
//! differences) and the quadratic form `x' (I + L - (1/n) 11') x` expanded
//! through degrees and edge products. The quadratic form is what the
//! perturbation optimizer maximizes.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::fj::{solve_basic, FjError};
use crate::graph::{Graph, OpinionVector};

/// Above this size, certificates switch from dense eigendecomposition to
/// power-iteration extremal estimates.
pub const DENSE_EIGEN_MAX_N: usize = 2000;

/// Which opinion state a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateTag {
    Innate,
    BasicEq,
    ExtendedEq,
    Manipulated,
}

impl fmt::Display for StateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StateTag::Innate => "Innate",
            StateTag::BasicEq => "BasicEq",
            StateTag::ExtendedEq => "ExtendedEq",
            StateTag::Manipulated => "Manipulated",
        };
        f.write_str(s)
    }
}

/// Polarization, disagreement, and their sum for one opinion state.
#[derive(Debug, Clone, Serialize)]
pub struct DisruptionReport {
    pub state_tag: StateTag,
    pub polarization: f64,
    pub disagreement: f64,
    pub disruption: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    EmptyVector,
    SizeMismatch { expected: usize, actual: usize },
    /// Sum form and quadratic form disagree beyond tolerance; this flags a
    /// numerical bug, not bad input.
    CrossCheckFailed { sum_form: f64, quadratic_form: f64 },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::EmptyVector => write!(f, "empty opinion vector"),
            MetricError::SizeMismatch { expected, actual } => {
                write!(f, "vector length {actual} does not match graph size {expected}")
            }
            MetricError::CrossCheckFailed { sum_form, quadratic_form } => {
                write!(
                    f,
                    "disruption cross-check failed: sum form {sum_form} vs quadratic form {quadratic_form}"
                )
            }
        }
    }
}

impl std::error::Error for MetricError {}

/// Sum of squared deviations from the mean opinion.
pub fn polarization(x: &[f64]) -> Result<f64, MetricError> {
    if x.is_empty() {
        return Err(MetricError::EmptyVector);
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    Ok(x.iter().map(|&v| (v - mean) * (v - mean)).sum())
}

/// Sum over edges of squared opinion differences.
pub fn disagreement(g: &Graph, x: &[f64]) -> Result<f64, MetricError> {
    if x.len() != g.n() {
        return Err(MetricError::SizeMismatch { expected: g.n(), actual: x.len() });
    }
    Ok(g.laplacian_quadratic(x))
}

/// Disruption via the quadratic form `x' (I + L - (1/n) 11') x`, expanded
/// as `sum_i (1 + d_i) x_i^2 - 2 sum_edges x_i x_j - (sum_i x_i)^2 / n`.
pub fn disruption_quadratic(g: &Graph, x: &[f64]) -> Result<f64, MetricError> {
    if x.len() != g.n() {
        return Err(MetricError::SizeMismatch { expected: g.n(), actual: x.len() });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let diag: f64 = x
        .iter()
        .zip(g.degree())
        .map(|(&v, &d)| (1.0 + d as f64) * v * v)
        .sum();
    let cross: f64 = g.edges().iter().map(|&(i, j)| x[i] * x[j]).sum();
    let total: f64 = x.iter().sum();
    Ok(diag - 2.0 * cross - total * total / x.len() as f64)
}

/// Full disruption report with the sum-vs-quadratic cross-check.
pub fn disruption_report(
    g: &Graph,
    x: &[f64],
    state_tag: StateTag,
) -> Result<DisruptionReport, MetricError> {
    let p = polarization(x)?;
    let d = disagreement(g, x)?;
    let sum_form = p + d;
    let quadratic_form = disruption_quadratic(g, x)?;
    let scale = 1.0f64.max(sum_form.abs());
    if (sum_form - quadratic_form).abs() > 1e-9 * scale {
        return Err(MetricError::CrossCheckFailed { sum_form, quadratic_form });
    }
    Ok(DisruptionReport {
        state_tag,
        polarization: p,
        disagreement: d,
        disruption: sum_form,
    })
}

/// Certificate that averaging dynamics cannot raise disruption: the gap
/// `I(z*) - I(s)` is nonpositive, the comparison matrix
/// `Y = (I+L)^-1 X (I+L)^-1 - X` is negative semi-definite, and every
/// eigenvalue of `I + L` is at least 1.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremOneCertificate {
    pub gap: f64,
    pub max_y_eigenvalue: f64,
    /// Eigenvalues of `I + L`, ascending. On the estimate path (large n)
    /// this holds only the extremal pair `[min, max]`.
    pub sigma_spectrum: Vec<f64>,
}

/// Compute the certificate, choosing dense eigendecomposition up to
/// [`DENSE_EIGEN_MAX_N`] nodes and power-iteration estimates above.
pub fn verify_theorem1(g: &Graph, s: &OpinionVector) -> Result<TheoremOneCertificate, FjError> {
    if g.n() <= DENSE_EIGEN_MAX_N {
        verify_theorem1_dense(g, s)
    } else {
        verify_theorem1_estimated(g, s)
    }
}

/// Dense-eigendecomposition certificate path.
pub fn verify_theorem1_dense(
    g: &Graph,
    s: &OpinionVector,
) -> Result<TheoremOneCertificate, FjError> {
    let n = g.n();
    if n == 0 {
        return Ok(TheoremOneCertificate {
            gap: 0.0,
            max_y_eigenvalue: 0.0,
            sigma_spectrum: Vec::new(),
        });
    }
    let gap = theorem1_gap(g, s)?;

    let lt = i_plus_l(g);
    let x = x_matrix(g);
    let lt_inv = lt
        .clone()
        .try_inverse()
        .ok_or(FjError::SingularSystem { rcond: 0.0 })?;
    let y = &lt_inv * &x * &lt_inv - &x;
    let max_y_eigenvalue = symmetric_eigenvalues(&y)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut sigma_spectrum = symmetric_eigenvalues(&lt);
    sigma_spectrum.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(TheoremOneCertificate {
        gap,
        max_y_eigenvalue,
        sigma_spectrum,
    })
}

/// Matrix-free certificate path for large graphs: shifted power iteration
/// for the largest eigenvalue of `Y`, plain and inverse power iteration for
/// the extremal eigenvalues of `I + L`.
pub fn verify_theorem1_estimated(
    g: &Graph,
    s: &OpinionVector,
) -> Result<TheoremOneCertificate, FjError> {
    let n = g.n();
    if n == 0 {
        return Ok(TheoremOneCertificate {
            gap: 0.0,
            max_y_eigenvalue: 0.0,
            sigma_spectrum: Vec::new(),
        });
    }
    let gap = theorem1_gap(g, s)?;
    let solve = basic_solver(g)?;

    let apply_x = |v: &[f64]| apply_x_matrix(g, v);
    let apply_y = |v: &[f64]| -> Vec<f64> {
        let inner = solve(v);
        let xed = apply_x(&inner);
        let outer = solve(&xed);
        let direct = apply_x(v);
        outer.iter().zip(&direct).map(|(a, b)| a - b).collect()
    };

    // All eigenvalues of Y lie within +-(2 + 2 dmax); the shift makes the
    // rightmost one dominant in magnitude.
    let shift = 2.0 * (2.0 + 2.0 * g.max_degree() as f64);
    let max_y_eigenvalue = power_iteration_extremal(n, shift, apply_y);

    let sigma_max = power_iteration_extremal(n, 0.0, |v| {
        let lv = apply_laplacian(g, v);
        v.iter().zip(&lv).map(|(a, b)| a + b).collect()
    });
    // Inverse power iteration: dominant eigenvalue of (I+L)^-1 is 1/sigma_min.
    let inv_max = power_iteration_extremal(n, 0.0, |v| solve(v));
    let sigma_min = 1.0 / inv_max;
    Ok(TheoremOneCertificate {
        gap,
        max_y_eigenvalue,
        sigma_spectrum: vec![sigma_min, sigma_max],
    })
}

/// Result of the positive semi-definiteness check on
/// `X = I + L - (1/n) 11'`.
#[derive(Debug, Clone, Serialize)]
pub struct XPsdCheck {
    pub min_eigenvalue: f64,
    /// Max-norm of `X * 1`, which is zero in exact arithmetic.
    pub x_one_residual: f64,
}

pub fn x_matrix_psd_check(g: &Graph) -> XPsdCheck {
    let n = g.n();
    if n == 0 {
        return XPsdCheck { min_eigenvalue: 0.0, x_one_residual: 0.0 };
    }
    let ones = vec![1.0; n];
    let x_one = apply_x_matrix(g, &ones);
    let x_one_residual = x_one.iter().map(|v| v.abs()).fold(0.0, f64::max);

    let min_eigenvalue = if n <= DENSE_EIGEN_MAX_N {
        symmetric_eigenvalues(&x_matrix(g))
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    } else {
        // Largest eigenvalue of (c I - X) is c - min_eig(X).
        let c = 2.0 + 2.0 * g.max_degree() as f64;
        let top = power_iteration_extremal(n, 0.0, |v| {
            let xv = apply_x_matrix(g, v);
            v.iter().zip(&xv).map(|(a, b)| c * a - b).collect()
        });
        c - top
    };
    XPsdCheck { min_eigenvalue, x_one_residual }
}

fn theorem1_gap(g: &Graph, s: &OpinionVector) -> Result<f64, FjError> {
    let eq = solve_basic(g, s)?;
    let i_z = disruption_quadratic(g, &eq.z_star).expect("sized by solver");
    let i_s = disruption_quadratic(g, s.as_slice()).expect("sized by caller");
    Ok(i_z - i_s)
}

fn i_plus_l(g: &Graph) -> DMatrix<f64> {
    let mut m = g.laplacian_dense();
    for i in 0..g.n() {
        m[(i, i)] += 1.0;
    }
    m
}

fn x_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut m = i_plus_l(g);
    let alpha = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] -= alpha;
        }
    }
    m
}

fn apply_laplacian(g: &Graph, v: &[f64]) -> Vec<f64> {
    (0..g.n())
        .map(|i| {
            let nbr: f64 = g.neighbors(i).iter().map(|&j| v[j]).sum();
            g.degree()[i] as f64 * v[i] - nbr
        })
        .collect()
}

/// `X v = v + L v - (sum v / n) 1`.
fn apply_x_matrix(g: &Graph, v: &[f64]) -> Vec<f64> {
    let n = g.n();
    let mean_total = v.iter().sum::<f64>() / n as f64;
    let lv = apply_laplacian(g, v);
    (0..n).map(|i| v[i] + lv[i] - mean_total).collect()
}

fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Builds a closure solving `(I + L) x = b` from a single factorization.
fn basic_solver(g: &Graph) -> Result<impl Fn(&[f64]) -> Vec<f64> + '_, FjError> {
    use faer::linalg::solvers::Solve;
    use faer::sparse::{SparseColMat, Triplet};
    let n = g.n();
    let mut triplets = Vec::with_capacity(n + 2 * g.m());
    for i in 0..n {
        triplets.push(Triplet::new(i, i, 1.0 + g.degree()[i] as f64));
    }
    for &(i, j) in g.edges() {
        triplets.push(Triplet::new(i, j, -1.0));
        triplets.push(Triplet::new(j, i, -1.0));
    }
    let a = SparseColMat::try_new_from_triplets(n, n, &triplets).expect("valid triplets");
    let chol = a
        .sp_cholesky(faer::Side::Lower)
        .map_err(|_| FjError::Numerical { residual: f64::INFINITY })?;
    Ok(move |b: &[f64]| -> Vec<f64> {
        let rhs = faer::Mat::from_fn(n, 1, |i, _| b[i]);
        let x = chol.solve(&rhs);
        (0..n).map(|i| x[(i, 0)]).collect()
    })
}

/// Power iteration on `op + shift * I` from a fixed all-ones start vector;
/// returns the Rayleigh quotient of `op` at the final iterate. With a shift
/// that makes the spectrum nonnegative this estimates the rightmost
/// eigenvalue of `op`. A fixed iteration count is used: per-step changes
/// shrink long before the iterate settles when the top of the spectrum is
/// clustered, so a change-based early exit would return too soon.
fn power_iteration_extremal(n: usize, shift: f64, op: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let mut v = vec![1.0; n];
    for _ in 0..2000 {
        let mut next = op(&v);
        if shift != 0.0 {
            for (nv, &vi) in next.iter_mut().zip(&v) {
                *nv += shift * vi;
            }
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for nv in &mut next {
            *nv /= norm;
        }
        v = next;
    }
    let opv = op(&v);
    let num: f64 = v.iter().zip(&opv).map(|(a, b)| a * b).sum();
    let den: f64 = v.iter().map(|a| a * a).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fj::solve_extended;
    use crate::graph::Graph;
    use crate::testutil::{figure1, random_graph, random_opinions, random_unit_range_vec};
    use proptest::prelude::*;

    #[test]
    fn polarization_examples() {
        assert_eq!(polarization(&[1.0, -1.0]).unwrap(), 2.0);
        // Constant vector: zero up to rounding in the mean.
        assert!(polarization(&[0.4, 0.4, 0.4]).unwrap().abs() < 1e-30);
        assert!((polarization(&[1.0, 0.0, -1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(polarization(&[]), Err(MetricError::EmptyVector));
    }

    #[test]
    fn disagreement_examples() {
        let p2 = Graph::build(2, &[(0, 1)]).unwrap();
        assert_eq!(disagreement(&p2, &[1.0, -1.0]).unwrap(), 4.0);
        let tri = Graph::build(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(disagreement(&tri, &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            disagreement(&tri, &[1.0, 0.0]),
            Err(MetricError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn figure1_disruption_values() {
        let (g, w, lam, s) = figure1();
        let innate = disruption_report(&g, s.as_slice(), StateTag::Innate).unwrap();
        assert!((innate.disruption - 5.23).abs() < 0.01, "{}", innate.disruption);

        let eq = solve_extended(&g, &w, &lam, &s).unwrap();
        let at_eq = disruption_report(&g, &eq.z_star, StateTag::ExtendedEq).unwrap();
        assert!((at_eq.disruption - 8.02).abs() < 0.01, "{}", at_eq.disruption);
    }

    #[test]
    fn path2_disruption_at_basic_equilibrium() {
        // P = 2/9, D = 4/9 by hand.
        let g = Graph::build(2, &[(0, 1)]).unwrap();
        let r = disruption_report(&g, &[1.0 / 3.0, -1.0 / 3.0], StateTag::BasicEq).unwrap();
        assert!((r.polarization - 2.0 / 9.0).abs() < 1e-12);
        assert!((r.disagreement - 4.0 / 9.0).abs() < 1e-12);
        assert!((r.disruption - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_node_disruption_is_zero() {
        let g = Graph::build(1, &[]).unwrap();
        let r = disruption_report(&g, &[0.8], StateTag::Innate).unwrap();
        assert_eq!(r.disruption, 0.0);
        assert_eq!(disruption_quadratic(&g, &[0.8]).unwrap(), 0.0);
    }

    #[test]
    fn theorem1_path2() {
        let g = Graph::build(2, &[(0, 1)]).unwrap();
        let s = OpinionVector::new(vec![1.0, -1.0]).unwrap();
        let cert = verify_theorem1(&g, &s).unwrap();
        assert!((cert.gap - (2.0 / 3.0 - 6.0)).abs() < 1e-9);
        assert!(cert.max_y_eigenvalue <= 1e-9);
        assert!(cert.sigma_spectrum.iter().all(|&v| v >= 1.0 - 1e-9));
    }

    #[test]
    fn theorem1_constant_opinions_gap_zero() {
        let g = random_graph(3, 10, 0.3);
        let s = OpinionVector::new(vec![0.6; 10]).unwrap();
        let cert = verify_theorem1(&g, &s).unwrap();
        assert!(cert.gap.abs() < 1e-9);
    }

    #[test]
    fn theorem1_estimate_path_matches_dense() {
        let g = random_graph(17, 60, 0.1);
        let s = random_opinions(18, 60);
        let dense = verify_theorem1_dense(&g, &s).unwrap();
        let est = verify_theorem1_estimated(&g, &s).unwrap();
        assert!((dense.gap - est.gap).abs() < 1e-9);
        assert!(est.max_y_eigenvalue <= 1e-9);
        // The large-n path yields estimates; extremal eigenvalues only need
        // to agree to working precision, not the certificate tolerance.
        let dense_min = dense.sigma_spectrum.first().unwrap();
        let dense_max = dense.sigma_spectrum.last().unwrap();
        assert!((est.sigma_spectrum[0] - dense_min).abs() < 1e-4 * dense_min.max(1.0));
        assert!((est.sigma_spectrum[1] - dense_max).abs() < 1e-4 * dense_max.max(1.0));
    }

    #[test]
    fn x_psd_check_path2() {
        let g = Graph::build(2, &[(0, 1)]).unwrap();
        let check = x_matrix_psd_check(&g);
        assert!(check.min_eigenvalue.abs() < 1e-12);
        assert!(check.x_one_residual < 1e-10);
        let eigs = symmetric_eigenvalues(&x_matrix(&g));
        let mut eigs = eigs;
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eigs[0] - 0.0).abs() < 1e-12 && (eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn x_psd_check_empty_graph_projection() {
        let g = Graph::build(5, &[]).unwrap();
        let check = x_matrix_psd_check(&g);
        assert!(check.min_eigenvalue.abs() < 1e-12);
        let mut eigs = symmetric_eigenvalues(&x_matrix(&g));
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(eigs[0].abs() < 1e-12);
        for &e in &eigs[1..] {
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn x_psd_check_figure1() {
        let (g, _, _, _) = figure1();
        let check = x_matrix_psd_check(&g);
        assert!(check.min_eigenvalue >= -1e-9);
        assert!(check.x_one_residual < 1e-10);
    }

    proptest! {
        /// Shift invariance: adding a constant to every opinion leaves both
        /// P and D unchanged.
        #[test]
        fn shift_invariance(seed in 0u64..300, n in 2usize..20, shift in -5.0f64..5.0) {
            let g = random_graph(seed, n, 0.3);
            let x = random_unit_range_vec(seed ^ 0x51, n);
            let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
            let a = disruption_report(&g, &x, StateTag::Innate).unwrap();
            let b = disruption_report(&g, &shifted, StateTag::Innate).unwrap();
            let scale = 1.0f64.max(a.disruption.abs());
            prop_assert!((a.disruption - b.disruption).abs() <= 1e-9 * scale);
        }

        /// Quadratic scaling: I(c x) = c^2 I(x).
        #[test]
        fn quadratic_scaling(seed in 0u64..300, n in 2usize..20, c in -3.0f64..3.0) {
            let g = random_graph(seed, n, 0.3);
            let x = random_unit_range_vec(seed ^ 0x52, n);
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let a = disruption_report(&g, &x, StateTag::Innate).unwrap();
            let b = disruption_report(&g, &scaled, StateTag::Innate).unwrap();
            let scale = 1.0f64.max((c * c * a.disruption).abs());
            prop_assert!((b.disruption - c * c * a.disruption).abs() <= 1e-9 * scale);
        }

        /// The report cross-check holds, i.e. both computation routes agree.
        #[test]
        fn sum_and_quadratic_forms_agree(seed in 0u64..500, n in 1usize..30) {
            let g = random_graph(seed, n, 0.4);
            let x = random_unit_range_vec(seed ^ 0x53, n);
            prop_assert!(disruption_report(&g, &x, StateTag::Innate).is_ok());
        }

        /// Averaging dynamics never increase disruption.
        #[test]
        fn theorem1_gap_nonpositive(seed in 0u64..200, n in 2usize..40) {
            let g = random_graph(seed, n, 0.25);
            let s = random_opinions(seed ^ 0x54, n);
            let i_s = disruption_quadratic(&g, s.as_slice()).unwrap();
            let cert = verify_theorem1(&g, &s).unwrap();
            prop_assert!(cert.gap <= 1e-9 * 1.0f64.max(i_s));
            prop_assert!(cert.max_y_eigenvalue <= 1e-9);
        }
    }
}
