//! Modified flows: reassign the nonzero eigenvalues of `L` while keeping its
//! eigenvectors, and the end-to-end consensus pipeline built on it.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certify::{consensus_verdict, ConsensusVerdict, VerdictKind};
use crate::dominance::real_dominance;
use crate::error::{Error, Result};
use crate::flows::{simulate, Method, Trajectory};
use crate::graph::{laplacian, structural_connectivity, ComplexDigraph};
use crate::linalg::{c64, norm_inf, ones, vec_norm_inf, CMatrix, CVector};
use crate::serial::{self, CValue};
use crate::spectral::{corank_of, eig, kernel_pair_of, match_spectra, SpectralDecomposition, ZERO_TOL};

/// Relative spacing used to separate coinciding default targets.
pub const TARGET_SPACING: f64 = 1e-3;
const DUPLICATE_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedFlowDesign {
    pub targets: Vec<f64>,
    /// Diagonal of `S`, aligned with [`reduced_spectrum`].
    #[serde(rename = "S")]
    pub s: Vec<CValue>,
    /// Row-major.
    #[serde(rename = "L_m")]
    pub l_m: Vec<CValue>,
    pub is_laplacian: bool,
    pub spectrum_achieved: Vec<CValue>,
    /// `‖L_m 𝟙‖∞ / ‖L_m‖∞`.
    pub row_sum_residual: f64,
    /// `‖w^H L_m‖∞ / ‖L_m‖∞` for the left kernel vector of the original `L`.
    pub left_kernel_residual: f64,
    /// Largest distance between `spec(L_m)` and `{0} ∪ targets` after matching.
    pub spectrum_error: f64,
}

impl ModifiedFlowDesign {
    pub fn matrix(&self) -> CMatrix {
        serial::from_row_major(&self.l_m).expect("L_m is square")
    }
}

/// Nonzero eigenvalues ordered by real part, then imaginary part, both descending.
fn reduced_indices(dec: &SpectralDecomposition) -> Vec<usize> {
    let mut idx = dec.nonzero_indices(ZERO_TOL);
    idx.sort_by(|&a, &b| {
        let (x, y) = (dec.eigenvalues[a], dec.eigenvalues[b]);
        y.re.partial_cmp(&x.re).unwrap_or(Ordering::Equal).then(y.im.partial_cmp(&x.im).unwrap_or(Ordering::Equal))
    });
    idx
}

/// The spectrum of `J_reduced` in the order targets are paired with.
pub fn reduced_spectrum(l: &CMatrix) -> Result<Vec<Complex64>> {
    let dec = eig(l)?;
    Ok(reduced_indices(&dec).into_iter().map(|i| dec.eigenvalues[i]).collect())
}

/// `|λ_i|`, nudged apart by `ε = 1e-3·max|λ|` where two coincide.
pub fn default_targets(eigs: &[Complex64]) -> Vec<f64> {
    let max = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eps = TARGET_SPACING * max;
    let mut order: Vec<usize> = (0..eigs.len()).collect();
    order.sort_by(|&a, &b| eigs[a].norm().partial_cmp(&eigs[b].norm()).unwrap_or(Ordering::Equal));
    let mut targets: Vec<f64> = eigs.iter().map(|z| z.norm()).collect();
    for k in 1..order.len() {
        let prev = targets[order[k - 1]];
        if targets[order[k]] < prev + eps {
            targets[order[k]] = prev + eps;
        }
    }
    targets
}

/// `S = diag(target_i / λ_i)`, so that `S·J_reduced = diag(targets)`.
pub fn stabilizing_diagonal(eigs: &[Complex64], targets: Option<&[f64]>) -> Result<Vec<Complex64>> {
    let max = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(index) = eigs.iter().position(|z| z.norm() <= ZERO_TOL * max) {
        return Err(Error::ZeroEigenvalueInJReduced { index });
    }
    let targets = match targets {
        Some(t) => {
            if t.len() != eigs.len() {
                return Err(Error::DimensionMismatch { expected: eigs.len(), found: t.len() });
            }
            if let Some(&value) = t.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::InvalidTarget { value });
            }
            let scale = t.iter().copied().fold(0.0, f64::max);
            for (i, a) in t.iter().enumerate() {
                if t[i + 1..].iter().any(|b| (a - b).abs() <= DUPLICATE_TOL * scale) {
                    return Err(Error::DuplicateTargets);
                }
            }
            t.to_vec()
        }
        None => default_targets(eigs),
    };
    Ok(eigs.iter().zip(&targets).map(|(z, &t)| c64(t, 0.0) / z).collect())
}

/// Zero row sums, and every off-diagonal entry reads as a negated edge weight
/// with phase in (−90°, 90°).
pub fn is_laplacian(m: &CMatrix) -> bool {
    let scale = norm_inf(m);
    let tol = OFF_DIAGONAL_TOL * scale.max(f64::MIN_POSITIVE);
    let n = m.nrows();
    if vec_norm_inf(&(m * ones(n))) > tol {
        return false;
    }
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() <= tol || m[(i, j)].re < 0.0))
}

/// `L_m = V([0] ⊕ S·J_reduced)W^H` with the eigenvectors of `L`.
pub fn modified_matrix(l: &CMatrix, s: &[Complex64]) -> Result<ModifiedFlowDesign> {
    let n = l.nrows();
    let dec = eig(l)?;
    let k = corank_of(&dec, l, ZERO_TOL)?;
    if k != 1 {
        return Err(Error::CorankNotOne { corank: k });
    }
    if !dec.diagonalizable || !dec.normalized {
        return Err(Error::DefectiveSpectrum { defect: dec.jordan_defect.max(1) });
    }
    let reduced = reduced_indices(&dec);
    if s.len() != reduced.len() {
        return Err(Error::DimensionMismatch { expected: reduced.len(), found: s.len() });
    }
    let mut diag = CVector::zeros(n);
    for (&i, &si) in reduced.iter().zip(s) {
        diag[i] = si * dec.eigenvalues[i];
    }
    let l_m = &dec.v * CMatrix::from_diagonal(&diag) * dec.w.adjoint();

    let kp = kernel_pair_of(&dec, l)?;
    let scale = norm_inf(&l_m).max(f64::MIN_POSITIVE);
    let row_sum_residual = vec_norm_inf(&(&l_m * ones(n))) / scale;
    let left_kernel_residual = vec_norm_inf(&(l_m.adjoint() * &kp.w)) / scale;

    let targets: Vec<f64> = reduced.iter().map(|&i| diag[i].re).collect();
    let achieved = eig(&l_m)?.eigenvalues;
    let mut expected: Vec<Complex64> = targets.iter().map(|&t| c64(t, 0.0)).collect();
    expected.push(c64(0.0, 0.0));
    let spectrum_error = match_spectra(&achieved, &expected).unwrap_or(f64::INFINITY);

    Ok(ModifiedFlowDesign {
        targets,
        s: serial::values(s),
        l_m: serial::row_major(&l_m),
        is_laplacian: is_laplacian(&l_m),
        spectrum_achieved: serial::values(&achieved),
        row_sum_residual,
        left_kernel_residual,
        spectrum_error,
    })
}

/// Chooses `S` for the given (or default) targets and builds `L_m`.
pub fn design_modified_flow(l: &CMatrix, targets: Option<&[f64]>) -> Result<ModifiedFlowDesign> {
    let eigs = reduced_spectrum(l)?;
    let s = stabilizing_diagonal(&eigs, targets)?;
    modified_matrix(l, &s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Original,
    Modified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    /// Defaults to `20/gap` of the simulated matrix.
    pub t_end: Option<f64>,
    pub samples: usize,
    pub method: Method,
    pub targets: Option<Vec<f64>>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { t_end: None, samples: 201, method: Method::ExpStep, targets: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub branch: Branch,
    /// Why the original flow was or was not kept.
    pub reasons: Vec<String>,
    pub original_verdict: Option<ConsensusVerdict>,
    pub design: Option<ModifiedFlowDesign>,
    pub final_verdict: Option<ConsensusVerdict>,
    /// The matrix whose flow was simulated.
    pub flow_matrix: CMatrix,
    pub trajectory: Trajectory,
}

/// JSON view of a [`PipelineResult`]; the trajectory itself goes to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub branch: Branch,
    pub reasons: Vec<String>,
    pub original_verdict: Option<ConsensusVerdict>,
    pub design: Option<ModifiedFlowDesign>,
    pub final_verdict: Option<ConsensusVerdict>,
    pub t_end: f64,
    pub samples: usize,
    pub method: Method,
    pub final_consensus_error: Option<f64>,
    pub diverged_at: Option<f64>,
    pub final_state: Vec<CValue>,
}

impl PipelineResult {
    pub fn summary(&self) -> PipelineSummary {
        PipelineSummary {
            branch: self.branch,
            reasons: self.reasons.clone(),
            original_verdict: self.original_verdict.clone(),
            design: self.design.clone(),
            final_verdict: self.final_verdict.clone(),
            t_end: self.trajectory.times.last().copied().unwrap_or(0.0),
            samples: self.trajectory.times.len(),
            method: self.trajectory.method,
            final_consensus_error: self.trajectory.final_consensus_error(),
            diverged_at: self.trajectory.diverged_at,
            final_state: self.trajectory.final_state().map(serial::vector).unwrap_or_default(),
        }
    }
}

fn default_t_end(verdict: &ConsensusVerdict) -> f64 {
    let gap = verdict.j_reduced_spectrum.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if gap.is_finite() && gap > 0.0 {
        20.0 / gap
    } else {
        1.0
    }
}

/// Keeps `L` when its kernel vectors are real dominant and its nonzero
/// spectrum lies in the open right half-plane, otherwise replaces it with a
/// modified flow. Then simulates the chosen flow from `x0`.
pub fn consensus_pipeline(g: &ComplexDigraph, x0: &CVector, options: &PipelineOptions) -> Result<PipelineResult> {
    let n = g.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.len() });
    }
    let l = laplacian(g).matrix;
    if n == 1 {
        let t_end = options.t_end.unwrap_or(1.0);
        let trajectory = simulate(&l, x0, t_end, options.samples, options.method)?;
        return Ok(PipelineResult {
            branch: Branch::Original,
            reasons: vec!["single node".to_string()],
            original_verdict: None,
            design: None,
            final_verdict: None,
            flow_matrix: l,
            trajectory,
        });
    }
    if structural_connectivity(g).globally_reachable.is_empty() {
        return Err(Error::NoGloballyReachableNode);
    }

    let verdict = consensus_verdict(&l)?;
    let mut reasons = Vec::new();
    let stable = verdict.kind == VerdictKind::Consensus;
    if !stable {
        reasons.push(format!("original flow is {:?} (corank {})", verdict.kind, verdict.corank));
    }
    let dominant = if verdict.corank == 1 {
        let kp = kernel_pair_of(&eig(&l)?, &l)?;
        let v_ok = real_dominance(&kp.v, false).real_dominant;
        let w_ok = real_dominance(&kp.w, false).real_dominant;
        if !v_ok {
            reasons.push("right kernel vector is not real dominant".to_string());
        }
        if !w_ok {
            reasons.push("left kernel vector is not real dominant".to_string());
        }
        v_ok && w_ok
    } else {
        false
    };

    let (branch, design, flow_matrix, final_verdict) = if stable && dominant {
        reasons.push("original flow reaches consensus".to_string());
        (Branch::Original, None, l, verdict.clone())
    } else {
        let design = design_modified_flow(&l, options.targets.as_deref())?;
        let l_m = design.matrix();
        let final_verdict = consensus_verdict(&l_m)?;
        (Branch::Modified, Some(design), l_m, final_verdict)
    };
    log::info!("pipeline branch {branch:?}: {}", reasons.join("; "));
    let t_end = options.t_end.unwrap_or_else(|| default_t_end(&final_verdict));
    let trajectory = simulate(&flow_matrix, x0, t_end, options.samples, options.method)?;
    Ok(PipelineResult {
        branch,
        reasons,
        original_verdict: Some(verdict),
        design,
        final_verdict: Some(final_verdict),
        flow_matrix,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::cmatrix;
    use crate::testutil::{random_digraph, rng};
    use proptest::prelude::*;

    #[test]
    fn ex8_diagonal() {
        let eigs = reduced_spectrum(&fixtures::ex8_laplacian()).unwrap();
        assert!(eigs[0].re > 0.0 && eigs[1].re < 0.0);
        let s = stabilizing_diagonal(&eigs, Some(&[1408.0, 1219.0])).unwrap();
        assert!((s[0] - c64(0.524, -0.625)).norm() < 1e-2);
        assert!((s[1] - c64(-0.245, -0.663)).norm() < 1e-2);
    }

    #[test]
    fn trivial_diagonals() {
        let s = stabilizing_diagonal(&[c64(2.0, 0.0), c64(3.0, 0.0)], Some(&[2.0, 3.0])).unwrap();
        assert_eq!(s, vec![c64(1.0, 0.0), c64(1.0, 0.0)]);
        let s = stabilizing_diagonal(&[c64(0.0, 1.0)], Some(&[1.0])).unwrap();
        assert!((s[0] - c64(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_errors() {
        let eigs = [c64(1.0, 1.0), c64(0.0, 0.0)];
        assert!(matches!(stabilizing_diagonal(&eigs, None), Err(Error::ZeroEigenvalueInJReduced { index: 1 })));
        let eigs = [c64(1.0, 1.0), c64(2.0, 0.0)];
        assert!(matches!(stabilizing_diagonal(&eigs, Some(&[3.0, 3.0])), Err(Error::DuplicateTargets)));
        assert!(matches!(stabilizing_diagonal(&eigs, Some(&[3.0, -1.0])), Err(Error::InvalidTarget { .. })));
        assert!(matches!(stabilizing_diagonal(&eigs, Some(&[3.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn default_targets_are_distinct_magnitudes() {
        let eigs = [c64(3.0, 4.0), c64(0.0, 5.0), c64(-1.0, 0.0)];
        let t = default_targets(&eigs);
        assert_eq!(t[2], 1.0);
        assert_eq!(t[0], 5.0);
        assert!((t[1] - 5.005).abs() < 1e-12);
    }

    #[test]
    fn ex8_modified_matrix() {
        let d = design_modified_flow(&fixtures::ex8_laplacian(), Some(&[1408.0, 1219.0])).unwrap();
        let m = d.matrix();
        let printed = [c64(878.7, -36.8), c64(-438.2, 53.31), c64(-440.5, -16.5)];
        for (j, p) in printed.iter().enumerate() {
            assert!((m[(0, j)] - p).norm() <= 0.01 * p.norm(), "entry {j}: {}", m[(0, j)]);
        }
        assert!(d.spectrum_error < 1e-6 * 1408.0);
        assert!(d.row_sum_residual < 1e-9 && d.left_kernel_residual < 1e-6);
        assert!(d.is_laplacian);
        assert_eq!(consensus_verdict(&m).unwrap().kind, VerdictKind::Consensus);
    }

    #[test]
    fn identity_reassignment_is_a_no_op() {
        let l = fixtures::ex3_laplacian();
        let d = modified_matrix(&l, &[c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
        assert!(norm_inf(&(d.matrix() - &l)) < 1e-8 * norm_inf(&l));
    }

    #[test]
    fn modified_matrix_errors() {
        let l = fixtures::ex7_laplacian();
        assert!(matches!(modified_matrix(&l, &[]), Err(Error::CorankNotOne { corank: 2 })));
        let l = fixtures::ex3_laplacian();
        assert!(matches!(modified_matrix(&l, &[c64(1.0, 0.0)]), Err(Error::DimensionMismatch { .. })));
        // path 0 -> 1 -> 2 with equal weights has a defective nonzero eigenvalue
        let defective = cmatrix(3, &[(1.0, 0.0), (-1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(modified_matrix(&defective, &[c64(1.0, 0.0), c64(1.0, 0.0)]), Err(Error::DefectiveSpectrum { .. })));
    }

    #[test]
    fn laplacian_flag() {
        assert!(is_laplacian(&fixtures::ex3_laplacian()));
        let mut m = fixtures::ex3_laplacian();
        m[(0, 2)] = c64(30.0, -10.0);
        m[(0, 0)] = c64(-30.0, 10.0);
        assert!(!is_laplacian(&m));
    }

    #[test]
    fn pipeline_keeps_ex3() {
        let x0 = CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.5)]);
        let r = consensus_pipeline(&fixtures::ex3_graph(), &x0, &PipelineOptions::default()).unwrap();
        assert_eq!(r.branch, Branch::Original);
        assert!(r.design.is_none());
        assert_eq!(r.flow_matrix, fixtures::ex3_laplacian());
        assert!(r.trajectory.final_consensus_error().unwrap() < 1e-6);
    }

    #[test]
    fn pipeline_modifies_ex8() {
        let x0 = CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.5)]);
        let options = PipelineOptions { t_end: Some(0.05), targets: Some(vec![1408.0, 1219.0]), ..Default::default() };
        let r = consensus_pipeline(&fixtures::ex8_graph(), &x0, &options).unwrap();
        assert_eq!(r.branch, Branch::Modified);
        assert_eq!(r.original_verdict.as_ref().unwrap().kind, VerdictKind::Divergent);
        assert_eq!(r.final_verdict.as_ref().unwrap().kind, VerdictKind::Consensus);
        assert!(r.trajectory.final_consensus_error().unwrap() < 1e-6);
        let json = serde_json::to_string(&r.summary()).unwrap();
        assert!(json.contains("\"branch\":\"modified\"") && json.contains("\"L_m\""));
    }

    #[test]
    fn pipeline_edge_cases() {
        let single = crate::graph::build_digraph(&[], 1).unwrap();
        let x0 = CVector::from_element(1, c64(2.0, -1.0));
        let r = consensus_pipeline(&single, &x0, &PipelineOptions::default()).unwrap();
        assert_eq!(r.branch, Branch::Original);
        assert_eq!(r.trajectory.final_state().unwrap(), &x0);
        let x0 = CVector::from_element(4, c64(1.0, 0.0));
        assert!(matches!(
            consensus_pipeline(&fixtures::ex7_graph(), &x0, &PipelineOptions::default()),
            Err(Error::NoGloballyReachableNode)
        ));
    }

    fn stable_corank_one(seed: u64, n: usize) -> Option<CMatrix> {
        let l = laplacian(&random_digraph(&mut rng(seed), n, 0.7)).matrix;
        let v = consensus_verdict(&l).ok()?;
        (v.corank == 1).then_some(l)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn designs_preserve_kernel_and_place_spectrum(
            seed in any::<u64>(),
            n in 2usize..=6,
            raw in proptest::collection::vec(0.5f64..20.0, 5),
        ) {
            let l = stable_corank_one(seed, n);
            prop_assume!(l.is_some());
            let l = l.unwrap();
            let dec = eig(&l).unwrap();
            prop_assume!(dec.diagonalizable);
            let mut targets: Vec<f64> = raw[..n - 1].to_vec();
            for (k, t) in targets.iter_mut().enumerate() {
                *t += k as f64;
            }
            let d = design_modified_flow(&l, Some(&targets)).unwrap();
            prop_assert!(d.row_sum_residual <= 1e-9);
            prop_assert!(d.left_kernel_residual <= 1e-6);
            let max = targets.iter().copied().fold(0.0, f64::max);
            prop_assert!(d.spectrum_error <= 1e-6 * max, "error {}", d.spectrum_error);
            prop_assert_eq!(consensus_verdict(&d.matrix()).unwrap().kind, VerdictKind::Consensus);
            let eigs = reduced_spectrum(&l).unwrap();
            let s: Vec<Complex64> = d.s.iter().map(|&z| z.into()).collect();
            for ((si, lam), t) in s.iter().zip(&eigs).zip(&targets) {
                prop_assert!((si * lam - t).norm() <= 1e-9 * t);
            }
        }

        #[test]
        fn pipeline_leaves_consensual_graphs_alone(seed in any::<u64>(), n in 2usize..=6) {
            let g = random_digraph(&mut rng(seed), n, 0.7);
            let l = laplacian(&g).matrix;
            let v = consensus_verdict(&l);
            prop_assume!(v.as_ref().is_ok_and(|v| v.kind == VerdictKind::Consensus));
            let kp = kernel_pair_of(&eig(&l).unwrap(), &l).unwrap();
            prop_assume!(real_dominance(&kp.w, false).real_dominant);
            let r = consensus_pipeline(&g, &ones(n), &PipelineOptions { samples: 2, ..Default::default() }).unwrap();
            prop_assert_eq!(r.branch, Branch::Original);
            prop_assert_eq!(r.flow_matrix, l);
        }
    }
}
