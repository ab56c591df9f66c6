//! Eventual positivity certificates for `e^{−Lt}` and the consensus verdict.
//!
//! A certificate comes from one of two routes. The theorem route checks
//! spectral and phase hypotheses that imply the property. The empirical route
//! samples the sign pattern of `Re(e^{−Lt})` on a time grid, which is evidence
//! rather than proof. Refutations always carry an explicit counterexample.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dominance::{left_tan_condition, real_dominance, right_tan_condition, DominanceReport, TanConditionReport};
use crate::error::{Error, Result};
use crate::flows::{matrix_exponential, matrix_exponential_taylor};
use crate::graph::{reachability, strongly_connected_components, support_lists, terminal_components};
use crate::linalg::{c64, norm_inf, null_space, CMatrix, CVector};
use crate::serial::{self, CValue};
use crate::spectral::{
    corank_of, dual_basis, eig, kernel_pair_of, min_dominating_shift, pf_classify, zero_space, KernelPair, PfKind,
    SpectralDecomposition, ZeroSpace, DEFAULT_SHIFT_FACTOR, ZERO_TOL,
};

/// Relative (against `‖L‖∞`) margin separating stable from unstable modes.
pub const STABILITY_TOL: f64 = 1e-9;
pub const TOL_POS: f64 = 1e-12;
/// Relative (against `‖e^{−Lt}‖∞`) slack for non-negativity and refutation.
pub const TOL_ZERO: f64 = 1e-9;
pub const GRID_POINTS: usize = 64;
const GRID_SPAN: (f64, f64) = (1e-3, 10.0);
const SEARCH_POINTS: usize = 256;
const RECHECK_SERIES_TOL: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "rEEP")]
    Reep,
    #[serde(rename = "rEENN")]
    Reenn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    Theorem,
    Empirical,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Hypothesis {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Hypothesis { name: name.to_string(), passed, detail: detail.into() }
    }
}

/// A time and entry at which `Re(e^{−Lt})` has the wrong sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub t: f64,
    pub row: usize,
    pub col: usize,
    /// `Re(e^{−Lt})_{row,col}` from the Padé exponential.
    pub value: f64,
    /// Same entry from the Taylor exponential.
    pub recheck_value: f64,
    /// No directed path joins `row` to `col`, so the entry vanishes for all t.
    pub structural: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    pub d: Option<f64>,
    /// `dI − L`, row-major.
    pub b: Option<Vec<CValue>>,
    pub alpha: Option<CValue>,
    pub right_kernel: Vec<Vec<CValue>>,
    pub left_kernel: Vec<Vec<CValue>>,
    pub left_dominance: Vec<DominanceReport>,
    pub left_tan: Vec<TanConditionReport>,
    pub right_tan: Vec<TanConditionReport>,
    pub pf_b: Option<PfKind>,
    pub pf_b_adjoint: Option<PfKind>,
    pub t0_estimate: Option<f64>,
    pub sampled_times: Vec<f64>,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub property: Property,
    pub verdict: Verdict,
    pub route: Route,
    pub witnesses: Witnesses,
    pub hypotheses: Vec<Hypothesis>,
}

impl Certificate {
    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.name == name)
    }

    pub fn is_certified_by_theorem(&self) -> bool {
        self.verdict == Verdict::Certified && self.route == Route::Theorem
    }
}

/// Spectral facts shared by the certificates and the verdict.
struct FlowSpectrum {
    dec: SpectralDecomposition,
    corank: usize,
    tol: f64,
    /// Every nonzero eigenvalue of `L` has real part above `tol`.
    marginally_stable: bool,
    /// Smallest real part over the nonzero eigenvalues of `L`.
    gap: Option<f64>,
    /// Spectral abscissa of `−L`.
    abscissa: f64,
    radius: f64,
}

impl FlowSpectrum {
    fn new(l: &CMatrix) -> Result<Self> {
        let dec = eig(l)?;
        let corank = corank_of(&dec, l, ZERO_TOL)?;
        let tol = STABILITY_TOL * norm_inf(l);
        let nonzero: Vec<Complex64> = dec.nonzero_indices(ZERO_TOL).iter().map(|&i| dec.eigenvalues[i]).collect();
        let marginally_stable = nonzero.iter().all(|z| z.re > tol);
        let gap = nonzero.iter().map(|z| z.re).fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
        let abscissa = dec.eigenvalues.iter().map(|z| -z.re).fold(f64::NEG_INFINITY, f64::max);
        let radius = dec.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(FlowSpectrum { dec, corank, tol, marginally_stable, gap, abscissa, radius })
    }

    fn nonzero(&self) -> Vec<Complex64> {
        self.dec.nonzero_indices(ZERO_TOL).iter().map(|&i| self.dec.eigenvalues[i]).collect()
    }

    /// Positive gap when every nonzero mode decays.
    fn decay_gap(&self) -> Option<f64> {
        self.gap.filter(|&g| g > self.tol)
    }

    /// Time after which transients are negligible.
    fn settling_time(&self) -> f64 {
        if self.abscissa > self.tol {
            GRID_SPAN.1 / self.abscissa
        } else if let Some(g) = self.decay_gap() {
            GRID_SPAN.1 / g
        } else if self.radius > 0.0 {
            GRID_SPAN.1 / self.radius
        } else {
            GRID_SPAN.1
        }
    }

    fn stability_hypotheses(&self) -> (Hypothesis, Hypothesis) {
        let corank = Hypothesis::new("corank_one", self.corank == 1, format!("corank(L) = {}", self.corank));
        let unstable: Vec<String> = self.nonzero().iter().filter(|z| z.re <= self.tol).map(|z| format!("{z:.6}")).collect();
        let detail = if unstable.is_empty() {
            format!("all nonzero eigenvalues of L have real part > {:.3e}", self.tol)
        } else {
            format!("non-decaying modes of L: {}", unstable.join(", "))
        };
        (corank, Hypothesis::new("marginally_stable", self.marginally_stable, detail))
    }

    /// Shift making `d` the strictly dominant eigenvalue of `dI − L` whenever that is possible.
    fn dominating_shift(&self) -> f64 {
        if self.radius == 0.0 {
            return 1.0;
        }
        let base = DEFAULT_SHIFT_FACTOR * self.radius;
        match min_dominating_shift(&self.dec.eigenvalues, self.dec.zero_threshold(ZERO_TOL)) {
            Some(bound) => base.max(DEFAULT_SHIFT_FACTOR * bound),
            None => base,
        }
    }
}

fn translated(l: &CMatrix, d: f64) -> CMatrix {
    let n = l.nrows();
    CMatrix::identity(n, n) * c64(d, 0.0) - l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignMode {
    /// `Re(e^{−Lt}) > tol_pos` entrywise.
    Strict,
    /// `Re(e^{−Lt}) ≥ −tol_zero·‖e^{−Lt}‖∞` entrywise.
    Nonneg,
}

/// Outcome of sampling the sign pattern of `Re(e^{−Lt})` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignScan {
    pub mode: SignMode,
    /// Smallest grid time from which the pattern holds at every later sample.
    pub t0_estimate: Option<f64>,
    pub sampled_times: Vec<f64>,
    pub holds: Vec<bool>,
    /// Smallest real entry at the last grid time.
    pub min_real_at_end: f64,
}

/// `GRID_POINTS` log-spaced times over `[1e-3, 10]/gap`, or `[1e-3, 10]` without a decay gap.
pub fn default_time_grid(l: &CMatrix) -> Result<Vec<f64>> {
    let spec = FlowSpectrum::new_lenient(l)?;
    let scale = spec.and_then(|s| s.decay_gap()).map_or(1.0, |g| 1.0 / g);
    Ok(log_grid(GRID_SPAN.0 * scale, GRID_SPAN.1 * scale, GRID_POINTS))
}

impl FlowSpectrum {
    /// Like [`FlowSpectrum::new`], but an ambiguous rank yields `None`.
    fn new_lenient(l: &CMatrix) -> Result<Option<Self>> {
        match FlowSpectrum::new(l) {
            Ok(s) => Ok(Some(s)),
            Err(Error::RankAmbiguous { .. }) | Err(Error::DefectiveSpectrum { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp()).collect()
}

fn lin_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect()
}

fn min_real_entry(e: &CMatrix) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for i in 0..e.nrows() {
        for j in 0..e.ncols() {
            if e[(i, j)].re < best.2 {
                best = (i, j, e[(i, j)].re);
            }
        }
    }
    best
}

fn pattern_holds(e: &CMatrix, mode: SignMode) -> bool {
    let (_, _, min) = min_real_entry(e);
    match mode {
        SignMode::Strict => min > TOL_POS,
        SignMode::Nonneg => min >= -TOL_ZERO * norm_inf(e),
    }
}

/// Samples `Re(e^{−Lt})` over `t_grid` and estimates the index `t0`.
///
/// Fails with `Overflow` when `−L` has a growing mode.
pub fn empirical_sign_pattern(l: &CMatrix, t_grid: &[f64], mode: SignMode) -> Result<SignScan> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid);
    }
    let last = *t_grid.last().expect("non-empty grid");
    let dec = eig(l)?;
    let tol = STABILITY_TOL * norm_inf(l);
    if dec.eigenvalues.iter().any(|z| z.re < -tol) {
        return Err(Error::Overflow { t: last });
    }
    let neg_l = -l;
    let mut holds = Vec::with_capacity(t_grid.len());
    let mut min_real_at_end = f64::NAN;
    for &t in t_grid {
        let e = matrix_exponential(&neg_l, t)?;
        holds.push(pattern_holds(&e, mode));
        min_real_at_end = min_real_entry(&e).2;
    }
    let mut t0 = None;
    for (k, &t) in t_grid.iter().enumerate().rev() {
        if !holds[k] {
            break;
        }
        t0 = Some(t);
    }
    Ok(SignScan { mode, t0_estimate: t0, sampled_times: t_grid.to_vec(), holds, min_real_at_end })
}

/// First sampled time at which some `Re(e^{−Lt})` entry is below
/// `−tol_zero·‖e^{−Lt}‖∞` under both exponential routes.
///
/// With `limit` set, only entries that stay negative in the limit count, so a
/// decaying transient never refutes.
fn find_negative_entry(l: &CMatrix, times: &[f64], limit: Option<&CMatrix>) -> Option<Counterexample> {
    let neg_l = -l;
    let persistent = |i: usize, j: usize| {
        limit.is_none_or(|p| p[(i, j)].re < -TOL_ZERO * norm_inf(p).max(1.0))
    };
    for &t in times {
        let Ok(e) = matrix_exponential(&neg_l, t) else { break };
        let floor = -TOL_ZERO * norm_inf(&e);
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..e.nrows() {
            for j in 0..e.ncols() {
                let x = e[(i, j)].re;
                if x < floor && persistent(i, j) && worst.is_none_or(|w| x < w.2) {
                    worst = Some((i, j, x));
                }
            }
        }
        let Some((i, j, value)) = worst else { continue };
        let Ok(check) = matrix_exponential_taylor(&neg_l, t, RECHECK_SERIES_TOL) else { continue };
        let recheck_value = check[(i, j)].re;
        if recheck_value < floor {
            return Some(Counterexample { t, row: i, col: j, value, recheck_value, structural: false });
        }
    }
    None
}

/// An entry with no directed path from its row to its column stays exactly zero.
fn find_structural_zero(l: &CMatrix, t: f64) -> Option<Counterexample> {
    let reach = reachability(&support_lists(l));
    let (i, j) = (0..l.nrows()).flat_map(|i| (0..l.nrows()).map(move |j| (i, j))).find(|&(i, j)| !reach[i][j])?;
    let value = matrix_exponential(&-l, t).map_or(0.0, |e| e[(i, j)].re);
    let recheck_value = matrix_exponential_taylor(&-l, t, RECHECK_SERIES_TOL).map_or(0.0, |e| e[(i, j)].re);
    Some(Counterexample { t, row: i, col: j, value, recheck_value, structural: true })
}

fn counterexample_search(l: &CMatrix, spec: &FlowSpectrum, property: Property) -> Option<Counterexample> {
    let settle = spec.settling_time();
    let times = lin_grid(settle, 2.0 * settle, SEARCH_POINTS);
    let limit = if spec.marginally_stable { zero_space(l).ok().map(|z| z.projector()) } else { None };
    if spec.marginally_stable && limit.is_none() {
        return None;
    }
    find_negative_entry(l, &times, limit.as_ref()).or_else(|| match property {
        Property::Reep => find_structural_zero(l, settle),
        Property::Reenn => None,
    })
}

fn sign_mode(property: Property) -> SignMode {
    match property {
        Property::Reep => SignMode::Strict,
        Property::Reenn => SignMode::Nonneg,
    }
}

/// Grid scan used as a witness; `None` when `−L` has a growing mode.
fn witness_scan(l: &CMatrix, property: Property) -> Result<Option<SignScan>> {
    let grid = default_time_grid(l)?;
    match empirical_sign_pattern(l, &grid, sign_mode(property)) {
        Ok(scan) => Ok(Some(scan)),
        Err(Error::Overflow { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Empirical verdict once the theorem route has been ruled out.
fn empirical_route(l: &CMatrix, spec: &FlowSpectrum, property: Property, cert: &mut Certificate) -> Result<()> {
    if property == Property::Reep {
        if let Some(cx) = find_structural_zero(l, spec.settling_time()) {
            cert.verdict = Verdict::Refuted;
            cert.route = Route::Empirical;
            cert.witnesses.counterexample = Some(cx);
            return Ok(());
        }
    }
    if let Some(scan) = witness_scan(l, property)? {
        cert.witnesses.t0_estimate = scan.t0_estimate;
        cert.witnesses.sampled_times = scan.sampled_times.clone();
        if scan.t0_estimate.is_some() {
            cert.verdict = Verdict::Certified;
            cert.route = Route::Empirical;
            return Ok(());
        }
    }
    cert.route = Route::Empirical;
    match counterexample_search(l, spec, property) {
        Some(cx) => {
            cert.verdict = Verdict::Refuted;
            cert.witnesses.counterexample = Some(cx);
        }
        None => cert.verdict = Verdict::Inconclusive,
    }
    Ok(())
}

/// Outcome when the spectral hypotheses fail: only a counterexample refutes.
fn refutation_route(l: &CMatrix, spec: &FlowSpectrum, property: Property, cert: &mut Certificate) {
    match counterexample_search(l, spec, property) {
        Some(cx) => {
            cert.verdict = Verdict::Refuted;
            cert.route = Route::Both;
            cert.witnesses.counterexample = Some(cx);
        }
        None => {
            cert.verdict = Verdict::Inconclusive;
            cert.route = Route::Theorem;
        }
    }
}

fn empty_certificate(property: Property) -> Certificate {
    Certificate {
        property,
        verdict: Verdict::Inconclusive,
        route: Route::Theorem,
        witnesses: Witnesses::default(),
        hypotheses: Vec::new(),
    }
}

fn record_kernel(cert: &mut Certificate, kp: &KernelPair) {
    cert.witnesses.alpha = kp.alpha.map(CValue::from);
    cert.witnesses.right_kernel = vec![serial::vector(&kp.v)];
    cert.witnesses.left_kernel = vec![serial::vector(&kp.w)];
}

/// Hypotheses on the kernel pair of a corank-1 Laplacian. `strict` selects the
/// eventual-positivity variants (open tan interval, strict dominance, strong PF).
fn corank_one_hypotheses(l: &CMatrix, spec: &FlowSpectrum, strict: bool, cert: &mut Certificate) -> Result<bool> {
    let kp = kernel_pair_of(&spec.dec, l)?;
    record_kernel(cert, &kp);
    let d = spec.dominating_shift();
    let b = translated(l, d);
    cert.witnesses.d = Some(d);
    cert.witnesses.b = Some(serial::row_major(&b));

    let alpha_ok = match kp.alpha {
        Some(a) if strict => a.re - a.im.abs() > 1e-12 * a.norm(),
        Some(a) => a.re >= a.im.abs() - 1e-12 * a.norm(),
        None => false,
    };
    let alpha_detail = match kp.alpha {
        Some(a) => format!("v = α𝟙 with α = {a:.6}"),
        None => "right kernel vector is not constant".to_string(),
    };
    cert.hypotheses.push(Hypothesis::new(
        if strict { "alpha_strictly_real_dominant" } else { "alpha_real_dominant" },
        alpha_ok,
        alpha_detail,
    ));

    cert.witnesses.left_dominance.push(real_dominance(&kp.w, strict));
    let tan = left_tan_condition(&b, &kp.w)?;
    let tan_ok = if strict { tan.all_in_open_unit } else { tan.all_in_closed_unit };
    let tan_detail = format!(
        "ratios {:?} {} the {} unit interval",
        tan.ratios.iter().map(|r| r.map(|x| (x * 1e6).round() / 1e6)).collect::<Vec<_>>(),
        if tan_ok { "inside" } else { "outside" },
        if strict { "open" } else { "closed" }
    );
    cert.hypotheses.push(Hypothesis::new(
        if strict { "left_tan_open" } else { "left_tan_closed" },
        tan_ok,
        tan_detail,
    ));
    cert.witnesses.left_tan.push(tan);

    let pf = pf_classify(&b)?;
    cert.witnesses.pf_b = Some(pf.class);
    cert.witnesses.pf_b_adjoint = Some(pf.adjoint_class);
    let need = if strict { PfKind::StrongPF } else { PfKind::WeakPF };
    let pf_ok = pf.joint() >= need;
    cert.hypotheses.push(Hypothesis::new(
        if strict { "shift_strong_pf" } else { "shift_pf" },
        pf_ok,
        format!("B: {:?}, B^H: {:?} (d = {d:.6})", pf.class, pf.adjoint_class),
    ));
    Ok(alpha_ok && tan_ok && pf_ok)
}

/// Certifies or refutes that `Re(e^{−Lt})` is eventually entrywise positive.
pub fn certify_reep(l: &CMatrix) -> Result<Certificate> {
    let spec = FlowSpectrum::new(l)?;
    let mut cert = empty_certificate(Property::Reep);
    let (corank, stable) = spec.stability_hypotheses();
    let spectral_ok = corank.passed && stable.passed;
    cert.hypotheses.push(corank);
    cert.hypotheses.push(stable);

    let phase_ok = if spec.corank == 1 { corank_one_hypotheses(l, &spec, true, &mut cert)? } else { false };

    if spectral_ok && phase_ok {
        cert.verdict = Verdict::Certified;
        cert.route = Route::Theorem;
        if let Some(scan) = witness_scan(l, Property::Reep)? {
            cert.witnesses.t0_estimate = scan.t0_estimate;
            cert.witnesses.sampled_times = scan.sampled_times;
        }
    } else if spectral_ok {
        empirical_route(l, &spec, Property::Reep, &mut cert)?;
    } else {
        refutation_route(l, &spec, Property::Reep, &mut cert);
    }
    log::debug!("rEEP: {:?} via {:?}", cert.verdict, cert.route);
    Ok(cert)
}

/// Left kernel basis with each vector supported on one terminal class, paired
/// with the right basis dual to it. `None` when the class count disagrees with
/// the kernel dimension.
fn terminal_class_basis(l: &CMatrix, dim: usize) -> Result<Option<ZeroSpace>> {
    let classes = terminal_components(&support_lists(l));
    if classes.len() != dim {
        return Ok(None);
    }
    let n = l.nrows();
    let mut left = Vec::with_capacity(dim);
    for class in &classes {
        let sub = CMatrix::from_fn(class.len(), class.len(), |a, b| l[(class[a], class[b])]);
        let ns = null_space(&sub, ZERO_TOL * norm_inf(l).max(f64::MIN_POSITIVE))?;
        let Some(u) = ns.left.last() else { return Ok(None) };
        let mut w = CVector::zeros(n);
        for (a, &node) in class.iter().enumerate() {
            w[node] = u[a];
        }
        left.push(crate::linalg::canonical_gauge(&w));
    }
    let right_basis = null_space(l, ZERO_TOL * norm_inf(l))?.right;
    // V with W^H V = I, drawn from the right kernel
    let right = dual_basis(&left, &right_basis)?;
    Ok(Some(ZeroSpace { right, left }))
}

/// Certifies or refutes that `Re(e^{−Lt})` is eventually entrywise non-negative.
pub fn certify_reenn(l: &CMatrix) -> Result<Certificate> {
    let spec = FlowSpectrum::new(l)?;
    let mut cert = empty_certificate(Property::Reenn);
    let (corank, stable) = spec.stability_hypotheses();
    let stable_ok = stable.passed;
    let corank_one = corank.passed;
    cert.hypotheses.push(corank);
    cert.hypotheses.push(stable);

    let theorem_ok = if spec.corank == 1 {
        corank_one_hypotheses(l, &spec, false, &mut cert)? && stable_ok && corank_one
    } else if spec.corank >= 2 {
        multi_sink_hypotheses(l, &spec, &mut cert)? && stable_ok
    } else {
        false
    };

    if theorem_ok {
        cert.verdict = Verdict::Certified;
        cert.route = Route::Theorem;
        if let Some(scan) = witness_scan(l, Property::Reenn)? {
            cert.witnesses.t0_estimate = scan.t0_estimate;
            cert.witnesses.sampled_times = scan.sampled_times;
        }
    } else if stable_ok && spec.corank >= 1 {
        empirical_route(l, &spec, Property::Reenn, &mut cert)?;
    } else {
        refutation_route(l, &spec, Property::Reenn, &mut cert);
    }
    log::debug!("rEENN: {:?} via {:?}", cert.verdict, cert.route);
    Ok(cert)
}

fn multi_sink_hypotheses(l: &CMatrix, spec: &FlowSpectrum, cert: &mut Certificate) -> Result<bool> {
    let adj = support_lists(l);
    let sinks = adj.iter().filter(|row| row.is_empty()).count();
    let k = spec.corank;
    let sinks_ok = sinks == k;
    cert.hypotheses.push(Hypothesis::new(
        "zero_multiplicity_equals_sinks",
        sinks_ok,
        format!("semi-simple zero of multiplicity {k}, {sinks} sink(s)"),
    ));

    let basis = match terminal_class_basis(l, k)? {
        Some(b) => b,
        None => zero_space(l)?,
    };
    cert.witnesses.right_kernel = basis.right.iter().map(serial::vector).collect();
    cert.witnesses.left_kernel = basis.left.iter().map(serial::vector).collect();

    let d = spec.dominating_shift();
    let b = translated(l, d);
    cert.witnesses.d = Some(d);
    cert.witnesses.b = Some(serial::row_major(&b));

    let mut left_ok = true;
    for w in &basis.left {
        let tan = left_tan_condition(&b, w)?;
        left_ok &= tan.all_in_closed_unit;
        cert.witnesses.left_dominance.push(real_dominance(w, false));
        cert.witnesses.left_tan.push(tan);
    }
    let mut right_ok = true;
    for v in &basis.right {
        let tan = right_tan_condition(&b, v)?;
        right_ok &= tan.all_in_closed_unit;
        cert.witnesses.right_tan.push(tan);
    }
    cert.hypotheses.push(Hypothesis::new("left_tan_closed", left_ok, format!("{} left kernel vector(s)", basis.left.len())));
    cert.hypotheses.push(Hypothesis::new("right_tan_closed", right_ok, format!("{} right kernel vector(s)", basis.right.len())));

    let p = basis.projector();
    let (_, _, min) = min_real_entry(&p);
    let limit_ok = min >= -TOL_ZERO * norm_inf(&p).max(1.0);
    cert.hypotheses.push(Hypothesis::new(
        "limit_nonnegative",
        limit_ok,
        format!("smallest real entry of the kernel projector: {min:.6e}"),
    ));
    Ok(sinks_ok && left_ok && right_ok && limit_ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Consensus,
    Divergent,
    MultiSink,
}

/// The map `x0 ↦ lim x(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SteadyFunctional {
    /// `lim x(t) = v (w^H x0)`, with `v = α𝟙` for Laplacians.
    RankOne { alpha: Option<CValue>, v: Vec<CValue>, w: Vec<CValue> },
    /// `lim x(t) = P x0` with `P = Σ v_i w_i^H`, row-major.
    Projector { n: usize, matrix: Vec<CValue> },
}

impl SteadyFunctional {
    pub fn apply(&self, x0: &CVector) -> CVector {
        match self {
            SteadyFunctional::RankOne { v, w, .. } => {
                let w: CVector = CVector::from_iterator(w.len(), w.iter().map(|&z| Complex64::from(z)));
                let v: CVector = CVector::from_iterator(v.len(), v.iter().map(|&z| Complex64::from(z)));
                v * crate::linalg::inner(&w, x0)
            }
            SteadyFunctional::Projector { matrix, .. } => {
                serial::from_row_major(matrix).expect("square projector") * x0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusVerdict {
    pub kind: VerdictKind,
    pub corank: usize,
    pub j_reduced_spectrum: Vec<CValue>,
    pub marginally_stable: bool,
    pub sink_count: usize,
    pub terminal_class_count: usize,
    pub steady_functional: Option<SteadyFunctional>,
    pub reasons: Vec<Hypothesis>,
}

/// Spectral consensus test: corank 1 with every nonzero eigenvalue in the open
/// right half-plane. Kernel-vector dominance is attached as an advisory reason.
pub fn consensus_verdict(l: &CMatrix) -> Result<ConsensusVerdict> {
    let spec = FlowSpectrum::new(l)?;
    let adj = support_lists(l);
    let sink_count = adj.iter().filter(|row| row.is_empty()).count();
    let terminal_class_count = terminal_components(&adj).len();
    let (corank_h, stable_h) = spec.stability_hypotheses();
    let mut reasons = vec![corank_h, stable_h];
    reasons.push(Hypothesis::new(
        "sinks",
        true,
        format!("{sink_count} sink(s), {terminal_class_count} terminal class(es)"),
    ));
    let strongly_connected = strongly_connected_components(&adj).len() == 1;
    reasons.push(Hypothesis::new("strongly_connected", strongly_connected, "support digraph"));

    let (kind, steady_functional) = match spec.corank {
        1 => {
            let kp = kernel_pair_of(&spec.dec, l)?;
            let v_dom = real_dominance(&kp.v, false).real_dominant;
            let w_dom = real_dominance(&kp.w, false).real_dominant;
            reasons.push(Hypothesis::new(
                "kernel_real_dominant",
                v_dom && w_dom,
                "advisory: sufficient-side condition only",
            ));
            if spec.marginally_stable {
                let functional = SteadyFunctional::RankOne {
                    alpha: kp.alpha.map(CValue::from),
                    v: serial::vector(&kp.v),
                    w: serial::vector(&kp.w),
                };
                (VerdictKind::Consensus, Some(functional))
            } else {
                (VerdictKind::Divergent, None)
            }
        }
        0 => (VerdictKind::Divergent, None),
        _ => {
            let zs = zero_space(l)?;
            let p = zs.projector();
            let functional = SteadyFunctional::Projector { n: l.nrows(), matrix: serial::row_major(&p) };
            (VerdictKind::MultiSink, Some(functional))
        }
    };
    Ok(ConsensusVerdict {
        kind,
        corank: spec.corank,
        j_reduced_spectrum: serial::values(&spec.nonzero()),
        marginally_stable: spec.marginally_stable,
        sink_count,
        terminal_class_count,
        steady_functional,
        reasons,
    })
}

/// `lim_{t→∞} e^{−Lt} x0` for consensual or marginally stable multi-sink flows.
pub fn predict_steady_state(l: &CMatrix, x0: &CVector) -> Result<CVector> {
    if x0.len() != l.nrows() {
        return Err(Error::DimensionMismatch { expected: l.nrows(), found: x0.len() });
    }
    let verdict = consensus_verdict(l)?;
    match (&verdict.kind, &verdict.steady_functional) {
        (VerdictKind::Consensus, Some(f)) => Ok(f.apply(x0)),
        (VerdictKind::MultiSink, Some(f)) if verdict.marginally_stable => Ok(f.apply(x0)),
        _ => Err(Error::DivergentFlow),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::flows::{simulate, Method};
    use crate::graph::{laplacian, structural_connectivity};
    use crate::linalg::{ones, vec_norm_inf};
    use crate::testutil::{random_digraph, rng};
    use proptest::prelude::*;

    fn taylor(l: &CMatrix, t: f64) -> CMatrix {
        matrix_exponential_taylor(&-l, t, 1e-22).unwrap()
    }

    fn min_re(e: &CMatrix) -> f64 {
        e.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    fn all_passed(cert: &Certificate) -> bool {
        cert.hypotheses.iter().all(|h| h.passed)
    }

    #[test]
    fn ex3_is_certified_by_theorem() {
        let l = fixtures::ex3_laplacian();
        for cert in [certify_reep(&l).unwrap(), certify_reenn(&l).unwrap()] {
            assert!(cert.is_certified_by_theorem(), "{cert:?}");
            assert!(all_passed(&cert));
            assert!(cert.witnesses.counterexample.is_none());
        }
        let cert = certify_reep(&l).unwrap();
        let t0 = cert.witnesses.t0_estimate.unwrap();
        for t in [t0, 1.0, 10.0] {
            assert!(min_re(&taylor(&l, t)) > 0.0, "t = {t}");
        }
        assert_eq!(cert.witnesses.pf_b, Some(PfKind::StrongPF));
        assert_eq!(cert.witnesses.pf_b_adjoint, Some(PfKind::StrongPF));
    }

    #[test]
    fn ex4_needs_the_empirical_route() {
        let l = fixtures::ex4_laplacian();
        let cert = certify_reep(&l).unwrap();
        assert_eq!((cert.verdict, cert.route), (Verdict::Certified, Route::Empirical));
        assert!(!cert.hypothesis("left_tan_open").unwrap().passed);
        assert!(cert.hypothesis("marginally_stable").unwrap().passed);
        assert!(min_re(&taylor(&l, 1.0)) > 0.0);
    }

    #[test]
    fn ex1_is_refuted_with_a_rechecked_counterexample() {
        let l = fixtures::ex1_laplacian();
        for cert in [certify_reep(&l).unwrap(), certify_reenn(&l).unwrap()] {
            assert_eq!((cert.verdict, cert.route), (Verdict::Refuted, Route::Both));
            assert!(!cert.hypothesis("marginally_stable").unwrap().passed);
            let cx = cert.witnesses.counterexample.unwrap();
            assert!(!cx.structural);
            let e = taylor(&l, cx.t);
            assert!(e[(cx.row, cx.col)].re < -TOL_ZERO * norm_inf(&e));
        }
    }

    #[test]
    fn ex6_is_nonnegative_but_not_positive() {
        let l = fixtures::ex6_laplacian();
        let reenn = certify_reenn(&l).unwrap();
        assert!(reenn.is_certified_by_theorem());
        assert_eq!(reenn.witnesses.pf_b, Some(PfKind::StrongPF));
        assert_eq!(reenn.witnesses.pf_b_adjoint, Some(PfKind::WeakPF));
        let e = taylor(&l, 4.0);
        assert!(min_re(&e) >= -1e-12);

        let reep = certify_reep(&l).unwrap();
        assert_eq!(reep.verdict, Verdict::Refuted);
        let cx = reep.witnesses.counterexample.unwrap();
        assert!(cx.structural);
        // node 0 is a sink, so it reaches nothing
        assert_eq!(cx.row, 0);
    }

    #[test]
    fn ex7_multi_sink_route() {
        let l = fixtures::ex7_laplacian();
        let cert = certify_reenn(&l).unwrap();
        assert!(cert.is_certified_by_theorem(), "{cert:?}");
        assert!(cert.hypothesis("zero_multiplicity_equals_sinks").unwrap().passed);
        assert_eq!(cert.witnesses.left_kernel.len(), 2);
        // left kernel vectors are the sink indicators
        let w0: Vec<Complex64> = cert.witnesses.left_kernel[0].iter().map(|&z| z.into()).collect();
        let w1: Vec<Complex64> = cert.witnesses.left_kernel[1].iter().map(|&z| z.into()).collect();
        let support = |w: &[Complex64]| w.iter().position(|z| z.norm() > 1e-9).unwrap();
        let mut sinks = [support(&w0), support(&w1)];
        sinks.sort();
        assert_eq!(sinks, [0, 2]);
        assert!(min_re(&taylor(&l, 1.0)) >= -1e-12);

        let reep = certify_reep(&l).unwrap();
        assert_eq!((reep.verdict, reep.route), (Verdict::Refuted, Route::Both));
        assert!(reep.witnesses.counterexample.unwrap().structural);
    }

    #[test]
    fn zero_laplacian() {
        let one = CMatrix::zeros(1, 1);
        assert!(certify_reep(&one).unwrap().is_certified_by_theorem());
        let l = CMatrix::zeros(3, 3);
        assert!(certify_reenn(&l).unwrap().is_certified_by_theorem());
        let reep = certify_reep(&l).unwrap();
        assert_eq!(reep.verdict, Verdict::Refuted);
        assert!(reep.witnesses.counterexample.unwrap().structural);
        let scan = empirical_sign_pattern(&l, &default_time_grid(&l).unwrap(), SignMode::Nonneg).unwrap();
        assert_eq!(scan.t0_estimate, Some(scan.sampled_times[0]));
    }

    #[test]
    fn sign_scan_rejects_bad_grids() {
        let l = fixtures::ex3_laplacian();
        assert!(matches!(empirical_sign_pattern(&l, &[], SignMode::Strict), Err(Error::EmptyGrid)));
        assert!(matches!(empirical_sign_pattern(&l, &[1.0, 0.5], SignMode::Strict), Err(Error::InvalidGrid)));
        assert!(matches!(empirical_sign_pattern(&l, &[0.0, 1.0], SignMode::Strict), Err(Error::InvalidGrid)));
        let ex1 = fixtures::ex1_laplacian();
        assert!(matches!(empirical_sign_pattern(&ex1, &[0.1, 1.0], SignMode::Strict), Err(Error::Overflow { .. })));
    }

    #[test]
    fn default_grid_spans_the_gap() {
        let l = fixtures::ex3_laplacian();
        let grid = default_time_grid(&l).unwrap();
        let gap = eig(&l).unwrap().eigenvalues.iter().filter(|z| z.norm() > 1e-6).map(|z| z.re).fold(f64::INFINITY, f64::min);
        assert_eq!(grid.len(), GRID_POINTS);
        assert!((grid[0] * gap - 1e-3).abs() < 1e-12);
        assert!((grid[GRID_POINTS - 1] * gap - 10.0).abs() < 1e-9);
    }

    #[test]
    fn certificate_round_trips_through_json() {
        let cert = certify_reenn(&fixtures::ex7_laplacian()).unwrap();
        let text = serde_json::to_string(&cert).unwrap();
        assert!(text.contains("\"rEENN\""));
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn verdicts_on_fixtures() {
        let v = consensus_verdict(&fixtures::ex3_laplacian()).unwrap();
        assert_eq!(v.kind, VerdictKind::Consensus);
        assert_eq!(v.j_reduced_spectrum.len(), 2);
        assert_eq!(consensus_verdict(&fixtures::ex1_laplacian()).unwrap().kind, VerdictKind::Divergent);
        let v = consensus_verdict(&fixtures::ex7_laplacian()).unwrap();
        assert_eq!(v.kind, VerdictKind::MultiSink);
        assert!(v.marginally_stable);
        assert_eq!((v.sink_count, v.terminal_class_count), (2, 2));
    }

    #[test]
    fn ex7_projector_columns() {
        let v = consensus_verdict(&fixtures::ex7_laplacian()).unwrap();
        let Some(SteadyFunctional::Projector { matrix, .. }) = v.steady_functional else { panic!() };
        let p = serial::from_row_major(&matrix).unwrap();
        let v1 = [c64(1.0, 0.0), c64(0.4634, 0.1708), c64(0.0, 0.0), c64(0.4162, 0.1726)];
        let v3 = [c64(0.0, 0.0), c64(0.5366, -0.1707), c64(1.0, 0.0), c64(0.5838, -0.1726)];
        for i in 0..4 {
            assert!((p[(i, 0)] - v1[i]).norm() < 1e-3);
            assert!((p[(i, 2)] - v3[i]).norm() < 1e-3);
            assert!(p[(i, 1)].norm() < 1e-12 && p[(i, 3)].norm() < 1e-12);
        }
    }

    #[test]
    fn steady_state_matches_long_simulation() {
        let x0 = CVector::from_vec(vec![c64(1.0, 2.0), c64(-0.5, 0.3), c64(2.0, -1.0), c64(0.2, 0.0)]);
        for l in [fixtures::ex6_laplacian(), fixtures::ex7_laplacian()] {
            let predicted = predict_steady_state(&l, &x0).unwrap();
            let traj = simulate(&l, &x0, 6.0, 2, Method::ExpStep).unwrap();
            assert!(vec_norm_inf(&(traj.final_state().unwrap() - &predicted)) < 1e-9);
        }
        let ex1 = fixtures::ex1_laplacian();
        assert!(matches!(predict_steady_state(&ex1, &ones(3)), Err(Error::DivergentFlow)));
        assert!(matches!(predict_steady_state(&ex1, &ones(2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ex3_consensus_value() {
        let l = fixtures::ex3_laplacian();
        let x0 = CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.5)]);
        let x = predict_steady_state(&l, &x0).unwrap();
        // w from the modal solution, scaled so that w^H 𝟙 = 1
        let w = [c64(0.0667, -0.0312), c64(0.0193, -0.0122), c64(1.646, 0.0433)];
        let s: Complex64 = w.iter().map(|z| z.conj()).sum();
        let value: Complex64 = w.iter().zip(x0.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / s;
        for z in x.iter() {
            assert!((z - value).norm() < 2e-3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn theorem_route_matches_spectral_conditions(seed in any::<u64>(), n in 2usize..=5) {
            let l = laplacian(&random_digraph(&mut rng(seed), n, 0.6)).matrix;
            let cert = certify_reep(&l);
            prop_assume!(cert.is_ok());
            let cert = cert.unwrap();
            let phase = ["alpha_strictly_real_dominant", "left_tan_open", "shift_strong_pf"];
            prop_assume!(phase.iter().all(|h| cert.hypothesis(h).is_some_and(|h| h.passed)));
            let dec = eig(&l).unwrap();
            let tol = 1e-9 * norm_inf(&l);
            let zeros = dec.eigenvalues.iter().filter(|z| z.norm() <= 1e-9 * norm_inf(&l).max(1.0)).count();
            let stable = dec.eigenvalues.iter().all(|z| z.norm() <= 1e-9 * norm_inf(&l).max(1.0) || z.re > tol);
            prop_assert_eq!(cert.is_certified_by_theorem(), zeros == 1 && stable);
        }

        #[test]
        fn positive_flows_need_strong_connectivity(seed in any::<u64>(), n in 2usize..=5) {
            let g = random_digraph(&mut rng(seed), n, 0.5);
            let l = laplacian(&g).matrix;
            let cert = certify_reep(&l);
            prop_assume!(cert.is_ok());
            if cert.unwrap().verdict == Verdict::Certified {
                prop_assert!(structural_connectivity(&g).strongly_connected);
            }
        }

        #[test]
        fn refutations_recheck(seed in any::<u64>(), n in 2usize..=5) {
            let l = laplacian(&random_digraph(&mut rng(seed), n, 0.5)).matrix;
            for cert in [certify_reep(&l), certify_reenn(&l)] {
                let Ok(cert) = cert else { continue };
                if cert.verdict != Verdict::Refuted {
                    continue;
                }
                let cx = cert.witnesses.counterexample.unwrap();
                let e = taylor(&l, cx.t);
                if cx.structural {
                    prop_assert!(e[(cx.row, cx.col)].norm() <= 1e-12 * norm_inf(&e).max(1.0));
                } else {
                    prop_assert!(e[(cx.row, cx.col)].re < 0.0);
                }
            }
        }
    }
}
