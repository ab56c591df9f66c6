//! Real-dominance of complex vectors and the phase-angle tan conditions on
//! eigenvectors of a translated Laplacian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_inf, phase_deg, vec_norm2, vec_norm_inf, CMatrix, CVector};

const DOMINANCE_TOL: f64 = 1e-12;
const EIGEN_RESIDUAL_TOL: f64 = 1e-6;
const INDETERMINATE_TOL: f64 = 1e-12;
const SELF_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub vector: Vec<crate::serial::CValue>,
    pub per_entry_phase: Vec<f64>,
    pub real_dominant: bool,
    pub strictly_real_dominant: bool,
    /// Entries failing the requested test (strict or not).
    pub violating_indices: Vec<usize>,
}

/// Entrywise `Re(z_i) ≥ |Im(z_i)|`. Zero entries pass the plain test and
/// fail the strict one.
pub fn real_dominance(z: &CVector, strict: bool) -> DominanceReport {
    let tol = DOMINANCE_TOL * vec_norm_inf(z).max(1.0);
    let weak_ok = |x: &Complex64| x.re >= x.im.abs() - tol;
    let strict_ok = |x: &Complex64| x.re - x.im.abs() > tol;
    let violating_indices = z
        .iter()
        .enumerate()
        .filter(|(_, x)| if strict { !strict_ok(x) } else { !weak_ok(x) })
        .map(|(i, _)| i)
        .collect();
    DominanceReport {
        vector: crate::serial::vector(z),
        per_entry_phase: z.iter().map(|&x| if x.norm() == 0.0 { 0.0 } else { phase_deg(x) }).collect(),
        real_dominant: z.iter().all(weak_ok),
        strictly_real_dominant: z.iter().all(strict_ok),
        violating_indices,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Which matrix the ratios were evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TanMatrix {
    Supplied,
    /// `dI − L` for the recorded shift.
    Translated { d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanConditionReport {
    pub side: Side,
    pub matrix: TanMatrix,
    /// `None` where the denominator vanishes (a zero eigenvector entry).
    pub ratios: Vec<Option<f64>>,
    pub all_in_closed_unit: bool,
    pub all_in_open_unit: bool,
    pub eigenvalue: crate::serial::CValue,
    /// Largest deviation of a ratio from the tangent of its entry's phase,
    /// relative to `max(1, |tan|)`.
    pub self_check_error: f64,
    pub self_check_passed: bool,
}

impl TanConditionReport {
    pub fn indeterminate_indices(&self) -> Vec<usize> {
        self.ratios.iter().enumerate().filter(|(_, r)| r.is_none()).map(|(i, _)| i).collect()
    }
}

fn check_eigenvector(m: &CMatrix, x: &CVector) -> Result<Complex64> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: m.ncols() });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let nx = vec_norm2(x);
    if nx == 0.0 {
        return Err(Error::NotAnEigenvector { residual: f64::INFINITY });
    }
    let mx = m * x;
    let lambda = inner(x, &mx) / (nx * nx);
    let residual = vec_norm2(&(mx - x * lambda)) / (nx * norm_inf(m).max(f64::MIN_POSITIVE));
    if residual > EIGEN_RESIDUAL_TOL {
        return Err(Error::NotAnEigenvector { residual });
    }
    Ok(lambda)
}

fn tan_report(
    side: Side,
    m: &CMatrix,
    eigenvalue: Complex64,
    x: &CVector,
    term: impl Fn(usize, usize) -> (f64, f64),
    expected_tan: impl Fn(usize) -> f64,
) -> TanConditionReport {
    let n = m.nrows();
    let floor = INDETERMINATE_TOL * norm_inf(m) * vec_norm_inf(x);
    let mut ratios = Vec::with_capacity(n);
    let mut self_check_error: f64 = 0.0;
    for i in 0..n {
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..n {
            let (s, c) = term(i, j);
            num += s;
            den += c;
        }
        if den.abs() <= floor {
            ratios.push(None);
            continue;
        }
        let ratio = num / den;
        let t = expected_tan(i);
        self_check_error = self_check_error.max((ratio - t).abs() / t.abs().max(1.0));
        ratios.push(Some(ratio));
    }
    // an indeterminate entry has no phase: it passes the closed test only
    let all_in_closed_unit = ratios.iter().all(|r| r.is_none_or(|r| r.abs() <= 1.0));
    let all_in_open_unit = ratios.iter().all(|r| r.is_some_and(|r| r.abs() < 1.0));
    TanConditionReport {
        side,
        matrix: TanMatrix::Supplied,
        ratios,
        all_in_closed_unit,
        all_in_open_unit,
        eigenvalue: eigenvalue.into(),
        self_check_error,
        self_check_passed: self_check_error <= SELF_CHECK_TOL,
    }
}

/// Column ratios `Σ_j |b_ji||w_j| sin(θ_ji − φ_j) / Σ_j |b_ji||w_j| cos(θ_ji − φ_j)`
/// for a left eigenvector `w` of `b`; each equals `tan(−φ_i)`.
pub fn left_tan_condition(b: &CMatrix, w: &CVector) -> Result<TanConditionReport> {
    let lambda = check_eigenvector(&b.adjoint(), w)?.conj();
    let term = |i: usize, j: usize| {
        let bji = b[(j, i)];
        let angle = bji.arg() - w[j].arg();
        let mag = bji.norm() * w[j].norm();
        (mag * angle.sin(), mag * angle.cos())
    };
    Ok(tan_report(Side::Left, b, lambda, w, term, |i| (-w[i].arg()).tan()))
}

/// Row ratios `Σ_j |b_ij||v_j| sin(θ_ij + φ_j) / Σ_j |b_ij||v_j| cos(θ_ij + φ_j)`
/// for a right eigenvector `v` of `b`; each equals `tan(φ_i)`.
pub fn right_tan_condition(b: &CMatrix, v: &CVector) -> Result<TanConditionReport> {
    let lambda = check_eigenvector(b, v)?;
    let term = |i: usize, j: usize| {
        let bij = b[(i, j)];
        let angle = bij.arg() + v[j].arg();
        let mag = bij.norm() * v[j].norm();
        (mag * angle.sin(), mag * angle.cos())
    };
    Ok(tan_report(Side::Right, b, lambda, v, term, |i| v[i].arg().tan()))
}

fn translated(l: &CMatrix, d: f64) -> CMatrix {
    let n = l.nrows();
    CMatrix::identity(n, n) * Complex64::new(d, 0.0) - l
}

/// [`left_tan_condition`] on `dI − L` for a left kernel vector of `L`.
pub fn left_tan_condition_translated(l: &CMatrix, w: &CVector, d: f64) -> Result<TanConditionReport> {
    let mut report = left_tan_condition(&translated(l, d), w)?;
    report.matrix = TanMatrix::Translated { d };
    Ok(report)
}

/// [`right_tan_condition`] on `dI − L` for a right kernel vector of `L`.
pub fn right_tan_condition_translated(l: &CMatrix, v: &CVector, d: f64) -> Result<TanConditionReport> {
    let mut report = right_tan_condition(&translated(l, d), v)?;
    report.matrix = TanMatrix::Translated { d };
    Ok(report)
}
