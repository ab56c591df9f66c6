//! Dense complex linear algebra used throughout the crate.
//!
//! Storage is `nalgebra::DMatrix<Complex64>`. The Schur reduction (Householder
//! Hessenberg form followed by single-shift complex QR) is implemented here;
//! so is a one-sided Jacobi SVD. Products and LU inverses come from nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const EPS: f64 = f64::EPSILON;
const MAX_QR_SWEEPS_PER_EIGENVALUE: usize = 100;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a square matrix from row-major `(re, im)` pairs.
pub fn cmatrix(n: usize, entries: &[(f64, f64)]) -> CMatrix {
    assert_eq!(entries.len(), n * n, "expected {} entries", n * n);
    CMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        c64(re, im)
    })
}

/// Max absolute row sum.
pub fn norm_inf(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm_inf(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_norm2(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ones(n: usize) -> CVector {
    CVector::from_element(n, c64(1.0, 0.0))
}

/// `u^H v`.
pub fn inner(u: &CVector, v: &CVector) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Rescales `v` to unit 2-norm with its largest-magnitude entry real positive.
///
/// Ties in magnitude resolve to the lowest index so the gauge is deterministic.
pub fn canonical_gauge(v: &CVector) -> CVector {
    let norm = vec_norm2(v);
    if norm == 0.0 {
        return v.clone();
    }
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        // 1e-12 slack keeps near-equal magnitudes from flipping the pivot
        if z.norm() > best * (1.0 + 1e-12) {
            best = z.norm();
            pivot = i;
        }
    }
    let phase = v[pivot] / v[pivot].norm();
    v.map(|z| z / (phase * norm))
}

/// Complex Givens rotation `G = [c, s; -conj(s), c]` with `G [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, c64(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, c64(1.0, 0.0));
    }
    let norm = an.hypot(bn);
    let c = an / norm;
    let s = (a / an) * b.conj() / norm;
    (c, s)
}

/// Unitary reduction `M = Z H Z^H` with `H` upper Hessenberg.
fn hessenberg(m: &CMatrix) -> (CMatrix, CMatrix) {
    let n = m.nrows();
    let mut h = m.clone();
    let mut z = CMatrix::identity(n, n);
    if n < 3 {
        return (h, z);
    }
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { c64(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vn2;

        // H <- P H
        for j in 0..n {
            let dot: Complex64 = (0..v.len()).map(|r| v[r].conj() * h[(k + 1 + r, j)]).sum();
            let f = dot * beta;
            for r in 0..v.len() {
                h[(k + 1 + r, j)] -= v[r] * f;
            }
        }
        // H <- H P, Z <- Z P
        for target in [&mut h, &mut z] {
            for i in 0..n {
                let dot: Complex64 = (0..v.len()).map(|c| target[(i, k + 1 + c)] * v[c]).sum();
                let f = dot * beta;
                for c in 0..v.len() {
                    target[(i, k + 1 + c)] -= f * v[c].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = c64(0.0, 0.0);
        }
    }
    (h, z)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur form `M = Z T Z^H`, `T` upper triangular and `Z` unitary.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: CMatrix,
    pub z: CMatrix,
}

pub fn schur(m: &CMatrix) -> Result<Schur> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let (mut h, mut z) = hessenberg(m);
    if n < 2 {
        return Ok(Schur { t: h, z });
    }
    let scale = norm_fro(&h).max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = scale;
            }
            if h[(l, l - 1)].norm() <= EPS * s {
                h[(l, l - 1)] = c64(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        total += 1;
        if sweeps > MAX_QR_SWEEPS_PER_EIGENVALUE {
            return Err(Error::ConvergenceFailure { iterations: total });
        }

        let mu = if sweeps % 10 == 0 {
            // exceptional shift to break cycles
            let sub = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + c64(0.75 * sub, 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - mu, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let col_start = if k > l { k - 1 } else { k };
            for j in col_start..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * c + s.conj() * q;
                h[(i, k + 1)] = -s * p + q * c;
            }
            for i in 0..n {
                let p = z[(i, k)];
                let q = z[(i, k + 1)];
                z[(i, k)] = p * c + s.conj() * q;
                z[(i, k + 1)] = -s * p + q * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = c64(0.0, 0.0);
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = c64(0.0, 0.0);
        }
    }
    Ok(Schur { t: h, z })
}

/// Right eigenvector of upper-triangular `t` for its `k`-th diagonal entry,
/// by back substitution. Near-zero pivots are perturbed to `eps * |T|`.
pub fn triangular_eigenvector(t: &CMatrix, k: usize) -> CVector {
    let n = t.nrows();
    let smin = (EPS * norm_fro(t)).max(f64::MIN_POSITIVE);
    let lambda = t[(k, k)];
    let mut y = CVector::zeros(n);
    y[k] = c64(1.0, 0.0);
    for i in (0..k).rev() {
        let sum: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
        let mut den = t[(i, i)] - lambda;
        if den.norm() < smin {
            den = c64(smin, 0.0);
        }
        y[i] = -sum / den;
    }
    y
}

/// `m = U Σ V^H` with singular values in descending order.
pub struct Svd {
    pub u: CMatrix,
    pub v: CMatrix,
    pub singular_values: Vec<f64>,
}

const MAX_JACOBI_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD of a square matrix.
///
/// Columns of `m` are rotated pairwise until mutually orthogonal; their norms
/// are the singular values. Left vectors of zero singular values are completed
/// to an orthonormal basis by Gram-Schmidt.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    let n = m.ncols();
    if m.nrows() != n {
        return Err(Error::NotSquare { rows: m.nrows(), cols: n });
    }
    let mut a = m.clone();
    let mut v = CMatrix::identity(n, n);
    // columns at roundoff level carry no direction worth orthogonalizing
    let negligible = (EPS * norm_fro(m)).powi(2);
    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= EPS * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                converged = false;
                // align the phase of column q so the pair's inner product is real
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..n {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = xp * c - xq * s;
                        mat[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { iterations: MAX_JACOBI_SWEEPS });
    }

    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(std::cmp::Ordering::Equal));
    let smax = norms.iter().copied().fold(0.0, f64::max);
    let floor = 1e-13 * smax;

    let mut u = CMatrix::zeros(n, n);
    let mut v_sorted = CMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    let mut filled = 0;
    for (k, &j) in order.iter().enumerate() {
        v_sorted.set_column(k, &v.column(j));
        singular_values.push(norms[j]);
        if norms[j] > floor && norms[j] > 0.0 {
            u.set_column(k, &(a.column(j) / c64(norms[j], 0.0)));
            filled += 1;
        }
    }
    complete_orthonormal(&mut u, filled);
    Ok(Svd { u, v: v_sorted, singular_values })
}

/// Fills columns `filled..n` of `u` with an orthonormal complement of the first `filled`.
fn complete_orthonormal(u: &mut CMatrix, filled: usize) {
    let n = u.nrows();
    for k in filled..n {
        let mut best = CVector::zeros(n);
        let mut best_norm = -1.0;
        for e in 0..n {
            let mut x = CVector::zeros(n);
            x[e] = c64(1.0, 0.0);
            for _ in 0..2 {
                for j in 0..k {
                    let proj = u.column(j).dotc(&x);
                    x -= u.column(j) * proj;
                }
            }
            let norm = x.norm();
            if norm > best_norm {
                best_norm = norm;
                best = x;
            }
        }
        u.set_column(k, &(best / c64(best_norm, 0.0)));
    }
}

/// Orthonormal bases for the right and left null spaces of a square `m`.
///
/// A singular value counts as zero when it is at most `threshold`.
pub struct NullSpace {
    pub right: Vec<CVector>,
    pub left: Vec<CVector>,
    pub singular_values: Vec<f64>,
}

pub fn null_space(m: &CMatrix, threshold: f64) -> Result<NullSpace> {
    let n = m.nrows();
    let d = svd(m)?;
    let dim = d.singular_values.iter().filter(|&&s| s <= threshold).count();
    let right = (n - dim..n).map(|j| d.v.column(j).into_owned()).collect();
    let left = (n - dim..n).map(|j| d.u.column(j).into_owned()).collect();
    Ok(NullSpace { right, left, singular_values: d.singular_values })
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    let inv = m.clone().lu().try_inverse()?;
    is_finite(&inv).then_some(inv)
}

/// Phase of `z` in degrees, in (-180, 180].
pub fn phase_deg(z: Complex64) -> f64 {
    z.im.atan2(z.re).to_degrees()
}
