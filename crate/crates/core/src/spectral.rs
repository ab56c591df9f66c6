//! Eigendecomposition, corank, translated matrices and Perron-Frobenius classes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c64, canonical_gauge, inner, inverse, norm_fro, norm_inf, null_space, schur, svd, triangular_eigenvector,
    vec_norm2, CMatrix, CVector,
};

/// Relative tolerance (against `‖M‖∞`) under which an eigenvalue counts as zero.
pub const ZERO_TOL: f64 = 1e-9;
/// Relative distance (against `‖M‖_F`) under which eigenvalues are grouped.
const CLUSTER_TOL: f64 = 1e-6;
/// Relative singular-value threshold for eigenspace dimensions.
const EIGENSPACE_TOL: f64 = 1e-7;
const REAL_TOL: f64 = 1e-8;
const GAP_TOL: f64 = 1e-8;
const STRONG_POS_TOL: f64 = 1e-12;
const WEAK_NEG_TOL: f64 = 1e-9;

/// `M = V J W^H` with eigenvalues sorted by modulus then real part, both descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors as columns, unit norm with canonical gauge.
    pub v: CMatrix,
    /// Left eigenvectors as columns.
    pub w: CMatrix,
    /// `w_i^H v_i = 1` holds for every pair.
    pub normalized: bool,
    pub diagonalizable: bool,
    pub jordan_defect: usize,
    /// Groups of indices whose eigenvalues coincide numerically.
    pub clusters: Vec<Vec<usize>>,
    /// `(cluster index, defect)` for every defective cluster.
    pub cluster_defects: Vec<(usize, usize)>,
    scale_inf: f64,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right(&self, i: usize) -> CVector {
        self.v.column(i).into_owned()
    }

    pub fn left(&self, i: usize) -> CVector {
        self.w.column(i).into_owned()
    }

    /// Absolute zero threshold: `rel_tol·‖M‖∞`.
    pub fn zero_threshold(&self, rel_tol: f64) -> f64 {
        rel_tol * self.scale_inf
    }

    /// Indices of the zero eigenvalue, counting every member of a cluster
    /// that contains a numerically zero eigenvalue.
    pub fn zero_indices(&self, rel_tol: f64) -> Vec<usize> {
        let tol = self.zero_threshold(rel_tol);
        let mut out: Vec<usize> = self
            .clusters
            .iter()
            .filter(|c| c.iter().any(|&i| self.eigenvalues[i].norm() <= tol))
            .flatten()
            .copied()
            .collect();
        out.sort_unstable();
        out
    }

    pub fn nonzero_indices(&self, rel_tol: f64) -> Vec<usize> {
        let zero = self.zero_indices(rel_tol);
        (0..self.n()).filter(|i| !zero.contains(i)).collect()
    }

    /// Jordan defect of the cluster containing index `i`.
    pub fn cluster_defect(&self, i: usize) -> usize {
        self.cluster_defects.iter().find(|(c, _)| self.clusters[*c].contains(&i)).map_or(0, |(_, d)| *d)
    }

    /// Largest relative eigen-residual `max_i ‖M v_i − λ_i v_i‖ / ‖v_i‖`.
    pub fn max_residual(&self, m: &CMatrix) -> f64 {
        (0..self.n())
            .map(|i| {
                let v = self.right(i);
                let nv = vec_norm2(&v).max(f64::MIN_POSITIVE);
                vec_norm2(&(m * &v - &v * self.eigenvalues[i])) / nv
            })
            .fold(0.0, f64::max)
    }
}

fn sort_key_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re))
}

fn clusters_of(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

fn shifted(m: &CMatrix, mu: Complex64) -> CMatrix {
    let mut a = m.clone();
    for i in 0..a.nrows() {
        a[(i, i)] -= mu;
    }
    a
}

/// Full eigendecomposition of a square complex matrix.
///
/// Eigenvalues come from the complex Schur form. Isolated eigenvalues get their
/// eigenvectors by back substitution on the triangular factor; repeated ones use
/// the null space of `M − μI`, which also reveals any Jordan defect.
pub fn eig(m: &CMatrix) -> Result<SpectralDecomposition> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare { rows: n, cols: m.ncols() });
    }
    if n == 0 {
        return Err(Error::TooFewNodes { n: 0, min: 1 });
    }
    if !crate::linalg::is_finite(m) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let s = schur(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sort_key_cmp(&s.t[(a, a)], &s.t[(b, b)]));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&k| s.t[(k, k)]).collect();

    let scale = norm_fro(m);
    let clusters = clusters_of(&eigenvalues, CLUSTER_TOL * scale);
    let threshold = EIGENSPACE_TOL * scale;

    let mut v = CMatrix::zeros(n, n);
    let mut defect = 0usize;
    let mut cluster_defects = Vec::new();
    for (c, cluster) in clusters.iter().enumerate() {
        if cluster.len() == 1 {
            let i = cluster[0];
            let y = triangular_eigenvector(&s.t, order[i]);
            v.set_column(i, &canonical_gauge(&(&s.z * y)));
            continue;
        }
        let mu = cluster.iter().map(|&i| eigenvalues[i]).sum::<Complex64>() / cluster.len() as f64;
        let ns = null_space(&shifted(m, mu), threshold)?;
        let g = ns.right.len().min(cluster.len()).max(1);
        let basis: Vec<CVector> = if ns.right.is_empty() {
            // threshold too tight for this cluster; fall back to the weakest direction
            let d = svd(&shifted(m, mu))?;
            vec![d.v.column(n - 1).into_owned()]
        } else {
            ns.right[ns.right.len() - g..].to_vec()
        };
        if g < cluster.len() {
            defect += cluster.len() - g;
            cluster_defects.push((c, cluster.len() - g));
        }
        for (slot, &i) in cluster.iter().enumerate() {
            v.set_column(i, &canonical_gauge(&basis[slot.min(g - 1)]));
        }
    }

    let diagonalizable = defect == 0;
    let mut normalized = false;
    let mut w = CMatrix::zeros(n, n);
    if diagonalizable {
        if let Some(inv) = inverse(&v) {
            w = inv.adjoint();
            normalized = true;
        }
    }
    if !normalized {
        // left vectors from left null spaces, paired where possible
        for (c, cluster) in clusters.iter().enumerate() {
            let mu = cluster.iter().map(|&i| eigenvalues[i]).sum::<Complex64>() / cluster.len() as f64;
            let d = svd(&shifted(m, mu))?;
            let missing = cluster_defects.iter().find(|(k, _)| *k == c).map_or(0, |(_, d)| *d);
            let g = (cluster.len() - missing).max(1);
            for (slot, &i) in cluster.iter().enumerate() {
                let col = n - g + slot.min(g - 1);
                let u: CVector = d.u.column(col).into_owned();
                let vi = v.column(i).into_owned();
                let p = inner(&u, &vi);
                let wi = if p.norm() > 1e-12 { u / p.conj() } else { u };
                w.set_column(i, &wi);
            }
        }
        normalized = (0..n).all(|i| (inner(&w.column(i).into_owned(), &v.column(i).into_owned()) - c64(1.0, 0.0)).norm() <= 1e-8);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        v,
        w,
        normalized,
        diagonalizable,
        jordan_defect: defect,
        clusters,
        cluster_defects,
        scale_inf: norm_inf(m),
    })
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa(m: &CMatrix) -> Result<f64> {
    Ok(eig(m)?.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn spectral_radius(m: &CMatrix) -> Result<f64> {
    Ok(eig(m)?.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Kernel dimension, counted on the spectrum and cross-checked by SVD.
pub fn corank(m: &CMatrix, tol: f64) -> Result<usize> {
    let dec = eig(m)?;
    corank_of(&dec, m, tol)
}

/// [`corank`] reusing an existing decomposition of `m`.
pub fn corank_of(dec: &SpectralDecomposition, m: &CMatrix, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("corank tolerance must be positive, got {tol}")));
    }
    let zero = dec.zero_indices(tol);
    let threshold = tol * norm_inf(m);
    let factor_count = svd(m)?.singular_values.iter().filter(|&&s| s <= threshold).count();
    if zero.len() != factor_count {
        let defect = zero.first().map_or(0, |&i| dec.cluster_defect(i));
        if defect > 0 {
            return Err(Error::DefectiveSpectrum { defect });
        }
        return Err(Error::RankAmbiguous { eigen_count: zero.len(), factor_count });
    }
    Ok(zero.len())
}

/// `B = dI − L` together with the shift used.
#[derive(Debug, Clone)]
pub struct Translated {
    pub b: CMatrix,
    pub d: f64,
    pub spectral_radius: f64,
}

pub const DEFAULT_SHIFT_FACTOR: f64 = 1.1;

/// Smallest shift for which `d` strictly dominates every `d − λ` with `λ ≠ 0`.
///
/// `|d − λ| < d` iff `d > |λ|²/(2 Re λ)`, so any nonzero `λ` with `Re λ ≤ 0`
/// rules out every shift and gives `None`.
pub fn min_dominating_shift(eigenvalues: &[Complex64], zero_tol: f64) -> Option<f64> {
    let mut bound: f64 = 0.0;
    for z in eigenvalues.iter().filter(|z| z.norm() > zero_tol) {
        if z.re <= 0.0 {
            return None;
        }
        bound = bound.max(z.norm_sqr() / (2.0 * z.re));
    }
    Some(bound)
}

/// `B = dI − L`. A supplied `d` must exceed the spectral radius of `L`, or at
/// least keep `d` strictly dominant in the spectrum of `B`.
pub fn translated_matrix(l: &CMatrix, d: Option<f64>) -> Result<Translated> {
    let dec = eig(l)?;
    let rho = dec.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d = match d {
        Some(d) => {
            let dominating = min_dominating_shift(&dec.eigenvalues, dec.zero_threshold(ZERO_TOL))
                .is_some_and(|bound| d > bound);
            if !(d > rho || (d > 0.0 && dominating)) {
                return Err(Error::DTooSmall { d, spectral_radius: rho });
            }
            d
        }
        None if rho > 0.0 => DEFAULT_SHIFT_FACTOR * rho,
        None => 1.0,
    };
    let n = l.nrows();
    let b = CMatrix::identity(n, n) * c64(d, 0.0) - l;
    Ok(Translated { b, d, spectral_radius: rho })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PfKind {
    None,
    WeakPF,
    StrongPF,
}

/// Perron-Frobenius class of `M`, with the class of `M^H` alongside.
#[derive(Debug, Clone)]
pub struct PFClass {
    pub class: PfKind,
    pub adjoint_class: PfKind,
    pub dominant_eigenvalue: Complex64,
    /// Dominant right eigenvector of `M` in canonical gauge.
    pub dominant_right: CVector,
    /// Dominant right eigenvector of `M^H` (left eigenvector of `M`) in canonical gauge.
    pub dominant_left: CVector,
}

impl PFClass {
    /// Weaker of the two classes; the theorems need `M` and `M^H` together.
    pub fn joint(&self) -> PfKind {
        self.class.min(self.adjoint_class)
    }
}

fn classify(dec: &SpectralDecomposition) -> (PfKind, Complex64, CVector) {
    let lambda = dec.eigenvalues[0];
    let v = canonical_gauge(&dec.right(0));
    let real = lambda.im.abs() <= REAL_TOL * lambda.norm();
    let positive = lambda.re > 0.0;
    let simple = dec.clusters.iter().find(|c| c.contains(&0)).is_some_and(|c| c.len() == 1);
    if !(real && positive && simple) {
        return (PfKind::None, lambda, v);
    }
    let gap = dec.n() == 1 || lambda.norm() - dec.eigenvalues[1].norm() > GAP_TOL * lambda.norm();
    let kind = if gap && v.iter().all(|z| z.re > STRONG_POS_TOL) {
        PfKind::StrongPF
    } else if v.iter().all(|z| z.re >= -WEAK_NEG_TOL) {
        PfKind::WeakPF
    } else {
        PfKind::None
    };
    (kind, lambda, v)
}

pub fn pf_classify(m: &CMatrix) -> Result<PFClass> {
    let (class, dominant_eigenvalue, dominant_right) = classify(&eig(m)?);
    let (adjoint_class, _, dominant_left) = classify(&eig(&m.adjoint())?);
    Ok(PFClass { class, adjoint_class, dominant_eigenvalue, dominant_right, dominant_left })
}

/// Right and left kernel vectors of a corank-1 matrix, `w^H v = 1`.
#[derive(Debug, Clone)]
pub struct KernelPair {
    /// Unit norm, largest entry real positive.
    pub v: CVector,
    pub w: CVector,
    /// Set when `v = α𝟙`.
    pub alpha: Option<Complex64>,
}

const CONSTANT_VECTOR_TOL: f64 = 1e-8;

pub fn kernel_pair(l: &CMatrix) -> Result<KernelPair> {
    let dec = eig(l)?;
    kernel_pair_of(&dec, l)
}

pub fn kernel_pair_of(dec: &SpectralDecomposition, l: &CMatrix) -> Result<KernelPair> {
    let k = corank_of(dec, l, ZERO_TOL)?;
    if k != 1 {
        return Err(Error::CorankNotOne { corank: k });
    }
    let ns = null_space(l, ZERO_TOL * norm_inf(l))?;
    let v = canonical_gauge(&ns.right[0]);
    let u = &ns.left[0];
    let p = inner(u, &v);
    if p.norm() < 1e-12 {
        return Err(Error::DefectiveSpectrum { defect: 1 });
    }
    let w = u / p.conj();
    let first = v[0];
    let constant = v.iter().all(|z| (z - first).norm() <= CONSTANT_VECTOR_TOL * first.norm());
    let alpha = (constant && first.norm() > 0.0).then_some(first);
    Ok(KernelPair { v, w, alpha })
}

/// Biorthogonal bases of the right and left kernels: `w_i^H v_j = δ_ij`.
#[derive(Debug, Clone)]
pub struct ZeroSpace {
    pub right: Vec<CVector>,
    pub left: Vec<CVector>,
}

impl ZeroSpace {
    pub fn dim(&self) -> usize {
        self.right.len()
    }

    /// Spectral projector `Σ v_i w_i^H` onto the kernel, independent of basis choice.
    pub fn projector(&self) -> CMatrix {
        let n = self.right.first().map_or(0, |v| v.len());
        let mut p = CMatrix::zeros(n, n);
        for (v, w) in self.right.iter().zip(&self.left) {
            p += v * w.adjoint();
        }
        p
    }
}

/// Left basis dual to `right` drawn from the span of `left_basis`.
///
/// Fails with `DefectiveSpectrum` when the two spans pair degenerately, which
/// happens exactly when the eigenvalue is not semi-simple.
pub fn dual_basis(right: &[CVector], left_basis: &[CVector]) -> Result<Vec<CVector>> {
    let k = right.len();
    if left_basis.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: left_basis.len() });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let g = CMatrix::from_fn(k, k, |i, j| inner(&left_basis[i], &right[j]));
    let g_inv = inverse(&g).ok_or(Error::DefectiveSpectrum { defect: k })?;
    // W = U (G^{-1})^H gives W^H V = G^{-1} U^H V = I
    let mix = g_inv.adjoint();
    Ok((0..k)
        .map(|j| {
            let mut w = CVector::zeros(left_basis[0].len());
            for (i, u) in left_basis.iter().enumerate() {
                w += u * mix[(i, j)];
            }
            w
        })
        .collect())
}

/// Kernel bases of `L` from the SVD, with `dim = corank(L)`.
pub fn zero_space(l: &CMatrix) -> Result<ZeroSpace> {
    let ns = null_space(l, ZERO_TOL * norm_inf(l))?;
    let right: Vec<CVector> = ns.right.iter().map(canonical_gauge).collect();
    let left = dual_basis(&right, &ns.left)?;
    Ok(ZeroSpace { right, left })
}

/// Smallest achievable max distance between two equal-size multisets.
///
/// Exhaustive over permutations up to 8 elements, greedy beyond.
pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    if n <= 8 {
        fn search(a: &[Complex64], b: &[Complex64], used: &mut [bool], depth: usize, cur: f64, best: &mut f64) {
            if cur >= *best {
                return;
            }
            if depth == a.len() {
                *best = cur;
                return;
            }
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    search(a, b, used, depth + 1, cur.max((a[depth] - b[j]).norm()), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        search(a, b, &mut vec![false; n], 0, 0.0, &mut best);
        Some(best)
    } else {
        let mut used = vec![false; n];
        let mut worst: f64 = 0.0;
        for x in a {
            let (j, d) = (0..n)
                .filter(|&j| !used[j])
                .map(|j| (j, (x - b[j]).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .expect("equal lengths");
            used[j] = true;
            worst = worst.max(d);
        }
        Some(worst)
    }
}
