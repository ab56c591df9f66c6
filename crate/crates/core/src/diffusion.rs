//! Diffusion, the adjoint process of consensus: `ṗᵀ = −pᵀ𝓛` with the
//! random-walk Laplacian `𝓛 = I − D⁻¹A`, and the influence vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ComplexDigraph;
use crate::linalg::{c64, norm_inf, ones, vec_norm_inf, CMatrix};
use crate::serial::{self, CValue};
use crate::spectral::{eig, kernel_pair_of};

const BALANCE_TOL: f64 = 1e-9;
const REAL_TOL: f64 = 1e-9;
const ZERO_DEGREE_TOL: f64 = 1e-12;

/// In-degree equals out-degree at every node, as complex numbers.
pub fn is_weight_balanced(g: &ComplexDigraph) -> bool {
    let a = g.adjacency();
    let n = g.n();
    let out = a * ones(n);
    let inc = a.transpose() * ones(n);
    vec_norm_inf(&(out - inc)) <= BALANCE_TOL * norm_inf(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkLaplacian {
    /// Row-major.
    pub matrix: Vec<CValue>,
    pub real_valued: bool,
    pub max_imag: f64,
}

impl RandomWalkLaplacian {
    pub fn to_matrix(&self) -> CMatrix {
        serial::from_row_major(&self.matrix).expect("square")
    }
}

/// `𝓛 = I − D⁻¹A` with `D` the out-degrees. Whether `𝓛` is real is measured,
/// not assumed.
pub fn random_walk_laplacian(g: &ComplexDigraph) -> Result<RandomWalkLaplacian> {
    let a = g.adjacency();
    let n = g.n();
    let degrees = a * ones(n);
    let floor = ZERO_DEGREE_TOL * norm_inf(a);
    if let Some(node) = degrees.iter().position(|d| d.norm() <= floor) {
        return Err(Error::ZeroDegreeNode { node });
    }
    let m = CMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
        delta - a[(i, j)] / degrees[i]
    });
    let max_imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(RandomWalkLaplacian {
        matrix: serial::row_major(&m),
        real_valued: max_imag <= REAL_TOL,
        max_imag,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceVector {
    pub values: Vec<f64>,
    /// Largest `|Im 𝓘_i|`.
    pub imag_residual: f64,
    /// Set when the matrix is neither balanced (zero column sums) nor Hermitian,
    /// so the probabilistic reading does not apply.
    pub advisory: bool,
    /// Index of the largest value, lowest index on ties.
    pub most_influential: usize,
}

/// `𝓘 = (𝟙ᵀv/n)·w^H` for the kernel pair of `m` (`v` unit, `w^H v = 1`).
///
/// `m` is a Laplacian or a random-walk Laplacian of corank 1.
pub fn influence_vector(m: &CMatrix) -> Result<InfluenceVector> {
    let n = m.nrows();
    let kp = kernel_pair_of(&eig(m)?, m)?;
    let scale = kp.v.sum() / c64(n as f64, 0.0);
    let raw: Vec<_> = kp.w.iter().map(|z| scale * z.conj()).collect();
    let values: Vec<f64> = raw.iter().map(|z| z.re).collect();
    let imag_residual = raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max);

    let tol = BALANCE_TOL * norm_inf(m).max(f64::MIN_POSITIVE);
    let balanced = vec_norm_inf(&(m.transpose() * ones(n))) <= tol;
    let hermitian = norm_inf(&(m - m.adjoint())) <= tol;

    let mut most_influential = 0;
    for (i, &x) in values.iter().enumerate() {
        if x > values[most_influential] {
            most_influential = i;
        }
    }
    Ok(InfluenceVector { values, imag_residual, advisory: !(balanced || hermitian), most_influential })
}
