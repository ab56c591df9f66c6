//! JSON-facing value types. Complex numbers are written as `{"re", "im"}`
//! objects and matrices as row-major lists of them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for CValue {
    fn from(z: Complex64) -> Self {
        CValue { re: z.re, im: z.im }
    }
}

impl From<CValue> for Complex64 {
    fn from(v: CValue) -> Self {
        Complex64::new(v.re, v.im)
    }
}

pub fn values(zs: &[Complex64]) -> Vec<CValue> {
    zs.iter().copied().map(CValue::from).collect()
}

pub fn vector(v: &CVector) -> Vec<CValue> {
    v.iter().copied().map(CValue::from).collect()
}

pub fn row_major(m: &CMatrix) -> Vec<CValue> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].into());
        }
    }
    out
}

/// Inverse of [`row_major`] for a square matrix.
pub fn from_row_major(values: &[CValue]) -> Option<CMatrix> {
    let n = (values.len() as f64).sqrt().round() as usize;
    if n * n != values.len() {
        return None;
    }
    Some(CMatrix::from_fn(n, n, |i, j| values[i * n + j].into()))
}
