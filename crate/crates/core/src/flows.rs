//! Matrix exponential and time-domain simulation of `ẋ = −Lx`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, is_finite, norm_inf, vec_norm_inf, CMatrix, CVector};

/// Padé(13) numerator coefficients.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm_one(m: &CMatrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn scaled(m: &CMatrix, f: f64) -> CMatrix {
    m * c64(f, 0.0)
}

fn square_times(mut r: CMatrix, s: u32, t: f64) -> Result<CMatrix> {
    for _ in 0..s {
        r = &r * &r;
        if !is_finite(&r) {
            return Err(Error::Overflow { t });
        }
    }
    Ok(r)
}

fn check_input(m: &CMatrix, t: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("exponential time must be finite and non-negative, got {t}")));
    }
    if !is_finite(m) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// `e^{Mt}` by Padé(13) scaling and squaring.
pub fn matrix_exponential(m: &CMatrix, t: f64) -> Result<CMatrix> {
    check_input(m, t)?;
    let n = m.nrows();
    let a = scaled(m, t);
    let norm = norm_one(&a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as u32 } else { 0 };
    let a = scaled(&a, 0.5f64.powi(s as i32));

    let id = CMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| c64(PADE13[k], 0.0);

    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let r = (&v - &u).lu().solve(&(&v + &u)).ok_or(Error::Overflow { t })?;
    if !is_finite(&r) {
        return Err(Error::Overflow { t });
    }
    square_times(r, s, t)
}

/// `e^{Mt}` by a Taylor series on a heavily scaled argument, summed until the
/// terms fall below `tol` relative to the partial sum.
///
/// Independent of [`matrix_exponential`]; used to re-check sign decisions.
pub fn matrix_exponential_taylor(m: &CMatrix, t: f64, tol: f64) -> Result<CMatrix> {
    check_input(m, t)?;
    let n = m.nrows();
    let a = scaled(m, t);
    let norm = norm_one(&a);
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let a = scaled(&a, 0.5f64.powi(s as i32));
    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=80 {
        term = &term * &a * c64(1.0 / k as f64, 0.0);
        sum += &term;
        if norm_one(&term) <= tol * norm_one(&sum) {
            break;
        }
    }
    square_times(sum, s, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ExpStep,
    #[serde(rename = "RK4")]
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    pub method: Method,
    pub consensus_error: Vec<f64>,
    /// Time of the first sample whose state exceeded the divergence bound;
    /// the trajectory stops just before it.
    pub diverged_at: Option<f64>,
}

impl Trajectory {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn final_state(&self) -> Option<&CVector> {
        self.states.last()
    }

    pub fn final_consensus_error(&self) -> Option<f64> {
        self.consensus_error.last().copied()
    }

    /// Header `t,re_x1,im_x1,...,consensus_err`, one LF-terminated row per sample.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |x| x.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",re_x{i},im_x{i}"));
        }
        out.push_str(",consensus_err\n");
        for ((t, x), e) in self.times.iter().zip(&self.states).zip(&self.consensus_error) {
            out.push_str(&t.to_string());
            for z in x.iter() {
                out.push_str(&format!(",{},{}", z.re, z.im));
            }
            out.push_str(&format!(",{e}\n"));
        }
        out
    }
}

/// Largest pairwise distance `max_{i,j} |x_i − x_j|`.
pub fn consensus_error(state: &CVector) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..state.len() {
        for j in i + 1..state.len() {
            worst = worst.max((state[i] - state[j]).norm());
        }
    }
    worst
}

pub const DIVERGENCE_FACTOR: f64 = 1e12;
/// RK4 step bound as a fraction of `1/‖L‖∞`.
const RK4_STEP_FRACTION: f64 = 0.1;

/// Samples `ẋ = −Lx` at `num_samples` evenly spaced times in `[0, t_end]`.
pub fn simulate(l: &CMatrix, x0: &CVector, t_end: f64, num_samples: usize, method: Method) -> Result<Trajectory> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: l.ncols() });
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.len() });
    }
    if num_samples == 0 {
        return Err(Error::EmptyGrid);
    }
    if num_samples < 2 || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidGrid);
    }
    let times: Vec<f64> = (0..num_samples).map(|k| t_end * k as f64 / (num_samples - 1) as f64).collect();
    let limit = DIVERGENCE_FACTOR * vec_norm_inf(x0);
    let neg_l = -l;

    let mut traj = Trajectory { times: Vec::new(), states: Vec::new(), method, consensus_error: Vec::new(), diverged_at: None };
    let push = |traj: &mut Trajectory, t: f64, x: CVector| -> bool {
        let finite = x.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite || vec_norm_inf(&x) > limit {
            traj.diverged_at = Some(t);
            return false;
        }
        traj.consensus_error.push(consensus_error(&x));
        traj.times.push(t);
        traj.states.push(x);
        true
    };

    match method {
        Method::ExpStep => {
            for &t in &times {
                let x = match matrix_exponential(&neg_l, t) {
                    Ok(e) => e * x0,
                    Err(Error::Overflow { .. }) => CVector::from_element(n, c64(f64::INFINITY, 0.0)),
                    Err(e) => return Err(e),
                };
                if !push(&mut traj, t, x) {
                    break;
                }
            }
        }
        Method::Rk4 => {
            let h = times[1] - times[0];
            let bound = norm_inf(l);
            let substeps = if bound > 0.0 { (h * bound / RK4_STEP_FRACTION).ceil().max(1.0) as usize } else { 1 };
            let dt = h / substeps as f64;
            let f = |x: &CVector| &neg_l * x;
            let mut x = x0.clone();
            push(&mut traj, times[0], x.clone());
            for &t in &times[1..] {
                for _ in 0..substeps {
                    let k1 = f(&x);
                    let k2 = f(&(&x + &k1 * c64(dt / 2.0, 0.0)));
                    let k3 = f(&(&x + &k2 * c64(dt / 2.0, 0.0)));
                    let k4 = f(&(&x + &k3 * c64(dt, 0.0)));
                    x += (k1 + k2 * c64(2.0, 0.0) + k3 * c64(2.0, 0.0) + k4) * c64(dt / 6.0, 0.0);
                }
                if !push(&mut traj, t, x.clone()) {
                    break;
                }
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::laplacian;
    use crate::linalg::{norm_fro, ones};
    use crate::spectral::eig;
    use crate::testutil::{random_cmatrix, random_digraph, rng};
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// `V e^{Λt} W^H` from the eigendecomposition.
    fn exp_by_eigen(m: &CMatrix, t: f64) -> CMatrix {
        let dec = eig(m).unwrap();
        assert!(dec.diagonalizable && dec.normalized);
        let d = CVector::from_iterator(dec.n(), dec.eigenvalues.iter().map(|z| (z * t).exp()));
        &dec.v * CMatrix::from_diagonal(&d) * dec.w.adjoint()
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        assert_eq!(matrix_exponential(&CMatrix::zeros(3, 3), 1.0).unwrap(), CMatrix::identity(3, 3));
    }

    #[test]
    fn exponential_of_scalar() {
        let m = CMatrix::from_element(1, 1, c64(0.3, 2.0));
        let e = matrix_exponential(&m, 1.5).unwrap();
        assert!((e[(0, 0)] - (c64(0.3, 2.0) * 1.5).exp()).norm() < 1e-13);
    }

    #[test]
    fn ex6_long_time_limit() {
        let e = matrix_exponential(&-fixtures::ex6_laplacian(), 4.0).unwrap();
        for i in 0..4 {
            assert!((e[(i, 0)].re - 1.0).abs() < 1e-6);
            for j in 1..4 {
                assert!(e[(i, j)].re.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn ex3_at_unit_time() {
        let e = matrix_exponential(&-fixtures::ex3_laplacian(), 1.0).unwrap();
        let expected = [c64(0.0385, 0.018), c64(0.0112, 0.007), c64(0.9503, -0.025)];
        for i in 0..3 {
            for j in 0..3 {
                assert!((e[(i, j)] - expected[j]).norm() < 1e-3);
            }
        }
    }

    #[test]
    fn random_matrix_matches_eigen_route() {
        let m = random_cmatrix(&mut rng(7), 5);
        let a = matrix_exponential(&m, 0.7).unwrap();
        let b = exp_by_eigen(&m, 0.7);
        assert!(norm_fro(&(&a - &b)) <= 1e-7 * norm_fro(&b));
    }

    #[test]
    fn taylor_route_agrees_with_pade() {
        let m = random_cmatrix(&mut rng(11), 6) * c64(4.0, 0.0);
        let a = matrix_exponential(&m, 2.0).unwrap();
        let b = matrix_exponential_taylor(&m, 2.0, 1e-18).unwrap();
        assert!(norm_fro(&(&a - &b)) <= 1e-10 * norm_fro(&b));
    }

    #[test]
    fn overflow_is_reported() {
        let m = CMatrix::from_element(1, 1, c64(1.0, 0.0));
        assert_eq!(matrix_exponential(&m, 1e4), Err(Error::Overflow { t: 1e4 }));
    }

    #[test]
    fn consensus_error_examples() {
        let x = ones(3) * c64(2.0, -1.0);
        assert_eq!(consensus_error(&x), 0.0);
        let y = CVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 1.0)]);
        assert_eq!(consensus_error(&y), 1.0);
    }

    #[test]
    fn ex3_error_decays_at_the_gap_rate() {
        let l = fixtures::ex3_laplacian();
        let gap = 31.36;
        let x0 = CVector::from_vec(vec![c64(1.0, 0.0), c64(-2.0, 1.0), c64(0.5, 3.0)]);
        let t = 10.0 / gap;
        let traj = simulate(&l, &x0, t, 11, Method::ExpStep).unwrap();
        let modal = consensus_error(&(exp_by_eigen(&-&l, t) * &x0));
        let err = traj.final_consensus_error().unwrap();
        assert!((err - modal).abs() <= 1e-9 * vec_norm_inf(&x0));
        // e^{-10} decay leaves ~1e-4 of the initial disagreement
        assert!(err <= 1e-4 * vec_norm_inf(&x0));
        let later = simulate(&l, &x0, 16.0 / gap, 3, Method::ExpStep).unwrap();
        assert!(later.final_consensus_error().unwrap() <= 1e-6 * vec_norm_inf(&x0));
    }

    #[test]
    fn ex8_flow_diverges() {
        let l = fixtures::ex8_laplacian();
        let x0 = CVector::from_vec(vec![c64(1.0, 0.2), c64(-0.4, 1.0), c64(0.3, -0.7)]);
        for method in [Method::ExpStep, Method::Rk4] {
            let traj = simulate(&l, &x0, 0.1, 101, method).unwrap();
            assert!(traj.diverged());
            assert!(traj.states.iter().all(|x| vec_norm_inf(x) <= 1e12 * vec_norm_inf(&x0)));
        }
    }

    #[test]
    fn zero_laplacian_keeps_state() {
        let x0 = CVector::from_vec(vec![c64(1.0, 2.0), c64(3.0, 0.0)]);
        let traj = simulate(&CMatrix::zeros(2, 2), &x0, 5.0, 4, Method::Rk4).unwrap();
        assert!(traj.states.iter().all(|x| x == &x0));
        assert_eq!(traj.times, vec![0.0, 5.0 / 3.0, 10.0 / 3.0, 5.0]);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let l = fixtures::ex3_laplacian();
        assert_eq!(simulate(&l, &ones(3), 1.0, 0, Method::ExpStep), Err(Error::EmptyGrid));
        assert_eq!(simulate(&l, &ones(3), 1.0, 1, Method::ExpStep), Err(Error::InvalidGrid));
        assert_eq!(simulate(&l, &ones(3), -1.0, 5, Method::ExpStep), Err(Error::InvalidGrid));
        assert!(matches!(simulate(&l, &ones(2), 1.0, 5, Method::ExpStep), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn csv_layout() {
        let traj = simulate(&CMatrix::zeros(2, 2), &ones(2), 1.0, 2, Method::ExpStep).unwrap();
        assert_eq!(traj.to_csv(), "t,re_x1,im_x1,re_x2,im_x2,consensus_err\n0,1,0,1,0,0\n1,1,0,1,0,0\n");
    }

    fn stable_random_laplacian(seed: u64, n: usize) -> Option<CMatrix> {
        let l = laplacian(&random_digraph(&mut rng(seed), n, 0.5)).matrix;
        let dec = eig(&l).ok()?;
        let tol = dec.zero_threshold(1e-9);
        dec.eigenvalues.iter().all(|z| z.norm() <= tol || z.re > 1e-6).then_some(l)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn rows_of_flow_sum_to_one(seed in any::<u64>(), n in 1usize..=8, t in 0.0f64..3.0) {
            let l = laplacian(&random_digraph(&mut rng(seed), n, 0.5)).matrix;
            let e = matrix_exponential(&-&l, t);
            // unstable instances may legitimately overflow
            prop_assume!(e.is_ok());
            let e = e.unwrap();
            let scale = norm_inf(&e).max(1.0);
            prop_assert!(vec_norm_inf(&(&e * ones(n) - ones(n))) <= 1e-9 * scale);
        }

        #[test]
        fn constant_state_is_fixed(seed in any::<u64>(), n in 1usize..=6) {
            let l = laplacian(&random_digraph(&mut rng(seed), n, 0.5)).matrix;
            let traj = simulate(&l, &ones(n), 1.0, 5, Method::ExpStep).unwrap();
            for x in &traj.states {
                prop_assert!(vec_norm_inf(&(x - ones(n))) <= 1e-8 * norm_inf(&l).max(1.0));
            }
        }

        #[test]
        fn exp_step_and_rk4_agree(seed in any::<u64>(), n in 2usize..=6) {
            let l = stable_random_laplacian(seed, n);
            prop_assume!(l.is_some());
            let l = l.unwrap();
            let mut r = rng(seed ^ 0x5a5a);
            let x0 = random_cmatrix(&mut r, n).column(0).into_owned();
            let a = simulate(&l, &x0, 5.0, 26, Method::ExpStep).unwrap();
            let b = simulate(&l, &x0, 5.0, 26, Method::Rk4).unwrap();
            for (x, y) in a.states.iter().zip(&b.states) {
                prop_assert!(vec_norm_inf(&(x - y)) <= 1e-5 * vec_norm_inf(&x0));
            }
        }

        #[test]
        fn semigroup_property(seed in any::<u64>(), n in 1usize..=6, s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let l = stable_random_laplacian(seed, n);
            prop_assume!(l.is_some());
            let m = -l.unwrap();
            let lhs = matrix_exponential(&m, s + t).unwrap();
            let rhs = matrix_exponential(&m, s).unwrap() * matrix_exponential(&m, t).unwrap();
            prop_assert!(norm_fro(&(&lhs - &rhs)) <= 1e-8 * norm_fro(&lhs).max(1.0));
        }

        #[test]
        fn pade_matches_eigen_route(seed in any::<u64>(), n in 1usize..=6, t in 0.0f64..2.0) {
            let m = random_cmatrix(&mut rng(seed), n);
            let a = matrix_exponential(&m, t).unwrap();
            let b = exp_by_eigen(&m, t);
            prop_assert!(norm_fro(&(&a - &b)) <= 1e-7 * norm_fro(&b).max(1.0));
        }
    }

    #[test]
    fn taylor_handles_large_arguments() {
        let m = CMatrix::from_element(1, 1, c64(-30.0, 5.0));
        let e = matrix_exponential_taylor(&m, 1.0, 1e-18).unwrap();
        let exact: Complex64 = c64(-30.0, 5.0).exp();
        assert!((e[(0, 0)] - exact).norm() <= 1e-9 * exact.norm());
    }
}
