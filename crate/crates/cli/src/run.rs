//! Subcommand dispatch.

use std::path::Path;

use clx_core::certify::{certify_reenn, certify_reep, consensus_verdict, predict_steady_state};
use clx_core::design::{consensus_pipeline, design_modified_flow, reduced_spectrum, PipelineOptions};
use clx_core::diffusion::{influence_vector, is_weight_balanced, random_walk_laplacian};
use clx_core::dominance::real_dominance;
use clx_core::flows::simulate;
use clx_core::graph::{laplacian, structural_connectivity, walk_sum_with_tol, ComplexDigraph, DEFAULT_WALK_ZERO_TOL};
use clx_core::linalg::{inner, CMatrix, CVector};
use clx_core::serial;
use clx_core::spectral::{corank_of, eig, kernel_pair, kernel_pair_of, ZERO_TOL};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::args::{Command, CommonArgs, SimArgs};
use crate::ingest::read_graph;
use crate::reports::*;
use crate::CliError;

const MAX_REDRAWS: usize = 100;
const DEGENERATE_START_TOL: f64 = 1e-6;

/// Output of one subcommand: the JSON report plus any CSV side files.
pub struct Output {
    pub name: &'static str,
    pub json: String,
    pub csv: Option<String>,
}

pub fn run(command: &Command) -> Result<Output, CliError> {
    let (common, output) = match command {
        Command::Analyze(c) => (c, analyze(c)?),
        Command::Certify(c) => (c, certify(c)?),
        Command::Simulate { common, sim } => (common, simulate_cmd(common, sim)?),
        Command::Design { common, targets } => (common, design(common, targets.targets.as_deref())?),
        Command::Diffuse(c) => (c, diffuse(c)?),
        Command::Pipeline { common, sim, targets } => (common, pipeline(common, sim, targets.targets.clone())?),
    };
    if let Some(dir) = &common.out {
        write_outputs(dir, &output)?;
    }
    Ok(output)
}

fn write_outputs(dir: &Path, output: &Output) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let json_path = dir.join(format!("{}.json", output.name));
    std::fs::write(&json_path, &output.json).map_err(io(&json_path))?;
    if let Some(csv) = &output.csv {
        let csv_path = dir.join("trajectory.csv");
        std::fs::write(&csv_path, csv).map_err(io(&csv_path))?;
    }
    log::info!("wrote reports to {}", dir.display());
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn load(common: &CommonArgs) -> Result<(ComplexDigraph, CMatrix), CliError> {
    let g = read_graph(&common.input, common.format)?;
    let l = laplacian(&g).matrix;
    log::debug!("loaded {} nodes from {}", g.n(), common.input.display());
    Ok((g, l))
}

fn analyze(common: &CommonArgs) -> Result<Output, CliError> {
    let (g, l) = load(common)?;
    let tol = common.tol_zero.unwrap_or(ZERO_TOL);
    let dec = eig(&l)?;
    let (corank, corank_error) = match corank_of(&dec, &l, tol) {
        Ok(k) => (Some(k), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let kernel = if corank == Some(1) {
        let kp = kernel_pair_of(&dec, &l)?;
        Some(KernelReport {
            v: serial::vector(&kp.v),
            w: serial::vector(&kp.w),
            alpha: kp.alpha.map(Into::into),
            v_dominance: real_dominance(&kp.v, false),
            w_dominance: real_dominance(&kp.w, false),
        })
    } else {
        None
    };
    let walk_sum = if g.n() >= 2 {
        let ws = walk_sum_with_tol(&g, common.tol_zero.unwrap_or(DEFAULT_WALK_ZERO_TOL))?;
        Some(WalkSumReport {
            all_nonzero: ws.all_nonzero,
            column_all_nonzero: ws.column_all_nonzero,
            threshold: ws.threshold,
        })
    } else {
        None
    };
    let report = AnalyzeReport {
        n: g.n(),
        labels: g.labels().map(<[String]>::to_vec),
        connectivity: structural_connectivity(&g),
        weight_balanced: is_weight_balanced(&g),
        laplacian: serial::row_major(&l),
        spectrum: serial::values(&dec.eigenvalues),
        diagonalizable: dec.diagonalizable,
        corank,
        corank_error,
        spectral_abscissa: dec.eigenvalues.iter().map(|z| -z.re).fold(f64::NEG_INFINITY, f64::max),
        kernel,
        walk_sum,
    };
    Ok(Output { name: "analyze", json: to_json(&report), csv: None })
}

fn certify(common: &CommonArgs) -> Result<Output, CliError> {
    let (_, l) = load(common)?;
    let report = CertifyReport { reep: certify_reep(&l)?, reenn: certify_reenn(&l)?, consensus: consensus_verdict(&l)? };
    Ok(Output { name: "certify", json: to_json(&report), csv: None })
}

/// Complex Gaussian start, redrawn while it is nearly orthogonal to the left
/// kernel vector (which would make the consensus value degenerate).
pub fn draw_initial_state(l: &CMatrix, seed: u64) -> CVector {
    let n = l.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = kernel_pair(l).ok().map(|kp| kp.w);
    let mut x0 = CVector::zeros(n);
    for _ in 0..MAX_REDRAWS {
        x0 = CVector::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        match &w {
            Some(w) if inner(w, &x0).norm() < DEGENERATE_START_TOL * w.norm() * x0.norm() => continue,
            _ => break,
        }
    }
    x0
}

fn default_t_end(l: &CMatrix) -> Result<f64, CliError> {
    let dec = eig(l)?;
    let gap = dec
        .nonzero_indices(ZERO_TOL)
        .iter()
        .map(|&i| dec.eigenvalues[i].re)
        .fold(f64::INFINITY, f64::min);
    Ok(if gap.is_finite() && gap > 0.0 { 20.0 / gap } else { 1.0 })
}

fn simulate_cmd(common: &CommonArgs, sim: &SimArgs) -> Result<Output, CliError> {
    let (_, l) = load(common)?;
    let x0 = draw_initial_state(&l, common.seed);
    let t_end = match sim.t_end {
        Some(t) => t,
        None => default_t_end(&l)?,
    };
    let traj = simulate(&l, &x0, t_end, sim.samples, sim.method.into())?;
    let report = SimulateReport {
        seed: common.seed,
        x0: serial::vector(&x0),
        t_end,
        samples: sim.samples,
        method: sim.method.into(),
        final_state: traj.final_state().map(serial::vector).unwrap_or_default(),
        final_consensus_error: traj.final_consensus_error(),
        diverged_at: traj.diverged_at,
        predicted_steady_state: predict_steady_state(&l, &x0).ok().map(|x| serial::vector(&x)),
    };
    Ok(Output { name: "simulate", json: to_json(&report), csv: Some(traj.to_csv()) })
}

fn design(common: &CommonArgs, targets: Option<&[f64]>) -> Result<Output, CliError> {
    let (_, l) = load(common)?;
    let report = DesignReport {
        reduced_spectrum: serial::values(&reduced_spectrum(&l)?),
        design: design_modified_flow(&l, targets)?,
    };
    Ok(Output { name: "design", json: to_json(&report), csv: None })
}

fn diffuse(common: &CommonArgs) -> Result<Output, CliError> {
    let (g, l) = load(common)?;
    let (random_walk, random_walk_error) = match random_walk_laplacian(&g) {
        Ok(rw) => (Some(rw), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = DiffuseReport { weight_balanced: is_weight_balanced(&g), random_walk, random_walk_error, influence: influence_vector(&l)? };
    Ok(Output { name: "diffuse", json: to_json(&report), csv: None })
}

fn pipeline(common: &CommonArgs, sim: &SimArgs, targets: Option<Vec<f64>>) -> Result<Output, CliError> {
    let (g, l) = load(common)?;
    let x0 = draw_initial_state(&l, common.seed);
    let options = PipelineOptions { t_end: sim.t_end, samples: sim.samples, method: sim.method.into(), targets };
    let result = consensus_pipeline(&g, &x0, &options)?;
    let csv = result.trajectory.to_csv();
    let report = PipelineReport { seed: common.seed, x0: serial::vector(&x0), summary: result.summary() };
    Ok(Output { name: "pipeline", json: to_json(&report), csv: Some(csv) })
}
