//! JSON reports written by each subcommand. Every report deserializes back
//! into its own type, which the integration tests use as the schema check.

use clx_core::certify::{Certificate, ConsensusVerdict};
use clx_core::design::{ModifiedFlowDesign, PipelineSummary};
use clx_core::diffusion::{InfluenceVector, RandomWalkLaplacian};
use clx_core::dominance::DominanceReport;
use clx_core::flows::Method;
use clx_core::graph::ConnectivityReport;
use clx_core::serial::CValue;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub v: Vec<CValue>,
    pub w: Vec<CValue>,
    pub alpha: Option<CValue>,
    pub v_dominance: DominanceReport,
    pub w_dominance: DominanceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSumReport {
    pub all_nonzero: bool,
    pub column_all_nonzero: Vec<bool>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub n: usize,
    pub labels: Option<Vec<String>>,
    pub connectivity: ConnectivityReport,
    pub weight_balanced: bool,
    pub laplacian: Vec<CValue>,
    pub spectrum: Vec<CValue>,
    pub diagonalizable: bool,
    pub corank: Option<usize>,
    /// Set when the corank could not be decided.
    pub corank_error: Option<String>,
    /// Largest real part in the spectrum of `−L`.
    pub spectral_abscissa: f64,
    pub kernel: Option<KernelReport>,
    pub walk_sum: Option<WalkSumReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    #[serde(rename = "rEEP")]
    pub reep: Certificate,
    #[serde(rename = "rEENN")]
    pub reenn: Certificate,
    pub consensus: ConsensusVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub seed: u64,
    pub x0: Vec<CValue>,
    pub t_end: f64,
    pub samples: usize,
    pub method: Method,
    pub final_state: Vec<CValue>,
    pub final_consensus_error: Option<f64>,
    pub diverged_at: Option<f64>,
    /// `lim x(t)` when the flow converges.
    pub predicted_steady_state: Option<Vec<CValue>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub reduced_spectrum: Vec<CValue>,
    pub design: ModifiedFlowDesign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffuseReport {
    pub weight_balanced: bool,
    pub random_walk: Option<RandomWalkLaplacian>,
    pub random_walk_error: Option<String>,
    pub influence: InfluenceVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub x0: Vec<CValue>,
    #[serde(flatten)]
    pub summary: PipelineSummary,
}
