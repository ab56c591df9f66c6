use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate edge {src} -> {dst}")]
    DuplicateEdge { src: usize, dst: usize },
    #[error("self-loop on node {node}")]
    SelfLoop { node: usize },
    #[error("edge {src} -> {dst} has phase {phase_deg:.3} deg, outside (-90, 90)")]
    PhaseOutOfRange { src: usize, dst: usize, phase_deg: f64 },
    #[error("node index {index} out of bounds for {n} nodes")]
    IndexOutOfBounds { index: usize, n: usize },
    #[error("edge {src} -> {dst} has a zero or non-finite weight")]
    InvalidWeight { src: usize, dst: usize },
    #[error("graph must have at least {min} node(s), got {n}")]
    TooFewNodes { n: usize, min: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    ConvergenceFailure { iterations: usize },
    #[error("rank is ambiguous: {eigen_count} near-zero eigenvalues vs {factor_count} near-zero singular values")]
    RankAmbiguous { eigen_count: usize, factor_count: usize },
    #[error("shift d = {d} must exceed the spectral radius {spectral_radius}")]
    DTooSmall { d: f64, spectral_radius: f64 },
    #[error("expected corank 1, found {corank}")]
    CorankNotOne { corank: usize },
    #[error("vector is not an eigenvector (relative residual {residual:.3e})")]
    NotAnEigenvector { residual: f64 },
    #[error("spectrum is defective (Jordan defect {defect})")]
    DefectiveSpectrum { defect: usize },
    #[error("matrix exponential overflowed at t = {t}")]
    Overflow { t: f64 },
    #[error("time grid is empty")]
    EmptyGrid,
    #[error("time grid must be positive and ascending")]
    InvalidGrid,
    #[error("flow diverges; no steady state exists")]
    DivergentFlow,
    #[error("reduced spectrum entry {index} is zero")]
    ZeroEigenvalueInJReduced { index: usize },
    #[error("stabilization targets must be distinct")]
    DuplicateTargets,
    #[error("stabilization target {value} is not a positive finite real")]
    InvalidTarget { value: f64 },
    #[error("graph has no globally reachable node")]
    NoGloballyReachableNode,
    #[error("node {node} has zero out-degree")]
    ZeroDegreeNode { node: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable identifier used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DuplicateEdge { .. } => "DuplicateEdge",
            Error::SelfLoop { .. } => "SelfLoop",
            Error::PhaseOutOfRange { .. } => "PhaseOutOfRange",
            Error::IndexOutOfBounds { .. } => "IndexOutOfBounds",
            Error::InvalidWeight { .. } => "InvalidWeight",
            Error::TooFewNodes { .. } => "TooFewNodes",
            Error::NotSquare { .. } => "NotSquare",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::RankAmbiguous { .. } => "RankAmbiguous",
            Error::DTooSmall { .. } => "DTooSmall",
            Error::CorankNotOne { .. } => "CorankNotOne",
            Error::NotAnEigenvector { .. } => "NotAnEigenvector",
            Error::DefectiveSpectrum { .. } => "DefectiveSpectrum",
            Error::Overflow { .. } => "Overflow",
            Error::EmptyGrid => "EmptyGrid",
            Error::InvalidGrid => "InvalidGrid",
            Error::DivergentFlow => "DivergentFlow",
            Error::ZeroEigenvalueInJReduced { .. } => "ZeroEigenvalueInJReduced",
            Error::DuplicateTargets => "DuplicateTargets",
            Error::InvalidTarget { .. } => "InvalidTarget",
            Error::NoGloballyReachableNode => "NoGloballyReachableNode",
            Error::ZeroDegreeNode { .. } => "ZeroDegreeNode",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// True for errors caused by malformed input rather than by the analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DuplicateEdge { .. }
                | Error::SelfLoop { .. }
                | Error::PhaseOutOfRange { .. }
                | Error::IndexOutOfBounds { .. }
                | Error::InvalidWeight { .. }
                | Error::TooFewNodes { .. }
                | Error::NotSquare { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidTarget { .. }
                | Error::DuplicateTargets
                | Error::InvalidGrid
                | Error::EmptyGrid
                | Error::InvalidInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
