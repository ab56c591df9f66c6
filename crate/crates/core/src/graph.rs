//! Complex-weighted digraphs, their Laplacians, and structural connectivity.
//!
//! Connectivity is always judged on the support digraph (edge present iff the
//! weight is nonzero). Walk sums are kept separate because complex weights can
//! cancel along walks, so a zero entry in a walk sum proves nothing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, norm_inf, ones, vec_norm_inf, CMatrix};

/// Edge weight `r ∠ β` stored in rectangular form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexWeight {
    pub re: f64,
    pub im: f64,
}

impl ComplexWeight {
    pub fn new(re: f64, im: f64) -> Self {
        ComplexWeight { re, im }
    }

    pub fn from_polar_deg(r: f64, beta_deg: f64) -> Self {
        let beta = beta_deg.to_radians();
        ComplexWeight { re: r * beta.cos(), im: r * beta.sin() }
    }

    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn phase_deg(&self) -> f64 {
        self.im.atan2(self.re).to_degrees()
    }

    pub fn to_complex(self) -> Complex64 {
        c64(self.re, self.im)
    }

    /// Edge weights must have phase strictly inside (-90°, 90°). The real part
    /// must clear `1e-12·r` so that `r ∠ 90°` (whose cosine rounds to ~6e-17)
    /// is rejected.
    fn is_admissible_phase(&self) -> bool {
        self.re > 1e-12 * self.magnitude()
    }
}

impl From<Complex64> for ComplexWeight {
    fn from(z: Complex64) -> Self {
        ComplexWeight { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: ComplexWeight,
}

impl Edge {
    pub fn new(src: usize, dst: usize, weight: ComplexWeight) -> Self {
        Edge { src, dst, weight }
    }
}

/// Node set plus complex adjacency matrix; `A[i][j]` is the weight of `i -> j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDigraph {
    adjacency: CMatrix,
    labels: Option<Vec<String>>,
}

impl ComplexDigraph {
    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &CMatrix {
        &self.adjacency
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let a = self.adjacency[(i, j)];
                if a.norm() > 0.0 {
                    out.push(Edge::new(i, j, a.into()));
                }
            }
        }
        out
    }

    /// Recovers the digraph from a Laplacian: `a_ij = -L_ij` off the diagonal.
    /// Off-diagonal entries with magnitude at most `1e-12·‖L‖∞` are dropped.
    pub fn from_laplacian(l: &CMatrix) -> Result<Self> {
        if l.nrows() != l.ncols() {
            return Err(Error::NotSquare { rows: l.nrows(), cols: l.ncols() });
        }
        let n = l.nrows();
        let cutoff = 1e-12 * norm_inf(l);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && l[(i, j)].norm() > cutoff {
                    edges.push(Edge::new(i, j, (-l[(i, j)]).into()));
                }
            }
        }
        build_digraph(&edges, n)
    }
}

/// Builds a digraph from an edge list, enforcing the edge-level invariants.
pub fn build_digraph(edges: &[Edge], n: usize) -> Result<ComplexDigraph> {
    if n == 0 {
        return Err(Error::TooFewNodes { n, min: 1 });
    }
    let mut adjacency = CMatrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    for e in edges {
        for index in [e.src, e.dst] {
            if index >= n {
                return Err(Error::IndexOutOfBounds { index, n });
            }
        }
        if e.src == e.dst {
            return Err(Error::SelfLoop { node: e.src });
        }
        let w = e.weight;
        if !(w.re.is_finite() && w.im.is_finite()) || w.magnitude() == 0.0 {
            return Err(Error::InvalidWeight { src: e.src, dst: e.dst });
        }
        if !w.is_admissible_phase() {
            return Err(Error::PhaseOutOfRange { src: e.src, dst: e.dst, phase_deg: w.phase_deg() });
        }
        let slot = e.src * n + e.dst;
        if seen[slot] {
            return Err(Error::DuplicateEdge { src: e.src, dst: e.dst });
        }
        seen[slot] = true;
        adjacency[(e.src, e.dst)] = w.to_complex();
    }
    Ok(ComplexDigraph { adjacency, labels: None })
}

/// `L = D_out − A` with complex out-degrees `D_out = diag(A𝟙)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub matrix: CMatrix,
    pub out_degree: Vec<Complex64>,
}

impl Laplacian {
    pub fn in_degree(g: &ComplexDigraph) -> Vec<Complex64> {
        let a = g.adjacency();
        (0..g.n()).map(|j| a.column(j).sum()).collect()
    }

    /// `‖L𝟙‖∞`, which vanishes up to rounding.
    pub fn row_sum_residual(&self) -> f64 {
        vec_norm_inf(&(&self.matrix * ones(self.matrix.nrows())))
    }
}

pub fn laplacian(g: &ComplexDigraph) -> Laplacian {
    let a = g.adjacency();
    let n = g.n();
    let out_degree: Vec<Complex64> = (0..n).map(|i| a.row(i).sum()).collect();
    let mut matrix = -a.clone();
    for i in 0..n {
        matrix[(i, i)] = out_degree[i];
    }
    Laplacian { matrix, out_degree }
}

/// Out-neighbour lists of the support digraph (diagonal ignored).
pub fn support_lists(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && m[(i, j)].norm() > 0.0).collect())
        .collect()
}

/// Tarjan's algorithm, iterative. Components come out in reverse topological
/// order of the condensation (sinks first).
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (node, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Components of the condensation with no edge leaving them.
pub fn terminal_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = strongly_connected_components(adj);
    let mut owner = vec![0usize; adj.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            owner[v] = c;
        }
    }
    let mut terminal: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(c, comp)| comp.iter().all(|&v| adj[v].iter().all(|&w| owner[w] == *c)))
        .map(|(_, comp)| comp.clone())
        .collect();
    terminal.sort();
    terminal
}

/// `reach[i][j]` is true iff a directed path of length ≥ 0 leads from `i` to `j`.
pub fn reachability(adj: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut reach = vec![vec![false; n]; n];
    for (s, row) in reach.iter_mut().enumerate() {
        let mut stack = vec![s];
        row[s] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !row[w] {
                    row[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    reach
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub strongly_connected: bool,
    pub weakly_connected: bool,
    pub sinks: Vec<usize>,
    pub sources: Vec<usize>,
    pub globally_reachable: Vec<usize>,
    pub scc_count: usize,
}

impl ConnectivityReport {
    pub fn sink_count(&self) -> usize {
        self.sinks.len()
    }
}

pub fn structural_connectivity(g: &ComplexDigraph) -> ConnectivityReport {
    let adj = support_lists(g.adjacency());
    let n = adj.len();
    let comps = strongly_connected_components(&adj);
    let terminal = terminal_components(&adj);
    let globally_reachable = if terminal.len() == 1 { terminal[0].clone() } else { Vec::new() };

    let mut in_deg = vec![0usize; n];
    for targets in &adj {
        for &w in targets {
            in_deg[w] += 1;
        }
    }
    let sinks = (0..n).filter(|&i| adj[i].is_empty()).collect();
    let sources = (0..n).filter(|&i| in_deg[i] == 0).collect();

    // undirected reachability from node 0
    let mut undirected = vec![Vec::new(); n];
    for (i, targets) in adj.iter().enumerate() {
        for &j in targets {
            undirected[i].push(j);
            undirected[j].push(i);
        }
    }
    let weakly_connected = reachability(&undirected)[0].iter().all(|&r| r);

    ConnectivityReport {
        strongly_connected: comps.len() == 1,
        weakly_connected,
        sinks,
        sources,
        globally_reachable,
        scc_count: comps.len(),
    }
}

/// `S = Σ_{k=0}^{n−1} A^k` with the sufficient-only connectivity flags it supports.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSum {
    pub matrix: CMatrix,
    /// Every entry nonzero: sufficient for strong connectivity.
    pub all_nonzero: bool,
    /// Column `j` entirely nonzero: sufficient for node `j` to be globally reachable.
    pub column_all_nonzero: Vec<bool>,
    pub threshold: f64,
}

pub const DEFAULT_WALK_ZERO_TOL: f64 = 1e-9;

pub fn walk_sum(g: &ComplexDigraph) -> Result<WalkSum> {
    walk_sum_with_tol(g, DEFAULT_WALK_ZERO_TOL)
}

/// Entries with `|s_ij| ≤ rel_tol·‖S‖∞` count as zero.
pub fn walk_sum_with_tol(g: &ComplexDigraph, rel_tol: f64) -> Result<WalkSum> {
    let n = g.n();
    if n < 2 {
        return Err(Error::TooFewNodes { n, min: 2 });
    }
    let a = g.adjacency();
    let mut power = CMatrix::identity(n, n);
    let mut sum = power.clone();
    for _ in 1..n {
        power = &power * a;
        sum += &power;
    }
    let threshold = rel_tol * norm_inf(&sum);
    let nonzero = |z: Complex64| z.norm() > threshold;
    let column_all_nonzero: Vec<bool> = (0..n).map(|j| sum.column(j).iter().all(|&z| nonzero(z))).collect();
    let all_nonzero = column_all_nonzero.iter().all(|&b| b);
    Ok(WalkSum { matrix: sum, all_nonzero, column_all_nonzero, threshold })
}

/// Zero-pattern irreducibility: true iff the off-diagonal support is strongly connected.
pub fn is_irreducible(m: &CMatrix) -> Result<bool> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() < 2 {
        return Err(Error::TooFewNodes { n: m.nrows(), min: 2 });
    }
    Ok(strongly_connected_components(&support_lists(m)).len() == 1)
}

/// Edge weight in the graph file, rectangular or polar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeSpec {
    Rect { src: usize, dst: usize, re: f64, im: f64 },
    Polar { src: usize, dst: usize, r: f64, beta_deg: f64 },
}

impl EdgeSpec {
    pub fn to_edge(&self) -> Edge {
        match *self {
            EdgeSpec::Rect { src, dst, re, im } => Edge::new(src, dst, ComplexWeight::new(re, im)),
            EdgeSpec::Polar { src, dst, r, beta_deg } => {
                Edge::new(src, dst, ComplexWeight::from_polar_deg(r, beta_deg))
            }
        }
    }
}

/// Canonical graph JSON: `{"n", "edges": [...], "labels"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GraphFile {
    pub fn into_digraph(self) -> Result<ComplexDigraph> {
        let edges: Vec<Edge> = self.edges.iter().map(EdgeSpec::to_edge).collect();
        let g = build_digraph(&edges, self.n)?;
        match self.labels {
            Some(labels) => g.with_labels(labels),
            None => Ok(g),
        }
    }
}

impl From<&ComplexDigraph> for GraphFile {
    fn from(g: &ComplexDigraph) -> Self {
        GraphFile {
            n: g.n(),
            edges: g
                .edges()
                .into_iter()
                .map(|e| EdgeSpec::Rect { src: e.src, dst: e.dst, re: e.weight.re, im: e.weight.im })
                .collect(),
            labels: g.labels.clone(),
        }
    }
}
