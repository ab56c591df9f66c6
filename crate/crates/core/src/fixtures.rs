//! Worked example graphs used by tests, the CLI fixture corpus, and docs.
//!
//! Node numbering here is 0-based; prose elsewhere may count from 1.

use crate::graph::{build_digraph, laplacian, ComplexDigraph, ComplexWeight, Edge};
use crate::linalg::{cmatrix, CMatrix};

fn from_laplacian(l: CMatrix) -> ComplexDigraph {
    ComplexDigraph::from_laplacian(&l).expect("fixture Laplacian is valid")
}

/// Three-node cycle whose flow has an unstable mode.
pub fn ex1_laplacian() -> CMatrix {
    cmatrix(
        3,
        &[
            (250.0, 960.0), (0.0, 0.0), (-250.0, -960.0),
            (-173.0, -984.0), (173.0, 984.0), (0.0, 0.0),
            (0.0, 0.0), (-87.2, -996.0), (87.2, 996.0),
        ],
    )
}

pub fn ex1_graph() -> ComplexDigraph {
    from_laplacian(ex1_laplacian())
}

/// Walk-sum cancellation example: node 2 is a sink reached from both others.
pub fn ex2_graph() -> ComplexDigraph {
    build_digraph(
        &[
            Edge::new(0, 2, ComplexWeight::new(1.0, 1.0)),
            Edge::new(1, 0, ComplexWeight::new(1.0, 2.0)),
            Edge::new(1, 2, ComplexWeight::new(1.0, -3.0)),
        ],
        3,
    )
    .expect("fixture edges are valid")
}

/// Strongly connected 3-cycle with real-dominant kernel eigenvectors.
pub fn ex3_laplacian() -> CMatrix {
    cmatrix(
        3,
        &[
            (30.0, 10.0), (0.0, 0.0), (-30.0, -10.0),
            (-100.0, -20.0), (100.0, 20.0), (0.0, 0.0),
            (0.0, 0.0), (-1.0, -1.0), (1.0, 1.0),
        ],
    )
}

pub fn ex3_graph() -> ComplexDigraph {
    from_laplacian(ex3_laplacian())
}

/// Strongly connected 3-cycle whose left kernel eigenvector is not real dominant.
pub fn ex4_laplacian() -> CMatrix {
    cmatrix(
        3,
        &[
            (100.0, 14.0), (0.0, 0.0), (-100.0, -14.0),
            (-0.55, -1.92), (0.55, 1.92), (0.0, 0.0),
            (0.0, 0.0), (-38.6, -10.0), (38.6, 10.0),
        ],
    )
}

pub fn ex4_graph() -> ComplexDigraph {
    from_laplacian(ex4_laplacian())
}

/// Four nodes, node 0 globally reachable and the only sink.
pub fn ex6_laplacian() -> CMatrix {
    cmatrix(
        4,
        &[
            (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
            (-10.0, -1.0), (10.0, 1.0), (0.0, 0.0), (0.0, 0.0),
            (-5.0, 1.0), (-3.0, 2.0), (8.0, -3.0), (0.0, 0.0),
            (-7.0, -5.0), (0.0, 0.0), (-2.0, -1.0), (9.0, 6.0),
        ],
    )
}

pub fn ex6_graph() -> ComplexDigraph {
    from_laplacian(ex6_laplacian())
}

/// Four nodes with two sinks (0 and 2) and no globally reachable node.
pub fn ex7_laplacian() -> CMatrix {
    cmatrix(
        4,
        &[
            (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
            (-4.0, -2.0), (9.0, 1.0), (-5.0, 1.0), (0.0, 0.0),
            (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
            (-6.0, -2.0), (0.0, 0.0), (-8.0, 3.0), (14.0, -1.0),
        ],
    )
}

pub fn ex7_graph() -> ComplexDigraph {
    from_laplacian(ex7_laplacian())
}

/// Same graph as [`ex1_graph`]; the design example starts from it.
pub fn ex8_graph() -> ComplexDigraph {
    ex1_graph()
}

pub fn ex8_laplacian() -> CMatrix {
    ex1_laplacian()
}

/// Weight-balanced 3-cycle 0 -> 2 -> 1 -> 0, every weight 1 + 0.5ι.
pub fn ex9_graph() -> ComplexDigraph {
    let w = ComplexWeight::new(1.0, 0.5);
    build_digraph(&[Edge::new(0, 2, w), Edge::new(1, 0, w), Edge::new(2, 1, w)], 3)
        .expect("fixture edges are valid")
}

pub fn ex9_laplacian() -> CMatrix {
    laplacian(&ex9_graph()).matrix
}

/// Synthetic message counts for seven agents, rows `(i, j, m_ij, m_ji)` 1-based.
pub const EIES_SAMPLE: &[(usize, usize, u64, u64)] = &[
    (1, 2, 12, 5),
    (2, 1, 5, 12),
    (1, 3, 8, 2),
    (3, 1, 2, 8),
    (2, 4, 6, 4),
    (4, 2, 4, 6),
    (3, 5, 9, 3),
    (5, 3, 3, 9),
    (4, 6, 7, 7),
    (6, 4, 7, 7),
    (5, 7, 10, 6),
    (7, 5, 6, 10),
    (6, 7, 3, 1),
    (7, 6, 1, 3),
    (2, 3, 4, 4),
    (3, 2, 4, 4),
    (1, 7, 2, 5),
    (7, 1, 5, 2),
    (4, 5, 5, 2),
    (5, 4, 2, 5),
];

/// Builds the digraph encoded by message-count rows: `i -> j` gets `m_ij + ι·m_ji`.
pub fn eies_sample_graph() -> ComplexDigraph {
    let edges: Vec<Edge> = EIES_SAMPLE
        .iter()
        .map(|&(i, j, mij, mji)| Edge::new(i - 1, j - 1, ComplexWeight::new(mij as f64, mji as f64)))
        .collect();
    build_digraph(&edges, 7).expect("sample rows are valid")
}

/// All named fixtures, for corpus export.
pub fn named_graphs() -> Vec<(&'static str, ComplexDigraph)> {
    vec![
        ("ex1", ex1_graph()),
        ("ex2", ex2_graph()),
        ("ex3", ex3_graph()),
        ("ex4", ex4_graph()),
        ("ex6", ex6_graph()),
        ("ex7", ex7_graph()),
        ("ex8", ex8_graph()),
        ("ex9", ex9_graph()),
        ("eies_sample", eies_sample_graph()),
        ("single", build_digraph(&[], 1).expect("single node")),
    ]
}
