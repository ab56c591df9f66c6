use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{build_digraph, ComplexDigraph, ComplexWeight, Edge};
use crate::linalg::{c64, CMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cmatrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Edge probability `p`, magnitudes in [0.2, 5], phases in (−85°, 85°).
pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> ComplexDigraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(p) {
                let r = rng.random_range(0.2..5.0);
                let beta = rng.random_range(-85.0..85.0);
                edges.push(Edge::new(i, j, ComplexWeight::from_polar_deg(r, beta)));
            }
        }
    }
    build_digraph(&edges, n).unwrap()
}
