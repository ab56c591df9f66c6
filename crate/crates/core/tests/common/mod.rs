use clx_core::graph::{build_digraph, ComplexDigraph, ComplexWeight, Edge};
use clx_core::linalg::{c64, CVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` nodes, edge probability `p`, magnitudes in [0.2, 5], phases strictly inside (−90°, 90°).
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> ComplexDigraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(p) {
                let r = rng.random_range(0.2..5.0);
                let beta = rng.random_range(-89.9..89.9);
                edges.push(Edge::new(i, j, ComplexWeight::from_polar_deg(r, beta)));
            }
        }
    }
    build_digraph(&edges, n).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}
