//! Seeded random samples of interior points and flat points.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flat::FlatPoint;
use crate::polytope::LabelledPolytope;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dirichlet(1, …, 1) combination of the vertices.
pub fn convex_combination(p: &LabelledPolytope, rng: &mut SampleRng) -> Vec<f64> {
    let weights: Vec<f64> = p
        .vertices()
        .iter()
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut x = vec![0.0; p.dim()];
    for (v, w) in p.vertices().iter().zip(&weights) {
        for (xr, c) in x.iter_mut().zip(v.point_f64()) {
            *xr += w / total * c;
        }
    }
    x
}

/// Up to `count` points with `min_j ℓ_j ≥ min_ell`; gives up after
/// `1000 · count` draws, so fewer points come back when the margin is too
/// large for the polytope.
pub fn interior_points(p: &LabelledPolytope, count: usize, min_ell: f64, rng: &mut SampleRng) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count.saturating_mul(1000) {
        if out.len() == count {
            break;
        }
        let x = convex_combination(p, rng);
        if p.ell(&x).iter().all(|&l| l >= min_ell) {
            out.push(x);
        }
    }
    out
}

/// Radii uniform in `[lo, hi]`, angles uniform in `[0, 2π)`.
pub fn flat_point(d: usize, lo: f64, hi: f64, rng: &mut SampleRng) -> FlatPoint {
    let r = (0..d).map(|_| rng.random_range(lo..=hi)).collect();
    let theta = (0..d).map(|_| rng.random_range(0.0..TAU)).collect();
    FlatPoint::new(r, theta).expect("radii are positive")
}

pub fn uniform_vector(len: usize, lo: f64, hi: f64, rng: &mut SampleRng) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..=hi)).collect()
}
