//! Seeded random instances: spaces, closed subsets and maps.
//!
//! Integer-coordinate spaces are favoured because they produce many exact ties in
//! nearest-point sets.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::metric::{ClosedSubset, FiniteMetricSpace};
use crate::relation::SetValuedMap;
use crate::set::IndexSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` distinct points of a small integer grid under the L1 metric.
pub fn grid_space<R: Rng>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    let side = (n as f64).sqrt().ceil() as i64 + 2;
    let mut cells: Vec<(i64, i64)> = (0..side).flat_map(|x| (0..side).map(move |y| (x, y))).collect();
    cells.shuffle(rng);
    cells.truncate(n);
    let dist = cells
        .iter()
        .map(|p| cells.iter().map(|q| ((p.0 - q.0).abs() + (p.1 - q.1).abs()) as f64).collect())
        .collect();
    FiniteMetricSpace::from_matrix(dist).expect("L1 distances on distinct points form a metric")
}

/// `n` uniform points of the unit square under the Euclidean metric.
pub fn euclidean_space<R: Rng>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    let dist = pts.iter().map(|p| pts.iter().map(|q| (p.0 - q.0).hypot(p.1 - q.1)).collect()).collect();
    FiniteMetricSpace::from_matrix(dist).expect("distinct random points form a metric")
}

/// Either kind, chosen at random.
pub fn space<R: Rng>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    if rng.gen_bool(0.5) {
        grid_space(rng, n)
    } else {
        euclidean_space(rng, n)
    }
}

/// A nonempty random subset, each point kept with probability `density`.
pub fn subset<R: Rng>(rng: &mut R, space: &FiniteMetricSpace, density: f64) -> ClosedSubset {
    let n = space.len();
    let mut members = IndexSet::empty(n);
    for i in 0..n {
        if rng.gen_bool(density) {
            members.insert(i);
        }
    }
    if members.is_empty() {
        members.insert(rng.gen_range(0..n));
    }
    ClosedSubset::from_set(space, members).expect("nonempty")
}

/// A random map defined on `support`, each image holding 1 to `max_image` points.
pub fn map_on<R: Rng>(
    rng: &mut R,
    domain: &Arc<FiniteMetricSpace>,
    support: &ClosedSubset,
    codomain: &Arc<FiniteMetricSpace>,
    max_image: usize,
) -> SetValuedMap {
    let m = codomain.len();
    let mut pairs = Vec::new();
    for x in support.iter() {
        let k = rng.gen_range(1..=max_image.clamp(1, m));
        for y in rand::seq::index::sample(rng, m, k) {
            pairs.push((x, y));
        }
    }
    SetValuedMap::on(domain.clone(), support, codomain.clone(), pairs).expect("every support point has an image")
}

/// A self-map on a random subset that strands at least one orbit: some point's orbit
/// leaves the support and gets stuck.
pub fn stranding_map<R: Rng>(rng: &mut R, space: &Arc<FiniteMetricSpace>) -> SetValuedMap {
    let n = space.len();
    assert!(n >= 2, "stranding needs at least two points");
    loop {
        let support = subset(rng, space, 0.5);
        if support.len() == n {
            continue;
        }
        let outside: Vec<usize> = (0..n).filter(|&x| !support.contains(x)).collect();
        let mut pairs = Vec::new();
        // the lowest support point maps only outside the support
        let trap = support.lowest();
        pairs.push((trap, *outside.choose(rng).expect("support is proper")));
        for x in support.iter().filter(|&x| x != trap) {
            let k = rng.gen_range(1..=3.min(n));
            for y in rand::seq::index::sample(rng, n, k) {
                pairs.push((x, y));
            }
        }
        return SetValuedMap::on(space.clone(), &support, space.clone(), pairs).expect("images are nonempty");
    }
}
