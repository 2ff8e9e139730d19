use std::sync::Arc;

use proptest::prelude::*;
use relext::dynamics::PartialRelation;
use relext::metric::{
    components_at_gap, dist_to_set, hausdorff_distance, sample_circle, sample_interval, sample_torus, validate_metric,
};
use relext::obstruction::{brute_force_extension_exists, DiscreteCircleMap, TriangulatedDisk};
use relext::relation::{check_usc_modulus, compose, equal_on};
use relext::tietze::{extend_usc, extend_via_retraction, nearest_point_graph, nearest_point_retraction};
use relext::{random, ClosedSubset, FiniteMetricSpace, IndexSet, SetValuedMap};

fn space(seed: u64, n: usize) -> Arc<FiniteMetricSpace> {
    Arc::new(random::space(&mut random::rng(seed), n))
}

fn relation(seed: u64, space: &Arc<FiniteMetricSpace>, max_image: usize) -> SetValuedMap {
    let mut rng = random::rng(seed ^ 0x5eed);
    random::map_on(&mut rng, space, &ClosedSubset::whole(space), space, max_image)
}

fn all_nonempty(n: usize) -> impl Iterator<Item = IndexSet> {
    (1..1u64 << n).map(move |m| IndexSet::from_mask(n, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constructors_are_metrics(n in 1usize..30, m in 3usize..9) {
        prop_assert!(validate_metric(&sample_interval(-1.0, 2.5, n).unwrap().rows()).unwrap().is_valid());
        prop_assert!(validate_metric(&sample_circle(m + n).unwrap().rows()).unwrap().is_valid());
        prop_assert!(validate_metric(&sample_torus(m, 3 + n % 5).unwrap().rows()).unwrap().is_valid());
    }

    #[test]
    fn dist_to_set_vanishes_exactly_on_members(seed: u64, n in 1usize..12, mask: u64) {
        let s = space(seed, n);
        let a = IndexSet::from_mask(n, mask | 1);
        for x in 0..n {
            prop_assert_eq!(dist_to_set(&s, x, &a).unwrap() == 0.0, a.contains(x));
        }
    }

    #[test]
    fn hausdorff_is_a_metric_on_subsets(seed: u64, n in 1usize..=5) {
        let s = space(seed, n);
        let subsets: Vec<IndexSet> = all_nonempty(n).collect();
        for p in &subsets {
            for q in &subsets {
                let d = hausdorff_distance(&s, p, q).unwrap();
                prop_assert_eq!(d, hausdorff_distance(&s, q, p).unwrap());
                prop_assert_eq!(d == 0.0, p == q);
                for r in &subsets {
                    let via = hausdorff_distance(&s, p, r).unwrap() + hausdorff_distance(&s, r, q).unwrap();
                    prop_assert!(d <= via * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn components_merge_as_gap_grows(seed: u64, n in 1usize..25, g1 in 0.0f64..3.0, g2 in 0.0f64..3.0) {
        let s = space(seed, n);
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(components_at_gap(&s, hi).len() <= components_at_gap(&s, lo).len());
    }

    #[test]
    fn composition_is_associative(seed: u64, n in 1usize..=8) {
        let s = space(seed, n);
        let (h, g, f) = (relation(seed, &s, 3), relation(seed + 1, &s, 3), relation(seed + 2, &s, 3));
        let left = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        let right = compose(&h, &compose(&g, &f).unwrap()).unwrap();
        prop_assert!(left.same_graph(&right));
        prop_assert!(left.is_total());
    }

    #[test]
    fn upper_and_lower_inverses_are_dual(seed: u64, n in 1usize..=6) {
        let s = space(seed, n);
        let f = relation(seed, &s, 3);
        for u in all_nonempty(n) {
            let rest = u.complement();
            if rest.is_empty() {
                continue;
            }
            prop_assert_eq!(f.upper_inverse(&u).unwrap(), f.lower_preimage(&rest).unwrap().complement());
        }
    }

    #[test]
    fn restriction_agrees_iff_graphs_agree(seed: u64, n in 1usize..=8, mask: u64, flip in 0usize..8) {
        let s = space(seed, n);
        let f = relation(seed, &s, 3);
        let mut pairs = f.pairs();
        let x = flip % n;
        pairs.retain(|&(p, _)| p != x);
        pairs.push((x, (x + 1) % n));
        let g = SetValuedMap::new(s.clone(), s.clone(), pairs).unwrap();
        let a = ClosedSubset::from_set(&s, IndexSet::from_mask(n, mask | 1)).unwrap();
        let (fa, ga) = (f.restrict(&a).unwrap(), g.restrict(&a).unwrap());
        let graphs_agree = a.iter().all(|p| f.image(p).unwrap() == g.image(p).unwrap());
        prop_assert_eq!(equal_on(&fa, &ga, &a).unwrap(), graphs_agree);
        prop_assert!(fa.is_total() == (a.len() == n));
    }

    #[test]
    fn usc_check_is_monotone(seed: u64, n in 2usize..30, d in 0.0f64..1.0, e in 0.0f64..1.0, dd in 0.0f64..1.0, de in 0.0f64..1.0) {
        let s = Arc::new(sample_interval(0.0, 1.0, n).unwrap());
        let f = relation(seed, &s, 2);
        if check_usc_modulus(&f, d, e).unwrap().holds {
            prop_assert!(check_usc_modulus(&f, d * dd, e + de).unwrap().holds);
        }
    }

    #[test]
    fn extension_invariants(seed: u64, n in 1usize..30, density in 0.05f64..1.0) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::space(&mut rng, n));
        let a = random::subset(&mut rng, &s, density);
        let f = random::map_on(&mut rng, &s, &a, &s, 3);
        let big = extend_usc(&s, &a, &f).unwrap();
        prop_assert!(equal_on(&big, &f, &a).unwrap());
        let g = nearest_point_graph(&s, &a).unwrap();
        for x in a.iter() {
            prop_assert_eq!(g.image(x).unwrap().to_vec(), vec![x]);
        }
        let r = nearest_point_retraction(&s, &a).unwrap();
        let sel = extend_via_retraction(&f, &r).unwrap();
        prop_assert!(sel.graph_subset_of(&big));
    }

    #[test]
    fn constant_images_extend_to_constant_maps(n in 2usize..40, mask: u64, target in 0usize..40) {
        let s = Arc::new(sample_interval(0.0, 1.0, n).unwrap());
        let a = ClosedSubset::from_set(&s, IndexSet::from_mask(n, mask | 1)).unwrap();
        let y = target % n;
        let f = SetValuedMap::on(s.clone(), &a, s.clone(), a.iter().map(|x| (x, y))).unwrap();
        let big = extend_usc(&s, &a, &f).unwrap();
        for delta in [0.0, 0.1, 0.5, 1.0] {
            prop_assert!(check_usc_modulus(&big, delta, 0.0).unwrap().holds);
        }
    }

    #[test]
    fn reachability_laws(seed: u64, n in 1usize..12, extra in 0u64..1000) {
        let s = space(seed, n);
        let mut rng = random::rng(seed);
        let pairs: Vec<(usize, usize)> = (0..n).filter(|x| x % 3 != 0)
            .flat_map(|x| [(x, (x * 7 + seed as usize) % n), (x, (x + extra as usize) % n)]).collect();
        let r = PartialRelation::from_pairs(s.clone(), pairs).unwrap();
        let bigger = r.with_pairs([((extra as usize) % n, (seed as usize) % n)]).unwrap();
        let start = IndexSet::from_mask(n, rng_mask(&mut rng, n));
        for k in 0..4 {
            let next = r.forward_reach(&start, k + 1).unwrap();
            prop_assert_eq!(next, r.forward_image_set(&r.forward_reach(&start, k).unwrap()).unwrap());
        }
        for x in 0..n {
            let reach = r.reachable_set(x).unwrap();
            prop_assert!(reach.is_subset(&bigger.reachable_set(x).unwrap()));
            for k in 0..=n {
                prop_assert!(r.forward_reach(&IndexSet::singleton(n, x).unwrap(), k).unwrap().is_subset(&reach));
            }
        }
    }

    #[test]
    fn infinite_trajectories_match_trimming(seed: u64, n in 1usize..14, density in 0.0f64..0.4) {
        let s = space(seed, n);
        let mut pairs = Vec::new();
        let mut state = seed | 1;
        for x in 0..n {
            for y in 0..n {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                if (state % 1000) as f64 / 1000.0 < density {
                    pairs.push((x, y));
                }
            }
        }
        let r = PartialRelation::from_pairs(s, pairs).unwrap();
        // oracle: repeatedly delete points with no surviving successor
        let mut alive = IndexSet::full(n);
        loop {
            let dead: Vec<usize> = alive.iter().filter(|&x| !r.successors(x).intersects(&alive)).collect();
            if dead.is_empty() { break; }
            for x in dead { alive.remove(x); }
        }
        for x in 0..n {
            let expected = alive.contains(x) || r.reachable_set(x).unwrap().intersects(&alive);
            prop_assert_eq!(r.exists_infinite_trajectory(x).unwrap(), expected);
            match r.infinite_trajectory_witness(x).unwrap() {
                Some(lasso) => {
                    prop_assert!(expected);
                    let path = lasso.unroll(3 * n + 2);
                    for len in 1..=path.len() {
                        prop_assert!(r.is_trajectory(&path[..len]).unwrap());
                    }
                    prop_assert_eq!(path[0], x);
                }
                None => prop_assert!(!expected),
            }
        }
        prop_assert_eq!(r.infinite_trajectory_points(), (0..n).fold(IndexSet::empty(n), |mut acc, x| {
            if r.exists_infinite_trajectory(x).unwrap() { acc.insert(x); }
            acc
        }));
    }

    #[test]
    fn winding_symmetries(n in 3usize..12, l in 1usize..5, steps in proptest::collection::vec(-4i64..=4, 1..24), shift in 0usize..30) {
        prop_assume!(2 * l < n);
        let mut values = vec![0usize];
        for s in &steps {
            let s = (*s).clamp(-(l as i64), l as i64);
            let last = *values.last().unwrap() as i64;
            values.push((last + s).rem_euclid(n as i64) as usize);
        }
        let m = DiscreteCircleMap::new(n, values, l).unwrap();
        let Ok(w) = m.winding_number() else { return Ok(()); };
        prop_assert_eq!(m.rotated(shift).winding_number().unwrap(), w);
        prop_assert_eq!(m.reversed().winding_number().unwrap(), -w);
        let fine = DiscreteCircleMap::new(n, m.refined().values().to_vec(), 1).unwrap();
        prop_assert_eq!(fine.winding_number().unwrap(), w);
    }

    #[test]
    fn nonzero_winding_blocks_extension_when_sound(n in 4usize..10, side in 3usize..5, steps in proptest::collection::vec(0i64..=1, 8..24)) {
        let l = 1;
        prop_assume!(3 * l < n);
        let disk = TriangulatedDisk::grid_patch(side).unwrap();
        let k = disk.boundary().len();
        let mut values = vec![0usize];
        for s in steps.iter().take(k - 1) {
            let last = *values.last().unwrap() as i64;
            values.push((last + s).rem_euclid(n as i64) as usize);
        }
        prop_assume!(values.len() == k);
        let m = DiscreteCircleMap::new(n, values, l).unwrap();
        let Ok(w) = m.winding_number() else { return Ok(()); };
        let search = brute_force_extension_exists(&disk, &m).unwrap();
        if w != 0 {
            prop_assert!(!search.extends);
        }
        if let Some(wit) = search.witness {
            prop_assert!(disk.edge_violations(&wit, n, l).is_empty());
        }
    }
}

fn rng_mask(rng: &mut impl rand::Rng, n: usize) -> u64 {
    rng.gen::<u64>() & ((1u64 << n) - 1) | 1
}
