mod common;

use std::collections::HashSet;

use bregman_tda::persistence::{compute_persistence_with, DiagramPoint, PersistenceConfig};
use bregman_tda::{
    bottleneck_distance, cech_radius_function, compute_persistence, delaunay_radius_function, order_filtration,
    rips_radius_function, Generator, GeneratorKind, PersistenceDiagram, PointCloud, RadiusFunction,
};
use common::{
    cech_diagram, delaunay_diagram, euler_characteristic, in_dimension, is_degenerate_input, random_cloud,
    reference_diagram, KINDS,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn kind() -> impl Strategy<Value = GeneratorKind> {
    prop::sample::select(KINDS.to_vec())
}

/// Bottleneck distance by trying every matching between the diagrams, each
/// augmented with the diagonal projections of the other.
fn brute_bottleneck(a: &[DiagramPoint], b: &[DiagramPoint]) -> f64 {
    let cost = |p: &DiagramPoint, q: &DiagramPoint| {
        match (p.death.is_infinite(), q.death.is_infinite()) {
            (true, true) => (p.birth - q.birth).abs(),
            (false, false) => (p.birth - q.birth).abs().max((p.death - q.death).abs()),
            _ => f64::INFINITY,
        }
    };
    let to_diagonal = |p: &DiagramPoint| (p.death - p.birth) / 2.0;
    let (m, n) = (a.len(), b.len());
    // Rows: points of a, then diagonal slots for b. Columns: points of b,
    // then diagonal slots for a.
    let mut perm: Vec<usize> = (0..m + n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |perm| {
        let mut worst: f64 = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            let c = match (i < m, j < n) {
                (true, true) => cost(&a[i], &b[j]),
                (true, false) => to_diagonal(&a[i]),
                (false, true) => to_diagonal(&b[j]),
                (false, false) => 0.0,
            };
            worst = worst.max(c);
        }
        best = best.min(worst);
    });
    best
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

fn diagram_point() -> impl Strategy<Value = DiagramPoint> {
    (0.0f64..4.0, 0.0f64..3.0, prop::bool::weighted(0.2)).prop_map(|(b, len, inf)| DiagramPoint {
        dim: 0,
        birth: b,
        death: if inf { f64::INFINITY } else { b + len },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn betti_numbers_reproduce_the_euler_characteristic(k in kind(), dim in 2usize..4, size in 2usize..9, seed: u64) {
        let (gen, cloud) = random_cloud(seed, k, size, dim);
        let (f, _) = match cech_radius_function(&gen, &cloud, dim, f64::INFINITY) {
            Ok(out) => out,
            Err(e) if is_degenerate_input(&e) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let d = compute_persistence(&order_filtration(&f).unwrap(), dim);
        let mut radii: Vec<f64> = f.radii().map(|(_, r)| r).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for r in radii {
            let betti = d.betti_at(r);
            let chi: i64 = betti.iter().enumerate().map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) }).sum();
            prop_assert_eq!(chi, euler_characteristic(&bregman_tda::complex_at(&f, r)), "at r = {}", r);
        }
    }

    #[test]
    fn reduction_matches_the_textbook_algorithm(k in kind(), dim in 2usize..4, size in 2usize..9, seed: u64, rips: bool) {
        let (gen, cloud) = random_cloud(seed, k, size, dim);
        let order = if rips {
            order_filtration(&rips_radius_function(&gen, &cloud, dim, f64::INFINITY).unwrap()).unwrap()
        } else {
            match cech_radius_function(&gen, &cloud, dim, f64::INFINITY) {
                Ok((f, _)) => order_filtration(&f).unwrap(),
                Err(e) if is_degenerate_input(&e) => return Ok(()),
                Err(e) => panic!("{e}"),
            }
        };
        let reference = reference_diagram(&order, dim - 1);
        for clearing in [true, false] {
            let d = compute_persistence_with(&order, dim - 1, &PersistenceConfig { clearing });
            prop_assert_eq!(&d.points, &reference);
        }
    }

    #[test]
    fn every_prefix_of_the_order_is_a_complex(k in kind(), dim in 2usize..4, size in 2usize..9, seed: u64) {
        let (gen, cloud) = random_cloud(seed, k, size, dim);
        let order = match delaunay_radius_function(&gen, &cloud) {
            Ok(del) => order_filtration(&del).unwrap(),
            Err(e) if is_degenerate_input(&e) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let mut last = f64::NEG_INFINITY;
        for (s, r) in order.iter() {
            prop_assert!(r >= last);
            last = r;
            for (_, facet) in s.facets().filter(|_| s.len() > 1) {
                prop_assert!(seen.contains(facet.vertices()), "{:?} before its facet {:?}", s, facet);
            }
            seen.insert(s.vertices().to_vec());
        }
    }

    #[test]
    fn relabeling_points_leaves_the_diagram_unchanged(k in kind(), dim in 2usize..4, size in 2usize..9, seed: u64) {
        let (gen, cloud) = random_cloud(seed, k, size, dim);
        let mut order: Vec<usize> = (0..size).collect();
        order.shuffle(&mut common::rng(seed ^ 0x5eed));
        let shuffled = cloud.permuted(&order);
        match (cech_diagram(&gen, &cloud), cech_diagram(&gen, &shuffled)) {
            (Ok(a), Ok(b)) => {
                let d = bottleneck_distance(&a, &b).unwrap();
                prop_assert!(d <= 1e-9, "{}", d);
            }
            (Err(e), _) | (_, Err(e)) if is_degenerate_input(&e) => {}
            (Err(e), _) | (_, Err(e)) => panic!("{e}"),
        }
    }

    #[test]
    fn cech_and_delaunay_diagrams_agree(k in kind(), dim in 2usize..4, size in 2usize..13, seed: u64) {
        let (gen, cloud) = random_cloud(seed, k, size, dim);
        let (c, d) = match (cech_diagram(&gen, &cloud), delaunay_diagram(&gen, &cloud)) {
            (Ok(c), Ok(d)) => (c, d),
            (Err(e), _) | (_, Err(e)) if is_degenerate_input(&e) => return Ok(()),
            (Err(e), _) | (_, Err(e)) => panic!("{e}"),
        };
        for h in 0..dim {
            let b = bottleneck_distance(&in_dimension(&c, h), &in_dimension(&d, h)).unwrap();
            prop_assert!(b <= 1e-6, "dimension {}: {}", h, b);
        }
    }

    #[test]
    fn bottleneck_matches_exhaustive_matching(
        a in prop::collection::vec(diagram_point(), 0..4),
        b in prop::collection::vec(diagram_point(), 0..4),
    ) {
        let da = PersistenceDiagram::new(a.clone());
        let db = PersistenceDiagram::new(b.clone());
        let essential = |v: &[DiagramPoint]| v.iter().filter(|p| p.death.is_infinite()).count();
        match bottleneck_distance(&da, &db) {
            Ok(d) => {
                prop_assert!((d - brute_bottleneck(&da.points, &db.points)).abs() <= 1e-12);
                prop_assert_eq!(d, bottleneck_distance(&db, &da).unwrap());
            }
            Err(e) => {
                prop_assert_eq!(e.kind(), "InfinityMismatch");
                prop_assert!(essential(&a) != essential(&b));
            }
        }
    }
}

#[test]
fn circle_sample_has_one_persistent_loop() {
    let gen = Generator::sq_euclidean(2);
    let mut r = common::rng(7);
    let pts: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            use rand::Rng;
            let t = std::f64::consts::TAU * (i as f64 + r.random_range(-0.2..0.2)) / 20.0;
            let rho = 1.0 + r.random_range(-0.03..0.03);
            vec![rho * t.cos(), rho * t.sin()]
        })
        .collect();
    let cloud = PointCloud::new(&gen, &pts).unwrap();
    let (f, _) = cech_radius_function(&gen, &cloud, 2, f64::INFINITY).unwrap();
    let order = order_filtration(&f).unwrap();
    let d = compute_persistence(&order, 1);
    assert_eq!(d.points, reference_diagram(&order, 1));
    let loops: Vec<_> = d.dimension(1).filter(|p| p.death - p.birth > 0.2).collect();
    assert_eq!(loops.len(), 1, "{:?}", d.points);
    assert_eq!(d.dimension(0).filter(|p| p.death.is_infinite()).count(), 1);
}
