//! Helpers shared by the integration tests: seeded clouds and independent
//! reference implementations.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use bregman_tda::persistence::{compute_persistence, order_filtration, DiagramPoint, FiltrationOrder};
use bregman_tda::{
    cech_radius_function, delaunay_radius_function, Error, Generator, GeneratorKind, Interval, PersistenceDiagram,
    PointCloud, RadiusFunction, Simplex,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KINDS: [GeneratorKind; 4] = [
    GeneratorKind::SqEuclideanHalf,
    GeneratorKind::ShannonNegEntropy,
    GeneratorKind::BurgEntropy,
    GeneratorKind::Exponential,
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sampling box well inside the generator's domain.
pub fn sample_box(kind: GeneratorKind) -> (f64, f64) {
    match kind {
        GeneratorKind::SqEuclideanHalf | GeneratorKind::Exponential => (-1.0, 1.0),
        GeneratorKind::ShannonNegEntropy | GeneratorKind::BurgEntropy => (0.1, 1.0),
    }
}

pub fn random_point(r: &mut ChaCha8Rng, kind: GeneratorKind, dim: usize) -> Vec<f64> {
    let (lo, hi) = sample_box(kind);
    (0..dim).map(|_| r.random_range(lo..hi)).collect()
}

pub fn random_points(r: &mut ChaCha8Rng, kind: GeneratorKind, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| random_point(r, kind, dim)).collect()
}

pub fn random_cloud(seed: u64, kind: GeneratorKind, n: usize, dim: usize) -> (Generator, PointCloud) {
    let gen = Generator::new(kind, dim);
    let pts = random_points(&mut rng(seed), kind, n, dim);
    let cloud = PointCloud::new(&gen, &pts).unwrap();
    (gen, cloud)
}

pub fn refs(points: &[Vec<f64>]) -> Vec<&[f64]> {
    points.iter().map(|p| p.as_slice()).collect()
}

pub fn simplex_points<'a>(cloud: &'a PointCloud, s: &[u32]) -> Vec<&'a [f64]> {
    s.iter().map(|&v| cloud.point(v as usize)).collect()
}

pub fn simplex(v: &[u32]) -> Simplex {
    Simplex::new(v.to_vec()).unwrap()
}

/// Whether an error only signals a random input too close to degenerate.
pub fn is_degenerate_input(e: &Error) -> bool {
    matches!(e, Error::GeneralPositionViolation { .. } | Error::Degenerate { .. })
}

/// All nonempty subsets of `0..n` with at most `max_size` elements.
pub fn subsets(n: usize, max_size: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize <= max_size {
            out.push((0..n as u32).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Euclidean plane references

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Circumcenter of a planar triangle from the perpendicular-bisector formula.
pub fn circumcenter2(a: &[f64], b: &[f64], c: &[f64]) -> [f64; 2] {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    let sa = a[0] * a[0] + a[1] * a[1];
    let sb = b[0] * b[0] + b[1] * b[1];
    let sc = c[0] * c[0] + c[1] * c[1];
    [
        (sa * (b[1] - c[1]) + sb * (c[1] - a[1]) + sc * (a[1] - b[1])) / d,
        (sa * (c[0] - b[0]) + sb * (a[0] - c[0]) + sc * (b[0] - a[0])) / d,
    ]
}

/// Squared radius of the minimum enclosing disk of at most three planar points.
pub fn meb2_sq(points: &[&[f64]]) -> f64 {
    match points.len() {
        1 => 0.0,
        2 => dist2(points[0], points[1]) / 4.0,
        3 => {
            for (i, j, k) in [(0, 1, 2), (1, 2, 0), (0, 2, 1)] {
                let mid = [(points[i][0] + points[j][0]) / 2.0, (points[i][1] + points[j][1]) / 2.0];
                let r2 = dist2(points[i], points[j]) / 4.0;
                if dist2(&mid, points[k]) <= r2 {
                    return r2;
                }
            }
            let c = circumcenter2(points[0], points[1], points[2]);
            dist2(&c, points[0])
        }
        _ => panic!("planar disk reference takes at most three points"),
    }
}

/// Classical in-circle determinant; positive when `d` lies strictly inside
/// the circle through `a, b, c` (any orientation).
pub fn in_circle(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    let row = |p: &[f64]| {
        let x = p[0] - d[0];
        let y = p[1] - d[1];
        [x, y, x * x + y * y]
    };
    let (ra, rb, rc) = (row(a), row(b), row(c));
    let det = ra[0] * (rb[1] * rc[2] - rb[2] * rc[1]) - ra[1] * (rb[0] * rc[2] - rb[2] * rc[0])
        + ra[2] * (rb[0] * rc[1] - rb[1] * rc[0]);
    let orient = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    det * orient.signum()
}

/// Delaunay triangles of a planar cloud by the empty-circle test.
pub fn brute_delaunay_triangles(points: &[&[f64]]) -> Vec<[u32; 3]> {
    let n = points.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let empty = (0..n)
                    .filter(|&l| l != i && l != j && l != k)
                    .all(|l| in_circle(points[i], points[j], points[k], points[l]) < 0.0);
                if empty {
                    out.push([i as u32, j as u32, k as u32]);
                }
            }
        }
    }
    out
}

/// Alpha radii, in units of ½·squared distance, from the Gabriel rule on the
/// empty-circle triangulation.
pub fn alpha_radii(points: &[&[f64]]) -> HashMap<Vec<u32>, f64> {
    let tris = brute_delaunay_triangles(points);
    let mut out = HashMap::new();
    for v in 0..points.len() as u32 {
        out.insert(vec![v], 0.0);
    }
    let mut tri_radius = HashMap::new();
    for t in &tris {
        let p: Vec<&[f64]> = t.iter().map(|&v| points[v as usize]).collect();
        let c = circumcenter2(p[0], p[1], p[2]);
        let r = 0.5 * dist2(&c, p[0]);
        tri_radius.insert(*t, r);
        out.insert(t.to_vec(), r);
    }
    let mut edges: HashSet<[u32; 2]> = HashSet::new();
    for t in &tris {
        edges.insert([t[0], t[1]]);
        edges.insert([t[0], t[2]]);
        edges.insert([t[1], t[2]]);
    }
    for e in edges {
        let (a, b) = (points[e[0] as usize], points[e[1] as usize]);
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let r2 = dist2(a, b) / 4.0;
        let gabriel = (0..points.len() as u32)
            .filter(|v| !e.contains(v))
            .all(|v| dist2(&mid, points[v as usize]) > r2);
        let r = if gabriel {
            0.5 * r2
        } else {
            tris.iter()
                .filter(|t| t.contains(&e[0]) && t.contains(&e[1]))
                .map(|t| tri_radius[t])
                .fold(f64::INFINITY, f64::min)
        };
        out.insert(e.to_vec(), r);
    }
    out
}

// ---------------------------------------------------------------------------
// Topology references

pub fn euler_characteristic(complex: &[Simplex]) -> i64 {
    complex.iter().map(|s| if s.dim() % 2 == 0 { 1 } else { -1 }).sum()
}

/// Textbook column reduction over Z2, without clearing or sparse tricks.
pub fn reference_diagram(order: &FiltrationOrder, max_hom_dim: usize) -> Vec<DiagramPoint> {
    let items: Vec<(Simplex, f64)> = order
        .iter()
        .filter(|(s, _)| s.dim() <= max_hom_dim + 1)
        .map(|(s, r)| (s.clone(), r))
        .collect();
    let index: HashMap<Vec<u32>, usize> =
        items.iter().enumerate().map(|(i, (s, _))| (s.vertices().to_vec(), i)).collect();
    let m = items.len();
    let mut columns: Vec<Vec<bool>> = items
        .iter()
        .map(|(s, _)| {
            let mut col = vec![false; m];
            if s.len() > 1 {
                for (_, facet) in s.facets() {
                    col[index[facet.vertices()]] = true;
                }
            }
            col
        })
        .collect();
    let low = |col: &[bool]| col.iter().rposition(|&b| b);
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        while let Some(l) = low(&columns[j]) {
            match owner[l] {
                Some(k) => {
                    let other = columns[k].clone();
                    for (a, b) in columns[j].iter_mut().zip(other) {
                        *a ^= b;
                    }
                }
                None => {
                    owner[l] = Some(j);
                    break;
                }
            }
        }
    }
    let mut points = Vec::new();
    for i in 0..m {
        let dim = items[i].0.dim();
        if dim > max_hom_dim || low(&columns[i]).is_some() {
            continue;
        }
        let death = owner[i].map_or(f64::INFINITY, |j| items[j].1);
        if death > items[i].1 {
            points.push(DiagramPoint { dim, birth: items[i].1, death });
        }
    }
    points.sort_by(|a, b| {
        a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death))
    });
    points
}

/// Restriction of a diagram to one homological dimension.
pub fn in_dimension(d: &PersistenceDiagram, dim: usize) -> PersistenceDiagram {
    PersistenceDiagram::new(d.dimension(dim).cloned().collect())
}

/// Čech diagram on the ambient-dimension skeleton.
pub fn cech_diagram(gen: &Generator, cloud: &PointCloud) -> Result<PersistenceDiagram, Error> {
    let n = gen.dimension;
    let (f, _) = cech_radius_function(gen, cloud, n, f64::INFINITY)?;
    Ok(compute_persistence(&order_filtration(&f)?, n - 1))
}

pub fn delaunay_diagram(gen: &Generator, cloud: &PointCloud) -> Result<PersistenceDiagram, Error> {
    let n = gen.dimension;
    let d = delaunay_radius_function(gen, cloud)?;
    Ok(compute_persistence(&order_filtration(&d)?, n - 1))
}

/// Every face of a simplex present in `f` must be present with radius no larger.
pub fn monotonicity_violations<F: RadiusFunction + ?Sized>(f: &F) -> usize {
    let mut bad = 0;
    for (s, r) in f.radii() {
        if s.len() == 1 {
            continue;
        }
        for (_, facet) in s.facets() {
            match f.radius_of(facet.vertices()) {
                Some(fr) if fr <= r + 1e-12 * (1.0 + r.abs()) => {}
                _ => bad += 1,
            }
        }
    }
    bad
}

/// Counts breaches of the interval partition: simplices covered by zero or
/// several intervals, values differing inside an interval, and equal values
/// across a face relation that straddles two intervals.
///
/// Members of one interval share their value bit for bit, so equality is
/// exact: near a stationary ball, distinct values can agree to 1e-13.
pub fn partition_violations<F: RadiusFunction + ?Sized>(f: &F, intervals: &[Interval]) -> usize {
    let mut bad = 0;
    let mut home: HashMap<&[u32], usize> = HashMap::new();
    for (s, r) in f.radii() {
        let owners: Vec<usize> = intervals
            .iter()
            .enumerate()
            .filter(|(_, iv)| iv.lower.is_face_of(s) && s.is_face_of(&iv.upper))
            .map(|(i, _)| i)
            .collect();
        if owners.len() != 1 {
            bad += 1;
            continue;
        }
        let iv = &intervals[owners[0]];
        if iv.radius != r {
            bad += 1;
        }
        home.insert(s.vertices(), owners[0]);
    }
    for (s, r) in f.radii() {
        for (_, facet) in s.facets().filter(|_| s.len() > 1) {
            let Some(fr) = f.radius_of(facet.vertices()) else { continue };
            if fr == r && home.get(s.vertices()) != home.get(facet.vertices()) {
                bad += 1;
            }
        }
    }
    bad
}
