//! Persistent homology over the two-element field.

use std::collections::HashMap;

use crate::complexes::RadiusFunction;
use crate::error::{Error, Result};
use crate::simplex::{facet_into, Simplex};

/// Relative tolerance under which a face above its coface is treated as
/// rounding noise and lifted to the coface's value.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-9;

/// Simplices sorted by (radius, dimension, vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationOrder {
    simplices: Vec<Simplex>,
    radii: Vec<f64>,
}

impl FiltrationOrder {
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplex(&self, i: usize) -> &Simplex {
        &self.simplices[i]
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, f64)> + '_ {
        self.simplices.iter().zip(self.radii.iter().copied())
    }

    /// Wraps simplices already in filtration order, e.g. a filtered subset of
    /// another order. Faces must precede cofaces.
    pub fn from_sorted(items: Vec<(Simplex, f64)>) -> Self {
        let (simplices, radii) = items.into_iter().unzip();
        FiltrationOrder { simplices, radii }
    }
}

/// Sorts the simplices of a radius function into a filtration.
///
/// Faces exceeding a coface by at most `1e-9 · (1 + r)` are attributed to
/// rounding and the coface is lifted to the face's value; larger excesses
/// are reported.
pub fn order_filtration<F: RadiusFunction + ?Sized>(f: &F) -> Result<FiltrationOrder> {
    let mut items: Vec<(Simplex, f64)> = f.radii().map(|(s, r)| (s.clone(), r)).collect();
    items.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    let mut adjusted: HashMap<Simplex, f64> = HashMap::with_capacity(items.len());
    let mut buf = Vec::new();
    for (s, r) in items.iter_mut() {
        if r.is_nan() {
            return Err(Error::InvalidArgument(format!("{s:?} has radius NaN")));
        }
        if s.len() > 1 {
            for skip in 0..s.len() {
                facet_into(s.vertices(), skip, &mut buf);
                let Some(&face_r) = adjusted.get(buf.as_slice()) else {
                    return Err(Error::InvalidArgument(format!(
                        "facet {buf:?} of {s:?} is missing; the simplices do not form a complex"
                    )));
                };
                if face_r > *r {
                    if face_r - *r > MONOTONICITY_TOLERANCE * (1.0 + r.abs()) {
                        return Err(Error::MonotonicityViolation {
                            face: buf.clone(),
                            face_radius: face_r,
                            coface: s.vertices().to_vec(),
                            coface_radius: *r,
                        });
                    }
                    *r = face_r;
                }
            }
        }
        adjusted.insert(s.clone(), *r);
    }
    items.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.0.len().cmp(&b.0.len()))
            .then_with(|| a.0.cmp(&b.0))
    });
    let (simplices, radii) = items.into_iter().unzip();
    Ok(FiltrationOrder { simplices, radii })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for classes that never die.
    pub death: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PersistenceDiagram {
    /// Sorted by (dim, birth, death).
    pub points: Vec<DiagramPoint>,
    /// Pairs with birth equal to death, omitted from `points`.
    pub zero_persistence: usize,
}

impl PersistenceDiagram {
    pub fn new(mut points: Vec<DiagramPoint>) -> Self {
        sort_points(&mut points);
        PersistenceDiagram {
            points,
            zero_persistence: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self, dim: usize) -> impl Iterator<Item = &DiagramPoint> + '_ {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.points.iter().map(|p| p.dim).max()
    }

    /// Betti numbers of the sublevel complex at `r`, up to the largest dimension present.
    pub fn betti_at(&self, r: f64) -> Vec<usize> {
        let mut betti = vec![0; self.max_dim().map_or(0, |d| d + 1)];
        for p in &self.points {
            if p.birth <= r && r < p.death {
                betti[p.dim] += 1;
            }
        }
        betti
    }
}

fn sort_points(points: &mut [DiagramPoint]) {
    points.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PersistenceConfig {
    /// Skip reducing columns of creators already known to be paired.
    pub clearing: bool,
}

impl Default for PersistenceConfig {
    fn default() -> Self {
        PersistenceConfig { clearing: true }
    }
}

/// Persistence diagram in homological dimensions `0..=max_hom_dim`.
pub fn compute_persistence(order: &FiltrationOrder, max_hom_dim: usize) -> PersistenceDiagram {
    compute_persistence_with(order, max_hom_dim, &PersistenceConfig::default())
}

pub fn compute_persistence_with(
    order: &FiltrationOrder,
    max_hom_dim: usize,
    cfg: &PersistenceConfig,
) -> PersistenceDiagram {
    let top = max_hom_dim + 1;
    // Positions of the retained simplices (dimension ≤ top) in filtration order.
    let kept: Vec<usize> = (0..order.len()).filter(|&i| order.simplices[i].dim() <= top).collect();
    let mut position: HashMap<&[u32], usize> = HashMap::with_capacity(kept.len());
    for (col, &i) in kept.iter().enumerate() {
        position.insert(order.simplices[i].vertices(), col);
    }
    let dim_of = |col: usize| order.simplices[kept[col]].dim();
    let radius_of = |col: usize| order.radii[kept[col]];

    let m = kept.len();
    let mut pivot_col: Vec<Option<usize>> = vec![None; m];
    let mut paired = vec![false; m];
    let mut buf = Vec::new();

    let boundary = |col: usize, buf: &mut Vec<u32>| -> Vec<usize> {
        let s = &order.simplices[kept[col]];
        if s.len() == 1 {
            return Vec::new();
        }
        let mut rows: Vec<usize> = (0..s.len())
            .map(|skip| {
                facet_into(s.vertices(), skip, buf);
                position[buf.as_slice()]
            })
            .collect();
        rows.sort_unstable();
        rows
    };

    let reduce = |column: &mut Vec<usize>, pivot_col: &[Option<usize>], reduced: &HashMap<usize, Vec<usize>>| {
        while let Some(&low) = column.last() {
            match pivot_col[low] {
                Some(other) => add_columns(column, &reduced[&other]),
                None => break,
            }
        }
    };

    let mut reduced: HashMap<usize, Vec<usize>> = HashMap::new();
    let dims: Vec<usize> = if cfg.clearing {
        (1..=top).rev().collect()
    } else {
        (1..=top).collect()
    };
    for d in dims {
        for col in 0..m {
            if dim_of(col) != d || (cfg.clearing && paired[col]) {
                continue;
            }
            let mut column = boundary(col, &mut buf);
            reduce(&mut column, &pivot_col, &reduced);
            if let Some(&low) = column.last() {
                pivot_col[low] = Some(col);
                paired[low] = true;
                paired[col] = true;
                reduced.insert(col, column);
            }
        }
    }

    let mut points = Vec::new();
    let mut zero = 0;
    for (low, &killer) in pivot_col.iter().enumerate() {
        if let Some(killer) = killer {
            let dim = dim_of(low);
            if dim > max_hom_dim {
                continue;
            }
            let (birth, death) = (radius_of(low), radius_of(killer));
            if birth == death {
                zero += 1;
            } else {
                points.push(DiagramPoint { dim, birth, death });
            }
        }
    }
    for col in 0..m {
        let dim = dim_of(col);
        if dim <= max_hom_dim && !paired[col] {
            points.push(DiagramPoint {
                dim,
                birth: radius_of(col),
                death: f64::INFINITY,
            });
        }
    }
    sort_points(&mut points);
    PersistenceDiagram {
        points,
        zero_persistence: zero,
    }
}

/// `a ← a + b` over the two-element field, both sorted increasing.
fn add_columns(a: &mut Vec<usize>, b: &[usize]) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    *a = out;
}

/// Bottleneck distance, the maximum over homological dimensions.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    let top = d1.max_dim().max(d2.max_dim());
    let Some(top) = top else {
        return Ok(0.0);
    };
    let mut distance: f64 = 0.0;
    for dim in 0..=top {
        let split = |d: &PersistenceDiagram| {
            let mut essential = Vec::new();
            let mut finite = Vec::new();
            for p in d.dimension(dim) {
                if p.death.is_infinite() {
                    essential.push(p.birth);
                } else {
                    finite.push((p.birth, p.death));
                }
            }
            essential.sort_by(f64::total_cmp);
            (essential, finite)
        };
        let (e1, f1) = split(d1);
        let (e2, f2) = split(d2);
        if e1.len() != e2.len() {
            return Err(Error::InfinityMismatch {
                dim,
                left: e1.len(),
                right: e2.len(),
            });
        }
        for (a, b) in e1.iter().zip(&e2) {
            distance = distance.max((a - b).abs());
        }
        distance = distance.max(finite_bottleneck(&f1, &f2));
    }
    Ok(distance)
}

/// Exact bottleneck distance between finite diagrams by threshold search.
fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n + m == 0 {
        return 0.0;
    }
    let linf = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs().max((p.1 - q.1).abs());
    let half = |p: (f64, f64)| (p.1 - p.0) / 2.0;
    // Left: a_0..a_n, then diagonal copies of b. Right: b_0..b_m, then diagonal copies of a.
    let cost = |l: usize, r: usize| -> f64 {
        match (l < n, r < m) {
            (true, true) => linf(a[l], b[r]),
            (true, false) => {
                if r - m == l {
                    half(a[l])
                } else {
                    f64::INFINITY
                }
            }
            (false, true) => {
                if l - n == r {
                    half(b[r])
                } else {
                    f64::INFINITY
                }
            }
            (false, false) => 0.0,
        }
    };
    let size = n + m;
    let mut candidates: Vec<f64> = vec![0.0];
    for l in 0..size {
        for r in 0..size {
            let c = cost(l, r);
            if c.is_finite() {
                candidates.push(c);
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let feasible = |threshold: f64| {
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|l| (0..size).filter(|&r| cost(l, r) <= threshold).collect())
            .collect();
        hopcroft_karp(&adj, size) == size
    };
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Maximum bipartite matching size.
fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> usize {
    const FREE: usize = usize::MAX;
    let left = adj.len();
    let mut match_l = vec![FREE; left];
    let mut match_r = vec![FREE; right];
    let mut dist = vec![0usize; left];
    let mut matched = 0;
    loop {
        let mut queue = std::collections::VecDeque::new();
        let mut found = false;
        for l in 0..left {
            if match_l[l] == FREE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let next = match_r[r];
                if next == FREE {
                    found = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            return matched;
        }
        fn augment(
            l: usize,
            adj: &[Vec<usize>],
            match_l: &mut [usize],
            match_r: &mut [usize],
            dist: &mut [usize],
        ) -> bool {
            for &r in &adj[l] {
                let next = match_r[r];
                if next == usize::MAX
                    || (dist[next] == dist[l] + 1 && augment(next, adj, match_l, match_r, dist))
                {
                    match_l[l] = r;
                    match_r[r] = l;
                    return true;
                }
            }
            dist[l] = usize::MAX;
            false
        }
        for l in 0..left {
            if match_l[l] == FREE && augment(l, adj, &mut match_l, &mut match_r, &mut dist) {
                matched += 1;
            }
        }
    }
}
