//! Čech and Vietoris–Rips radius functions.
//!
//! The Čech radius of a simplex is the radius of its smallest including dual
//! ball. The builder visits simplices by increasing dimension, solves for a
//! circumball only when no facet's ball already includes the simplex, and
//! hands each such ball down to every coface obtained by adding a point that
//! lies strictly inside it. Simplices sharing a ball form one interval of the
//! generalized discrete gradient.

use std::ops::Range;

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::circumball::{smallest_circumball_with, CircumballResult, SolverConfig};
use crate::divergence::{DualBall, Generator, PointCloud};
use crate::error::{Error, Result};
use crate::simplex::{facet_into, is_subset, Simplex};

pub mod no_interleaving;

pub use no_interleaving::{no_interleaving_demo, NoInterleaving};

/// Tolerances used while building filtrations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub solver: SolverConfig,
    /// A point within `tol · (1 + r)` of a circumball boundary violates
    /// general position.
    pub general_position_tolerance: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            solver: SolverConfig::default(),
            general_position_tolerance: 1e-10,
        }
    }
}

/// Anything that assigns radii to a finite set of simplices.
pub trait RadiusFunction {
    fn radius_of(&self, simplex: &[u32]) -> Option<f64>;
    fn radii(&self) -> Box<dyn Iterator<Item = (&Simplex, f64)> + '_>;
}

/// Sublevel set `{P : radius(P) ≤ r}` in dimension-then-lexicographic order.
pub fn complex_at<F: RadiusFunction + ?Sized>(f: &F, r: f64) -> Vec<Simplex> {
    let mut out: Vec<Simplex> = f
        .radii()
        .filter(|&(_, radius)| radius <= r)
        .map(|(s, _)| s.clone())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalRole {
    LowerBound,
    Interior,
    UpperBound,
    Singleton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiltrationKind {
    Cech,
    Rips,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub radius: f64,
    /// Index of the witness ball (see [`RadiusFiltration::witness`]).
    pub witness: usize,
    /// Position inside the interval; `None` for Rips filtrations.
    pub role: Option<IntervalRole>,
    /// Entry index of the interval's lower bound; `None` for Rips.
    pub lower: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct Witness {
    ball: DualBall,
    /// Entry index of the simplex whose circumball this is.
    source: usize,
    /// Points outside `source` lying strictly inside the ball, increasing.
    inside: Vec<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct BuildStats {
    pub num_points: usize,
    pub num_simplices: usize,
    pub num_edges: usize,
    pub num_circumball_calls: usize,
    pub num_function_evals: usize,
}

/// Simplices with radii, witness balls and interval marks.
#[derive(Debug, Clone)]
pub struct RadiusFiltration {
    kind: FiltrationKind,
    entries: IndexMap<Simplex, Entry>,
    witnesses: Vec<Witness>,
    levels: Vec<Range<usize>>,
    max_dim: usize,
    cutoff: f64,
    stats: BuildStats,
}

impl RadiusFiltration {
    pub fn kind(&self) -> FiltrationKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }

    pub fn get(&self, simplex: &[u32]) -> Option<&Entry> {
        self.entries.get(simplex)
    }

    pub fn radius(&self, simplex: &[u32]) -> Option<f64> {
        self.get(simplex).map(|e| e.radius)
    }

    /// Entries in dimension-then-lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, &Entry)> + '_ {
        self.entries.iter()
    }

    /// Entries of one dimension.
    pub fn dimension(&self, d: usize) -> impl Iterator<Item = (&Simplex, &Entry)> + '_ {
        let range = self.levels.get(d).cloned().unwrap_or(0..0);
        self.entries[range].iter()
    }

    pub fn simplex_at(&self, index: usize) -> &Simplex {
        self.entries.get_index(index).expect("entry index in range").0
    }

    pub fn witness(&self, entry: &Entry) -> &DualBall {
        &self.witnesses[entry.witness].ball
    }

    pub fn witness_ball(&self, id: usize) -> &DualBall {
        &self.witnesses[id].ball
    }

    /// Lower bound of the interval containing `simplex`.
    pub fn parent_lower(&self, simplex: &[u32]) -> Option<&Simplex> {
        self.get(simplex)?.lower.map(|i| self.simplex_at(i))
    }

    /// Upper end `P ∪ {a : D_F(a, p) < r}` of the interval generated by ball `id`.
    fn upper_of(&self, id: usize) -> Simplex {
        let w = &self.witnesses[id];
        self.simplex_at(w.source).union(&w.inside)
    }
}

impl RadiusFunction for RadiusFiltration {
    fn radius_of(&self, simplex: &[u32]) -> Option<f64> {
        self.radius(simplex)
    }

    fn radii(&self) -> Box<dyn Iterator<Item = (&Simplex, f64)> + '_> {
        Box::new(self.entries.iter().map(|(s, e)| (s, e.radius)))
    }
}

/// Computes, for `ball` circumscribing `source`, the points strictly inside,
/// rejecting any point on the boundary.
pub(crate) fn points_inside(
    gen: &Generator,
    cloud: &PointCloud,
    source: &[u32],
    ball: &DualBall,
    tol: f64,
) -> Result<Vec<u32>> {
    let r = ball.radius;
    let slack = tol * (1.0 + r);
    let mut inside = Vec::new();
    let mut member = source.iter().peekable();
    for a in 0..cloud.len() as u32 {
        if member.peek() == Some(&&a) {
            member.next();
            continue;
        }
        let gap = gen.divergence_unchecked(cloud.point(a as usize), &ball.center) - r;
        if gap.abs() <= slack {
            return Err(Error::GeneralPositionViolation {
                point: a as usize,
                simplex: source.to_vec(),
                gap,
            });
        }
        if gap < 0.0 {
            inside.push(a);
        }
    }
    Ok(inside)
}

fn validate_inputs(gen: &Generator, cloud: &PointCloud, cutoff: f64) -> Result<()> {
    if cloud.dim() != gen.dimension {
        return Err(Error::DimensionMismatch {
            expected: gen.dimension,
            found: cloud.dim(),
        });
    }
    if cutoff.is_nan() || cutoff < 0.0 {
        return Err(Error::InvalidArgument(format!("cutoff must be nonnegative, got {cutoff}")));
    }
    if cloud.len() > u32::MAX as usize {
        return Err(Error::InvalidArgument("too many points".into()));
    }
    for p in cloud.iter() {
        gen.check(p)?;
    }
    Ok(())
}

/// Whether the edge `{i, j}` certainly has radius above `cutoff`, by the
/// per-coordinate bound, so its circumball need not be computed.
fn edge_exceeds(gen: &Generator, cloud: &PointCloud, i: u32, j: u32, cutoff: f64) -> bool {
    let bound = gen.pair_radius_lower_bound(cloud.point(i as usize), cloud.point(j as usize));
    bound > cutoff * (1.0 + 1e-9) + 1e-300
}

/// Candidate cofaces of one level: lexicographic extensions whose facets are
/// all present. Each candidate lists the entry indices of its facets,
/// ordered by the removed vertex position. `admit` sees the base simplex and
/// the added vertex before any facet lookup.
pub(crate) fn candidates<V: Sync>(
    entries: &IndexMap<Simplex, V>,
    level: Range<usize>,
    num_points: u32,
    admit: impl Fn(&[u32], u32) -> bool + Sync,
) -> Vec<(Vec<u32>, Vec<usize>)> {
    let chunks: Vec<Vec<(Vec<u32>, Vec<usize>)>> = level
        .into_par_iter()
        .map(|idx| {
            let base = entries.get_index(idx).expect("level index").0.vertices();
            let last = *base.last().expect("nonempty simplex");
            let mut out = Vec::new();
            let mut buf = Vec::with_capacity(base.len() + 1);
            'extend: for v in (last + 1..num_points).filter(|&v| admit(base, v)) {
                let mut verts = Vec::with_capacity(base.len() + 1);
                verts.extend_from_slice(base);
                verts.push(v);
                let mut facets = Vec::with_capacity(verts.len());
                for skip in 0..verts.len() {
                    if skip == verts.len() - 1 {
                        facets.push(idx);
                        continue;
                    }
                    facet_into(&verts, skip, &mut buf);
                    match entries.get_index_of(buf.as_slice()) {
                        Some(f) => facets.push(f),
                        None => continue 'extend,
                    }
                }
                out.push((verts, facets));
            }
            out
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Čech radius function on the `max_dim`-skeleton, keeping simplices with
/// radius at most `cutoff`.
pub fn cech_radius_function(
    gen: &Generator,
    cloud: &PointCloud,
    max_dim: usize,
    cutoff: f64,
) -> Result<(RadiusFiltration, BuildStats)> {
    cech_radius_function_with(gen, cloud, max_dim, cutoff, &BuildConfig::default())
}

pub fn cech_radius_function_with(
    gen: &Generator,
    cloud: &PointCloud,
    max_dim: usize,
    cutoff: f64,
    cfg: &BuildConfig,
) -> Result<(RadiusFiltration, BuildStats)> {
    validate_inputs(gen, cloud, cutoff)?;
    let num_points = cloud.len();
    let tol = cfg.general_position_tolerance;
    let mut stats = BuildStats {
        num_points,
        ..BuildStats::default()
    };
    let mut entries: IndexMap<Simplex, Entry> = IndexMap::new();
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut levels = Vec::new();

    for i in 0..num_points {
        let ball = DualBall {
            center: cloud.point(i).to_vec(),
            radius: 0.0,
        };
        let inside = points_inside(gen, cloud, &[i as u32], &ball, tol)?;
        stats.num_circumball_calls += 1;
        witnesses.push(Witness {
            ball,
            source: i,
            inside,
        });
        entries.insert(
            Simplex::vertex(i as u32),
            Entry {
                radius: 0.0,
                witness: i,
                role: None,
                lower: Some(i),
            },
        );
    }
    levels.push(0..num_points);

    for dim in 1..=max_dim {
        let prev = levels.last().cloned().expect("vertex level");
        if prev.is_empty() {
            break;
        }
        let cands = candidates(&entries, prev, num_points as u32, |base, v| {
            !(dim == 1 && cutoff.is_finite() && edge_exceeds(gen, cloud, base[0], v, cutoff))
        });

        // Marks inherited from facets whose ball strictly contains the new vertex.
        let marks: Vec<Option<usize>> = cands
            .par_iter()
            .map(|(verts, facets)| {
                let mut best: Option<usize> = None;
                for (skip, &f) in facets.iter().enumerate() {
                    let wid = entries[f].witness;
                    let w = &witnesses[wid];
                    if w.inside.binary_search(&verts[skip]).is_ok() {
                        best = Some(match best {
                            None => wid,
                            Some(cur) => prefer(&witnesses, cur, wid),
                        });
                    }
                }
                best
            })
            .collect();

        let unmarked: Vec<usize> = (0..cands.len()).filter(|&i| marks[i].is_none()).collect();
        let solved: Vec<Result<(CircumballResult, Vec<u32>)>> = unmarked
            .par_iter()
            .map(|&i| {
                let verts = &cands[i].0;
                let pts: Vec<&[f64]> = verts.iter().map(|&v| cloud.point(v as usize)).collect();
                let res = smallest_circumball_with(gen, &pts, &cfg.solver)?;
                let inside = if res.ball.radius <= cutoff {
                    points_inside(gen, cloud, verts, &res.ball, tol)?
                } else {
                    Vec::new()
                };
                Ok((res, inside))
            })
            .collect();

        let start = entries.len();
        let mut solved = solved.into_iter();
        for ((verts, _), mark) in cands.into_iter().zip(marks) {
            let index = entries.len();
            let (witness, radius) = match mark {
                Some(wid) => (wid, witnesses[wid].ball.radius),
                None => {
                    let (res, inside) = solved.next().expect("one solve per unmarked candidate")?;
                    stats.num_circumball_calls += 1;
                    stats.num_function_evals += res.function_evals;
                    if res.ball.radius > cutoff {
                        continue;
                    }
                    witnesses.push(Witness {
                        ball: res.ball,
                        source: index,
                        inside,
                    });
                    (witnesses.len() - 1, witnesses.last().expect("pushed").ball.radius)
                }
            };
            entries.insert(
                Simplex::from_sorted(&verts),
                Entry {
                    radius,
                    witness,
                    role: None,
                    lower: Some(witnesses[witness].source),
                },
            );
        }
        levels.push(start..entries.len());
    }
    while levels.last().is_some_and(|l| l.is_empty()) && levels.len() > 1 {
        levels.pop();
    }

    assign_roles(&mut entries, &witnesses);
    stats.num_simplices = entries.len();
    stats.num_edges = levels.get(1).map_or(0, |l| l.len());
    let filtration = RadiusFiltration {
        kind: FiltrationKind::Cech,
        entries,
        witnesses,
        levels,
        max_dim,
        cutoff,
        stats,
    };
    Ok((filtration, stats))
}

/// Deterministic choice between two marking balls that should coincide:
/// smaller radius, then lexicographically smaller center, then older ball.
fn prefer(witnesses: &[Witness], a: usize, b: usize) -> usize {
    let (wa, wb) = (&witnesses[a].ball, &witnesses[b].ball);
    let ord = wa
        .radius
        .total_cmp(&wb.radius)
        .then_with(|| {
            wa.center
                .iter()
                .zip(&wb.center)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .then(a.cmp(&b));
    if ord.is_le() {
        a
    } else {
        b
    }
}

fn assign_roles(entries: &mut IndexMap<Simplex, Entry>, witnesses: &[Witness]) {
    let mut members = vec![0usize; witnesses.len()];
    for e in entries.values() {
        members[e.witness] += 1;
    }
    for (idx, (s, e)) in entries.iter_mut().enumerate() {
        let w = &witnesses[e.witness];
        e.role = Some(if w.source == idx {
            if members[e.witness] == 1 {
                IntervalRole::Singleton
            } else {
                IntervalRole::LowerBound
            }
        } else if s.len() == witnesses_source_len(s, w) {
            IntervalRole::UpperBound
        } else {
            IntervalRole::Interior
        });
    }
}

/// Size of the full interval upper bound, given one member of the interval.
fn witnesses_source_len(member: &Simplex, w: &Witness) -> usize {
    // Members contain the source and a subset of `inside`; the upper bound is
    // their union, so its size is |member ∖ inside| + |inside|.
    let from_inside = member.iter().filter(|v| w.inside.binary_search(v).is_ok()).count();
    member.len() - from_inside + w.inside.len()
}

/// Vietoris–Rips radius function: vertices at 0, edges at the radius of their
/// smallest circumball, higher simplices at the maximum over their edges.
pub fn rips_radius_function(
    gen: &Generator,
    cloud: &PointCloud,
    max_dim: usize,
    cutoff: f64,
) -> Result<RadiusFiltration> {
    rips_radius_function_with(gen, cloud, max_dim, cutoff, &BuildConfig::default())
}

pub fn rips_radius_function_with(
    gen: &Generator,
    cloud: &PointCloud,
    max_dim: usize,
    cutoff: f64,
    cfg: &BuildConfig,
) -> Result<RadiusFiltration> {
    validate_inputs(gen, cloud, cutoff)?;
    let num_points = cloud.len();
    let mut stats = BuildStats {
        num_points,
        ..BuildStats::default()
    };
    let mut entries: IndexMap<Simplex, Entry> = IndexMap::new();
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut levels = Vec::new();

    for i in 0..num_points {
        witnesses.push(Witness {
            ball: DualBall {
                center: cloud.point(i).to_vec(),
                radius: 0.0,
            },
            source: i,
            inside: Vec::new(),
        });
        entries.insert(
            Simplex::vertex(i as u32),
            Entry {
                radius: 0.0,
                witness: i,
                role: None,
                lower: None,
            },
        );
    }
    stats.num_circumball_calls += num_points;
    levels.push(0..num_points);

    if max_dim >= 1 {
        let pairs: Vec<(u32, u32)> = (0..num_points as u32)
            .flat_map(|i| (i + 1..num_points as u32).map(move |j| (i, j)))
            .filter(|&(i, j)| !(cutoff.is_finite() && edge_exceeds(gen, cloud, i, j, cutoff)))
            .collect();
        let solved: Vec<Result<CircumballResult>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                smallest_circumball_with(
                    gen,
                    &[cloud.point(i as usize), cloud.point(j as usize)],
                    &cfg.solver,
                )
            })
            .collect();
        let start = entries.len();
        for (&(i, j), res) in pairs.iter().zip(solved) {
            let res = res?;
            stats.num_circumball_calls += 1;
            stats.num_function_evals += res.function_evals;
            if res.ball.radius > cutoff {
                continue;
            }
            let radius = res.ball.radius;
            witnesses.push(Witness {
                ball: res.ball,
                source: entries.len(),
                inside: Vec::new(),
            });
            entries.insert(
                Simplex::from_sorted(&[i, j]),
                Entry {
                    radius,
                    witness: witnesses.len() - 1,
                    role: None,
                    lower: None,
                },
            );
        }
        levels.push(start..entries.len());
    }

    for _dim in 2..=max_dim {
        let prev = levels.last().cloned().expect("edge level");
        if prev.is_empty() {
            break;
        }
        let cands = candidates(&entries, prev, num_points as u32, |_, _| true);
        let start = entries.len();
        for (verts, facets) in cands {
            let mut critical = facets[0];
            for &f in &facets[1..] {
                if entries[f].radius > entries[critical].radius {
                    critical = f;
                }
            }
            let Entry { radius, witness, .. } = entries[critical];
            entries.insert(
                Simplex::from_sorted(&verts),
                Entry {
                    radius,
                    witness,
                    role: None,
                    lower: None,
                },
            );
        }
        levels.push(start..entries.len());
    }
    while levels.last().is_some_and(|l| l.is_empty()) && levels.len() > 1 {
        levels.pop();
    }

    stats.num_simplices = entries.len();
    stats.num_edges = levels.get(1).map_or(0, |l| l.len());
    Ok(RadiusFiltration {
        kind: FiltrationKind::Rips,
        entries,
        witnesses,
        levels,
        max_dim,
        cutoff,
        stats,
    })
}

/// One interval `[lower, upper]` of the generalized discrete gradient.
///
/// `upper` is the full upper bound `P ∪ {a : D_F(a, p) ≤ r}`; when the
/// filtration is truncated by dimension it may itself be absent, and
/// `members` counts the simplices of the interval that are present.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lower: Simplex,
    pub upper: Simplex,
    pub radius: f64,
    pub members: usize,
}

/// Partitions a Čech filtration into the intervals of its discrete gradient.
pub fn extract_intervals(f: &RadiusFiltration) -> Result<Vec<Interval>> {
    if f.kind != FiltrationKind::Cech {
        return Err(Error::InvalidArgument(
            "intervals are defined for Čech filtrations only".into(),
        ));
    }
    let uppers: Vec<Simplex> = (0..f.witnesses.len()).map(|id| f.upper_of(id)).collect();
    let mut members = vec![0usize; f.witnesses.len()];
    let mut buf = Vec::new();

    for (idx, (s, e)) in f.entries.iter().enumerate() {
        let w = &f.witnesses[e.witness];
        let lower = f.simplex_at(w.source);
        if !lower.is_face_of(s) || !s.is_face_of(&uppers[e.witness]) {
            return Err(Error::PartitionFailure(format!(
                "{s:?} lies outside its interval [{lower:?}, {:?}]",
                uppers[e.witness]
            )));
        }
        if e.lower != Some(w.source) || f.entries[w.source].witness != e.witness {
            return Err(Error::PartitionFailure(format!("{s:?} has an inconsistent lower bound")));
        }
        members[e.witness] += 1;

        for skip in 0..s.len() {
            if s.len() == 1 {
                break;
            }
            facet_into(s.vertices(), skip, &mut buf);
            let Some(face) = f.entries.get(buf.as_slice()) else {
                return Err(Error::PartitionFailure(format!("facet {buf:?} of {s:?} is missing")));
            };
            if face.witness == e.witness {
                continue;
            }
            let other = face.witness;
            let other_lower = f.simplex_at(f.witnesses[other].source);
            if other_lower.is_face_of(s) && is_subset(s.vertices(), uppers[other].vertices()) {
                return Err(Error::PartitionFailure(format!(
                    "{s:?} lies in two intervals (lower bounds {lower:?} and {other_lower:?})"
                )));
            }
            if face.radius == e.radius {
                return Err(Error::PartitionFailure(format!(
                    "face {buf:?} of {s:?} has equal radius {} in a different interval",
                    e.radius
                )));
            }
        }
        let _ = idx;
    }

    let mut out = Vec::new();
    for (id, w) in f.witnesses.iter().enumerate() {
        if members[id] == 0 {
            continue;
        }
        out.push(Interval {
            lower: f.simplex_at(w.source).clone(),
            upper: uppers[id].clone(),
            radius: w.ball.radius,
            members: members[id],
        });
    }
    out.sort_by(|a, b| {
        a.lower
            .len()
            .cmp(&b.lower.len())
            .then_with(|| a.lower.cmp(&b.lower))
    });
    Ok(out)
}
