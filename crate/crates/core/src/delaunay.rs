//! Bregman Delaunay triangulation and its radius function.
//!
//! A simplex is Delaunay iff it has an empty dual circumball. Writing the
//! ball center through its polar `u = ∇F(q)`, the divergence to the center is
//! `D_F(x, q) = F(x) − ⟨u, x⟩ + F*(u)`, so a circumball of `P` is empty iff
//! the affine function `x ↦ F(x) − ⟨u, x⟩` takes one common value on `P` and
//! no smaller value elsewhere in the cloud. That is a linear feasibility
//! problem in `u`, restricted to the conjugate domain.

use indexmap::IndexMap;
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;

use crate::circumball::smallest_circumball_with;
use crate::complexes::{candidates, BuildConfig, BuildStats, Interval, RadiusFunction};
use crate::divergence::{DualBall, Generator, PointCloud};
use crate::error::{Error, Result};
use crate::simplex::{is_subset, Simplex};

#[derive(Debug, Clone, PartialEq)]
pub struct DelaunayEntry {
    /// `None` until the radius function has been evaluated.
    pub radius: Option<f64>,
    /// Index of the witness ball: the smallest empty circumball of the
    /// interval's upper bound.
    pub witness: Option<usize>,
    /// Index of this simplex's own smallest circumball, if it is empty.
    own: Option<usize>,
}

/// Delaunay simplices with empty-circumball certificates.
#[derive(Debug, Clone)]
pub struct DelaunayComplex {
    entries: IndexMap<Simplex, DelaunayEntry>,
    balls: Vec<DualBall>,
    /// Entry index of the simplex each ball circumscribes.
    sources: Vec<usize>,
    stats: BuildStats,
}

impl DelaunayComplex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, simplex: &[u32]) -> bool {
        self.entries.contains_key(simplex)
    }

    pub fn get(&self, simplex: &[u32]) -> Option<&DelaunayEntry> {
        self.entries.get(simplex)
    }

    pub fn radius(&self, simplex: &[u32]) -> Option<f64> {
        self.get(simplex)?.radius
    }

    pub fn witness(&self, simplex: &[u32]) -> Option<&DualBall> {
        self.get(simplex)?.witness.map(|w| &self.balls[w])
    }

    /// Simplices in dimension-then-lexicographic order.
    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> + '_ {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, &DelaunayEntry)> + '_ {
        self.entries.iter()
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }

    /// Intervals `[lower, upper]` of the Delaunay radius function; `upper` is
    /// the simplex circumscribed by the shared witness.
    pub fn intervals(&self) -> Result<Vec<Interval>> {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.balls.len()];
        for (idx, e) in self.entries.values().enumerate() {
            let w = e
                .witness
                .ok_or_else(|| Error::PartitionFailure("radius function not evaluated".into()))?;
            groups[w].push(idx);
        }
        let mut out = Vec::new();
        for (w, members) in groups.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let upper = self.entries.get_index(self.sources[w]).expect("source").0;
            let mut lower: Vec<u32> = upper.vertices().to_vec();
            for &m in members {
                let s = self.entries.get_index(m).expect("member").0;
                if !s.is_face_of(upper) {
                    return Err(Error::PartitionFailure(format!(
                        "{s:?} is not a face of its witness simplex {upper:?}"
                    )));
                }
                lower.retain(|v| s.contains(*v));
            }
            if lower.is_empty() {
                return Err(Error::PartitionFailure(format!(
                    "members of the interval of {upper:?} share no vertex"
                )));
            }
            let lower = Simplex::from_sorted(&lower);
            let free: Vec<u32> = upper.iter().filter(|v| !lower.contains(*v)).collect();
            if free.len() >= 31 {
                return Err(Error::PartitionFailure("interval too large to verify".into()));
            }
            for mask in 0u32..(1 << free.len()) {
                let extra: Vec<u32> = (0..free.len())
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| free[i])
                    .collect();
                let s = lower.union(&extra);
                match self.entries.get(s.vertices()) {
                    Some(e) if e.witness == Some(w) => {}
                    _ => {
                        return Err(Error::PartitionFailure(format!(
                            "{s:?} lies between {lower:?} and {upper:?} but outside their interval"
                        )))
                    }
                }
            }
            if members.len() != 1 << free.len() {
                return Err(Error::PartitionFailure(format!(
                    "interval [{lower:?}, {upper:?}] has stray members"
                )));
            }
            out.push(Interval {
                lower,
                upper: upper.clone(),
                radius: self.balls[w].radius,
                members: members.len(),
            });
        }

        let mut buf = Vec::new();
        for (s, e) in self.entries.iter() {
            for skip in 0..s.len() {
                if s.len() == 1 {
                    break;
                }
                crate::simplex::facet_into(s.vertices(), skip, &mut buf);
                let face = self.entries.get(buf.as_slice()).ok_or_else(|| {
                    Error::PartitionFailure(format!("facet {buf:?} of {s:?} is missing"))
                })?;
                if face.witness != e.witness && face.radius == e.radius {
                    return Err(Error::PartitionFailure(format!(
                        "face {buf:?} of {s:?} has equal radius in another interval"
                    )));
                }
            }
        }
        out.sort_by(|a, b| a.lower.len().cmp(&b.lower.len()).then_with(|| a.lower.cmp(&b.lower)));
        Ok(out)
    }
}

impl RadiusFunction for DelaunayComplex {
    fn radius_of(&self, simplex: &[u32]) -> Option<f64> {
        self.radius(simplex)
    }

    fn radii(&self) -> Box<dyn Iterator<Item = (&Simplex, f64)> + '_> {
        Box::new(self.entries.iter().filter_map(|(s, e)| e.radius.map(|r| (s, r))))
    }
}

/// Outcome of one Delaunay test.
struct Verdict {
    delaunay: bool,
    /// The simplex's smallest circumball, when it exists and is empty.
    own: Option<DualBall>,
    evals: usize,
}

fn classify(gen: &Generator, cloud: &PointCloud, verts: &[u32], cfg: &BuildConfig) -> Result<Verdict> {
    let pts: Vec<&[f64]> = verts.iter().map(|&v| cloud.point(v as usize)).collect();
    let tol = cfg.general_position_tolerance;
    let mut evals = 0;
    match smallest_circumball_with(gen, &pts, &cfg.solver) {
        Ok(res) => {
            evals += res.function_evals;
            if ball_is_empty(gen, cloud, verts, &res.ball, tol)? {
                return Ok(Verdict {
                    delaunay: true,
                    own: Some(res.ball),
                    evals,
                });
            }
        }
        Err(Error::Unbounded | Error::DomainEscape) => {}
        Err(e) => return Err(e),
    }
    let delaunay = empty_circumball_exists(gen, cloud, verts, cfg)?;
    Ok(Verdict {
        delaunay,
        own: None,
        evals,
    })
}

/// Whether no point lies strictly inside `ball`. A point clearly inside
/// settles the question even if others sit on the boundary; without one, a
/// boundary point is a general-position violation.
fn ball_is_empty(gen: &Generator, cloud: &PointCloud, source: &[u32], ball: &DualBall, tol: f64) -> Result<bool> {
    let slack = tol * (1.0 + ball.radius);
    let mut marginal = None;
    for a in (0..cloud.len() as u32).filter(|a| !source.contains(a)) {
        let gap = gen.divergence_unchecked(cloud.point(a as usize), &ball.center) - ball.radius;
        if gap < -slack {
            return Ok(false);
        }
        if gap <= slack && marginal.is_none() {
            marginal = Some((a, gap));
        }
    }
    match marginal {
        Some((point, gap)) => Err(Error::GeneralPositionViolation {
            point: point as usize,
            simplex: source.to_vec(),
            gap,
        }),
        None => Ok(true),
    }
}

/// Magnitude beyond which polar-coordinate bounds are left out of the LP.
const LP_BOUND_LIMIT: f64 = 1e6;

/// Whether `verts` has an empty dual circumball anywhere in the domain.
///
/// Maximizes the smallest slack `t` of the inequalities, capped at 1, then
/// re-measures the slack at the returned polar center.
fn empty_circumball_exists(gen: &Generator, cloud: &PointCloud, verts: &[u32], cfg: &BuildConfig) -> Result<bool> {
    let n = gen.dimension;
    let tol = cfg.general_position_tolerance;
    // Centers the circumball solver would treat as escaped are excluded here
    // too, so both tests agree on which circumballs exist. Huge bounds only
    // cut off absurd solutions and upset the simplex method; they stay open.
    let open = |b: f64, inf: f64| if b.abs() > LP_BOUND_LIMIT { inf } else { b };
    let (lo, hi) = gen.polar_bounds(cfg.solver.escape_threshold);
    let bounds = (open(lo, f64::NEG_INFINITY), open(hi, f64::INFINITY));
    let a0 = cloud.point(verts[0] as usize);
    let f0 = gen.value(a0);

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let u: Vec<_> = (0..n).map(|_| lp.add_var(0.0, bounds)).collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for &v in &verts[1..] {
        let a = cloud.point(v as usize);
        let row: Vec<_> = (0..n).map(|i| (u[i], a[i] - a0[i])).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, gen.value(a) - f0);
    }
    let mut member = verts.iter().peekable();
    let mut others = Vec::new();
    for x in 0..cloud.len() as u32 {
        if member.peek() == Some(&&x) {
            member.next();
            continue;
        }
        others.push(x);
        let p = cloud.point(x as usize);
        let mut row: Vec<_> = (0..n).map(|i| (u[i], p[i] - a0[i])).collect();
        row.push((t, 1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, gen.value(p) - f0);
    }

    let solution = match lp.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map_err(|_| Error::LinearProgram("solve interrupted".into()))?,
        Err(microlp::Error::Infeasible) => return Ok(false),
        Err(e) => return Err(Error::LinearProgram(e.to_string())),
    };
    let uv: Vec<f64> = u.iter().map(|&var| solution.var_value(var)).collect();
    let level = |p: &[f64]| gen.value(p) - p.iter().zip(&uv).map(|(a, b)| a * b).sum::<f64>();
    let common = verts
        .iter()
        .map(|&v| level(cloud.point(v as usize)))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut slack = 1.0f64;
    let mut worst = None;
    for &x in &others {
        let s = level(cloud.point(x as usize)) - common;
        if s < slack {
            slack = s;
            worst = Some(x);
        }
    }
    if slack > tol {
        Ok(true)
    } else if slack < -tol {
        Ok(false)
    } else {
        Err(Error::GeneralPositionViolation {
            point: worst.map_or(0, |x| x as usize),
            simplex: verts.to_vec(),
            gap: slack,
        })
    }
}

/// Whether `simplex` belongs to the Bregman Delaunay triangulation of `cloud`.
pub fn is_delaunay(gen: &Generator, cloud: &PointCloud, simplex: &Simplex) -> Result<bool> {
    is_delaunay_with(gen, cloud, simplex, &BuildConfig::default())
}

pub fn is_delaunay_with(
    gen: &Generator,
    cloud: &PointCloud,
    simplex: &Simplex,
    cfg: &BuildConfig,
) -> Result<bool> {
    check_simplex(gen, cloud, simplex)?;
    Ok(classify(gen, cloud, simplex.vertices(), cfg)?.delaunay)
}

fn check_simplex(gen: &Generator, cloud: &PointCloud, simplex: &Simplex) -> Result<()> {
    if cloud.dim() != gen.dimension {
        return Err(Error::DimensionMismatch {
            expected: gen.dimension,
            found: cloud.dim(),
        });
    }
    if let Some(v) = simplex.iter().find(|&v| v as usize >= cloud.len()) {
        return Err(Error::InvalidArgument(format!("vertex {v} out of range")));
    }
    if simplex.len() > gen.dimension + 1 {
        return Err(Error::Degenerate { ratio: 0.0 });
    }
    Ok(())
}

/// Radius of the smallest circumball of `simplex` if that ball is empty.
pub fn delaunay_radius(gen: &Generator, cloud: &PointCloud, simplex: &Simplex) -> Result<Option<f64>> {
    check_simplex(gen, cloud, simplex)?;
    let cfg = BuildConfig::default();
    let pts: Vec<&[f64]> = simplex.iter().map(|v| cloud.point(v as usize)).collect();
    match smallest_circumball_with(gen, &pts, &cfg.solver) {
        Ok(res) => {
            let empty = ball_is_empty(gen, cloud, simplex.vertices(), &res.ball, cfg.general_position_tolerance)?;
            Ok(empty.then_some(res.ball.radius))
        }
        Err(Error::Unbounded | Error::DomainEscape) => Ok(None),
        Err(e) => Err(e),
    }
}

/// All Delaunay simplices, radii unset.
pub fn delaunay_triangulation(gen: &Generator, cloud: &PointCloud) -> Result<DelaunayComplex> {
    delaunay_triangulation_with(gen, cloud, &BuildConfig::default())
}

pub fn delaunay_triangulation_with(
    gen: &Generator,
    cloud: &PointCloud,
    cfg: &BuildConfig,
) -> Result<DelaunayComplex> {
    if cloud.dim() != gen.dimension {
        return Err(Error::DimensionMismatch {
            expected: gen.dimension,
            found: cloud.dim(),
        });
    }
    for p in cloud.iter() {
        gen.check(p)?;
    }
    let num_points = cloud.len();
    let mut stats = BuildStats {
        num_points,
        ..BuildStats::default()
    };
    let mut entries: IndexMap<Simplex, DelaunayEntry> = IndexMap::new();
    let mut balls = Vec::new();
    let mut sources = Vec::new();

    let mut push = |entries: &mut IndexMap<Simplex, DelaunayEntry>, verts: &[u32], verdict: Verdict| {
        let own = verdict.own.map(|ball| {
            balls.push(ball);
            sources.push(entries.len());
            balls.len() - 1
        });
        entries.insert(
            Simplex::from_sorted(verts),
            DelaunayEntry {
                radius: None,
                witness: None,
                own,
            },
        );
    };

    let vertex_verdicts: Vec<Result<Verdict>> = (0..num_points as u32)
        .into_par_iter()
        .map(|v| classify(gen, cloud, &[v], cfg))
        .collect();
    for (v, verdict) in vertex_verdicts.into_iter().enumerate() {
        let verdict = verdict?;
        stats.num_circumball_calls += 1;
        stats.num_function_evals += verdict.evals;
        if verdict.delaunay {
            push(&mut entries, &[v as u32], verdict);
        }
    }

    let mut level = 0..entries.len();
    for _dim in 1..=gen.dimension {
        if level.is_empty() {
            break;
        }
        let cands = candidates(&entries, level.clone(), num_points as u32, |_, _| true);
        let verdicts: Vec<Result<Verdict>> = cands
            .par_iter()
            .map(|(verts, _)| classify(gen, cloud, verts, cfg))
            .collect();
        let start = entries.len();
        for ((verts, _), verdict) in cands.iter().zip(verdicts) {
            let verdict = verdict?;
            stats.num_circumball_calls += 1;
            stats.num_function_evals += verdict.evals;
            if verdict.delaunay {
                push(&mut entries, verts, verdict);
            }
        }
        level = start..entries.len();
    }

    stats.num_simplices = entries.len();
    stats.num_edges = entries.keys().filter(|s| s.len() == 2).count();
    Ok(DelaunayComplex {
        entries,
        balls,
        sources,
        stats,
    })
}

/// Delaunay triangulation with the Delaunay radius function evaluated.
///
/// Simplices are visited by decreasing dimension. A simplex whose smallest
/// circumball is empty takes that radius; any other simplex inherits the
/// smallest value among its codimension-one cofaces.
pub fn delaunay_radius_function(gen: &Generator, cloud: &PointCloud) -> Result<DelaunayComplex> {
    delaunay_radius_function_with(gen, cloud, &BuildConfig::default())
}

pub fn delaunay_radius_function_with(
    gen: &Generator,
    cloud: &PointCloud,
    cfg: &BuildConfig,
) -> Result<DelaunayComplex> {
    let mut del = delaunay_triangulation_with(gen, cloud, cfg)?;
    assign_radii(&mut del, cloud.len() as u32)?;
    Ok(del)
}

fn assign_radii(del: &mut DelaunayComplex, num_points: u32) -> Result<()> {
    let max_len = del.entries.keys().map(|s| s.len()).max().unwrap_or(0);
    let mut buf = Vec::new();
    for len in (1..=max_len).rev() {
        for idx in 0..del.entries.len() {
            let (s, e) = del.entries.get_index(idx).expect("index");
            if s.len() != len {
                continue;
            }
            let value = match e.own {
                Some(own) => (del.balls[own].radius, own),
                None => {
                    let mut best: Option<(f64, usize)> = None;
                    for v in 0..num_points {
                        if s.contains(v) {
                            continue;
                        }
                        buf.clear();
                        buf.extend(s.iter().filter(|&w| w < v));
                        buf.push(v);
                        buf.extend(s.iter().filter(|&w| w > v));
                        let Some(coface) = del.entries.get(buf.as_slice()) else {
                            continue;
                        };
                        if let (Some(r), Some(w)) = (coface.radius, coface.witness) {
                            if best.is_none_or(|(b, _)| r < b) {
                                best = Some((r, w));
                            }
                        }
                    }
                    best.ok_or_else(|| {
                        Error::PartitionFailure(format!(
                            "{s:?} has a non-empty circumball and no Delaunay coface"
                        ))
                    })?
                }
            };
            let e = &mut del.entries[idx];
            e.radius = Some(value.0);
            e.witness = Some(value.1);
        }
    }
    debug_assert!(del
        .entries
        .iter()
        .all(|(s, e)| e.witness.is_none_or(|w| is_subset(s.vertices(), del.entries.get_index(del.sources[w]).unwrap().0.vertices()))));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(gen: &Generator, pts: &[[f64; 2]]) -> PointCloud {
        PointCloud::new(gen, &pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn s(v: &[u32]) -> Simplex {
        Simplex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn line_vertices_are_delaunay() {
        let gen = Generator::sq_euclidean(1);
        let c = PointCloud::new(&gen, &[vec![0.0], vec![1.0]]).unwrap();
        assert!(is_delaunay(&gen, &c, &s(&[0])).unwrap());
        assert!(is_delaunay(&gen, &c, &s(&[1])).unwrap());
        assert!(is_delaunay(&gen, &c, &s(&[0, 1])).unwrap());
    }

    /// Slightly irregular square plus an interior point; exact corners would
    /// be cocircular and sit on the Thales circles of the diagonals.
    fn square_plus_center() -> (Generator, PointCloud) {
        let gen = Generator::sq_euclidean(2);
        let c = cloud(&gen, &[[0.0, 0.0], [1.0, 0.04], [1.03, 1.02], [-0.02, 0.97], [0.5, 0.55]]);
        (gen, c)
    }

    #[test]
    fn square_diagonal_is_not_delaunay() {
        let (gen, c) = square_plus_center();
        assert!(!is_delaunay(&gen, &c, &s(&[0, 2])).unwrap());
        assert!(!is_delaunay(&gen, &c, &s(&[1, 3])).unwrap());
        assert!(is_delaunay(&gen, &c, &s(&[0, 1])).unwrap());
        assert!(is_delaunay(&gen, &c, &s(&[0, 4])).unwrap());
        let del = delaunay_triangulation(&gen, &c).unwrap();
        assert_eq!(del.simplices().filter(|s| s.len() == 3).count(), 4);
        assert_eq!(del.simplices().filter(|s| s.len() == 2).count(), 8);
    }

    #[test]
    fn square_edges_radii() {
        let (gen, c) = square_plus_center();
        // The bottom edge's diametral ball has radius 0.5·(0.5² + 0.02²) = 0.1252;
        // the inner point is at divergence 0.5·0.53² = 0.14045 from its center.
        let bottom = delaunay_radius(&gen, &c, &s(&[0, 1])).unwrap().unwrap();
        assert!((bottom - 0.1252).abs() < 1e-12);
        // The top edge's diametral ball contains the center.
        assert_eq!(delaunay_radius(&gen, &c, &s(&[2, 3])).unwrap(), None);
        let del = delaunay_radius_function(&gen, &c).unwrap();
        let top = del.radius(&[2, 3]).unwrap();
        let tri = del.radius(&[2, 3, 4]).unwrap();
        assert_eq!(top, tri);
        let intervals = del.intervals().unwrap();
        let total: usize = intervals.iter().map(|i| i.members).sum();
        assert_eq!(total, del.len());
    }

    #[test]
    fn single_triangle_is_fully_delaunay() {
        for gen in [Generator::sq_euclidean(2), Generator::shannon(2), Generator::burg(2), Generator::exponential(2)] {
            let c = cloud(&gen, &[[0.3, 0.4], [0.9, 0.35], [0.5, 0.8]]);
            let del = delaunay_radius_function(&gen, &c).unwrap();
            assert_eq!(del.len(), 7, "{:?}", gen.kind);
        }
    }

    #[test]
    fn acute_triangle_matches_cech() {
        let gen = Generator::sq_euclidean(2);
        let h = 3f64.sqrt() / 2.0;
        let c = cloud(&gen, &[[0.0, 0.0], [1.0, 0.0], [0.5, h]]);
        let del = delaunay_radius_function(&gen, &c).unwrap();
        let (cech, _) = crate::complexes::cech_radius_function(&gen, &c, 2, f64::INFINITY).unwrap();
        for (simplex, e) in cech.iter() {
            assert!((del.radius(simplex.vertices()).unwrap() - e.radius).abs() < 1e-12);
        }
    }

    #[test]
    fn obtuse_triangle_edge() {
        let gen = Generator::sq_euclidean(2);
        let c = cloud(&gen, &[[0.0, 0.0], [4.0, 0.0], [0.1, 0.3]]);
        // The obtuse vertex sits inside the longest edge's diametral ball:
        // 0.5·(1.9² + 0.3²) = 1.85 < 2.
        assert_eq!(delaunay_radius(&gen, &c, &s(&[0, 1])).unwrap(), None);
        // A short edge keeps its own ball: radius 0.5·(0.1² + 0.3²)/4 = 0.0125.
        let short = delaunay_radius(&gen, &c, &s(&[0, 2])).unwrap().unwrap();
        assert!((short - 0.0125).abs() < 1e-12);
        let del = delaunay_radius_function(&gen, &c).unwrap();
        assert_eq!(del.radius(&[0, 1]), del.radius(&[0, 1, 2]));
    }

    #[test]
    fn oversized_simplex_is_rejected() {
        let (gen, c) = square_plus_center();
        assert!(is_delaunay(&gen, &c, &s(&[0, 1, 2, 3])).is_err());
    }
}
