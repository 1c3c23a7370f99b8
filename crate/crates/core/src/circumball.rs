//! Smallest dual circumballs.
//!
//! For a `k`-simplex with vertices `a₀..a_k` the lifted points `(aᵢ, F(aᵢ))`
//! span a `k`-plane. Parametrized by affine coordinates `λ ∈ ℝᵏ`, a point of
//! that plane is `(q(λ), ψ(λ))` with `q(λ) = a₀ + Σ λᵢ (aᵢ − a₀)` and
//! `ψ(λ) = F(a₀) + Σ λᵢ (F(aᵢ) − F(a₀))`. The height `g(λ) = ψ(λ) − F(q(λ))`
//! is strictly concave; its maximizer is the center of the smallest dual
//! circumball and the maximum is the radius.
//!
//! The partial derivatives `∂g/∂λᵢ = D_F(aᵢ, q) − D_F(a₀, q)` are the
//! differences of divergences to the vertices, so a vanishing gradient is
//! exactly the statement that every vertex lies on the ball boundary.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{Cholesky, DMatrix, DVector};

use crate::divergence::{DomainConstraint, DualBall, Generator, PointCloud};
use crate::error::{Error, Result};
use crate::simplex::Simplex;

/// Numerical knobs of the circumball solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop once every chart-gradient component is at most this value,
    /// relative to one plus the magnitude of the terms it is computed from.
    pub gradient_tolerance: f64,
    /// Hard iteration cap; reaching it is an error.
    pub max_iterations: usize,
    /// Condition estimate above which Newton steps give way to gradient ascent.
    pub ill_conditioned: f64,
    /// Armijo sufficient-increase constant.
    pub armijo_slope: f64,
    /// Step shrink factor of the backtracking line search.
    pub backtrack: f64,
    /// Relative singular value threshold for affine dependence.
    pub rank_tolerance: f64,
    /// Centers with a coordinate beyond this magnitude are taken to have
    /// escaped to infinity, meaning no circumball exists in the domain.
    pub escape_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gradient_tolerance: 1e-10,
            max_iterations: 200,
            ill_conditioned: 1e12,
            armijo_slope: 1e-4,
            backtrack: 0.5,
            rank_tolerance: 1e-10,
            escape_threshold: 1e12,
        }
    }
}

/// Affine coordinates on the lifted plane through a simplex.
#[derive(Debug, Clone)]
pub struct AffinePlaneChart {
    n: usize,
    k: usize,
    base: Vec<f64>,
    /// Row `i` holds `aᵢ₊₁ − a₀`.
    directions: Vec<f64>,
    lifted_base: f64,
    lifted_directions: Vec<f64>,
}

impl AffinePlaneChart {
    pub fn new(gen: &Generator, points: &[&[f64]], cfg: &SolverConfig) -> Result<Self> {
        let Some((first, rest)) = points.split_first() else {
            return Err(Error::InvalidArgument("empty simplex".into()));
        };
        for p in points {
            gen.check(p)?;
        }
        let n = gen.dimension;
        let k = rest.len();
        if k > n {
            return Err(Error::Degenerate { ratio: 0.0 });
        }
        let lifted_base = gen.value(first);
        let mut directions = Vec::with_capacity(k * n);
        let mut lifted_directions = Vec::with_capacity(k);
        for p in rest {
            directions.extend(p.iter().zip(first.iter()).map(|(a, b)| a - b));
            lifted_directions.push(gen.value(p) - lifted_base);
        }
        if k > 0 {
            let m = DMatrix::from_row_slice(k, n, &directions);
            let sv = m.singular_values();
            let max = sv.max();
            let min = sv.min();
            let ratio = if max > 0.0 { min / max } else { 0.0 };
            if !(ratio > cfg.rank_tolerance) {
                return Err(Error::Degenerate { ratio });
            }
        }
        Ok(AffinePlaneChart {
            n,
            k,
            base: first.to_vec(),
            directions,
            lifted_base,
            lifted_directions,
        })
    }

    /// Dimension `k` of the chart.
    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i * self.n..(i + 1) * self.n]
    }

    pub fn lifted_base(&self) -> f64 {
        self.lifted_base
    }

    pub fn lifted_directions(&self) -> &[f64] {
        &self.lifted_directions
    }

    pub fn center_into(&self, lambda: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.base);
        for (i, &l) in lambda.iter().enumerate() {
            for (o, d) in out.iter_mut().zip(self.direction(i)) {
                *o += l * d;
            }
        }
    }

    pub fn center(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.center_into(lambda, &mut out);
        out
    }

    /// Height `ψ(λ)` of the lifted plane.
    pub fn height(&self, lambda: &[f64]) -> f64 {
        self.lifted_base
            + lambda
                .iter()
                .zip(&self.lifted_directions)
                .map(|(l, d)| l * d)
                .sum::<f64>()
    }

    /// Magnitude of the terms summed into `ψ(λ)`, which bounds its rounding error.
    fn height_scale(&self, lambda: &[f64]) -> f64 {
        self.lifted_base.abs()
            + lambda
                .iter()
                .zip(&self.lifted_directions)
                .map(|(l, d)| (l * d).abs())
                .sum::<f64>()
    }

    /// `g(λ) = ψ(λ) − F(q(λ))`, or `None` when `q(λ)` leaves the domain.
    pub fn objective(&self, gen: &Generator, lambda: &[f64]) -> Option<f64> {
        let q = self.center(lambda);
        gen.domain
            .contains(&q)
            .then(|| self.height(lambda) - gen.value(&q))
    }

    /// Analytic chart gradient `∂g/∂λᵢ = (F(aᵢ) − F(a₀)) − ⟨∇F(q), aᵢ − a₀⟩`.
    pub fn objective_gradient(&self, gen: &Generator, lambda: &[f64]) -> Vec<f64> {
        let q = self.center(lambda);
        let mut grad_f = vec![0.0; self.n];
        gen.gradient_into(&q, &mut grad_f);
        let mut out = vec![0.0; self.k];
        self.chart_gradient(&grad_f, &mut out);
        out
    }

    /// Magnitude of the terms summed into chart-gradient component `i`,
    /// which bounds its rounding error.
    fn gradient_scale(&self, i: usize, grad_f: &[f64]) -> f64 {
        let dot: f64 = self.direction(i).iter().zip(grad_f).map(|(d, g)| (d * g).abs()).sum();
        self.lifted_directions[i].abs() + dot
    }

    fn chart_gradient(&self, grad_f: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let dot: f64 = self.direction(i).iter().zip(grad_f).map(|(d, g)| d * g).sum();
            *o = self.lifted_directions[i] - dot;
        }
    }

    /// `Dᵀ diag(w) D`, the negated Hessian of `g`.
    fn curvature(&self, weights: &[f64]) -> DMatrix<f64> {
        let k = self.k;
        let mut h = DMatrix::zeros(k, k);
        for i in 0..k {
            let di = self.direction(i);
            for j in 0..=i {
                let dj = self.direction(j);
                let v: f64 = di
                    .iter()
                    .zip(dj)
                    .zip(weights)
                    .map(|((a, b), w)| a * b * w)
                    .sum();
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }
}

/// Outcome of a circumball solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CircumballResult {
    pub ball: DualBall,
    /// Affine coordinates `λ` of the center relative to the first vertex.
    pub bary: Vec<f64>,
    pub iterations: usize,
    /// Whether the Newton ascent met the gradient tolerance; `false` when the
    /// ball came from the closed-form fallback for full-dimensional simplices.
    pub converged: bool,
    pub gradient_norm: f64,
    /// Evaluations of the objective `g`, each costing one evaluation of `F`.
    pub function_evals: usize,
}

/// Smallest dual circumball of the simplex spanned by `points`.
pub fn smallest_circumball(gen: &Generator, points: &[&[f64]]) -> Result<CircumballResult> {
    smallest_circumball_with(gen, points, &SolverConfig::default())
}

/// Smallest dual circumball of a simplex with vertices drawn from `cloud`.
pub fn smallest_circumball_of(
    gen: &Generator,
    cloud: &PointCloud,
    simplex: &Simplex,
    cfg: &SolverConfig,
) -> Result<CircumballResult> {
    let pts: Vec<&[f64]> = simplex.iter().map(|v| cloud.point(v as usize)).collect();
    smallest_circumball_with(gen, &pts, cfg)
}

pub fn smallest_circumball_with(
    gen: &Generator,
    points: &[&[f64]],
    cfg: &SolverConfig,
) -> Result<CircumballResult> {
    let chart = AffinePlaneChart::new(gen, points, cfg)?;
    maximize_height(gen, &chart, cfg)
}

/// Damped Newton ascent on the chart with a feasibility-preserving line search.
///
/// Centers far out toward infinity or the domain boundary can defeat the
/// ascent, because `q(λ)` cannot resolve them. A failed ascent is therefore
/// retried in conjugate coordinates, see [`conjugate_descent`].
pub fn maximize_height(
    gen: &Generator,
    chart: &AffinePlaneChart,
    cfg: &SolverConfig,
) -> Result<CircumballResult> {
    match ascend(gen, chart, cfg) {
        Err(e @ (Error::NoConvergence { .. } | Error::DomainEscape)) => match conjugate_descent(gen, chart, cfg)? {
            Some(res) => Ok(res),
            None => Err(e),
        },
        other => other,
    }
}

/// The circumcenters of the simplex are the points `∇F*(u)` with `u` in the
/// conjugate domain on the affine set `⟨u, aᵢ − a₀⟩ = F(aᵢ) − F(a₀)`, and the
/// smallest one minimizes `r(u) = F(a₀) − ⟨u, a₀⟩ + F*(u)` there. Damped
/// Newton on that set, parametrized as `u = u₀ + N w` with `N` a null-space
/// basis of the edge matrix.
///
/// Returns `Err(Unbounded)` when the set misses the conjugate domain or the
/// center leaves the domain, and `None` when this route fails as well.
fn conjugate_descent(
    gen: &Generator,
    chart: &AffinePlaneChart,
    cfg: &SolverConfig,
) -> Result<Option<CircumballResult>> {
    let (n, k) = (chart.n, chart.k);
    let dual = gen.conjugate_generator();
    let e = DMatrix::from_row_slice(k, n, &chart.directions);
    let ell = DVector::from_column_slice(&chart.lifted_directions);

    // Least-norm solution of E u = ℓ and a basis of the null space of E.
    let Some(y) = (&e * e.transpose()).lu().solve(&ell) else {
        return Ok(None);
    };
    let particular = e.transpose() * y;
    let eigen = (e.transpose() * &e).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eigen.eigenvalues[i].total_cmp(&eigen.eigenvalues[j]));
    let m = n - k;
    let basis = DMatrix::from_fn(n, m, |r, c| eigen.eigenvectors[(r, order[c])]);

    let start = match interior_start(&dual, chart)? {
        Some(u) => u,
        None if dual.domain.constraint == DomainConstraint::All => particular.as_slice().to_vec(),
        None => return Err(Error::Unbounded),
    };
    let mut w = basis.transpose() * (DVector::from_vec(start) - &particular);
    let a0 = DVector::from_column_slice(&chart.base);
    let objective = |u: &DVector<f64>| dual.value(u.as_slice()) - u.dot(&a0);

    let mut u = &particular + &basis * &w;
    if !dual.domain.contains(u.as_slice()) {
        return Ok(None);
    }
    let mut phi = objective(&u);
    let mut evals = 1;
    let mut center = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut stalled = 0;
    let mut iterations = 0;
    while m > 0 {
        dual.gradient_into(u.as_slice(), &mut center);
        if center.iter().any(|c| !c.is_finite() || c.abs() > cfg.escape_threshold) {
            return Err(Error::Unbounded);
        }
        let offset = DVector::from_vec(center.clone()) - &a0;
        let grad = basis.transpose() * &offset;
        let scale = basis.transpose().abs() * (DVector::from_vec(center.iter().map(|c| c.abs()).collect()) + a0.abs());
        if grad.iter().zip(scale.iter()).all(|(g, s)| g.abs() <= cfg.gradient_tolerance * (1.0 + s)) {
            break;
        }
        if stalled >= STALL_LIMIT {
            break;
        }
        if iterations >= cfg.max_iterations {
            return Ok(None);
        }
        iterations += 1;

        dual.hessian_diag_into(u.as_slice(), &mut weights);
        let h = basis.transpose() * DMatrix::from_diagonal(&DVector::from_column_slice(&weights)) * &basis;
        let newton = newton_direction(h, grad.as_slice(), cfg);
        let is_newton = newton.is_some();
        let step = DVector::from_vec(newton.unwrap_or_else(|| grad.as_slice().to_vec()));
        let slope = step.dot(&grad);
        let noise = 16.0 * f64::EPSILON * (1.0 + phi.abs());

        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-30 {
            let trial_w = &w - &step * t;
            let trial_u = &particular + &basis * &trial_w;
            if dual.domain.contains(trial_u.as_slice()) {
                let trial_phi = objective(&trial_u);
                evals += 1;
                if trial_phi <= phi - cfg.armijo_slope * t * slope + noise {
                    stalled = if is_newton && phi - trial_phi <= noise { stalled + 1 } else { 0 };
                    w = trial_w;
                    u = trial_u;
                    phi = trial_phi;
                    accepted = true;
                    break;
                }
            }
            t *= cfg.backtrack;
        }
        if !accepted {
            break;
        }
    }

    dual.gradient_into(u.as_slice(), &mut center);
    if !gen.domain.contains(&center) || center.iter().any(|c| c.abs() > cfg.escape_threshold) {
        return Err(Error::Unbounded);
    }
    // Accept only a ball that actually passes through every vertex.
    let radius = gen.divergence_unchecked(&chart.base, &center);
    let mut vertex = vec![0.0; n];
    for i in 0..k {
        for ((v, b), d) in vertex.iter_mut().zip(&chart.base).zip(chart.direction(i)) {
            *v = b + d;
        }
        let gap = gen.divergence_unchecked(&vertex, &center) - radius;
        if !(gap.abs() <= 1e-8 * (1.0 + radius)) {
            return Ok(None);
        }
    }
    let offset = DVector::from_vec(center.clone()) - &a0;
    let Some(bary) = (&e * e.transpose()).lu().solve(&(&e * offset)) else {
        return Ok(None);
    };
    let bary = bary.as_slice().to_vec();
    let gradient_norm = chart
        .objective_gradient(gen, &bary)
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(Some(CircumballResult {
        ball: DualBall { center, radius },
        bary,
        iterations: cfg.max_iterations + iterations,
        converged: false,
        gradient_norm,
        function_evals: cfg.max_iterations + evals,
    }))
}

/// A point of the affine set `E u = ℓ` as deep inside an orthant conjugate
/// domain as possible (slack capped at 1), or `None` for `ℝⁿ` or when the
/// set stays within the margin of the orthant boundary.
fn interior_start(dual: &Generator, chart: &AffinePlaneChart) -> Result<Option<Vec<f64>>> {
    let sign = match dual.domain.constraint {
        DomainConstraint::All => return Ok(None),
        DomainConstraint::PositiveOrthant => -1.0,
        DomainConstraint::NegativeOrthant => 1.0,
    };
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let u: Vec<_> = (0..chart.n)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let slack = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for i in 0..chart.k {
        let row: Vec<_> = u.iter().zip(chart.direction(i)).map(|(&var, &d)| (var, d)).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, chart.lifted_directions[i]);
    }
    for &var in &u {
        lp.add_constraint(&[(var, sign), (slack, 1.0)], ComparisonOp::Le, 0.0);
    }
    let solution = match lp.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map_err(|_| Error::LinearProgram("solve interrupted".into()))?,
        Err(microlp::Error::Infeasible) => return Ok(None),
        Err(e) => return Err(Error::LinearProgram(e.to_string())),
    };
    if solution.var_value(slack) <= dual.domain.margin {
        return Ok(None);
    }
    Ok(Some(u.iter().map(|&var| solution.var_value(var)).collect()))
}

/// Consecutive accepted steps without representable gain that end a descent.
const STALL_LIMIT: usize = 3;

fn ascend(gen: &Generator, chart: &AffinePlaneChart, cfg: &SolverConfig) -> Result<CircumballResult> {
    let n = chart.n;
    let k = chart.k;
    if k == 0 {
        return Ok(CircumballResult {
            ball: DualBall {
                center: chart.base.clone(),
                radius: 0.0,
            },
            bary: Vec::new(),
            iterations: 0,
            converged: true,
            gradient_norm: 0.0,
            function_evals: 0,
        });
    }

    let mut lambda = vec![1.0 / (k as f64 + 1.0); k];
    let mut q = chart.center(&lambda);
    if !gen.domain.contains(&q) {
        return Err(Error::DomainEscape);
    }
    let mut f_q = gen.value(&q);
    let mut g = chart.height(&lambda) - f_q;
    let mut evals = 1;

    let mut grad_f = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut grad = vec![0.0; k];
    let mut trial_lambda = vec![0.0; k];
    let mut trial_q = vec![0.0; n];

    // Far-away centers can sit below the resolution of q(λ); the ascent then
    // cycles without representable gain and gives up early.
    let mut stalled = 0;

    let mut iterations = 0;
    loop {
        gen.gradient_into(&q, &mut grad_f);
        chart.chart_gradient(&grad_f, &mut grad);
        let gradient_norm = grad.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let converged = grad
            .iter()
            .enumerate()
            .all(|(i, v)| v.abs() <= cfg.gradient_tolerance * (1.0 + chart.gradient_scale(i, &grad_f)));
        if converged {
            // One more full Newton step pushes the vertex divergences, which
            // differ by the gradient components, to rounding-level agreement.
            let mut gradient_norm = gradient_norm;
            gen.hessian_diag_into(&q, &mut weights);
            if let Some(step) = newton_direction(chart.curvature(&weights), &grad, cfg) {
                for ((tl, l), s) in trial_lambda.iter_mut().zip(&lambda).zip(&step) {
                    *tl = l + s;
                }
                chart.center_into(&trial_lambda, &mut trial_q);
                if gen.domain.contains(&trial_q) {
                    gen.gradient_into(&trial_q, &mut grad_f);
                    chart.chart_gradient(&grad_f, &mut grad);
                    let polished = grad.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                    if polished < gradient_norm {
                        std::mem::swap(&mut lambda, &mut trial_lambda);
                        std::mem::swap(&mut q, &mut trial_q);
                        gradient_norm = polished;
                        iterations += 1;
                    }
                }
            }
            // The height difference cancels badly for large weights; the
            // divergence from the base vertex is the same value, computed stably.
            let radius = gen.divergence_unchecked(&chart.base, &q);
            return Ok(CircumballResult {
                ball: DualBall { center: q, radius },
                bary: lambda,
                iterations,
                converged: true,
                gradient_norm,
                function_evals: evals,
            });
        }
        if !gradient_norm.is_finite() || q.iter().any(|v| v.abs() > cfg.escape_threshold) {
            return Err(Error::Unbounded);
        }
        if iterations >= cfg.max_iterations || stalled >= STALL_LIMIT {
            return Err(Error::NoConvergence {
                iterations,
                gradient_norm,
            });
        }
        iterations += 1;

        gen.hessian_diag_into(&q, &mut weights);
        let newton = newton_direction(chart.curvature(&weights), &grad, cfg);
        let is_newton = newton.is_some();
        let step = newton.unwrap_or_else(|| grad.clone());
        let slope: f64 = step.iter().zip(&grad).map(|(s, d)| s * d).sum();
        // Rounding in ψ − F(q) near the optimum can make exact Armijo fail.
        let noise = 16.0 * f64::EPSILON * (1.0 + chart.height_scale(&lambda) + f_q.abs() + g.abs());

        let mut t = 1.0;
        let mut feasible_seen = false;
        let mut accepted = false;
        while t > 1e-30 {
            for ((tl, l), s) in trial_lambda.iter_mut().zip(&lambda).zip(&step) {
                *tl = l + t * s;
            }
            chart.center_into(&trial_lambda, &mut trial_q);
            if gen.domain.contains(&trial_q) {
                feasible_seen = true;
                let f_trial = gen.value(&trial_q);
                let g_trial = chart.height(&trial_lambda) - f_trial;
                evals += 1;
                if g_trial >= g + cfg.armijo_slope * t * slope - noise {
                    stalled = if is_newton && g_trial - g <= noise { stalled + 1 } else { 0 };
                    std::mem::swap(&mut lambda, &mut trial_lambda);
                    std::mem::swap(&mut q, &mut trial_q);
                    f_q = f_trial;
                    g = g_trial;
                    accepted = true;
                    break;
                }
            }
            t *= cfg.backtrack;
        }
        if !accepted {
            if !feasible_seen {
                return Err(Error::DomainEscape);
            }
            return Err(Error::NoConvergence {
                iterations,
                gradient_norm,
            });
        }
    }
}

fn newton_direction(h: DMatrix<f64>, grad: &[f64], cfg: &SolverConfig) -> Option<Vec<f64>> {
    let chol = Cholesky::new(h)?;
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..l.nrows() {
        let d = l[(i, i)].abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let cond = (hi / lo).powi(2);
    if !(cond <= cfg.ill_conditioned) {
        return None;
    }
    let step = chol.solve(&DVector::from_column_slice(grad));
    step.iter().all(|v| v.is_finite()).then(|| step.as_slice().to_vec())
}

/// Smallest including dual ball together with the face whose circumball it is.
#[derive(Debug, Clone, PartialEq)]
pub struct IncludingBall {
    pub ball: DualBall,
    /// Positions, within the input list, of the face the ball circumscribes.
    pub face: Vec<usize>,
}

/// Maximum input size accepted by [`smallest_including_ball_oracle`].
pub const ORACLE_MAX_POINTS: usize = 12;

/// Exhaustive smallest including dual ball: the minimum-radius smallest
/// circumball, over all faces, that includes every input point.
///
/// Faces without a circumball (more than `n + 1` vertices, affinely dependent,
/// or no circumcenter inside the domain) are skipped; other solver failures
/// propagate.
pub fn smallest_including_ball_oracle(gen: &Generator, points: &[&[f64]]) -> Result<IncludingBall> {
    smallest_including_ball_oracle_with(gen, points, &SolverConfig::default())
}

pub fn smallest_including_ball_oracle_with(
    gen: &Generator,
    points: &[&[f64]],
    cfg: &SolverConfig,
) -> Result<IncludingBall> {
    let m = points.len();
    if m == 0 || m > ORACLE_MAX_POINTS {
        return Err(Error::InvalidArgument(format!(
            "oracle accepts 1..={ORACLE_MAX_POINTS} points, got {m}"
        )));
    }
    let mut masks: Vec<u32> = (1..(1u32 << m)).collect();
    masks.sort_by_key(|mask| (mask.count_ones(), *mask));
    let mut best: Option<IncludingBall> = None;
    for mask in masks {
        let size = mask.count_ones() as usize;
        if size > gen.dimension + 1 {
            break;
        }
        let face: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let pts: Vec<&[f64]> = face.iter().map(|&i| points[i]).collect();
        let res = match smallest_circumball_with(gen, &pts, cfg) {
            Ok(res) => res,
            Err(Error::Degenerate { .. }) | Err(Error::Unbounded) => continue,
            Err(e) => return Err(e),
        };
        let r = res.ball.radius;
        if best.as_ref().is_some_and(|b| b.ball.radius <= r) {
            continue;
        }
        // The face's own vertices are on the boundary by construction.
        let includes = points
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) == 0)
            .all(|(_, p)| gen.divergence_unchecked(p, &res.ball.center) <= r + 1e-9);
        if includes {
            best = Some(IncludingBall { ball: res.ball, face });
        }
    }
    best.ok_or_else(|| Error::PartitionFailure("no face has an including circumball".into()))
}

/// Whether `x` lies in `ball`, with a boundary slack of `1e-12`.
pub fn ball_contains(gen: &Generator, ball: &DualBall, x: &[f64]) -> Result<bool> {
    gen.check(x)?;
    gen.check(&ball.center)?;
    Ok(ball.contains(gen, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(gen: &Generator, pts: &[&[f64]]) -> CircumballResult {
        smallest_circumball(gen, pts).unwrap()
    }

    #[test]
    fn euclidean_segment() {
        let res = solve(&Generator::sq_euclidean(2), &[&[0.0, 0.0], &[2.0, 0.0]]);
        assert!((res.ball.center[0] - 1.0).abs() < 1e-12);
        assert!(res.ball.center[1].abs() < 1e-12);
        assert!((res.ball.radius - 0.5).abs() < 1e-12);
        assert!(res.converged);
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let res = solve(&Generator::sq_euclidean(2), &[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]);
        assert!((res.ball.radius - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn vertex_is_zero_radius() {
        let res = solve(&Generator::shannon(3), &[&[0.2, 0.3, 0.4]]);
        assert_eq!(res.ball.radius, 0.0);
        assert_eq!(res.ball.center, vec![0.2, 0.3, 0.4]);
    }

    /// Golden-section maximization of g on the line through the two points.
    fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - phi * (hi - lo);
        let mut d = lo + phi * (hi - lo);
        while hi - lo > 1e-13 {
            if f(c) > f(d) {
                hi = d;
            } else {
                lo = c;
            }
            c = hi - phi * (hi - lo);
            d = lo + phi * (hi - lo);
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn shannon_pair_matches_golden_section() {
        let gen = Generator::shannon(2);
        let a = [0.2, 0.8];
        let b = [0.8, 0.2];
        let height = |l: f64| {
            let q = [a[0] + l * (b[0] - a[0]), a[1] + l * (b[1] - a[1])];
            let psi = gen.value(&a) + l * (gen.value(&b) - gen.value(&a));
            psi - gen.value(&q)
        };
        // Λ chosen so the bracket stays inside the open orthant.
        let lam = golden_section(height, -0.33, 1.33);
        let expected_r = height(lam);
        let res = solve(&gen, &[&a, &b]);
        assert!((res.bary[0] - lam).abs() < 1e-6);
        assert!((res.ball.radius - expected_r).abs() < 1e-6);
        // Symmetric pair: center is the midpoint.
        assert!((res.ball.center[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn vertices_on_boundary_for_every_generator() {
        let gens = [
            Generator::sq_euclidean(3),
            Generator::shannon(3),
            Generator::burg(3),
            Generator::exponential(3),
        ];
        let pts: [&[f64]; 3] = [&[0.5, 1.2, 0.8], &[1.1, 0.6, 0.9], &[0.7, 0.9, 1.4]];
        for gen in gens {
            let res = solve(&gen, &pts);
            let r = res.ball.radius;
            for p in pts {
                let d = gen.divergence_unchecked(p, &res.ball.center);
                assert!((d - r).abs() <= 1e-8 * (1.0 + r), "{:?}", gen.kind);
            }
            assert!(res.gradient_norm <= 1e-10);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let gen = Generator::sq_euclidean(2);
        let err = smallest_circumball(&gen, &[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
        let err = smallest_circumball(&gen, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]])
            .unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
        let err = smallest_circumball(&gen, &[&[0.0, 0.0], &[0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }

    #[test]
    fn burg_triangle_without_circumball() {
        // The lifted plane through these points has a slope with a
        // nonnegative coordinate, which no Burg gradient attains.
        let gen = Generator::burg(2);
        let pts: [&[f64]; 3] = [&[1.0, 1.0], &[2.0, 1.0], &[3.0, 1.01]];
        let chart = AffinePlaneChart::new(&gen, &pts, &SolverConfig::default()).unwrap();
        let err = maximize_height(&gen, &chart, &SolverConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn oracle_cases() {
        let gen = Generator::sq_euclidean(2);
        let single = smallest_including_ball_oracle(&gen, &[&[0.3, 0.4]]).unwrap();
        assert_eq!(single.ball.radius, 0.0);
        assert_eq!(single.face, vec![0]);

        let obtuse: [&[f64]; 3] = [&[0.0, 0.0], &[4.0, 0.0], &[0.1, 0.3]];
        let inc = smallest_including_ball_oracle(&gen, &obtuse).unwrap();
        assert_eq!(inc.face, vec![0, 1]);
        assert!((inc.ball.center[0] - 2.0).abs() < 1e-12);
        assert!(inc.ball.center[1].abs() < 1e-12);
        // Circumcenter of the whole triangle lies far from the edge midpoint.
        let circ = solve(&gen, &obtuse);
        assert!(circ.ball.radius > inc.ball.radius);

        let h = 3f64.sqrt() / 2.0;
        let eq = smallest_including_ball_oracle(&gen, &[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]).unwrap();
        assert_eq!(eq.face, vec![0, 1, 2]);
        assert!((eq.ball.radius - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn containment_cases() {
        let gen = Generator::sq_euclidean(2);
        let here = DualBall {
            center: vec![0.3, 0.7],
            radius: 0.0,
        };
        assert!(ball_contains(&gen, &here, &[0.3, 0.7]).unwrap());
        let ball = DualBall {
            center: vec![1.0, 0.0],
            radius: 0.5,
        };
        assert!(ball_contains(&gen, &ball, &[0.0, 0.0]).unwrap());
        let ball = DualBall { radius: 0.49, ..ball };
        assert!(!ball_contains(&gen, &ball, &[0.0, 0.0]).unwrap());
        let kl = Generator::shannon(2);
        assert!(ball_contains(&kl, &DualBall { center: vec![1.0, 1.0], radius: 1.0 }, &[0.0, 1.0]).is_err());
    }
}
