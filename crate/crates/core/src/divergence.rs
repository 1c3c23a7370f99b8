//! Functions of Legendre type and the Bregman divergences they generate.
//!
//! Four closed-form generators are supported:
//!
//! | kind | F(x) | domain | conjugate |
//! |------|------|--------|-----------|
//! | [`GeneratorKind::SqEuclideanHalf`] | ½‖x‖² | ℝⁿ | itself |
//! | [`GeneratorKind::ShannonNegEntropy`] | Σ xᵢ ln xᵢ − xᵢ | ℝⁿ₊ | exponential |
//! | [`GeneratorKind::BurgEntropy`] | Σ 1 − ln xᵢ | ℝⁿ₊ | Burg form on ℝⁿ₋ |
//! | [`GeneratorKind::Exponential`] | Σ e^{xᵢ} | ℝⁿ | Shannon |
//!
//! The divergence from `x` to `y` is `F(x) − F(y) − ⟨∇F(y), x − y⟩`. It is
//! evaluated through the closed forms (squared distance, Kullback–Leibler,
//! Itakura–Saito, exponential loss), which agree with the definition but do
//! not suffer the cancellation of subtracting two large values of `F`.

use crate::error::{Error, Result};

/// Default guard distance from an orthant boundary.
pub const DEFAULT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    SqEuclideanHalf,
    ShannonNegEntropy,
    BurgEntropy,
    Exponential,
}

impl GeneratorKind {
    /// Name used on the command line and in serialized output.
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::SqEuclideanHalf => "sq_euclidean",
            GeneratorKind::ShannonNegEntropy => "kl",
            GeneratorKind::BurgEntropy => "itakura_saito",
            GeneratorKind::Exponential => "exponential",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sq_euclidean" => Some(GeneratorKind::SqEuclideanHalf),
            "kl" => Some(GeneratorKind::ShannonNegEntropy),
            "itakura_saito" => Some(GeneratorKind::BurgEntropy),
            "exponential" => Some(GeneratorKind::Exponential),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainConstraint {
    All,
    PositiveOrthant,
    NegativeOrthant,
}

impl DomainConstraint {
    fn name(self) -> &'static str {
        match self {
            DomainConstraint::All => "real",
            DomainConstraint::PositiveOrthant => "positive orthant",
            DomainConstraint::NegativeOrthant => "negative orthant",
        }
    }
}

/// Open convex domain of a generator together with a numerical guard band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainDescriptor {
    pub constraint: DomainConstraint,
    pub margin: f64,
}

impl DomainDescriptor {
    pub fn new(constraint: DomainConstraint) -> Self {
        DomainDescriptor {
            constraint,
            margin: DEFAULT_MARGIN,
        }
    }

    /// Whether a single coordinate value is admissible.
    #[inline]
    pub fn admits(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match self.constraint {
            DomainConstraint::All => true,
            DomainConstraint::PositiveOrthant => value > self.margin,
            DomainConstraint::NegativeOrthant => value < -self.margin,
        }
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| self.admits(v))
    }

    /// Returns the first offending coordinate, if any.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        match x.iter().position(|&v| !self.admits(v)) {
            None => Ok(()),
            Some(index) => Err(Error::DomainViolation {
                index,
                value: x[index],
                domain: self.constraint.name(),
            }),
        }
    }
}

/// A function of Legendre type on an open convex subset of ℝⁿ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub dimension: usize,
    pub domain: DomainDescriptor,
}

impl Generator {
    /// The generator of `kind` on its natural domain in ℝ^`dimension`.
    pub fn new(kind: GeneratorKind, dimension: usize) -> Self {
        let constraint = match kind {
            GeneratorKind::SqEuclideanHalf | GeneratorKind::Exponential => DomainConstraint::All,
            GeneratorKind::ShannonNegEntropy | GeneratorKind::BurgEntropy => {
                DomainConstraint::PositiveOrthant
            }
        };
        Generator {
            kind,
            dimension,
            domain: DomainDescriptor::new(constraint),
        }
    }

    pub fn sq_euclidean(dimension: usize) -> Self {
        Self::new(GeneratorKind::SqEuclideanHalf, dimension)
    }

    pub fn shannon(dimension: usize) -> Self {
        Self::new(GeneratorKind::ShannonNegEntropy, dimension)
    }

    pub fn burg(dimension: usize) -> Self {
        Self::new(GeneratorKind::BurgEntropy, dimension)
    }

    pub fn exponential(dimension: usize) -> Self {
        Self::new(GeneratorKind::Exponential, dimension)
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.domain.margin = margin;
        self
    }

    /// Validates dimension and domain membership of `x`.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        self.domain.check(x)
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension && self.domain.contains(x)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.value(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out);
        Ok(out)
    }

    pub fn divergence(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.divergence_unchecked(x, y))
    }

    /// Maps `x` to its polar `x* = ∇F(x)`, a point of the conjugate domain.
    pub fn conjugate_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.gradient(x)
    }

    /// The Legendre conjugate generator on the conjugate domain.
    pub fn conjugate_generator(&self) -> Generator {
        let (kind, constraint) = match (self.kind, self.domain.constraint) {
            (GeneratorKind::SqEuclideanHalf, c) => (GeneratorKind::SqEuclideanHalf, c),
            (GeneratorKind::ShannonNegEntropy, _) => (GeneratorKind::Exponential, DomainConstraint::All),
            (GeneratorKind::Exponential, _) => {
                (GeneratorKind::ShannonNegEntropy, DomainConstraint::PositiveOrthant)
            }
            (GeneratorKind::BurgEntropy, DomainConstraint::NegativeOrthant) => {
                (GeneratorKind::BurgEntropy, DomainConstraint::PositiveOrthant)
            }
            (GeneratorKind::BurgEntropy, _) => {
                (GeneratorKind::BurgEntropy, DomainConstraint::NegativeOrthant)
            }
        };
        Generator {
            kind,
            dimension: self.dimension,
            domain: DomainDescriptor {
                constraint,
                margin: self.domain.margin,
            },
        }
    }

    /// Per-coordinate range of polar coordinates `u = ∇F(c)` for centers with
    /// every `|cᵢ| ≤ bound` inside the domain margin, further clipped to the
    /// conjugate domain margin. Valid because every generator is separable
    /// with increasing coordinate gradient.
    pub fn polar_bounds(&self, bound: f64) -> (f64, f64) {
        let margin = self.domain.margin;
        let (lo, hi) = match self.domain.constraint {
            DomainConstraint::All => (-bound, bound),
            DomainConstraint::PositiveOrthant => (margin, bound),
            DomainConstraint::NegativeOrthant => (-bound, -margin),
        };
        let (lo, hi) = (self.partial(lo), self.partial(hi));
        let conj = self.conjugate_generator().domain;
        match conj.constraint {
            DomainConstraint::All => (lo, hi),
            DomainConstraint::PositiveOrthant => (lo.max(conj.margin), hi),
            DomainConstraint::NegativeOrthant => (lo, hi.min(-conj.margin)),
        }
    }

    /// `F(x)` without domain validation.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            GeneratorKind::SqEuclideanHalf => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            GeneratorKind::ShannonNegEntropy => x.iter().map(|&v| v * v.ln() - v).sum(),
            GeneratorKind::BurgEntropy => x.iter().map(|&v| 1.0 - v.abs().ln()).sum(),
            GeneratorKind::Exponential => x.iter().map(|&v| v.exp()).sum(),
        }
    }

    /// `∇F(x)` written into `out`, without domain validation.
    #[inline]
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = self.partial(v);
        }
    }

    #[inline]
    fn partial(&self, v: f64) -> f64 {
        match self.kind {
            GeneratorKind::SqEuclideanHalf => v,
            GeneratorKind::ShannonNegEntropy => v.ln(),
            GeneratorKind::BurgEntropy => -1.0 / v,
            GeneratorKind::Exponential => v.exp(),
        }
    }

    #[inline]
    fn inverse_partial(&self, u: f64) -> f64 {
        match self.kind {
            GeneratorKind::SqEuclideanHalf => u,
            GeneratorKind::ShannonNegEntropy => u.exp(),
            GeneratorKind::BurgEntropy => -1.0 / u,
            GeneratorKind::Exponential => u.ln(),
        }
    }

    /// Lower bound on the radius of every dual ball containing `a` and `b`:
    /// the largest one-coordinate circumball radius. Valid because `D_F` is a
    /// sum of nonnegative per-coordinate terms; taking the smaller of the two
    /// divergences keeps it a bound under rounding of the center.
    pub fn pair_radius_lower_bound(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut best: f64 = 0.0;
        for (&x, &y) in a.iter().zip(b) {
            if x == y {
                continue;
            }
            // In polar coordinates the equal-divergence point is the secant slope.
            let u = (self.value(&[y]) - self.value(&[x])) / (y - x);
            let c = [self.inverse_partial(u)];
            let d = self.divergence_unchecked(&[x], &c).min(self.divergence_unchecked(&[y], &c));
            if d.is_finite() {
                best = best.max(d);
            }
        }
        best
    }

    /// Diagonal of the Hessian of `F` at `x` (all four generators are separable).
    #[inline]
    pub fn hessian_diag_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = match self.kind {
                GeneratorKind::SqEuclideanHalf => 1.0,
                GeneratorKind::ShannonNegEntropy => 1.0 / v,
                GeneratorKind::BurgEntropy => 1.0 / (v * v),
                GeneratorKind::Exponential => v.exp(),
            };
        }
    }

    /// `D_F(x, y)` by its closed form, without domain validation.
    #[inline]
    pub fn divergence_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        let it = x.iter().zip(y);
        match self.kind {
            GeneratorKind::SqEuclideanHalf => 0.5 * it.map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
            GeneratorKind::ShannonNegEntropy => it.map(|(&a, &b)| a * (a / b).ln() - a + b).sum(),
            GeneratorKind::BurgEntropy => it
                .map(|(&a, &b)| {
                    let ratio = a / b;
                    ratio - ratio.ln() - 1.0
                })
                .sum(),
            GeneratorKind::Exponential => it
                .map(|(&a, &b)| {
                    let eb = b.exp();
                    a.exp() - (a - b + 1.0) * eb
                })
                .sum(),
        }
    }
}

/// Indexed finite point set inside the domain of a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Validates every point against `gen` and packs the coordinates.
    pub fn new(gen: &Generator, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * gen.dimension);
        for p in points {
            gen.check(p)?;
            coords.extend_from_slice(p);
        }
        Ok(PointCloud {
            dim: gen.dimension,
            coords,
        })
    }

    /// Builds a cloud from packed row-major coordinates.
    pub fn from_flat(gen: &Generator, coords: Vec<f64>) -> Result<Self> {
        if gen.dimension == 0 || coords.len() % gen.dimension != 0 {
            return Err(Error::DimensionMismatch {
                expected: gen.dimension,
                found: coords.len(),
            });
        }
        for p in coords.chunks(gen.dimension) {
            gen.domain.check(p)?;
        }
        Ok(PointCloud {
            dim: gen.dimension,
            coords,
        })
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.dim.max(1))
    }

    /// The points with indices relabelled by `order` (`order[new] = old`).
    pub fn permuted(&self, order: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(self.coords.len());
        for &i in order {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud {
            dim: self.dim,
            coords,
        }
    }
}

/// Dual Bregman ball `{x : D_F(x, center) ≤ radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl DualBall {
    /// Membership with the default boundary slack of `1e-12`.
    pub fn contains(&self, gen: &Generator, x: &[f64]) -> bool {
        gen.divergence_unchecked(x, &self.center) <= self.radius + 1e-12
    }
}

/// A point `(c, γ)` of ℝⁿ × ℝ, polar to the affine function `x ↦ ⟨c, x⟩ − γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPoint {
    pub c: Vec<f64>,
    pub gamma: f64,
}

impl PolarPoint {
    /// The polar affine function evaluated at `x`.
    pub fn affine(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.gamma
    }

    /// Polar point of the hyperplane tangent to the graph of `F` at `a`:
    /// `(∇F(a), ⟨∇F(a), a⟩ − F(a))`.
    pub fn tangent(gen: &Generator, a: &[f64]) -> Result<PolarPoint> {
        let c = gen.gradient(a)?;
        let gamma = c.iter().zip(a).map(|(g, x)| g * x).sum::<f64>() - gen.value(a);
        Ok(PolarPoint { c, gamma })
    }
}
