//! Opinion geometry: norms on `R^d`, bounded convex opinion sets, and the
//! diameter / center pair that the consensus bound is stated in terms of.
//!
//! Only shape/norm pairs with closed-form diameter and center are accepted
//! by [`OpinionSpace::new`]. [`estimate_diameter`] exists for exploration but
//! its result is typed as an estimate so it cannot be passed where an exact
//! diameter is expected.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `R^d`.
pub type Opinion = Vec<f64>;

/// Upper bound on proposals drawn by any rejection sampler before giving up.
pub const REJECTION_GUARD: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    L2,
    Linf,
    /// `p`-norm with finite `p >= 1`.
    Lp(f64),
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::L1 => write!(f, "l1"),
            NormKind::L2 => write!(f, "l2"),
            NormKind::Linf => write!(f, "linf"),
            NormKind::Lp(p) => write!(f, "l{p}"),
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    /// Accepts `l1`, `l2`, `linf` and `l<p>` for any finite `p >= 1`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "l1" => return Ok(NormKind::L1),
            "l2" => return Ok(NormKind::L2),
            "linf" | "inf" | "max" => return Ok(NormKind::Linf),
            _ => {}
        }
        let p = lower
            .strip_prefix('l')
            .and_then(|rest| rest.parse::<f64>().ok())
            .ok_or_else(|| Error::invalid(format!("unknown norm '{s}'")))?;
        let kind = NormKind::Lp(p);
        kind.check()?;
        Ok(kind)
    }
}

impl NormKind {
    fn check(self) -> Result<()> {
        if let NormKind::Lp(p) = self {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::invalid(format!("p-norm needs finite p >= 1, got {p}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norm {
    kind: NormKind,
    dim: usize,
}

impl Norm {
    pub fn new(kind: NormKind, dim: usize) -> Result<Self> {
        kind.check()?;
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(Norm { kind, dim })
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok(())
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.eval(v))
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(self.dist(a, b))
    }

    /// Norm of `v` without a dimension check.
    #[inline]
    pub fn eval(&self, v: &[f64]) -> f64 {
        self.fold(v.iter().copied())
    }

    /// `‖a − b‖` without a dimension check or allocation.
    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        self.fold(a.iter().zip(b).map(|(x, y)| x - y))
    }

    #[inline]
    fn fold(&self, it: impl Iterator<Item = f64>) -> f64 {
        match self.kind {
            NormKind::L1 => it.map(f64::abs).sum(),
            NormKind::L2 => {
                if self.dim == 1 {
                    it.map(f64::abs).sum()
                } else {
                    it.map(|x| x * x).sum::<f64>().sqrt()
                }
            }
            NormKind::Linf => it.fold(0.0, |m, x| m.max(x.abs())),
            NormKind::Lp(p) => it.map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

/// `‖a − b‖` under `norm`.
pub fn distance(a: &[f64], b: &[f64], norm: &Norm) -> Result<f64> {
    norm.distance(a, b)
}

/// A bounded convex subset of `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConvexSet {
    /// `{a : ‖a − center‖ < radius}` under the ball's own norm.
    Ball { center: Opinion, radius: f64, norm: Norm },
    /// Axis-aligned box `[lower, upper]`.
    Box { lower: Opinion, upper: Opinion },
}

impl ConvexSet {
    pub fn ball(center: Opinion, radius: f64, norm: Norm) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        if center.len() != norm.dim() {
            return Err(Error::DimensionMismatch { expected: norm.dim(), found: center.len() });
        }
        if center.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("ball center must be finite"));
        }
        Ok(ConvexSet::Ball { center, radius, norm })
    }

    pub fn cuboid(lower: Opinion, upper: Opinion) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid("dimension must be positive"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u)) {
            return Err(Error::invalid("box needs finite lower <= upper in every coordinate"));
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    /// The unit cube `[0, 1]^d`.
    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::cuboid(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::cuboid(vec![a], vec![b])
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Box { lower, .. } => lower.len(),
        }
    }

    /// Membership with an absolute slack on the defining inequality.
    pub fn contains(&self, a: &[f64], slack: f64) -> bool {
        if a.len() != self.dim() {
            return false;
        }
        match self {
            ConvexSet::Ball { center, radius, norm } => norm.dist(a, center) <= radius + slack,
            ConvexSet::Box { lower, upper } => {
                a.iter().zip(lower.iter().zip(upper)).all(|(x, (l, u))| *x >= l - slack && *x <= u + slack)
            }
        }
    }

    /// Writes a uniform point of the set into `out`, returning the number of
    /// proposals used. Balls are sampled by rejection from their `L∞` bounding box.
    pub fn sample_uniform_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<u64> {
        debug_assert_eq!(out.len(), self.dim());
        match self {
            ConvexSet::Box { lower, upper } => {
                for (o, (l, u)) in out.iter_mut().zip(lower.iter().zip(upper)) {
                    *o = l + (u - l) * rng.random::<f64>();
                }
                Ok(1)
            }
            ConvexSet::Ball { center, radius, norm } => {
                for attempt in 1..=REJECTION_GUARD {
                    for (o, c) in out.iter_mut().zip(center) {
                        *o = c + radius * (2.0 * rng.random::<f64>() - 1.0);
                    }
                    if norm.dist(out, center) < *radius {
                        return Ok(attempt);
                    }
                }
                Err(Error::RejectionLimit { attempts: REJECTION_GUARD, what: "uniform ball proposal".into() })
            }
        }
    }
}

fn check_supported(set: &ConvexSet, norm: &Norm) -> Result<()> {
    if set.dim() != norm.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: norm.dim() });
    }
    if let ConvexSet::Ball { norm: ball_norm, .. } = set {
        if ball_norm != norm {
            return Err(Error::Unsupported(format!(
                "ball defined under {} but measured under {}",
                ball_norm.kind(),
                norm.kind()
            )));
        }
    }
    Ok(())
}

/// `sup ‖a − b‖` over the set.
pub fn diameter(set: &ConvexSet, norm: &Norm) -> Result<f64> {
    check_supported(set, norm)?;
    Ok(match set {
        ConvexSet::Ball { radius, .. } => 2.0 * radius,
        ConvexSet::Box { lower, upper } => norm.dist(upper, lower),
    })
}

/// A point whose farthest distance to the set is half the diameter.
pub fn center(set: &ConvexSet) -> Opinion {
    match set {
        ConvexSet::Ball { center, .. } => center.clone(),
        ConvexSet::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
    }
}

/// `sup_{c ∈ set} ‖a − c‖`.
pub fn sup_distance_to_set(a: &[f64], set: &ConvexSet, norm: &Norm) -> Result<f64> {
    check_supported(set, norm)?;
    norm.check_dim(a)?;
    Ok(sup_distance_unchecked(a, set, norm))
}

// Box case: every supported norm is monotone in the absolute value of each
// coordinate, so the supremum sits at the corner farthest in every coordinate.
fn sup_distance_unchecked(a: &[f64], set: &ConvexSet, norm: &Norm) -> f64 {
    match set {
        ConvexSet::Ball { center, radius, .. } => norm.dist(a, center) + radius,
        ConvexSet::Box { lower, upper } => {
            norm.fold(a.iter().zip(lower.iter().zip(upper)).map(|(x, (l, u))| (x - l).abs().max((u - x).abs())))
        }
    }
}

/// The interaction map `φ(a, b) = a + μ (b − a)`.
pub fn interpolate(a: &[f64], b: &[f64], mu: f64) -> Result<Opinion> {
    check_mu(mu)?;
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x + mu * (y - x)).collect())
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 0.5) {
        return Err(Error::invalid(format!("convergence parameter mu must lie in (0, 1/2], got {mu}")));
    }
    Ok(())
}

/// A convex set together with the norm used to measure disagreement, and the
/// exact diameter and center derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionSpace {
    set: ConvexSet,
    norm: Norm,
    diameter: f64,
    center: Opinion,
}

impl OpinionSpace {
    pub fn new(set: ConvexSet, norm: Norm) -> Result<Self> {
        let diameter = diameter(&set, &norm)?;
        let center = center(&set);
        Ok(OpinionSpace { set, norm, diameter, center })
    }

    /// A ball measured under its own norm.
    pub fn ball(center: Opinion, radius: f64, kind: NormKind) -> Result<Self> {
        let norm = Norm::new(kind, center.len())?;
        Self::new(ConvexSet::ball(center, radius, norm)?, norm)
    }

    /// The interval `[0, 1]` with absolute-value distance.
    pub fn unit_interval() -> Self {
        Self::new(ConvexSet::interval(0.0, 1.0).unwrap(), Norm::new(NormKind::L2, 1).unwrap()).unwrap()
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn contains(&self, a: &[f64], slack: f64) -> bool {
        self.set.contains(a, slack)
    }

    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm.dist(a, b)
    }

    /// `sup_{c ∈ Δ} ‖a − c‖`; `a` must have the space's dimension.
    #[inline]
    pub fn sup_distance(&self, a: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.dim());
        sup_distance_unchecked(a, &self.set, &self.norm)
    }
}

/// Sampled lower estimate of a diameter. Deliberately a distinct type from
/// the exact `f64` diameter so it cannot feed the bound calculator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledDiameter {
    pub estimate: f64,
    pub pairs: usize,
}

pub fn estimate_diameter<R: Rng + ?Sized>(
    set: &ConvexSet,
    norm: &Norm,
    pairs: usize,
    rng: &mut R,
) -> Result<SampledDiameter> {
    if set.dim() != norm.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: norm.dim() });
    }
    let d = set.dim();
    let (mut a, mut b) = (vec![0.0; d], vec![0.0; d]);
    let mut best = 0.0f64;
    for _ in 0..pairs {
        set.sample_uniform_into(rng, &mut a)?;
        set.sample_uniform_into(rng, &mut b)?;
        best = best.max(norm.dist(&a, &b));
    }
    Ok(SampledDiameter { estimate: best, pairs })
}
