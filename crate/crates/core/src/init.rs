//! Initial opinion laws. Every vertex draws an independent sample from the
//! same distribution, which lives on the opinion set.
//!
//! The triangular law has density proportional to `r − ‖a − c‖` on the ball
//! `B(c, r)`. It is sampled by thinning uniform-ball proposals with
//! acceptance probability `(r − ‖a − c‖) / r`, which works for any norm.

use rand::Rng;
use serde::Serialize;

use crate::dynamics::Configuration;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::space::{ConvexSet, NormKind, Opinion, OpinionSpace, REJECTION_GUARD};

#[derive(Debug, Clone, PartialEq)]
pub enum DistKind {
    UniformBall,
    TriangularBall,
    UniformBox,
    PointMass(Opinion),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution {
    kind: DistKind,
    space: OpinionSpace,
}

/// Monte Carlo estimate of a mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl InitialDistribution {
    pub fn new(kind: DistKind, space: OpinionSpace) -> Result<Self> {
        match (&kind, space.set()) {
            (DistKind::UniformBall | DistKind::TriangularBall, ConvexSet::Ball { .. }) => {}
            (DistKind::UniformBox, ConvexSet::Box { .. }) => {}
            (DistKind::PointMass(a), _) => {
                if a.len() != space.dim() {
                    return Err(Error::DimensionMismatch { expected: space.dim(), found: a.len() });
                }
                if !space.contains(a, 0.0) {
                    return Err(Error::invalid(format!("point mass {a:?} lies outside the opinion set")));
                }
            }
            (k, _) => return Err(Error::Unsupported(format!("{k:?} is not defined on this opinion set"))),
        }
        Ok(InitialDistribution { kind, space })
    }

    /// Uniform law on whatever set the space uses.
    pub fn uniform(space: OpinionSpace) -> Self {
        let kind = match space.set() {
            ConvexSet::Ball { .. } => DistKind::UniformBall,
            ConvexSet::Box { .. } => DistKind::UniformBox,
        };
        InitialDistribution { kind, space }
    }

    pub fn triangular(space: OpinionSpace) -> Result<Self> {
        Self::new(DistKind::TriangularBall, space)
    }

    pub fn point_mass(point: Opinion, space: OpinionSpace) -> Result<Self> {
        Self::new(DistKind::PointMass(point), space)
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn space(&self) -> &OpinionSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Opinion> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out)?;
        Ok(out)
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        self.sample_counting(rng, out).map(|_| ())
    }

    /// Like [`sample_into`](Self::sample_into) but also returns how many
    /// uniform proposals the triangular thinning step consumed (1 otherwise).
    pub fn sample_counting<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<u64> {
        match &self.kind {
            DistKind::PointMass(a) => {
                out.copy_from_slice(a);
                Ok(1)
            }
            DistKind::UniformBall | DistKind::UniformBox => {
                self.space.set().sample_uniform_into(rng, out)?;
                Ok(1)
            }
            DistKind::TriangularBall => {
                let ConvexSet::Ball { center, radius, norm } = self.space.set() else {
                    unreachable!("checked in constructor");
                };
                let mut used = 0u64;
                for proposal in 1..=REJECTION_GUARD {
                    used += self.space.set().sample_uniform_into(rng, out)?;
                    let weight = (radius - norm.dist(out, center)) / radius;
                    if rng.random::<f64>() < weight {
                        return Ok(proposal);
                    }
                    if used > REJECTION_GUARD {
                        break;
                    }
                }
                Err(Error::RejectionLimit { attempts: used, what: "triangular thinning".into() })
            }
        }
    }

    /// Exact `E‖X − 𝖼‖` where `𝖼` is the center of the opinion set.
    pub fn expected_disagreement_analytic(&self) -> Result<f64> {
        let d = self.dim() as f64;
        match (&self.kind, self.space.set()) {
            (DistKind::UniformBall, ConvexSet::Ball { radius, .. }) => Ok(d * radius / (d + 1.0)),
            (DistKind::TriangularBall, ConvexSet::Ball { radius, .. }) => Ok(d * radius / (d + 2.0)),
            (DistKind::PointMass(a), _) => Ok(self.space.dist(a, self.space.center())),
            // each coordinate is uniform on [l, u], with E|X_i − mid| = (u − l)/4;
            // exact whenever the norm is a plain sum of coordinate magnitudes
            (DistKind::UniformBox, ConvexSet::Box { lower, upper })
                if self.dim() == 1 || self.space.norm().kind() == NormKind::L1 =>
            {
                Ok(lower.iter().zip(upper).map(|(l, u)| (u - l) / 4.0).sum())
            }
            (kind, _) => {
                Err(Error::NoClosedForm(format!("E||X - c|| for {kind:?} under {}", self.space.norm().kind())))
            }
        }
    }

    /// Sample mean and standard error of `‖X − c‖`.
    pub fn expected_disagreement_mc<R: Rng + ?Sized>(
        &self,
        c: &[f64],
        n_samples: usize,
        rng: &mut R,
    ) -> Result<McEstimate> {
        if n_samples < 2 {
            return Err(Error::invalid("Monte Carlo estimate needs at least 2 samples"));
        }
        if c.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: c.len() });
        }
        let mut x = vec![0.0; self.dim()];
        let (mut mean, mut m2) = (0.0f64, 0.0f64);
        for i in 0..n_samples {
            self.sample_into(rng, &mut x)?;
            let v = self.space.dist(&x, c);
            let delta = v - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (v - mean);
        }
        let var = m2 / (n_samples - 1) as f64;
        Ok(McEstimate { mean, std_error: (var / n_samples as f64).sqrt(), n: n_samples })
    }

    /// Closed-form `P(‖X − c‖ < s)` for the ball laws.
    pub fn radial_cdf(&self, s: f64) -> Result<f64> {
        let d = self.dim() as i32;
        match (&self.kind, self.space.set()) {
            (DistKind::UniformBall, ConvexSet::Ball { radius, .. }) => Ok((s / radius).clamp(0.0, 1.0).powi(d)),
            (DistKind::TriangularBall, ConvexSet::Ball { radius, .. }) => {
                let q = (s / radius).clamp(0.0, 1.0);
                Ok(q.powi(d) * (1.0 + d as f64 * (1.0 - q)))
            }
            (kind, _) => Err(Error::NoClosedForm(format!("radial CDF for {kind:?}"))),
        }
    }
}

/// Draws one independent opinion per vertex.
pub fn initial_configuration<R: Rng + ?Sized>(
    dist: &InitialDistribution,
    graph: &Graph,
    rng: &mut R,
) -> Result<Configuration> {
    let d = dist.dim();
    let mut opinions = vec![0.0; d * graph.n_vertices()];
    for chunk in opinions.chunks_exact_mut(d) {
        dist.sample_into(rng, chunk)?;
    }
    Configuration::from_flat(d, opinions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};
    use crate::space::Norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn unit_ball(d: usize, kind: NormKind) -> OpinionSpace {
        OpinionSpace::ball(vec![0.0; d], 1.0, kind).unwrap()
    }

    #[test]
    fn point_mass_is_constant() {
        let space = OpinionSpace::unit_interval();
        let dist = InitialDistribution::point_mass(vec![0.5], space).unwrap();
        let mut r = rng(1);
        for _ in 0..10 {
            assert_eq!(dist.sample(&mut r).unwrap(), vec![0.5]);
        }
        let est = dist.expected_disagreement_mc(&[0.5], 100, &mut r).unwrap();
        assert_eq!((est.mean, est.std_error), (0.0, 0.0));
        assert_eq!(dist.expected_disagreement_analytic().unwrap(), 0.0);
    }

    #[test]
    fn constructor_rejects_mismatched_kinds() {
        let cube = OpinionSpace::unit_interval();
        assert!(InitialDistribution::triangular(cube.clone()).is_err());
        assert!(InitialDistribution::point_mass(vec![1.5], cube.clone()).is_err());
        assert!(InitialDistribution::point_mass(vec![0.5, 0.5], cube).is_err());
        assert!(InitialDistribution::new(DistKind::UniformBox, unit_ball(2, NormKind::L2)).is_err());
    }

    #[test]
    fn analytic_moments() {
        let d1 = OpinionSpace::ball(vec![0.5], 0.5, NormKind::L2).unwrap();
        assert_eq!(InitialDistribution::uniform(d1).expected_disagreement_analytic().unwrap(), 0.25);
        let tri = InitialDistribution::triangular(unit_ball(2, NormKind::L2)).unwrap();
        assert_eq!(tri.expected_disagreement_analytic().unwrap(), 0.5);
        let interval = InitialDistribution::uniform(OpinionSpace::unit_interval());
        assert_eq!(interval.expected_disagreement_analytic().unwrap(), 0.25);

        let square_l2 =
            OpinionSpace::new(ConvexSet::unit_cube(2).unwrap(), Norm::new(NormKind::L2, 2).unwrap()).unwrap();
        assert!(matches!(
            InitialDistribution::uniform(square_l2).expected_disagreement_analytic(),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn l1_box_moment_agrees_with_monte_carlo() {
        let space = OpinionSpace::new(
            ConvexSet::cuboid(vec![0.0, -1.0, 2.0], vec![1.0, 1.0, 2.5]).unwrap(),
            Norm::new(NormKind::L1, 3).unwrap(),
        )
        .unwrap();
        let dist = InitialDistribution::uniform(space.clone());
        let exact = dist.expected_disagreement_analytic().unwrap();
        assert_eq!(exact, 0.25 + 0.5 + 0.125);
        let est = dist.expected_disagreement_mc(space.center(), 200_000, &mut rng(5)).unwrap();
        assert!((est.mean - exact).abs() < 4.0 * est.std_error);
    }

    #[test]
    fn uniform_interval_radial_cdf() {
        let space = OpinionSpace::ball(vec![0.5], 0.5, NormKind::L2).unwrap();
        let dist = InitialDistribution::uniform(space);
        let n = 200_000;
        let mut r = rng(7);
        let samples: Vec<f64> = (0..n).map(|_| dist.sample(&mut r).unwrap()[0]).collect();
        for s in [0.1, 0.25, 0.4] {
            let p = s / 0.5;
            let hits = samples.iter().filter(|x| (**x - 0.5).abs() < s).count() as f64 / n as f64;
            assert!((hits - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "s={s}");
        }
    }

    #[test]
    fn triangular_disc_half_radius_mass() {
        let dist = InitialDistribution::triangular(unit_ball(2, NormKind::L2)).unwrap();
        let n = 200_000;
        let mut r = rng(11);
        let mut x = vec![0.0; 2];
        let mut hits = 0usize;
        for _ in 0..n {
            dist.sample_into(&mut r, &mut x).unwrap();
            if x[0].hypot(x[1]) < 0.5 {
                hits += 1;
            }
        }
        let p = 0.5; // (1/2)^2 (1 + 2 (1 - 1/2))
        assert_eq!(dist.radial_cdf(0.5).unwrap(), p);
        let freq = hits as f64 / n as f64;
        assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn triangular_acceptance_rate() {
        for (d, kind) in [(1, NormKind::L2), (2, NormKind::L1), (3, NormKind::Linf)] {
            let dist = InitialDistribution::triangular(unit_ball(d, kind)).unwrap();
            let mut r = rng(d as u64);
            let mut x = vec![0.0; d];
            let n = 100_000u64;
            let proposals: u64 = (0..n).map(|_| dist.sample_counting(&mut r, &mut x).unwrap()).sum();
            // geometric number of proposals with success probability 1/(d+1)
            let rate = n as f64 / proposals as f64;
            let p = 1.0 / (d as f64 + 1.0);
            let se = (p * p * (1.0 - p) / n as f64).sqrt();
            assert!((rate - p).abs() < 5.0 * se, "d={d}: rate {rate} vs {p}");
        }
    }

    #[test]
    fn initial_configuration_membership_and_replay() {
        let g = generate(GraphKind::Path(1000), 0).unwrap().graph;
        let space = unit_ball(3, NormKind::L1);
        let dist = InitialDistribution::uniform(space.clone());
        let a = initial_configuration(&dist, &g, &mut rng(99)).unwrap();
        let b = initial_configuration(&dist, &g, &mut rng(99)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_vertices(), 1000);
        assert!((0..1000).all(|x| space.contains(a.opinion(x), 1e-12)));

        let point = InitialDistribution::point_mass(vec![0.1, 0.2, -0.3], space).unwrap();
        let c = initial_configuration(&point, &g, &mut rng(0)).unwrap();
        assert!((0..1000).all(|x| c.opinion(x) == [0.1, 0.2, -0.3]));
    }

    #[test]
    fn mc_needs_two_samples() {
        let dist = InitialDistribution::uniform(OpinionSpace::unit_interval());
        assert!(dist.expected_disagreement_mc(&[0.5], 1, &mut rng(0)).is_err());
    }
}
