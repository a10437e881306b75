//! Event-driven simulation of the threshold-gated averaging chain.
//!
//! Every edge carries an independent rate-one clock, so the superposed clock
//! rings at rate `|E|` and the edge that fires is uniform. Only the embedded
//! jump chain matters for classification; continuous time is accumulated from
//! the exponential increments for reporting.
//!
//! Exact absorption needs infinitely many events, so a run is classified at a
//! resolution `eps_stop`: the chain is treated as absorbed once every edge
//! has distance `< eps_stop` or `> tau`. The engine tracks the number of edges
//! in `[eps_stop, tau]` incrementally, re-examining only the edges incident to
//! the two vertices that moved.

use std::io::Write;

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::init::{initial_configuration, InitialDistribution};
use crate::space::{check_mu, Norm, Opinion, OpinionSpace};
use crate::union_find::DisjointSets;

/// Slack used when checking that probe points and opinions lie in the set.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Opinions of all vertices at one instant, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    dim: usize,
    opinions: Vec<f64>,
    time: f64,
    event_count: u64,
}

impl Configuration {
    pub fn from_flat(dim: usize, opinions: Vec<f64>) -> Result<Self> {
        if dim == 0 || opinions.is_empty() || !opinions.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} values cannot be split into opinions of dimension {dim}",
                opinions.len()
            )));
        }
        Ok(Configuration { dim, opinions, time: 0.0, event_count: 0 })
    }

    pub fn from_rows(rows: &[Opinion]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Self::from_flat(dim, rows.concat())
    }

    /// One-dimensional configuration from scalar opinions.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.opinions.len() / self.dim
    }

    #[inline]
    pub fn opinion(&self, x: usize) -> &[f64] {
        &self.opinions[x * self.dim..(x + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.opinions
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    /// Coordinate-wise sum of all opinions.
    pub fn coordinate_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.dim];
        for row in self.opinions.chunks_exact(self.dim) {
            for (s, v) in sum.iter_mut().zip(row) {
                *s += v;
            }
        }
        sum
    }

    /// `X^c = Σ_x ‖ξ(x) − c‖`.
    pub fn disagreement_with(&self, c: &[f64], norm: &Norm) -> f64 {
        self.opinions.chunks_exact(self.dim).map(|row| norm.dist(row, c)).sum()
    }

    #[inline]
    fn dist(&self, norm: &Norm, x: usize, y: usize) -> f64 {
        norm.dist(self.opinion(x), self.opinion(y))
    }

    /// Moves `x` and `y` toward each other by `mu` of their gap.
    #[inline]
    fn average(&mut self, x: usize, y: usize, mu: f64) {
        let d = self.dim;
        for i in 0..d {
            let (a, b) = (self.opinions[x * d + i], self.opinions[y * d + i]);
            let delta = mu * (b - a);
            self.opinions[x * d + i] = a + delta;
            self.opinions[y * d + i] = b - delta;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub tau: f64,
    pub mu: f64,
    /// Absorption resolution; defaults to `tau / (4 N)`.
    pub eps_stop: Option<f64>,
    /// Event budget; defaults to `10^4 · |E| · N`.
    pub max_events: Option<u64>,
    pub record_trajectories: bool,
    /// Reference opinions `c ∈ Δ` for which `X_t^c` is recorded.
    pub probe_points: Vec<Opinion>,
}

/// Parameters with defaults filled in for a particular graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedParams {
    pub tau: f64,
    pub mu: f64,
    pub eps_stop: f64,
    pub max_events: u64,
}

impl SimParams {
    pub fn new(tau: f64, mu: f64) -> Result<Self> {
        let p = SimParams {
            tau,
            mu,
            eps_stop: None,
            max_events: None,
            record_trajectories: false,
            probe_points: Vec::new(),
        };
        p.check_scalars()?;
        Ok(p)
    }

    pub fn with_eps_stop(mut self, eps: f64) -> Self {
        self.eps_stop = Some(eps);
        self
    }

    pub fn with_max_events(mut self, max_events: u64) -> Self {
        self.max_events = Some(max_events);
        self
    }

    /// Turns on per-event recording with the given probe points.
    pub fn recording(mut self, probes: Vec<Opinion>) -> Self {
        self.record_trajectories = true;
        self.probe_points = probes;
        self
    }

    fn check_scalars(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::invalid(format!("confidence threshold tau must be positive, got {}", self.tau)));
        }
        check_mu(self.mu)
    }

    pub fn resolve(&self, graph: &Graph, space: &OpinionSpace) -> Result<ResolvedParams> {
        self.check_scalars()?;
        if graph.n_edges() == 0 {
            return Err(Error::Structure("graph has no edges".into()));
        }
        let n = graph.n_vertices() as f64;
        let eps_stop = self.eps_stop.unwrap_or(self.tau / (4.0 * n));
        if !(eps_stop > 0.0 && eps_stop < self.tau / 2.0) {
            return Err(Error::invalid(format!("eps_stop must lie in (0, tau/2), got {eps_stop}")));
        }
        let max_events = match self.max_events {
            Some(0) => return Err(Error::invalid("max_events must be positive")),
            Some(m) => m,
            None => 10_000u64.saturating_mul(graph.n_edges() as u64).saturating_mul(graph.n_vertices() as u64),
        };
        for c in &self.probe_points {
            if c.len() != space.dim() {
                return Err(Error::DimensionMismatch { expected: space.dim(), found: c.len() });
            }
            if !space.contains(c, MEMBERSHIP_SLACK) {
                return Err(Error::invalid(format!("probe point {c:?} lies outside the opinion set")));
            }
        }
        Ok(ResolvedParams { tau: self.tau, mu: self.mu, eps_stop, max_events })
    }
}

/// Applies one interaction along `(x, y)` and returns the new configuration.
/// The pair interacts iff its distance is at most `tau` (ties interact).
pub fn step(
    config: &Configuration,
    graph: &Graph,
    edge: (usize, usize),
    tau: f64,
    mu: f64,
    norm: &Norm,
) -> Result<Configuration> {
    check_mu(mu)?;
    let (x, y) = edge;
    if graph.edge_id(x, y).is_none() {
        return Err(Error::InvalidEdge { u: x, v: y });
    }
    if config.dim() != norm.dim() || config.n_vertices() != graph.n_vertices() {
        return Err(Error::DimensionMismatch { expected: norm.dim(), found: config.dim() });
    }
    let mut next = config.clone();
    if next.dist(norm, x, y) <= tau {
        next.average(x, y, mu);
    }
    next.event_count += 1;
    Ok(next)
}

/// Draws the next edge to fire and the waiting time until it does.
#[inline]
pub fn next_event<R: Rng + ?Sized>(rng: &mut R, n_edges: usize) -> (usize, f64) {
    debug_assert!(n_edges >= 1);
    let edge = rng.random_range(0..n_edges);
    let wait: f64 = rng.sample(Exp1);
    (edge, wait / n_edges as f64)
}

/// Returns the partition into classes iff every edge has distance `< eps_stop`
/// or `> tau`. Classes are the connected components of the `< eps_stop` edges.
pub fn detect_absorption(
    config: &Configuration,
    graph: &Graph,
    norm: &Norm,
    tau: f64,
    eps_stop: f64,
) -> Option<Vec<Vec<usize>>> {
    let mut sets = DisjointSets::new(graph.n_vertices());
    for &(u, v) in graph.edges() {
        let d = config.dist(norm, u, v);
        if d < eps_stop {
            sets.union(u, v);
        } else if d <= tau {
            return None;
        }
    }
    Some(sets.classes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classification {
    Consensus,
    Fragmented { classes: usize },
    Undecided,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Consensus => "consensus",
            Classification::Fragmented { .. } => "fragmented",
            Classification::Undecided => "undecided",
        }
    }

    pub fn n_classes(&self) -> Option<usize> {
        match self {
            Classification::Consensus => Some(1),
            Classification::Fragmented { classes } => Some(*classes),
            Classification::Undecided => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub index: u64,
    pub time: f64,
    pub edge: (usize, usize),
    pub interacted: bool,
    /// `‖ξ_s(x) − ξ_{s−}(x)‖`, identical for both endpoints.
    pub displacement: f64,
}

/// Per-event record of a run, with `X_t^c` for every probe point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub probes: Vec<Opinion>,
    pub initial_disagreement: Vec<f64>,
    pub events: Vec<EventRecord>,
    /// Row-major `events × probes`.
    disagreement: Vec<f64>,
}

impl Trace {
    fn new(probes: Vec<Opinion>, config: &Configuration, norm: &Norm) -> Self {
        let initial_disagreement = probes.iter().map(|c| config.disagreement_with(c, norm)).collect();
        Trace { probes, initial_disagreement, events: Vec::new(), disagreement: Vec::new() }
    }

    pub fn n_probes(&self) -> usize {
        self.probes.len()
    }

    /// `X^c` for probe `k`, starting with the initial value.
    pub fn disagreement_series(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        let p = self.probes.len();
        std::iter::once(self.initial_disagreement[k]).chain(self.disagreement.iter().skip(k).step_by(p.max(1)).copied())
    }

    /// Writes `event_index,time,edge_u,edge_v,interacted,x_c0,...`. Row 0 is
    /// the initial state with empty edge fields.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> =
            ["event_index", "time", "edge_u", "edge_v", "interacted"].map(String::from).to_vec();
        header.extend((0..self.probes.len()).map(|k| format!("x_c{k}")));
        w.write_record(&header)?;
        let mut row: Vec<String> = vec!["0".into(), "0".into(), String::new(), String::new(), "0".into()];
        row.extend(self.initial_disagreement.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
        let p = self.probes.len();
        for (i, ev) in self.events.iter().enumerate() {
            let mut row = vec![
                ev.index.to_string(),
                ev.time.to_string(),
                ev.edge.0.to_string(),
                ev.edge.1.to_string(),
                u8::from(ev.interacted).to_string(),
            ];
            row.extend(self.disagreement[i * p..(i + 1) * p].iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub classification: Classification,
    pub final_configuration: Configuration,
    /// Vertex classes at absorption; `None` for undecided runs.
    pub partition: Option<Vec<Vec<usize>>>,
    /// First time no pair of vertices has distance in `[tau/2, tau]`.
    pub t_star: Option<f64>,
    /// Event count at which `t_star` was reached.
    pub t_star_event: Option<u64>,
    /// Whether some vertex was within `tau` of every point of the set at `t_star`.
    pub event_a: bool,
    pub total_events: u64,
    pub final_time: f64,
    pub params: ResolvedParams,
    #[serde(skip)]
    pub trace: Option<Trace>,
}

const ACTIVE: u8 = 1;
const MID: u8 = 2;

/// Incremental simulation state for one replicate.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    graph: &'a Graph,
    space: &'a OpinionSpace,
    params: ResolvedParams,
    config: Configuration,
    band: Vec<u8>,
    active: usize,
    mid: usize,
    t_star: Option<(f64, u64)>,
    event_a: bool,
    trace: Option<Trace>,
}

impl<'a> Engine<'a> {
    pub fn new(graph: &'a Graph, space: &'a OpinionSpace, params: &SimParams, initial: Configuration) -> Result<Self> {
        let resolved = params.resolve(graph, space)?;
        if initial.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: initial.dim() });
        }
        if initial.n_vertices() != graph.n_vertices() {
            return Err(Error::invalid(format!(
                "configuration has {} vertices, graph has {}",
                initial.n_vertices(),
                graph.n_vertices()
            )));
        }
        let trace = params.record_trajectories.then(|| Trace::new(params.probe_points.clone(), &initial, space.norm()));
        let mut engine = Engine {
            graph,
            space,
            params: resolved,
            config: initial,
            band: vec![0; graph.n_edges()],
            active: 0,
            mid: 0,
            t_star: None,
            event_a: false,
            trace,
        };
        for e in 0..graph.n_edges() {
            engine.reclassify(e);
        }
        engine.check_t_star();
        Ok(engine)
    }

    pub fn params(&self) -> &ResolvedParams {
        &self.params
    }

    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    /// Number of edges whose distance lies in `[eps_stop, tau]`.
    pub fn active_edges(&self) -> usize {
        self.active
    }

    pub fn t_star(&self) -> Option<f64> {
        self.t_star.map(|(t, _)| t)
    }

    pub fn event_a(&self) -> bool {
        self.event_a
    }

    fn band_of(&self, d: f64) -> u8 {
        let p = &self.params;
        let mut b = 0;
        if d >= p.eps_stop && d <= p.tau {
            b |= ACTIVE;
        }
        if d >= p.tau / 2.0 && d <= p.tau {
            b |= MID;
        }
        b
    }

    fn reclassify(&mut self, e: usize) {
        let (u, v) = self.graph.edge(e);
        let new = self.band_of(self.config.dist(self.space.norm(), u, v));
        let old = std::mem::replace(&mut self.band[e], new);
        if old != new {
            self.active = self.active + usize::from(new & ACTIVE != 0) - usize::from(old & ACTIVE != 0);
            self.mid = self.mid + usize::from(new & MID != 0) - usize::from(old & MID != 0);
        }
    }

    // T_* needs all pairs; no edge in the band is a cheap necessary condition.
    fn check_t_star(&mut self) {
        if self.t_star.is_some() || self.mid > 0 {
            return;
        }
        let (lo, hi) = (self.params.tau / 2.0, self.params.tau);
        let n = self.config.n_vertices();
        let norm = self.space.norm();
        for x in 0..n {
            for y in x + 1..n {
                let d = self.config.dist(norm, x, y);
                if d >= lo && d <= hi {
                    return;
                }
            }
        }
        self.t_star = Some((self.config.time, self.config.event_count));
        self.event_a = (0..n).any(|x| self.space.sup_distance(self.config.opinion(x)) < hi);
    }

    /// Fires edge `e` after a wait of `dt`.
    pub fn fire(&mut self, e: usize, dt: f64) -> EventRecord {
        let (x, y) = self.graph.edge(e);
        let norm = *self.space.norm();
        let gap = self.config.dist(&norm, x, y);
        let interacted = gap <= self.params.tau;

        let mut before = Vec::new();
        if let Some(tr) = &self.trace {
            before = tr
                .probes
                .iter()
                .map(|c| norm.dist(self.config.opinion(x), c) + norm.dist(self.config.opinion(y), c))
                .collect();
        }
        if interacted {
            self.config.average(x, y, self.params.mu);
            for &f in self.graph.incident(x) {
                self.reclassify(f);
            }
            for &f in self.graph.incident(y) {
                self.reclassify(f);
            }
        }
        self.config.time += dt;
        self.config.event_count += 1;
        if interacted {
            self.check_t_star();
        }

        let record = EventRecord {
            index: self.config.event_count,
            time: self.config.time,
            edge: (x, y),
            interacted,
            displacement: if interacted { self.params.mu * gap } else { 0.0 },
        };
        if let Some(tr) = &mut self.trace {
            let last = if tr.events.is_empty() {
                tr.initial_disagreement.clone()
            } else {
                let p = tr.probes.len();
                tr.disagreement[tr.disagreement.len() - p..].to_vec()
            };
            for (k, c) in tr.probes.iter().enumerate() {
                let after = norm.dist(self.config.opinion(x), c) + norm.dist(self.config.opinion(y), c);
                tr.disagreement.push(last[k] + after - before[k]);
            }
            tr.events.push(record);
        }
        record
    }

    /// Fires `n` random events without looking at absorption.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R, n: u64) {
        let m = self.graph.n_edges();
        for _ in 0..n {
            let (e, dt) = next_event(rng, m);
            self.fire(e, dt);
        }
    }

    /// The absorption partition, if the configuration is absorbed.
    pub fn absorption(&mut self) -> Option<Vec<Vec<usize>>> {
        if self.active > 0 {
            return None;
        }
        let p = self.params;
        let found = detect_absorption(&self.config, self.graph, self.space.norm(), p.tau, p.eps_stop);
        if found.is_none() {
            // counters drifted from a from-scratch evaluation; resync
            for e in 0..self.graph.n_edges() {
                self.reclassify(e);
            }
        }
        found
    }

    /// Runs until absorption or until the event budget is spent.
    pub fn run<R: Rng + ?Sized>(self, rng: &mut R) -> RunOutcome {
        self.run_observed(rng, |_, _| {})
    }

    /// Like [`run`](Self::run), calling `observe` after every event.
    pub fn run_observed<R, F>(mut self, rng: &mut R, mut observe: F) -> RunOutcome
    where
        R: Rng + ?Sized,
        F: FnMut(&Configuration, &EventRecord),
    {
        let m = self.graph.n_edges();
        loop {
            if let Some(partition) = self.absorption() {
                let classification = match partition.len() {
                    1 => Classification::Consensus,
                    k => Classification::Fragmented { classes: k },
                };
                return self.finish(classification, Some(partition));
            }
            if self.config.event_count >= self.params.max_events {
                return self.finish(Classification::Undecided, None);
            }
            let (e, dt) = next_event(rng, m);
            let record = self.fire(e, dt);
            observe(&self.config, &record);
        }
    }

    fn finish(self, classification: Classification, partition: Option<Vec<Vec<usize>>>) -> RunOutcome {
        RunOutcome {
            classification,
            partition,
            t_star: self.t_star.map(|(t, _)| t),
            t_star_event: self.t_star.map(|(_, k)| k),
            event_a: self.event_a,
            total_events: self.config.event_count,
            final_time: self.config.time,
            params: self.params,
            final_configuration: self.config,
            trace: self.trace,
        }
    }
}

/// Samples an initial configuration and runs it to absorption.
pub fn run<R: Rng + ?Sized>(
    graph: &Graph,
    space: &OpinionSpace,
    dist: &InitialDistribution,
    params: &SimParams,
    rng: &mut R,
) -> Result<RunOutcome> {
    if dist.space() != space {
        return Err(Error::invalid("initial distribution is defined on a different opinion space"));
    }
    params.resolve(graph, space)?;
    let initial = initial_configuration(dist, graph, rng)?;
    Ok(Engine::new(graph, space, params, initial)?.run(rng))
}

/// Applies `edges` in order from `initial`; returns every intermediate
/// configuration, starting with `initial`. No clock is involved, so all
/// returned configurations have time 0.
pub fn replay(
    graph: &Graph,
    space: &OpinionSpace,
    initial: &Configuration,
    params: &SimParams,
    edges: &[(usize, usize)],
) -> Result<Vec<Configuration>> {
    let ids = edges
        .iter()
        .map(|&(u, v)| graph.edge_id(u, v).ok_or(Error::InvalidEdge { u, v }))
        .collect::<Result<Vec<_>>>()?;
    let mut engine = Engine::new(graph, space, params, initial.clone())?;
    let mut out = Vec::with_capacity(edges.len() + 1);
    out.push(engine.configuration().clone());
    for id in ids {
        engine.fire(id, 0.0);
        out.push(engine.configuration().clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};
    use crate::space::NormKind;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> Graph {
        generate(GraphKind::Path(n), 0).unwrap().graph
    }

    fn close(a: &Configuration, b: &[f64]) -> bool {
        a.as_flat().iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12) && a.as_flat().len() == b.len()
    }

    #[test]
    fn step_examples() {
        let g = path(2);
        let l2 = Norm::new(NormKind::L2, 1).unwrap();
        let c = Configuration::from_scalars(&[0.2, 0.6]).unwrap();
        let next = step(&c, &g, (0, 1), 0.5, 0.5, &l2).unwrap();
        assert!(close(&next, &[0.4, 0.4]));

        let c = Configuration::from_scalars(&[0.0, 1.0]).unwrap();
        assert_eq!(step(&c, &g, (0, 1), 0.5, 0.5, &l2).unwrap().as_flat(), &[0.0, 1.0]);

        let l1 = Norm::new(NormKind::L1, 2).unwrap();
        let c = Configuration::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let next = step(&c, &g, (0, 1), 2.0, 0.25, &l1).unwrap();
        assert_eq!(next.as_flat(), &[0.25, 0.25, 0.75, 0.75]);
    }

    #[test]
    fn step_rejects_foreign_edge_and_bad_mu() {
        let g = path(3);
        let l2 = Norm::new(NormKind::L2, 1).unwrap();
        let c = Configuration::from_scalars(&[0.0, 0.1, 0.2]).unwrap();
        assert_eq!(step(&c, &g, (0, 2), 0.5, 0.5, &l2).unwrap_err(), Error::InvalidEdge { u: 0, v: 2 });
        assert!(step(&c, &g, (0, 1), 0.5, 0.7, &l2).is_err());
    }

    #[test]
    fn next_event_single_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let (e, dt) = next_event(&mut rng, 1);
            assert_eq!(e, 0);
            assert!(dt >= 0.0);
        }
    }

    #[test]
    fn next_event_mean_wait_and_uniformity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let mut counts = [0u64; 10];
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let (e, dt) = next_event(&mut rng, 10);
            counts[e] += 1;
            sum += dt;
            sumsq += dt * dt;
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 0.1).abs() < 4.0 * se, "mean {mean}");
        let expected = n as f64 / 10.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // chi-square 0.999 quantile with 9 degrees of freedom
        assert!(chi2 < 27.877, "chi2 {chi2}");
    }

    #[test]
    fn absorption_examples() {
        let l2 = Norm::new(NormKind::L2, 1).unwrap();
        let g = generate(GraphKind::Complete(4), 0).unwrap().graph;
        let same = Configuration::from_scalars(&[0.3; 4]).unwrap();
        assert_eq!(detect_absorption(&same, &g, &l2, 0.5, 0.01), Some(vec![vec![0, 1, 2, 3]]));

        // two triangles {0,1,2} and {3,4,5} bridged by edge (2,3)
        let bridged = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap();
        let c = Configuration::from_scalars(&[0.05, 0.05, 0.05, 0.95, 0.95, 0.95]).unwrap();
        assert_eq!(detect_absorption(&c, &bridged, &l2, 0.5, 0.01), Some(vec![vec![0, 1, 2], vec![3, 4, 5]]));

        let c = Configuration::from_scalars(&[0.0, 0.3]).unwrap();
        assert_eq!(detect_absorption(&c, &path(2), &l2, 0.5, 0.01), None);
    }

    #[test]
    fn run_two_close_vertices() {
        let g = path(2);
        let space = OpinionSpace::unit_interval();
        let params = SimParams::new(0.5, 0.5).unwrap();
        let initial = Configuration::from_scalars(&[0.3, 0.4]).unwrap();
        let engine = Engine::new(&g, &space, &params, initial).unwrap();
        assert_eq!(engine.t_star(), Some(0.0));
        let out = engine.run(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(out.classification, Classification::Consensus);
        assert_eq!(out.total_events, 1);
        assert!(close(&out.final_configuration, &[0.35, 0.35]));
        assert_eq!(out.t_star, Some(0.0));
        // sup over [0, 1] of |0.3 - c| is 0.7 > tau
        assert!(!out.event_a);
    }

    #[test]
    fn run_two_far_vertices() {
        let g = path(2);
        let space = OpinionSpace::unit_interval();
        let params = SimParams::new(0.5, 0.5).unwrap();
        let initial = Configuration::from_scalars(&[0.0, 1.0]).unwrap();
        let out = Engine::new(&g, &space, &params, initial).unwrap().run(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(out.classification, Classification::Fragmented { classes: 2 });
        assert_eq!(out.total_events, 0);
        assert_eq!(out.partition, Some(vec![vec![0], vec![1]]));
    }

    #[test]
    fn replay_scripted_sequence() {
        // edge (1,2) sits at distance 0.6 > 0.5 after the first step, so it
        // and the repeated (0,1) leave the configuration unchanged
        let g = path(3);
        let space = OpinionSpace::unit_interval();
        let x0 = Configuration::from_scalars(&[0.0, 0.4, 0.8]).unwrap();
        let seq = [(0, 1), (1, 2), (0, 1)];
        let params = SimParams::new(0.5, 0.5).unwrap();
        let out = replay(&g, &space, &x0, &params, &seq).unwrap();
        assert_eq!(out.len(), 4);
        assert!(close(&out[1], &[0.2, 0.2, 0.8]));
        assert!(close(&out[2], &[0.2, 0.2, 0.8]));
        assert!(close(&out[3], &[0.2, 0.2, 0.8]));

        // with a wider threshold the middle step does interact
        let params = SimParams::new(0.65, 0.5).unwrap();
        let out = replay(&g, &space, &x0, &params, &seq).unwrap();
        assert!(close(&out[1], &[0.2, 0.2, 0.8]));
        assert!(close(&out[2], &[0.2, 0.5, 0.5]));
        assert!(close(&out[3], &[0.35, 0.35, 0.5]));
    }

    #[test]
    fn replay_edge_cases() {
        let g = path(3);
        let space = OpinionSpace::unit_interval();
        let x0 = Configuration::from_scalars(&[0.0, 0.9, 0.95]).unwrap();
        let params = SimParams::new(0.5, 0.5).unwrap();
        assert_eq!(replay(&g, &space, &x0, &params, &[]).unwrap(), vec![x0.clone()]);
        let out = replay(&g, &space, &x0, &params, &[(0, 1)]).unwrap();
        assert_eq!(out[0].as_flat(), out[1].as_flat());
        assert_eq!(replay(&g, &space, &x0, &params, &[(0, 1), (2, 0)]).unwrap_err(), Error::InvalidEdge { u: 2, v: 0 });
    }

    #[test]
    fn params_validation() {
        assert!(SimParams::new(0.0, 0.5).is_err());
        assert!(SimParams::new(0.5, 0.0).is_err());
        assert!(SimParams::new(0.5, 0.51).is_err());
        let g = path(4);
        let space = OpinionSpace::unit_interval();
        let r = SimParams::new(0.8, 0.5).unwrap().resolve(&g, &space).unwrap();
        assert_abs_diff_eq!(r.eps_stop, 0.05, epsilon = 1e-15);
        assert_eq!(r.max_events, 10_000 * 3 * 4);
        assert!(SimParams::new(0.8, 0.5).unwrap().with_eps_stop(0.4).resolve(&g, &space).is_err());
        let outside = SimParams::new(0.8, 0.5).unwrap().recording(vec![vec![1.5]]);
        assert!(outside.resolve(&g, &space).is_err());
    }

    #[test]
    fn incremental_counts_match_scratch() {
        let g = generate(GraphKind::Torus { width: 4, height: 4 }, 0).unwrap().graph;
        let space = OpinionSpace::unit_interval();
        let dist = InitialDistribution::uniform(space.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let initial = initial_configuration(&dist, &g, &mut rng).unwrap();
        let params = SimParams::new(0.4, 0.3).unwrap();
        let mut engine = Engine::new(&g, &space, &params, initial).unwrap();
        let p = *engine.params();
        for _ in 0..2000 {
            engine.advance(&mut rng, 1);
            let scratch = g
                .edges()
                .iter()
                .filter(|&&(u, v)| {
                    let d = space.dist(engine.configuration().opinion(u), engine.configuration().opinion(v));
                    d >= p.eps_stop && d <= p.tau
                })
                .count();
            assert_eq!(engine.active_edges(), scratch);
        }
    }

    #[test]
    fn trace_records_probe_disagreement() {
        let g = generate(GraphKind::Cycle(6), 0).unwrap().graph;
        let space = OpinionSpace::unit_interval();
        let dist = InitialDistribution::uniform(space.clone());
        let params = SimParams::new(0.6, 0.5).unwrap().recording(vec![vec![0.0], vec![0.5], vec![1.0]]);
        let out = run(&g, &space, &dist, &params, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let trace = out.trace.as_ref().unwrap();
        assert_eq!(trace.events.len() as u64, out.total_events);
        for k in 0..3 {
            let series: Vec<f64> = trace.disagreement_series(k).collect();
            assert_eq!(series.len() as u64, out.total_events + 1);
            let direct = out.final_configuration.disagreement_with(&trace.probes[k], space.norm());
            assert_abs_diff_eq!(*series.last().unwrap(), direct, epsilon = 1e-9);
        }
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("event_index,time,edge_u,edge_v,interacted,x_c0,x_c1,x_c2\n0,0,,,0,"));
        assert_eq!(text.lines().count() as u64, out.total_events + 2);
    }

    #[test]
    fn run_is_reproducible() {
        let g = generate(GraphKind::Complete(8), 0).unwrap().graph;
        let space = OpinionSpace::ball(vec![0.0, 0.0], 1.0, NormKind::L2).unwrap();
        let dist = InitialDistribution::uniform(space.clone());
        let params = SimParams::new(0.9, 0.4).unwrap();
        let a = run(&g, &space, &dist, &params, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
        let b = run(&g, &space, &dist, &params, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_exhaustion_is_undecided() {
        let g = path(10);
        let space = OpinionSpace::unit_interval();
        let initial = Configuration::from_scalars(&(0..10).map(|i| i as f64 / 9.0).collect::<Vec<_>>()).unwrap();
        let params = SimParams::new(0.9, 0.5).unwrap().with_max_events(5);
        let out = Engine::new(&g, &space, &params, initial).unwrap().run(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out.classification, Classification::Undecided);
        assert_eq!(out.total_events, 5);
        assert!(out.partition.is_none());
    }
}
