//! Runtime checks of the structural properties behind the consensus bound:
//! the two triangle-type inequalities for the interaction map, monotonicity
//! of `X_t^c`, shrinking jumps, the edge gap and limit partition at
//! absorption, finiteness of `T_*`, and the inclusion of event A in the
//! consensus event.
//!
//! Each property becomes one [`PropertyRecord`] with its trial count,
//! violation count, worst margin (smallest `allowed − observed`, negative
//! means violated) and the first counterexample found.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::estimate::{replicate_seed, RunRecord};
use crate::dynamics::{Classification, Engine, SimParams, MEMBERSHIP_SLACK};
use crate::error::{Error, Result};
use crate::graph::{generate, Graph, GraphKind};
use crate::init::{initial_configuration, InitialDistribution};
use crate::space::{interpolate, ConvexSet, Norm, NormKind, OpinionSpace};

pub const TRIANGLE_SLACK: f64 = 1e-12;
pub const MONOTONE_SLACK: f64 = 1e-9;
pub const CONSERVATION_SLACK: f64 = 1e-9;
/// Minimum run length for the shrinking-jump comparison.
pub const LONG_RUN_EVENTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRecord {
    pub name: String,
    pub claim: String,
    pub trials: u64,
    pub violations: u64,
    pub worst_margin: f64,
    pub counterexample: Option<String>,
}

impl PropertyRecord {
    fn new(name: &str, claim: &str) -> Self {
        PropertyRecord {
            name: name.into(),
            claim: claim.into(),
            trials: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            counterexample: None,
        }
    }

    /// Records one trial with `margin = allowed − observed`.
    fn observe(&mut self, margin: f64, slack: f64, describe: impl FnOnce() -> String) {
        self.trials += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if margin < -slack || margin.is_nan() {
            self.violations += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }

    fn merge(&mut self, other: &PropertyRecord) {
        self.trials += other.trials;
        self.violations += other.violations;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        if self.counterexample.is_none() {
            self.counterexample.clone_from(&other.counterexample);
        }
    }

    /// Passing requires at least one trial and no violation.
    pub fn passed(&self) -> bool {
        self.trials > 0 && self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub records: Vec<PropertyRecord>,
    pub notes: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(PropertyRecord::passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lemma report serializes")
    }

    /// One line per property.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let status = if r.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {:<28} trials={:<8} violations={:<4} worst_margin={:.3e}\n",
                r.name, r.trials, r.violations, r.worst_margin
            ));
            if let Some(ce) = &r.counterexample {
                out.push_str(&format!("     counterexample: {ce}\n"));
            }
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheckConfig {
    pub geometry_trials: usize,
    pub traces: usize,
    pub probes: usize,
    /// Extra long runs used for the shrinking-jump property.
    pub long_runs: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for LemmaCheckConfig {
    fn default() -> Self {
        LemmaCheckConfig { geometry_trials: 100_000, traces: 100, probes: 10, long_runs: 4, seed: 2024, workers: 0 }
    }
}

/// Random trials of the two triangle-type inequalities for `φ` and of the
/// ordering `a, φ(a,b), (a+b)/2, φ(b,a), b` along the segment.
pub fn geometry_checks(trials: usize, seed: u64) -> Vec<PropertyRecord> {
    let mut first = PropertyRecord::new("triangle_inequality_first", "|phi(a,b)-c| + |phi(b,a)-c| <= |a-c| + |b-c|");
    let mut second = PropertyRecord::new(
        "triangle_inequality_second",
        "|phi(a,b)-c| + |phi(b,a)-c| <= |a-c| + |b-c| - 2|phi(a,b)-a| + |a+b-2c|",
    );
    let mut collinear = PropertyRecord::new("segment_order", "|a-phi(a,b)| + |phi(a,b)-m| = |a-m| with m the midpoint");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [NormKind::L1, NormKind::L2, NormKind::Linf];
    for _ in 0..trials {
        let d = rng.random_range(1..=3usize);
        let norm = Norm::new(kinds[rng.random_range(0..3)], d).expect("valid norm");
        let mut point =
            |lo: f64, hi: f64| -> Vec<f64> { (0..d).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect() };
        let a = point(-1.0, 1.0);
        let b = point(-1.0, 1.0);
        let c = point(-3.0, 3.0);
        let mu = 0.5 * (1.0 - rng.random::<f64>());
        let pab = interpolate(&a, &b, mu).expect("mu in range");
        let pba = interpolate(&b, &a, mu).expect("mu in range");
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let abc: Vec<f64> = a.iter().zip(&b).zip(&c).map(|((x, y), z)| x + y - 2.0 * z).collect();

        let lhs = norm.dist(&pab, &c) + norm.dist(&pba, &c);
        let rhs1 = norm.dist(&a, &c) + norm.dist(&b, &c);
        let rhs2 = rhs1 - 2.0 * norm.dist(&pab, &a) + norm.eval(&abc);
        let describe = |rhs: f64| format!("a={a:?} b={b:?} c={c:?} mu={mu} norm={} lhs={lhs} rhs={rhs}", norm.kind());
        first.observe(rhs1 - lhs, TRIANGLE_SLACK, || describe(rhs1));
        second.observe(rhs2 - lhs, TRIANGLE_SLACK, || describe(rhs2));
        let along = norm.dist(&a, &pab) + norm.dist(&pab, &mid);
        let direct = norm.dist(&a, &mid);
        collinear.observe(-(along - direct).abs(), TRIANGLE_SLACK, || {
            format!("a={a:?} b={b:?} mu={mu} norm={} path={along} direct={direct}", norm.kind())
        });
    }
    vec![first, second, collinear]
}

/// One simulated setting used for recorded traces.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub label: String,
    pub graph: Graph,
    pub space: OpinionSpace,
    pub dist: InitialDistribution,
    pub tau: f64,
    pub mu: f64,
}

fn scenario_graph(kind: GraphKind) -> Graph {
    generate(kind, 7).expect("fixed generator parameters are valid").graph
}

/// The mixed family of settings cycled through by the trace checks.
pub fn trace_scenario(i: usize) -> Scenario {
    let graphs = [
        GraphKind::Complete(10),
        GraphKind::Path(10),
        GraphKind::Cycle(10),
        GraphKind::Torus { width: 4, height: 4 },
        GraphKind::Star(9),
        GraphKind::ErdosRenyi { n: 12, p: 0.3 },
    ];
    let kind = graphs[i % graphs.len()];
    let mus = [0.5, 0.3, 0.1];
    let mu = mus[(i / graphs.len()) % mus.len()];
    let (space, dist, tau) = match (i / 2) % 4 {
        0 => {
            let s = OpinionSpace::unit_interval();
            (s.clone(), InitialDistribution::uniform(s), [0.3, 0.5, 0.8][i % 3])
        }
        1 => {
            let s = OpinionSpace::ball(vec![0.0, 0.0], 1.0, NormKind::L2).unwrap();
            (s.clone(), InitialDistribution::uniform(s), [0.6, 1.2, 2.5][i % 3])
        }
        2 => {
            let s = OpinionSpace::ball(vec![0.5, 0.5], 1.0, NormKind::L1).unwrap();
            (s.clone(), InitialDistribution::triangular(s).unwrap(), [0.7, 1.3, 2.2][i % 3])
        }
        _ => {
            let s = OpinionSpace::new(ConvexSet::unit_cube(3).unwrap(), Norm::new(NormKind::Linf, 3).unwrap()).unwrap();
            (s.clone(), InitialDistribution::uniform(s), [0.4, 0.6, 0.9][i % 3])
        }
    };
    Scenario {
        label: format!("{kind} {} tau={tau} mu={mu}", dist_label(&dist)),
        graph: scenario_graph(kind),
        space,
        dist,
        tau,
        mu,
    }
}

/// Slow-mixing settings that reliably run for more than [`LONG_RUN_EVENTS`] events.
pub fn long_scenario(i: usize) -> Scenario {
    let kinds = [GraphKind::Path(40), GraphKind::Cycle(40), GraphKind::Torus { width: 8, height: 8 }];
    let kind = kinds[i % kinds.len()];
    let space = OpinionSpace::unit_interval();
    let dist = InitialDistribution::uniform(space.clone());
    Scenario {
        label: format!("{kind} uniform tau=1 mu=0.05"),
        graph: scenario_graph(kind),
        space,
        dist,
        tau: 1.0,
        mu: 0.05,
    }
}

fn dist_label(d: &InitialDistribution) -> String {
    format!("{:?}", d.kind()).to_lowercase()
}

/// Tallies produced by one recorded trace.
#[derive(Debug, Clone)]
struct TraceTallies {
    monotone: PropertyRecord,
    bounded: PropertyRecord,
    membership: PropertyRecord,
    conservation: PropertyRecord,
    shrinking: PropertyRecord,
    record: RunRecord,
}

fn check_trace(scenario: &Scenario, probes: usize, seed: u64, run_id: usize) -> Result<TraceTallies> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = scenario.space.dim();
    let mut probe_points = vec![scenario.space.center().to_vec()];
    while probe_points.len() < probes {
        let mut c = vec![0.0; d];
        scenario.space.set().sample_uniform_into(&mut rng, &mut c)?;
        probe_points.push(c);
    }
    probe_points.truncate(probes);
    let params = SimParams::new(scenario.tau, scenario.mu)?.recording(probe_points);
    let initial = initial_configuration(&scenario.dist, &scenario.graph, &mut rng)?;
    let initial_sum = initial.coordinate_sum();
    let engine = Engine::new(&scenario.graph, &scenario.space, &params, initial)?;

    let mut membership = PropertyRecord::new("opinions_stay_in_set", "every updated opinion lies in the opinion set");
    let space = &scenario.space;
    let outcome = engine.run_observed(&mut rng, |cfg, ev| {
        if ev.interacted {
            for x in [ev.edge.0, ev.edge.1] {
                let ok = space.contains(cfg.opinion(x), MEMBERSHIP_SLACK);
                membership.observe(if ok { 0.0 } else { -1.0 }, 0.0, || {
                    format!("{}: event {} vertex {x} at {:?}", scenario.label, ev.index, cfg.opinion(x))
                });
            }
        }
    });
    let trace = outcome.trace.as_ref().expect("recording was requested");
    let n = scenario.graph.n_vertices() as f64;
    let cap = scenario.space.diameter() * n;

    let mut monotone = PropertyRecord::new("disagreement_nonincreasing", "X_t^c never increases for c in the set");
    let mut bounded = PropertyRecord::new("disagreement_bounded", "0 <= X_t^c <= D * N");
    for k in 0..trace.n_probes() {
        let series: Vec<f64> = trace.disagreement_series(k).collect();
        let mut worst_step = f64::INFINITY;
        let mut at = 0;
        for (i, w) in series.windows(2).enumerate() {
            if w[0] - w[1] < worst_step {
                worst_step = w[0] - w[1];
                at = i + 1;
            }
        }
        let c = &trace.probes[k];
        monotone.observe(if series.len() > 1 { worst_step } else { 0.0 }, MONOTONE_SLACK, || {
            format!("{}: probe {c:?} increased by {} at event {at}", scenario.label, -worst_step)
        });
        let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
        bounded.observe((cap - hi).min(lo), MONOTONE_SLACK, || {
            format!("{}: probe {c:?} range [{lo}, {hi}] vs cap {cap}", scenario.label)
        });
    }

    let mut conservation = PropertyRecord::new("opinion_sum_conserved", "coordinate-wise sum of opinions is invariant");
    let final_sum = outcome.final_configuration.coordinate_sum();
    let drift = initial_sum.iter().zip(&final_sum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    conservation.observe(-drift, CONSERVATION_SLACK, || {
        format!("{}: drift {drift} after {} events", scenario.label, outcome.total_events)
    });

    let mut shrinking = PropertyRecord::new(
        "jumps_shrink",
        "max jump over the last 5% of events < max jump over the first 5% (runs with >= 10^4 events)",
    );
    let events = &trace.events;
    if events.len() >= LONG_RUN_EVENTS && outcome.partition.is_some() {
        let w = events.len() / 20;
        let head = events[..w].iter().map(|e| e.displacement).fold(0.0, f64::max);
        let tail = events[events.len() - w..].iter().map(|e| e.displacement).fold(0.0, f64::max);
        let margin = if tail < head { head - tail } else { -(tail - head).max(f64::MIN_POSITIVE) };
        shrinking.observe(margin, 0.0, || {
            format!("{}: head max {head}, tail max {tail} over {} events", scenario.label, events.len())
        });
    }

    let record = RunRecord::from_outcome(run_id, seed, &outcome, &scenario.graph, scenario.space.norm());
    Ok(TraceTallies { monotone, bounded, membership, conservation, shrinking, record })
}

/// Properties that only need the per-run records of absorbed runs.
pub fn absorption_checks(runs: &[RunRecord]) -> (Vec<PropertyRecord>, Vec<String>) {
    let mut gap = PropertyRecord::new("edge_gap_at_absorption", "no edge distance in [eps_stop, tau] once absorbed");
    let mut partition = PropertyRecord::new(
        "limit_partition",
        "classes are tight (spread <= (k-1) eps_stop) and cross-class edges exceed tau",
    );
    let mut t_star = PropertyRecord::new("t_star_reached", "every consensus run reaches T_*");
    let mut inclusion = PropertyRecord::new("event_a_implies_consensus", "event A at T_* implies consensus");
    let mut fragmented_without_t_star = 0usize;
    let mut undecided = 0usize;
    for r in runs {
        if let Some(a) = r.audit {
            gap.observe(-(a.edges_in_gap as f64), 0.0, || format!("run {} seed {}: {a:?}", r.run_id, r.seed));
            let bad = a.compatible_cross_edges + a.loose_classes + a.partition_defects;
            partition.observe(-(bad as f64), 0.0, || format!("run {} seed {}: {a:?}", r.run_id, r.seed));
        }
        match r.classification {
            Classification::Consensus => {
                t_star.observe(if r.t_star.is_some() { 0.0 } else { -1.0 }, 0.0, || {
                    format!("run {} seed {}: consensus without T_*", r.run_id, r.seed)
                });
            }
            Classification::Fragmented { .. } if r.t_star.is_none() => fragmented_without_t_star += 1,
            Classification::Undecided => undecided += 1,
            _ => {}
        }
        if r.t_star.is_some() && r.event_a {
            let ok = r.classification == Classification::Consensus;
            inclusion.observe(if ok { 0.0 } else { -1.0 }, 0.0, || {
                format!("run {} seed {}: event A but {}", r.run_id, r.seed, r.classification.label())
            });
        }
    }
    let mut notes = Vec::new();
    if fragmented_without_t_star > 0 {
        notes.push(format!(
            "{fragmented_without_t_star} fragmented run(s) stopped before T_*: a non-adjacent pair kept a distance in [tau/2, tau]"
        ));
    }
    if undecided > 0 {
        notes.push(format!("{undecided} run(s) exhausted the event budget (undecided)"));
    }
    (vec![gap, partition, t_star, inclusion], notes)
}

/// Full property suite: geometry trials, recorded traces over the mixed
/// scenario family plus long runs, and absorption checks over those traces
/// and any `extra_runs` supplied by the caller.
pub fn lemma_check_report(cfg: &LemmaCheckConfig, extra_runs: &[RunRecord]) -> Result<LemmaReport> {
    if cfg.probes == 0 {
        return Err(Error::invalid("lemma checks need at least one probe point"));
    }
    let mut records = geometry_checks(cfg.geometry_trials, cfg.seed);

    let scenarios: Vec<Scenario> =
        (0..cfg.traces).map(trace_scenario).chain((0..cfg.long_runs).map(long_scenario)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let tallies: Vec<TraceTallies> = pool.install(|| {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let probes = if i < cfg.traces { cfg.probes } else { 2 };
                check_trace(s, probes, replicate_seed(cfg.seed, i as u64), i)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut merged = tallies[0].clone();
    for t in &tallies[1..] {
        merged.monotone.merge(&t.monotone);
        merged.bounded.merge(&t.bounded);
        merged.membership.merge(&t.membership);
        merged.conservation.merge(&t.conservation);
        merged.shrinking.merge(&t.shrinking);
    }
    records.extend([merged.monotone, merged.bounded, merged.membership, merged.conservation, merged.shrinking]);

    let runs: Vec<RunRecord> = tallies.into_iter().map(|t| t.record).chain(extra_runs.iter().cloned()).collect();
    let (absorbed, notes) = absorption_checks(&runs);
    records.extend(absorbed);
    Ok(LemmaReport { records, notes })
}
