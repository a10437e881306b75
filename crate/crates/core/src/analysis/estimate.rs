//! Monte Carlo estimation of the consensus probability.
//!
//! Replicate `i` draws everything (initial opinions and event sequence) from
//! a ChaCha8 stream seeded with [`replicate_seed`]`(master_seed, i)`, so any
//! single run can be reproduced from its CSV row. Results are gathered in
//! replicate order, which makes every report independent of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{run, Classification, RunOutcome, SimParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::init::InitialDistribution;
use crate::space::{Norm, OpinionSpace};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;
/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.5758293035489;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // the endpoints are exactly 0 and 1 at the extremes
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replicate_seed(master_seed: u64, replicate: u64) -> u64 {
    mix(mix(master_seed) ^ replicate)
}

pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replicate_seed(master_seed, replicate))
}

/// Independent re-check of an absorbed configuration, computed from the
/// final opinions and partition only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AbsorptionAudit {
    /// Edges with distance in `[eps_stop, tau]`.
    pub edges_in_gap: usize,
    /// Edges joining two classes at distance `<= tau`.
    pub compatible_cross_edges: usize,
    /// Classes whose spread exceeds `(size − 1) · eps_stop`.
    pub loose_classes: usize,
    /// Vertices missing from, or repeated in, the partition.
    pub partition_defects: usize,
}

impl AbsorptionAudit {
    pub fn is_clean(&self) -> bool {
        *self == AbsorptionAudit::default()
    }
}

pub fn audit_absorption(outcome: &RunOutcome, graph: &Graph, norm: &Norm) -> Option<AbsorptionAudit> {
    let partition = outcome.partition.as_ref()?;
    let cfg = &outcome.final_configuration;
    let (tau, eps) = (outcome.params.tau, outcome.params.eps_stop);
    let n = graph.n_vertices();
    let mut class_of = vec![usize::MAX; n];
    let mut audit = AbsorptionAudit::default();
    for (k, class) in partition.iter().enumerate() {
        for &x in class {
            if x >= n || class_of[x] != usize::MAX {
                audit.partition_defects += 1;
            } else {
                class_of[x] = k;
            }
        }
    }
    audit.partition_defects += class_of.iter().filter(|&&c| c == usize::MAX).count();
    for &(u, v) in graph.edges() {
        let d = norm.dist(cfg.opinion(u), cfg.opinion(v));
        if d >= eps && d <= tau {
            audit.edges_in_gap += 1;
        }
        if class_of[u] != class_of[v] && d <= tau {
            audit.compatible_cross_edges += 1;
        }
    }
    for class in partition {
        let limit = (class.len().saturating_sub(1)) as f64 * eps + 1e-12;
        let spread_ok = class
            .iter()
            .all(|&x| class.iter().all(|&y| x >= n || y >= n || norm.dist(cfg.opinion(x), cfg.opinion(y)) <= limit));
        if !spread_ok {
            audit.loose_classes += 1;
        }
    }
    Some(audit)
}

/// One row of the per-run CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub seed: u64,
    pub classification: Classification,
    pub events: u64,
    pub final_time: f64,
    pub t_star: Option<f64>,
    pub event_a: bool,
    pub audit: Option<AbsorptionAudit>,
}

impl RunRecord {
    pub fn from_outcome(run_id: usize, seed: u64, outcome: &RunOutcome, graph: &Graph, norm: &Norm) -> Self {
        RunRecord {
            run_id,
            seed,
            classification: outcome.classification,
            events: outcome.total_events,
            final_time: outcome.final_time,
            t_star: outcome.t_star,
            event_a: outcome.event_a,
            audit: audit_absorption(outcome, graph, norm),
        }
    }

    pub fn csv_header() -> &'static [&'static str] {
        &["run_id", "seed", "classification", "n_classes", "events", "final_time", "T_star", "event_A"]
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.run_id.to_string(),
            self.seed.to_string(),
            self.classification.label().to_string(),
            self.classification.n_classes().map(|k| k.to_string()).unwrap_or_default(),
            self.events.to_string(),
            self.final_time.to_string(),
            self.t_star.map(|t| t.to_string()).unwrap_or_default(),
            u8::from(self.event_a).to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub n_runs: usize,
    pub n_consensus: usize,
    pub n_fragmented: usize,
    pub n_undecided: usize,
    /// `n_consensus / n_runs`.
    pub point_estimate: f64,
    /// `n_consensus / n_runs` with undecided runs counted as failures.
    pub pessimistic_estimate: f64,
    /// `n_consensus / (n_consensus + n_fragmented)`, when any run was decided.
    pub decided_estimate: Option<f64>,
    pub z: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub t_star_reached: usize,
    pub mean_t_star: Option<f64>,
    pub event_a_count: usize,
    pub event_a_frequency: f64,
    /// Runs with event A at `T_*` that did not end in consensus.
    pub event_a_without_consensus: usize,
}

impl EstimateReport {
    /// Aggregates replicate records; the result depends only on their order.
    pub fn from_records(records: &[RunRecord], z: f64) -> Self {
        let n_runs = records.len();
        let count = |f: fn(&Classification) -> bool| records.iter().filter(|r| f(&r.classification)).count();
        let n_consensus = count(|c| matches!(c, Classification::Consensus));
        let n_fragmented = count(|c| matches!(c, Classification::Fragmented { .. }));
        let n_undecided = count(|c| matches!(c, Classification::Undecided));
        let frac = |k: usize| if n_runs == 0 { 0.0 } else { k as f64 / n_runs as f64 };
        let (wilson_lo, wilson_hi) = wilson_interval(n_consensus, n_runs, z);
        let t_stars: Vec<f64> = records.iter().filter_map(|r| r.t_star).collect();
        let event_a_count = records.iter().filter(|r| r.t_star.is_some() && r.event_a).count();
        let decided = n_consensus + n_fragmented;
        EstimateReport {
            n_runs,
            n_consensus,
            n_fragmented,
            n_undecided,
            point_estimate: frac(n_consensus),
            pessimistic_estimate: frac(n_consensus),
            decided_estimate: (decided > 0).then(|| n_consensus as f64 / decided as f64),
            z,
            wilson_lo,
            wilson_hi,
            t_star_reached: t_stars.len(),
            mean_t_star: (!t_stars.is_empty()).then(|| t_stars.iter().sum::<f64>() / t_stars.len() as f64),
            event_a_count,
            event_a_frequency: frac(event_a_count),
            event_a_without_consensus: records
                .iter()
                .filter(|r| r.t_star.is_some() && r.event_a && r.classification != Classification::Consensus)
                .count(),
        }
    }

    pub fn wilson_half_width(&self) -> f64 {
        (self.wilson_hi - self.wilson_lo) / 2.0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate report serializes")
    }

    pub fn csv_header() -> &'static [&'static str] {
        &[
            "n_runs",
            "n_consensus",
            "n_fragmented",
            "n_undecided",
            "point_estimate",
            "pessimistic_estimate",
            "wilson_lo",
            "wilson_hi",
            "mean_t_star",
            "event_a_frequency",
        ]
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.n_runs.to_string(),
            self.n_consensus.to_string(),
            self.n_fragmented.to_string(),
            self.n_undecided.to_string(),
            self.point_estimate.to_string(),
            self.pessimistic_estimate.to_string(),
            self.wilson_lo.to_string(),
            self.wilson_hi.to_string(),
            self.mean_t_star.map(|t| t.to_string()).unwrap_or_default(),
            self.event_a_frequency.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub report: EstimateReport,
    pub runs: Vec<RunRecord>,
}

/// Runs `n_runs` replicates on a pool of `workers` threads (0 = all cores)
/// and maps each outcome through `f`. Output is in replicate order.
#[allow(clippy::too_many_arguments)]
pub fn run_replicates<T, F>(
    graph: &Graph,
    space: &OpinionSpace,
    dist: &InitialDistribution,
    params: &SimParams,
    n_runs: usize,
    master_seed: u64,
    workers: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64, RunOutcome) -> T + Sync,
{
    params.resolve(graph, space)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..n_runs)
            .into_par_iter()
            .map(|i| {
                let seed = replicate_seed(master_seed, i as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                run(graph, space, dist, params, &mut rng).map(|out| f(i, seed, out))
            })
            .collect()
    })
}

/// Monte Carlo estimate of the consensus probability with a Wilson interval
/// at normal quantile `z`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_consensus(
    graph: &Graph,
    space: &OpinionSpace,
    dist: &InitialDistribution,
    params: &SimParams,
    n_runs: usize,
    master_seed: u64,
    workers: usize,
    z: f64,
) -> Result<Estimate> {
    if n_runs == 0 {
        return Err(Error::invalid("n_runs must be at least 1"));
    }
    let runs = run_replicates(graph, space, dist, params, n_runs, master_seed, workers, |i, seed, out| {
        RunRecord::from_outcome(i, seed, &out, graph, space.norm())
    })?;
    Ok(Estimate { report: EstimateReport::from_records(&runs, z), runs })
}
