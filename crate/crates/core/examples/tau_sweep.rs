//! Bound and estimate across thresholds, printed as plot-ready CSV. Every
//! threshold reuses the same replicate seeds.
//!
//! cargo run --release --example tau_sweep > sweep.csv

use deffuant_lab::analysis::{consensus_lower_bound, estimate_consensus, ExpectedDisagreement, Z_95};
use deffuant_lab::dynamics::SimParams;
use deffuant_lab::graph::{generate, GraphKind};
use deffuant_lab::init::InitialDistribution;
use deffuant_lab::space::{NormKind, OpinionSpace};

fn main() -> deffuant_lab::error::Result<()> {
    let graph = generate(GraphKind::Torus { width: 4, height: 4 }, 0)?.graph;
    let space = OpinionSpace::ball(vec![0.0, 0.0], 1.0, NormKind::L2)?;
    let dist = InitialDistribution::triangular(space.clone())?;
    let expected = ExpectedDisagreement::exact(dist.expected_disagreement_analytic()?);

    println!("tau,clamped_bound,point_estimate,wilson_lo,wilson_hi,undecided");
    for i in 0..=12 {
        let tau = 0.5 + 0.25 * i as f64;
        let bound = consensus_lower_bound(tau, &space, expected)?;
        let est = estimate_consensus(&graph, &space, &dist, &SimParams::new(tau, 0.5)?, 400, 9, 0, Z_95)?;
        let r = est.report;
        println!(
            "{tau},{},{},{},{},{}",
            bound.clamped_bound, r.point_estimate, r.wilson_lo, r.wilson_hi, r.n_undecided
        );
    }
    Ok(())
}
