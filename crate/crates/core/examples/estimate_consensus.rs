//! Monte Carlo consensus frequencies on several graphs against the same
//! graph-independent bound.
//!
//! cargo run --release --example estimate_consensus

use deffuant_lab::analysis::{consensus_lower_bound, estimate_consensus, ExpectedDisagreement, Z_99};
use deffuant_lab::dynamics::SimParams;
use deffuant_lab::graph::{generate, GraphKind};
use deffuant_lab::init::InitialDistribution;
use deffuant_lab::space::OpinionSpace;

fn main() -> deffuant_lab::error::Result<()> {
    let space = OpinionSpace::unit_interval();
    let dist = InitialDistribution::uniform(space.clone());
    let tau = 0.8;
    let bound =
        consensus_lower_bound(tau, &space, ExpectedDisagreement::exact(dist.expected_disagreement_analytic()?))?;
    println!("bound for every graph: {:.4}", bound.clamped_bound);

    let params = SimParams::new(tau, 0.5)?;
    for spec in ["complete:10", "path:10", "cycle:10", "torus:4x4", "star:10", "er:12:0.3"] {
        let graph = generate(spec.parse::<GraphKind>()?, 7)?.graph;
        let est = estimate_consensus(&graph, &space, &dist, &params, 1000, 42, 0, Z_99)?;
        let r = &est.report;
        println!(
            "{spec:<12} consensus {:.3}  99% CI [{:.3}, {:.3}]  fragmented {}  undecided {}  mean T_* {:.3}",
            r.pessimistic_estimate,
            r.wilson_lo,
            r.wilson_hi,
            r.n_fragmented,
            r.n_undecided,
            r.mean_t_star.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
