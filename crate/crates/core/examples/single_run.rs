//! One trajectory on a cycle, with the disagreement X_t^c recorded at every
//! event and written as CSV.
//!
//! cargo run --example single_run -- [trace.csv]

use deffuant_lab::dynamics::{run, SimParams};
use deffuant_lab::graph::{generate, GraphKind};
use deffuant_lab::init::InitialDistribution;
use deffuant_lab::space::OpinionSpace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = generate(GraphKind::Cycle(12), 0)?.graph;
    let space = OpinionSpace::unit_interval();
    let dist = InitialDistribution::uniform(space.clone());
    let params = SimParams::new(0.3, 0.5)?.recording(vec![vec![0.25], vec![0.5], vec![0.75]]);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let outcome = run(&graph, &space, &dist, &params, &mut rng)?;

    println!("classification: {:?}", outcome.classification);
    println!("events: {}, time: {:.3}", outcome.total_events, outcome.final_time);
    println!("T_*: {:?}, event A: {}", outcome.t_star, outcome.event_a);
    for class in outcome.partition.iter().flatten() {
        let x = outcome.final_configuration.opinion(class[0])[0];
        println!("  class {class:?} at {x:.4}");
    }

    let trace = outcome.trace.expect("recording was requested");
    // at an endpoint of [0, 1] the disagreement is the conserved opinion sum
    for (k, c) in trace.probes.iter().enumerate() {
        let series: Vec<f64> = trace.disagreement_series(k).collect();
        println!("X^{}: {:.4} -> {:.4}", c[0], series[0], series[series.len() - 1]);
    }

    if let Some(path) = std::env::args().nth(1) {
        trace.write_csv(std::fs::File::create(&path)?)?;
        println!("wrote {} rows to {path}", trace.events.len() + 1);
    }
    Ok(())
}
