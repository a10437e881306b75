//! The lower bound on the consensus probability for a few settings.
//!
//! cargo run --example consensus_bound

use deffuant_lab::analysis::{
    consensus_lower_bound, example_triangular_bound, example_uniform_bound, ExpectedDisagreement,
};
use deffuant_lab::init::InitialDistribution;
use deffuant_lab::space::{ConvexSet, Norm, NormKind, OpinionSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> deffuant_lab::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let interval = OpinionSpace::unit_interval();
    let uniform = InitialDistribution::uniform(interval.clone());
    for tau in [0.4, 0.6, 0.8, 1.0] {
        let report = consensus_lower_bound(tau, &interval, ExpectedDisagreement::of(&uniform, 0, &mut rng)?)?;
        println!("[0,1] uniform tau={tau}: raw {:?}, clamped {:.4}", report.raw_bound, report.clamped_bound);
    }

    println!("uniform ball d=2 r=1 tau=3: {:.4}", example_uniform_bound(2, 1.0, 3.0)?);
    println!("triangular ball d=2 r=1 tau=2.5: {:.4}", example_triangular_bound(2, 1.0, 2.5)?);

    // the unit square under L2 has no closed form, so E|X - c| is estimated
    let square = OpinionSpace::new(ConvexSet::unit_cube(2)?, Norm::new(NormKind::L2, 2)?)?;
    let dist = InitialDistribution::uniform(square.clone());
    let report = consensus_lower_bound(1.2, &square, ExpectedDisagreement::of(&dist, 500_000, &mut rng)?)?;
    println!("{}", report.to_json());
    Ok(())
}
