//! Sampling initial opinions and the moment E|X - c|.
//!
//! cargo run --example initial_distributions

use deffuant_lab::init::InitialDistribution;
use deffuant_lab::space::{NormKind, OpinionSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> deffuant_lab::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 1..=3 {
        for kind in [NormKind::L2, NormKind::L1] {
            let space = OpinionSpace::ball(vec![0.0; d], 1.0, kind)?;
            for dist in [InitialDistribution::uniform(space.clone()), InitialDistribution::triangular(space.clone())?] {
                let exact = dist.expected_disagreement_analytic()?;
                let mc = dist.expected_disagreement_mc(space.center(), 200_000, &mut rng)?;
                println!(
                    "d={d} {kind:<4} {:<14} exact {exact:.4}  mc {:.4} ± {:.4}",
                    format!("{:?}", dist.kind()),
                    mc.mean,
                    mc.std_error
                );
            }
        }
    }

    let space = OpinionSpace::unit_interval();
    let dist = InitialDistribution::uniform(space);
    let sample: Vec<f64> = (0..5).map(|_| dist.sample(&mut rng).map(|x| x[0])).collect::<Result<_, _>>()?;
    println!("five draws from U[0,1]: {sample:.3?}");
    Ok(())
}
