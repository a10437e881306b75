//! Norms, opinion sets, diameters and the interaction map.
//!
//! cargo run --example geometry

use deffuant_lab::space::{interpolate, ConvexSet, Norm, NormKind, OpinionSpace};

fn main() -> deffuant_lab::error::Result<()> {
    let a = [0.0, 0.0];
    let b = [0.6, 0.8];
    for kind in [NormKind::L1, NormKind::L2, NormKind::Linf, NormKind::Lp(3.0)] {
        let norm = Norm::new(kind, 2)?;
        println!("{kind:>5}: |a - b| = {:.4}", norm.distance(&a, &b)?);
    }

    // phi(a, b) = a + mu (b - a), and its mirror image
    let mu = 0.25;
    println!("phi(a,b) = {:?}, phi(b,a) = {:?}", interpolate(&a, &b, mu)?, interpolate(&b, &a, mu)?);

    let disc = OpinionSpace::ball(vec![0.0, 0.0], 1.0, NormKind::L2)?;
    let square = OpinionSpace::new(ConvexSet::unit_cube(2)?, Norm::new(NormKind::L1, 2)?)?;
    for (name, space) in [("unit disc", &disc), ("unit square, L1", &square)] {
        println!(
            "{name}: D = {}, center = {:?}, sup |(0.5,0) - c| = {:.4}",
            space.diameter(),
            space.center(),
            space.sup_distance(&[0.5, 0.0]),
        );
    }
    Ok(())
}
