//! The property suite: geometric inequalities, monotone disagreement,
//! conservation, shrinking jumps and the state at absorption.
//!
//! cargo run --release --example lemma_checks

use deffuant_lab::analysis::{lemma_check_report, LemmaCheckConfig};

fn main() -> deffuant_lab::error::Result<()> {
    let cfg = LemmaCheckConfig { geometry_trials: 20_000, traces: 40, ..LemmaCheckConfig::default() };
    let report = lemma_check_report(&cfg, &[])?;
    print!("{}", report.summary());
    println!("all properties hold: {}", report.passed());
    Ok(())
}
