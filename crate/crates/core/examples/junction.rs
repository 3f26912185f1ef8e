//! A flat barrier glued to the dislocation family with two switch functions.
use std::sync::Arc;

use edgeflow::edgeop::FlowSetup;
use edgeflow::indices::{verify_junction_theorem, LoopConfig, VerifyOptions};
use edgeflow::propagate::{Cosine, Flat, Switch};
use edgeflow::Tolerances;

fn main() -> edgeflow::Result<()> {
    let tol = Tolerances::default();
    let r = verify_junction_theorem(
        Arc::new(Flat::scalar(20.0)),
        Arc::new(Cosine::dislocation(2.0)),
        &[Switch::Step, Switch::Smooth { half_width: 2.0 }],
        9.857,
        &FlowSetup::default(),
        &LoopConfig::default(),
        &VerifyOptions::default(),
        &tol,
    )?;
    for s in &r.switches {
        println!("{}: Sf = {}", s.switch.label(), s.spectral_flow.flow);
    }
    println!(
        "Mas = {}, I(l+_R) - I(l-_L) = {}",
        r.maslov.value, r.index_difference
    );
    if let Some(c) = &r.control {
        println!("control flow {}", c.flow);
    }
    Ok(())
}
