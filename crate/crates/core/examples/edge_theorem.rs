//! Free half line with a rotating Robin condition at E = -1.
use std::sync::Arc;

use edgeflow::edgeop::FlowSetup;
use edgeflow::indices::{verify_main_theorem, LoopConfig, PlaneLoop, VerifyOptions};
use edgeflow::propagate::Flat;
use edgeflow::Tolerances;

fn main() -> edgeflow::Result<()> {
    let tol = Tolerances::default();
    let r = verify_main_theorem(
        Arc::new(Flat::zero(1)),
        &PlaneLoop::robin(1),
        -1.0,
        &FlowSetup::default(),
        &LoopConfig::default(),
        &VerifyOptions::default(),
        &tol,
    )?;
    println!("Sf  = {}", r.spectral_flow.flow);
    println!("Mas = {}", r.maslov.value);
    println!(
        "I(l+) - I(robin) = {} - {} = {}",
        r.index_plus.value, r.index_boundary.value, r.index_difference
    );
    for (c, f) in r.spectral_flow.crossings.iter().zip(&r.form_checks) {
        println!(
            "t = {:.5}: slopes {:?}, form relative error {:?}",
            c.t, c.slopes, f.relative_error
        );
    }
    println!("consistent: {}", r.consistent);
    Ok(())
}
