//! Half tube with Dirichlet and Neumann walls, reduced to a few Fourier channels.
use std::sync::Arc;

use edgeflow::edgeop::FlowSetup;
use edgeflow::indices::{LoopConfig, VerifyOptions};
use edgeflow::tube::{tube_edge_flows, TubeCosine};
use edgeflow::Tolerances;

fn main() -> edgeflow::Result<()> {
    let tol = Tolerances::default();
    let r = tube_edge_flows(
        Arc::new(TubeCosine::dislocation(2.0, 1.0)),
        9.84,
        &[1, 2],
        &FlowSetup::default(),
        &LoopConfig::default(),
        &VerifyOptions::default(),
        &tol,
    )?;
    for (k, (d, n)) in r.truncations.iter().zip(r.dirichlet.iter().zip(&r.neumann)) {
        println!(
            "K = {k}: Dirichlet {}, Neumann {}",
            d.spectral_flow.flow, n.spectral_flow.flow
        );
    }
    println!("stable in K: {}", r.k_stable);
    println!("consistent: {}", r.consistent);
    Ok(())
}
