//! Eigenvalue branches of the Dirichlet half-line dislocation family in the first gap.
use edgeflow::edgeop::{edge_flow, FlowSetup};
use edgeflow::propagate::Cosine;
use edgeflow::symplectic::LagrangianFrame;
use edgeflow::Tolerances;

fn main() -> edgeflow::Result<()> {
    let tol = Tolerances::default();
    let v = Cosine::dislocation(2.0);
    let dirichlet = |_t: f64| Ok(LagrangianFrame::dirichlet(1));
    let (flow, branches, setup) = edge_flow(&v, &dirichlet, 9.857, &FlowSetup::default(), &tol)?;
    println!(
        "L = {}, N = {}, window {}",
        setup.length, setup.points, setup.window
    );
    println!("{} branches", branches.branches.len());
    for c in &flow.crossings {
        println!("crossing at t = {:.5}, slopes {:?}", c.t, c.slopes);
    }
    println!("Sf = {}", flow.flow);
    Ok(())
}
