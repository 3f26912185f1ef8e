//! Boundary winding numbers and Maslov indices of simple loops.
use edgeflow::indices::{index_i, maslov_index, LoopConfig, PlaneLoop};
use edgeflow::Tolerances;

fn main() -> edgeflow::Result<()> {
    let tol = Tolerances::default();
    let cfg = LoopConfig::default();
    for n in 1..=3 {
        let r = index_i(&PlaneLoop::robin(n), &cfg, &tol)?;
        println!("I(robin({n})) = {} (raw {:.6})", r.value, r.winding.raw);
    }
    let m = maslov_index(&PlaneLoop::robin(1), &PlaneLoop::dirichlet(1), &cfg, &tol)?;
    println!("Mas(robin, dirichlet) = {}", m.value);
    let m = maslov_index(
        &PlaneLoop::robin(1).reversed(),
        &PlaneLoop::neumann(1),
        &cfg,
        &tol,
    )?;
    println!("Mas(robin reversed, neumann) = {}", m.value);
    Ok(())
}
