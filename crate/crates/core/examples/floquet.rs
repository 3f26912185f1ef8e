//! Monodromy, Floquet multipliers and the decaying planes of the Mathieu operator.
use edgeflow::propagate::{decaying_plane, gap_edges, monodromy, Cosine, PropagationConfig, Side};
use edgeflow::Tolerances;

fn main() -> edgeflow::Result<()> {
    let tol = Tolerances::default();
    let cfg = PropagationConfig::default();
    let v = Cosine::mathieu(2.0);
    let (lo, hi) = gap_edges(&v, 9.857, &[0.0], &[Side::Right], 5.0, &cfg, &tol)?;
    println!("first gap ({lo:.4}, {hi:.4})");
    let e = 0.5 * (lo + hi);
    let m = monodromy(&v, 0.0, e, Side::Right, &cfg, &tol)?;
    println!("|T*JT - J| = {:.2e}", m.symplectic_residual());
    for side in [Side::Right, Side::Left] {
        let p = decaying_plane(&v, 0.0, e, side, &cfg, &tol)?;
        println!("{side:?}: multipliers {:?}", p.multipliers);
        println!("{side:?}: plane\n{}", p.plane.matrix());
    }
    Ok(())
}
