//! Robin planes, their boundary unitaries and pairwise intersections.
use edgeflow::linalg::{op_norm, CMatrix};
use edgeflow::random::random_robin_pair;
use edgeflow::symplectic::{
    intersection_dimension, plane_to_unitary, robin_plane, unitary_to_plane, LagrangianFrame,
};
use edgeflow::Tolerances;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> edgeflow::Result<()> {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (theta, pi) = random_robin_pair(3, &mut rng);
    let plane = robin_plane(&theta, &pi, &tol)?;
    let u = plane_to_unitary(&plane, &tol)?;
    let back = plane_to_unitary(&unitary_to_plane(&u), &tol)?;
    println!("isotropy residual   {:.2e}", plane.isotropy_residual());
    println!(
        "round-trip error    {:.2e}",
        op_norm(&(back.matrix() - u.matrix()))
    );
    println!("det U               {:.6}", u.determinant());

    let d = LagrangianFrame::dirichlet(3);
    let n = LagrangianFrame::neumann(3);
    println!(
        "U(Dirichlet) + I    {:.2e}",
        op_norm(&(plane_to_unitary(&d, &tol)?.matrix() + CMatrix::identity(3, 3)))
    );
    println!(
        "dim(D ∩ N) = {}",
        intersection_dimension(&d, &n, tol.intersection)?
    );
    println!(
        "dim(D ∩ D) = {}",
        intersection_dimension(&d, &d, tol.intersection)?
    );
    Ok(())
}
