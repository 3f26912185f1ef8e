//! Symplectic linear algebra on `ℂ²ⁿ = ℂⁿ × ℂⁿ`.
//!
//! The canonical form is `ω(x, y) = ⟨x₁, y₂⟩ − ⟨x₂, y₁⟩` (conjugate-linear in
//! the first slot), i.e. `ω(x, y) = ⟨x, J y⟩` with `J = [[0, I], [−I, 0]]`.
//! Lagrangian planes are stored as `2n × n` frames `[X; Y]`; they correspond
//! one-to-one to unitaries `𝒰 = (X + iY)(X − iY)⁻¹` of `ℂⁿ`. Dirichlet
//! (`X = 0`) maps to `−I`, Neumann (`Y = 0`) to `+I`.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64};
use crate::tolerances::Tolerances;

/// `ℂ²ⁿ` with its canonical symplectic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticSpace {
    n: usize,
}

impl SymplecticSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self { n })
    }

    pub fn channels(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// `J = [[0, I], [−I, 0]]`.
    pub fn j_matrix(&self) -> CMatrix {
        j_matrix(self.n)
    }

    pub fn omega(&self, z1: &CVector, z2: &CVector) -> Result<C64> {
        if z1.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z1.len(),
            });
        }
        omega(z1, z2)
    }
}

pub fn j_matrix(n: usize) -> CMatrix {
    let mut j = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = c(1.0, 0.0);
        j[(n + i, i)] = c(-1.0, 0.0);
    }
    j
}

/// `ω(z1, z2) = ⟨z1_top, z2_bot⟩ − ⟨z1_bot, z2_top⟩`.
pub fn omega(z1: &CVector, z2: &CVector) -> Result<C64> {
    if z1.len() != z2.len() {
        return Err(Error::DimensionMismatch {
            expected: z1.len(),
            got: z2.len(),
        });
    }
    if !z1.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: z1.len() + 1,
            got: z1.len(),
        });
    }
    let n = z1.len() / 2;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        acc += z1[i].conj() * z2[n + i] - z1[n + i].conj() * z2[i];
    }
    Ok(acc)
}

/// Matrix of the form on column sets: `(A*JB)ᵢⱼ = ω(aᵢ, bⱼ)`.
pub fn omega_matrix(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows() / 2;
    let top_a = a.rows(0, n);
    let bot_a = a.rows(n, n);
    let top_b = b.rows(0, n);
    let bot_b = b.rows(n, n);
    top_a.adjoint() * bot_b - bot_a.adjoint() * top_b
}

/// A `2n × n` frame whose columns span a Lagrangian plane.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianFrame {
    frame: CMatrix,
}

impl LagrangianFrame {
    /// Validates rank and isotropy of `frame`.
    pub fn new(frame: CMatrix, tol: &Tolerances) -> Result<Self> {
        let (rows, cols) = frame.shape();
        if rows != 2 * cols || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: 2 * cols.max(1),
                got: rows,
            });
        }
        let sv = linalg::singular_values(&frame);
        let sigma_min = sv.last().copied().unwrap_or(0.0) / sv[0].max(f64::MIN_POSITIVE);
        if sigma_min < tol.rank {
            return Err(Error::RankDeficient {
                sigma_min,
                tol: tol.rank,
            });
        }
        let out = Self { frame };
        let residual = out.isotropy_residual();
        if residual > tol.isotropy {
            return Err(Error::NotLagrangian {
                residual,
                tol: tol.isotropy,
            });
        }
        Ok(out)
    }

    /// Builds `[X; Y]` from its blocks.
    pub fn from_blocks(x: &CMatrix, y: &CMatrix, tol: &Tolerances) -> Result<Self> {
        if x.shape() != y.shape() || x.nrows() != x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.nrows(),
            });
        }
        let n = x.nrows();
        let mut frame = CMatrix::zeros(2 * n, n);
        frame.rows_mut(0, n).copy_from(x);
        frame.rows_mut(n, n).copy_from(y);
        Self::new(frame, tol)
    }

    /// Skips validation; the caller guarantees the invariants.
    pub(crate) fn from_matrix_unchecked(frame: CMatrix) -> Self {
        Self { frame }
    }

    /// `{0} × ℂⁿ`.
    pub fn dirichlet(n: usize) -> Self {
        let mut frame = CMatrix::zeros(2 * n, n);
        for i in 0..n {
            frame[(n + i, i)] = c(1.0, 0.0);
        }
        Self { frame }
    }

    /// `ℂⁿ × {0}`.
    pub fn neumann(n: usize) -> Self {
        let mut frame = CMatrix::zeros(2 * n, n);
        for i in 0..n {
            frame[(i, i)] = c(1.0, 0.0);
        }
        Self { frame }
    }

    pub fn channels(&self) -> usize {
        self.frame.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.frame
    }

    pub fn x(&self) -> CMatrix {
        let n = self.channels();
        self.frame.rows(0, n).into_owned()
    }

    pub fn y(&self) -> CMatrix {
        let n = self.channels();
        self.frame.rows(n, n).into_owned()
    }

    /// `‖F*JF‖ / ‖F‖²`.
    pub fn isotropy_residual(&self) -> f64 {
        let scale = self.frame.norm_squared().max(f64::MIN_POSITIVE) / self.channels() as f64;
        omega_matrix(&self.frame, &self.frame).norm() / scale
    }

    pub fn orthonormalized(&self) -> Self {
        Self {
            frame: linalg::orthonormalize(&self.frame),
        }
    }

    /// Orthogonal projector `F (F*F)⁻¹ F*`.
    pub fn projector(&self) -> CMatrix {
        let q = linalg::orthonormalize(&self.frame);
        &q * q.adjoint()
    }

    /// Annihilator rows `(JF)*`; the plane is their common kernel.
    pub fn constraint_rows(&self) -> CMatrix {
        let n = self.channels();
        let mut jf = CMatrix::zeros(2 * n, n);
        jf.rows_mut(0, n).copy_from(&self.y());
        jf.rows_mut(n, n).copy_from(&(-self.x()));
        jf.adjoint()
    }

    pub fn contains(&self, v: &CVector, tol: f64) -> bool {
        let p = self.projector();
        (&p * v - v).norm() <= tol * v.norm().max(1.0)
    }
}

/// An `n × n` unitary encoding a Lagrangian plane.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryUnitary {
    u: CMatrix,
}

impl BoundaryUnitary {
    pub fn new(u: CMatrix, tol: &Tolerances) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch {
                expected: u.nrows(),
                got: u.ncols(),
            });
        }
        let residual = unitarity_residual(&u);
        if residual > tol.unitarity {
            return Err(Error::NotUnitary {
                residual,
                tol: tol.unitarity,
            });
        }
        Ok(Self { u })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn into_matrix(self) -> CMatrix {
        self.u
    }

    pub fn channels(&self) -> usize {
        self.u.nrows()
    }

    pub fn determinant(&self) -> C64 {
        self.u.determinant()
    }
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    (u.adjoint() * u - linalg::identity(u.nrows())).norm()
}

/// `(X + iY)(X − iY)⁻¹` for an arbitrary frame matrix `[X; Y]`.
///
/// Depends only on the column span of `frame`.
pub fn cayley_unitary(frame: &CMatrix) -> Result<CMatrix> {
    let n = frame.ncols();
    let x = frame.rows(0, n);
    let y = frame.rows(n, n);
    let i = c(0.0, 1.0);
    let plus = x + y * i;
    let minus = x - y * i;
    let sv = linalg::singular_values(&minus);
    let scale = frame.norm().max(f64::MIN_POSITIVE);
    if sv.last().copied().unwrap_or(0.0) < 1e-12 * scale {
        return Err(Error::SingularCayley);
    }
    // U (X − iY) = X + iY  <=>  (X − iY)ᵀ Uᵀ = (X + iY)ᵀ
    let ut = linalg::solve(&minus.transpose(), &plus.transpose()).ok_or(Error::SingularCayley)?;
    Ok(ut.transpose())
}

pub fn plane_to_unitary(frame: &LagrangianFrame, tol: &Tolerances) -> Result<BoundaryUnitary> {
    BoundaryUnitary::new(cayley_unitary(frame.matrix())?, tol)
}

/// Frame `[I + U; i(I − U)]`, re-orthonormalized.
pub fn unitary_to_plane(u: &BoundaryUnitary) -> LagrangianFrame {
    let n = u.channels();
    let id = linalg::identity(n);
    let x = &id + u.matrix();
    let y = (&id - u.matrix()) * c(0.0, 1.0);
    let mut frame = CMatrix::zeros(2 * n, n);
    frame.rows_mut(0, n).copy_from(&x);
    frame.rows_mut(n, n).copy_from(&y);
    LagrangianFrame::from_matrix_unchecked(linalg::orthonormalize(&frame))
}

/// The Robin plane `{(Θx, Πx)}` for commuting hermitian `Θ`, `Π`.
pub fn robin_plane(theta: &CMatrix, pi: &CMatrix, tol: &Tolerances) -> Result<LagrangianFrame> {
    let n = theta.nrows();
    if theta.shape() != (n, n) || pi.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pi.nrows(),
        });
    }
    let scale = theta.norm().max(pi.norm()).max(1.0);
    if linalg::hermitian_residual(theta) > tol.hermitian * scale {
        return Err(Error::InvalidRobinPair("Θ is not hermitian".into()));
    }
    if linalg::hermitian_residual(pi) > tol.hermitian * scale {
        return Err(Error::InvalidRobinPair("Π is not hermitian".into()));
    }
    if (theta * pi - pi * theta).norm() > tol.hermitian * scale * scale {
        return Err(Error::InvalidRobinPair("Θ and Π do not commute".into()));
    }
    let invertible = |m: &CMatrix| linalg::smallest_singular_value(m) > tol.rank * scale;
    if !invertible(theta) && !invertible(pi) {
        return Err(Error::InvalidRobinPair(
            "neither Θ nor Π is invertible".into(),
        ));
    }
    LagrangianFrame::from_blocks(theta, pi, tol)
}

/// `dim(ℓ1 ∩ ℓ2)`, computed from `2n − rank[F1 | F2]` and from the
/// eigenvalues of `𝒰₂*𝒰₁` near 1. The two counts must agree.
pub fn intersection_dimension(
    f1: &LagrangianFrame,
    f2: &LagrangianFrame,
    tol: f64,
) -> Result<usize> {
    let by_rank = intersection_by_rank(f1, f2, tol)?;
    let by_unitary = intersection_by_unitary(f1, f2, tol)?;
    if by_rank != by_unitary {
        return Err(Error::IntersectionDisagreement {
            by_rank,
            by_unitary,
        });
    }
    Ok(by_rank)
}

/// A principal angle `α` moves an eigenvalue of `𝒰₂*𝒰₁` by `|e^{2iα} − 1| ≈ 2α`
/// and gives a singular value `≈ α/√2` of the stacked orthonormal frames.
fn rank_threshold(tol: f64) -> f64 {
    tol / (2.0 * std::f64::consts::SQRT_2)
}

pub fn intersection_by_rank(f1: &LagrangianFrame, f2: &LagrangianFrame, tol: f64) -> Result<usize> {
    let n = f1.channels();
    if f2.channels() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f2.channels(),
        });
    }
    let q1 = linalg::orthonormalize(f1.matrix());
    let q2 = linalg::orthonormalize(f2.matrix());
    let mut stacked = CMatrix::zeros(2 * n, 2 * n);
    stacked.columns_mut(0, n).copy_from(&q1);
    stacked.columns_mut(n, n).copy_from(&q2);
    let thr = rank_threshold(tol);
    Ok(linalg::singular_values(&stacked)
        .iter()
        .filter(|&&s| s < thr)
        .count())
}

pub fn intersection_by_unitary(
    f1: &LagrangianFrame,
    f2: &LagrangianFrame,
    tol: f64,
) -> Result<usize> {
    let u1 = cayley_unitary(f1.matrix())?;
    let u2 = cayley_unitary(f2.matrix())?;
    let w = u2.adjoint() * u1;
    Ok(linalg::eigenvalues(&w)
        .iter()
        .filter(|z| (*z - c(1.0, 0.0)).norm() < tol)
        .count())
}

/// Orthonormal basis (as columns of a `2n × k` matrix) of `ℓ1 ∩ ℓ2` using the
/// `k` smallest singular directions of `[Q1 | −Q2]`.
pub fn intersection_basis(f1: &LagrangianFrame, f2: &LagrangianFrame, k: usize) -> CMatrix {
    let n = f1.channels();
    let q1 = linalg::orthonormalize(f1.matrix());
    let q2 = linalg::orthonormalize(f2.matrix());
    let mut stacked = CMatrix::zeros(2 * n, 2 * n);
    stacked.columns_mut(0, n).copy_from(&q1);
    stacked.columns_mut(n, n).copy_from(&(-&q2));
    // right singular vectors via the hermitian eigenproblem of S*S
    let gram = stacked.adjoint() * &stacked;
    let (_, vecs) = linalg::hermitian_eigen(&gram);
    let mut basis = CMatrix::zeros(2 * n, k);
    for j in 0..k {
        let coeff = vecs.column(j);
        let a = coeff.rows(0, n);
        let b = coeff.rows(n, n);
        let v = (&q1 * a + &q2 * b) * c(0.5, 0.0);
        basis.column_mut(j).copy_from(&v);
    }
    if k == 0 {
        basis
    } else {
        linalg::orthonormalize(&basis)
    }
}

/// `‖P1 − P2‖` in operator norm.
pub fn plane_distance(f1: &LagrangianFrame, f2: &LagrangianFrame) -> f64 {
    linalg::op_norm(&(f1.projector() - f2.projector()))
}

/// Lagrangian planes exist iff `dim Ker(J − i) = dim Ker(J + i)`.
pub fn check_no_lagrangian(dim_plus: usize, dim_minus: usize) -> bool {
    dim_plus == dim_minus
}

/// `(dim Ker(J − i), dim Ker(J + i))` for a skew-adjoint `J` with `J² = −I`.
pub fn j_eigenspace_dimensions(j: &CMatrix, tol: f64) -> (usize, usize) {
    // −iJ is hermitian with eigenvalues ±1
    let h = j * c(0.0, -1.0);
    let vals = linalg::hermitian_eigenvalues(&h);
    let plus = vals.iter().filter(|&&v| (v - 1.0).abs() < tol).count();
    let minus = vals.iter().filter(|&&v| (v + 1.0).abs() < tol).count();
    (plus, minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::random;
    use nalgebra::dvector;
    use rand::SeedableRng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn omega_examples() {
        let z1 = dvector![real(1.0), real(0.0)];
        let z2 = dvector![real(0.0), real(1.0)];
        assert_eq!(omega(&z1, &z2).unwrap(), real(1.0));
        let z = dvector![real(1.0), real(-1.0)];
        assert_eq!(omega(&z, &z).unwrap(), real(0.0));
        let z = dvector![real(1.0), c(0.0, 1.0)];
        assert_eq!(omega(&z, &z).unwrap(), c(0.0, 2.0));
    }

    #[test]
    fn omega_rejects_mismatched_lengths() {
        let z1 = dvector![real(1.0), real(0.0)];
        let z2 = dvector![real(1.0), real(0.0), real(0.0), real(0.0)];
        assert!(matches!(
            omega(&z1, &z2),
            Err(Error::DimensionMismatch { .. })
        ));
        let space = SymplecticSpace::new(2).unwrap();
        assert!(space.omega(&z1, &z1).is_err());
    }

    #[test]
    fn j_squares_to_minus_identity() {
        let j = SymplecticSpace::new(3).unwrap().j_matrix();
        assert_eq!(&j * &j, -linalg::identity(6));
        assert_eq!(j.adjoint(), -j);
    }

    #[test]
    fn dirichlet_and_neumann_unitaries() {
        for n in 1..4 {
            let d = plane_to_unitary(&LagrangianFrame::dirichlet(n), &tol()).unwrap();
            assert_eq!(d.matrix(), &(-linalg::identity(n)));
            let nm = plane_to_unitary(&LagrangianFrame::neumann(n), &tol()).unwrap();
            assert_eq!(nm.matrix(), &linalg::identity(n));
        }
    }

    #[test]
    fn robin_one_one_gives_i() {
        let f = robin_plane(&CMatrix::identity(1, 1), &CMatrix::identity(1, 1), &tol()).unwrap();
        let u = plane_to_unitary(&f, &tol()).unwrap();
        assert!((u.matrix()[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn robin_quarter_turn_gives_i() {
        let t: f64 = 0.25;
        let s = (std::f64::consts::PI * t).sin();
        let co = (std::f64::consts::PI * t).cos();
        let f = robin_plane(
            &CMatrix::from_element(1, 1, real(s)),
            &CMatrix::from_element(1, 1, real(co)),
            &tol(),
        )
        .unwrap();
        let u = plane_to_unitary(&f, &tol()).unwrap();
        assert!((u.matrix()[(0, 0)] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn robin_dirichlet_and_neumann_pairs() {
        let z = CMatrix::zeros(2, 2);
        let id = CMatrix::identity(2, 2);
        let d = robin_plane(&z, &id, &tol()).unwrap();
        assert!(plane_distance(&d, &LagrangianFrame::dirichlet(2)) < 1e-14);
        let nm = robin_plane(&id, &z, &tol()).unwrap();
        assert!(plane_distance(&nm, &LagrangianFrame::neumann(2)) < 1e-14);
    }

    #[test]
    fn robin_rejects_bad_pairs() {
        let z = CMatrix::zeros(2, 2);
        let mut nh = CMatrix::identity(2, 2);
        nh[(0, 1)] = real(1.0);
        assert!(robin_plane(&nh, &CMatrix::identity(2, 2), &tol()).is_err());
        assert!(robin_plane(&z, &z, &tol()).is_err());
        let mut a = CMatrix::identity(2, 2);
        a[(0, 0)] = real(2.0);
        let mut b = CMatrix::zeros(2, 2);
        b[(0, 1)] = real(1.0);
        b[(1, 0)] = real(1.0);
        assert!(matches!(
            robin_plane(&a, &b, &tol()),
            Err(Error::InvalidRobinPair(_))
        ));
    }

    #[test]
    fn unitary_to_plane_examples() {
        let tol = tol();
        let d = unitary_to_plane(&BoundaryUnitary::new(-linalg::identity(2), &tol).unwrap());
        assert!(plane_distance(&d, &LagrangianFrame::dirichlet(2)) < 1e-14);
        let nm = unitary_to_plane(&BoundaryUnitary::new(linalg::identity(2), &tol).unwrap());
        assert!(plane_distance(&nm, &LagrangianFrame::neumann(2)) < 1e-14);
        let i = unitary_to_plane(
            &BoundaryUnitary::new(CMatrix::from_element(1, 1, c(0.0, 1.0)), &tol).unwrap(),
        );
        let expected = LagrangianFrame::new(CMatrix::from_element(2, 1, real(1.0)), &tol).unwrap();
        assert!(plane_distance(&i, &expected) < 1e-14);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = CMatrix::from_element(1, 1, real(2.0));
        assert!(matches!(
            BoundaryUnitary::new(m, &tol()),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn non_isotropic_frame_rejected() {
        let f = CMatrix::from_column_slice(2, 1, &[real(1.0), c(0.0, 1.0)]);
        assert!(matches!(
            LagrangianFrame::new(f, &tol()),
            Err(Error::NotLagrangian { .. })
        ));
        let f = CMatrix::zeros(2, 1);
        assert!(LagrangianFrame::new(f, &tol()).is_err());
    }

    #[test]
    fn intersection_examples() {
        let t = 1e-6;
        let d = LagrangianFrame::dirichlet(2);
        let nm = LagrangianFrame::neumann(2);
        assert_eq!(intersection_dimension(&d, &nm, t).unwrap(), 0);
        assert_eq!(intersection_dimension(&d, &d, t).unwrap(), 2);
        let mut f = CMatrix::zeros(4, 2);
        f[(0, 0)] = real(1.0);
        f[(3, 1)] = real(1.0);
        let mixed = LagrangianFrame::new(f, &tol()).unwrap();
        assert_eq!(intersection_dimension(&nm, &mixed, t).unwrap(), 1);
    }

    #[test]
    fn plane_distance_examples() {
        let d = LagrangianFrame::dirichlet(1);
        let nm = LagrangianFrame::neumann(1);
        assert!(plane_distance(&d, &d).abs() < 1e-15);
        assert!((plane_distance(&d, &nm) - 1.0).abs() < 1e-14);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = random::random_lagrangian(3, &mut rng);
            let b = random::random_lagrangian(3, &mut rng);
            assert!((plane_distance(&a, &b) - plane_distance(&b, &a)).abs() < 1e-14);
        }
    }

    #[test]
    fn lagrangian_existence_check() {
        assert!(check_no_lagrangian(3, 3));
        assert!(!check_no_lagrangian(3, 0));
        assert!(check_no_lagrangian(0, 0));
        // Dirac half-line boundary form iω̃: J = iI has only the +i eigenspace.
        let j = linalg::identity(3) * c(0.0, 1.0);
        let (p, m) = j_eigenspace_dimensions(&j, 1e-8);
        assert_eq!((p, m), (3, 0));
        assert!(!check_no_lagrangian(p, m));
        let (p, m) = j_eigenspace_dimensions(&j_matrix(3), 1e-8);
        assert!(check_no_lagrangian(p, m));
    }

    #[test]
    fn intersection_basis_lies_in_both_planes() {
        let nm = LagrangianFrame::neumann(2);
        let mut f = CMatrix::zeros(4, 2);
        f[(0, 0)] = real(1.0);
        f[(3, 1)] = real(1.0);
        let mixed = LagrangianFrame::new(f, &tol()).unwrap();
        let b = intersection_basis(&nm, &mixed, 1);
        let v = b.column(0).into_owned();
        assert!(nm.contains(&v, 1e-12));
        assert!(mixed.contains(&v, 1e-12));
    }
}
