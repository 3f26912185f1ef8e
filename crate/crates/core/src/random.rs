//! Random test objects: Haar unitaries, Lagrangian planes, Robin pairs.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, c, real, CMatrix, CVector};
use crate::symplectic::{unitary_to_plane, BoundaryUnitary, LagrangianFrame};
use crate::tolerances::Tolerances;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Haar-distributed `n × n` unitary (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let (q, r) = linalg::thin_qr(&ginibre(n, n, rng));
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_boundary_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BoundaryUnitary {
    BoundaryUnitary::new(haar_unitary(n, rng), &Tolerances::default())
        .expect("QR of a Ginibre matrix is unitary")
}

/// Lagrangian plane from a Haar unitary.
pub fn random_lagrangian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LagrangianFrame {
    unitary_to_plane(&random_boundary_unitary(n, rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    linalg::hermitian_part(&g)
}

/// Commuting hermitian `(Θ, Π)` sharing a Haar eigenbasis, `Θ` invertible.
pub fn random_robin_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (CMatrix, CMatrix) {
    let w = haar_unitary(n, rng);
    let theta_diag: Vec<f64> = (0..n)
        .map(|_| {
            let v: f64 = gaussian(rng);
            v.signum() * (v.abs() + 0.2)
        })
        .collect();
    let pi_diag: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    let theta =
        &w * CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                real(theta_diag[i])
            } else {
                real(0.0)
            }
        }) * w.adjoint();
    let pi =
        &w * CMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { real(pi_diag[i]) } else { real(0.0) },
        ) * w.adjoint();
    (linalg::hermitian_part(&theta), linalg::hermitian_part(&pi))
}
