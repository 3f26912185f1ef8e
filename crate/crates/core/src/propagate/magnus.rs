//! Fourth-order Magnus integration of `Ψ' = [[0, I], [V − E, 0]] Ψ`.

use crate::error::{Error, Result};
use crate::linalg::{identity, op_norm, real, CMatrix};
use crate::symplectic::j_matrix;

use super::potential::PotentialFamily;

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6
const COMMUTATOR_WEIGHT: f64 = 0.144_337_567_297_406_43; // √3/12

/// Generator `A(x) = [[0, I], [V(t, x) − E, 0]]`.
pub fn generator(v: &dyn PotentialFamily, t: f64, energy: f64, x: f64) -> CMatrix {
    let n = v.channels();
    let mut a = CMatrix::zeros(2 * n, 2 * n);
    let mut pot = v.evaluate(t, x);
    for i in 0..n {
        pot[(i, i)] -= real(energy);
    }
    for i in 0..n {
        a[(i, n + i)] = real(1.0);
    }
    a.view_mut((n, 0), (n, n)).copy_from(&pot);
    a
}

/// Magnus exponent of the step `[x0, x0 + h]` (h may be negative).
pub fn magnus_exponent(v: &dyn PotentialFamily, t: f64, energy: f64, x0: f64, h: f64) -> CMatrix {
    let (c1, c2) = (0.5 - GAUSS_OFFSET, 0.5 + GAUSS_OFFSET);
    let a1 = generator(v, t, energy, x0 + c1 * h);
    let a2 = generator(v, t, energy, x0 + c2 * h);
    let comm = &a2 * &a1 - &a1 * &a2;
    (a1 + a2) * real(0.5 * h) + comm * real(COMMUTATOR_WEIGHT * h * h)
}

/// Single-step propagator `exp(Ω)` from `x0` to `x0 + h`.
pub fn magnus_step(v: &dyn PotentialFamily, t: f64, energy: f64, x0: f64, h: f64) -> CMatrix {
    magnus_exponent(v, t, energy, x0, h).exp()
}

/// Uniform grid of `steps` Magnus steps from `a` to `b`.
pub fn step_propagators(
    v: &dyn PotentialFamily,
    t: f64,
    energy: f64,
    a: f64,
    b: f64,
    steps: usize,
) -> Vec<CMatrix> {
    let h = (b - a) / steps as f64;
    (0..steps)
        .map(|k| magnus_step(v, t, energy, a + k as f64 * h, h))
        .collect()
}

/// Steps needed to cover `length` at `steps_per_period` per `period`.
pub fn step_count(length: f64, period: f64, steps_per_period: usize) -> usize {
    ((length.abs() / period * steps_per_period as f64).ceil() as usize).max(1)
}

/// Transfer matrix `T(t, E; a → b)` together with its step count.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub matrix: CMatrix,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl TransferMatrix {
    /// `‖T* J T − J‖`.
    pub fn symplectic_residual(&self) -> f64 {
        symplectic_residual(&self.matrix)
    }

    /// `‖T* J T − J‖ / max(1, ‖T‖²)`, the floating-point attainable version.
    pub fn scaled_symplectic_residual(&self) -> f64 {
        scaled_symplectic_residual(&self.matrix)
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.matrix)
    }
}

pub fn symplectic_residual(t: &CMatrix) -> f64 {
    let j = j_matrix(t.nrows() / 2);
    op_norm(&(t.adjoint() * &j * t - j))
}

pub fn scaled_symplectic_residual(t: &CMatrix) -> f64 {
    let nrm = op_norm(t);
    symplectic_residual(t) / nrm.powi(2).max(1.0)
}

/// Transfer matrix from `a` to `b`, doubling the step count until the
/// scaled symplectic residual is below `tol` and a further doubling changes
/// the result by at most `tol` relative to `max(1, ‖T‖)`.
pub fn transfer_matrix(
    v: &dyn PotentialFamily,
    t: f64,
    energy: f64,
    a: f64,
    b: f64,
    steps_per_period: usize,
    tol: f64,
) -> Result<TransferMatrix> {
    let period = v.right_period().min(v.left_period());
    let mut steps = step_count(b - a, period, steps_per_period);
    let mut coarse = propagate(v, t, energy, a, b, steps);
    let mut last = f64::INFINITY;
    for _ in 0..8 {
        steps *= 2;
        let fine = propagate(v, t, energy, a, b, steps);
        last = fine.scaled_symplectic_residual();
        let change = op_norm(&(&fine.matrix - &coarse.matrix)) / fine.norm().max(1.0);
        if last <= tol && change <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::SymplecticityExceeded {
        residual: last,
        tol,
    })
}

fn propagate(
    v: &dyn PotentialFamily,
    t: f64,
    energy: f64,
    a: f64,
    b: f64,
    steps: usize,
) -> TransferMatrix {
    let mut m = identity(2 * v.channels());
    for s in step_propagators(v, t, energy, a, b, steps) {
        m = s * m;
    }
    TransferMatrix {
        matrix: m,
        from: a,
        to: b,
        steps,
    }
}
