//! Finite-difference edge and junction operators.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, CVector};
use crate::propagate::{Junction, PotentialFamily, SharedPotential, Switch};
use crate::symplectic::{plane_to_unitary, LagrangianFrame};
use crate::tolerances::Tolerances;

use super::blocktri::{BlockTridiagonal, EigenPair};

/// Boundary channels whose `|cos(θ/2)|` falls below this are Dirichlet.
const DIRICHLET_CHANNEL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// `[0, L]`, boundary plane at 0, Dirichlet at `L`.
    Edge,
    /// `[−L, L]`, Dirichlet at both ends.
    Junction,
}

/// A discretized edge or junction operator.
#[derive(Clone, Debug)]
pub struct EdgeDiscretization {
    pub geometry: Geometry,
    pub length: f64,
    pub points: usize,
    pub spacing: f64,
    pub channels: usize,
    /// Node position of every block.
    pub nodes: Vec<f64>,
    /// For the edge: the orthonormal boundary channels kept at `x = 0`.
    pub boundary_channels: Option<CMatrix>,
    pub matrix: BlockTridiagonal,
}

impl EdgeDiscretization {
    /// Fraction of `‖v‖²` carried by nodes in the near region: `[0, L/2]`
    /// for edges, `[−L/2, L/2]` for junctions.
    pub fn near_fraction(&self, v: &CVector) -> f64 {
        let total = v.norm_squared();
        if total == 0.0 {
            return 0.0;
        }
        let half = 0.5 * self.length;
        let near: f64 = (0..self.matrix.blocks())
            .filter(|&j| self.nodes[j].abs() <= half)
            .map(|j| {
                let r = self.matrix.block_range(j);
                v.rows(r.start, r.len()).norm_squared()
            })
            .sum();
        near / total
    }

    pub fn eigenpairs_in(&self, lo: f64, hi: f64) -> Result<Vec<EigenPair>> {
        self.matrix.eigenpairs_in(lo, hi)
    }

    /// Nodal values `ψ(x_j)` (unscaled by the boundary mass) of an eigenvector.
    pub fn nodal_values(&self, v: &CVector) -> Vec<CVector> {
        (0..self.matrix.blocks())
            .map(|j| {
                let r = self.matrix.block_range(j);
                let block = v.rows(r.start, r.len()).into_owned();
                match (&self.boundary_channels, j) {
                    (Some(w), 0) => w * block * real(SQRT_2),
                    _ => block,
                }
            })
            .collect()
    }
}

fn check_resolution(h: f64, vnorm: f64) -> Result<()> {
    if h * h * vnorm >= 0.1 {
        return Err(Error::InvalidDiscretization(format!(
            "h²·‖V‖ = {:.3} ≥ 0.1; increase N",
            h * h * vnorm
        )));
    }
    Ok(())
}

fn diagonal_block(v: &dyn PotentialFamily, t: f64, x: f64, h: f64, vmax: &mut f64) -> CMatrix {
    let pot = v.evaluate(t, x);
    *vmax = vmax.max(linalg::op_norm(&pot));
    let mut d = linalg::hermitian_part(&pot);
    for i in 0..d.nrows() {
        d[(i, i)] += real(2.0 / (h * h));
    }
    d
}

/// `−∂² + V(t, ·)` on `[0, L]` with the boundary plane at 0 and Dirichlet at
/// `L`, by second-order central differences and a ghost node at `x = −h`.
///
/// In the eigenbasis `W` of the boundary unitary with phases `θ`, each
/// channel carries `ψ'(0) = tan(θ/2) ψ(0)`; channels with `cos(θ/2) = 0`
/// carry `ψ(0) = 0`. The boundary row gets trapezoid mass ½ and is
/// symmetrized by the square root of the mass.
pub fn discretize_edge(
    v: &dyn PotentialFamily,
    t: f64,
    boundary: &LagrangianFrame,
    length: f64,
    points: usize,
    tol: &Tolerances,
) -> Result<EdgeDiscretization> {
    let n = v.channels();
    if boundary.channels() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: boundary.channels(),
        });
    }
    if !(length > 2.0 * v.match_point()) || points < 4 {
        return Err(Error::InvalidDiscretization(format!(
            "need L > 2·X_match = {} and N ≥ 4",
            2.0 * v.match_point()
        )));
    }
    let h = length / points as f64;
    let unitary = plane_to_unitary(boundary, tol)?;
    let (phases, w) = linalg::normal_eigen(unitary.matrix());
    let keep: Vec<usize> = (0..n)
        .filter(|&j| (0.5 * phases[j].arg()).cos().abs() > DIRICHLET_CHANNEL)
        .collect();
    let w_keep = CMatrix::from_fn(n, keep.len(), |i, k| w[(i, keep[k])]);
    let w_keep = if keep.is_empty() {
        w_keep
    } else {
        linalg::orthonormalize(&w_keep)
    };

    let mut vmax: f64 = 0.0;
    let mut diag = Vec::with_capacity(points);
    let mut upper = Vec::with_capacity(points);
    let mut nodes = Vec::with_capacity(points);
    let id = linalg::identity(n) * real(-1.0 / (h * h));
    let has_boundary_block = !keep.is_empty();
    if has_boundary_block {
        let pot = v.evaluate(t, 0.0);
        vmax = vmax.max(linalg::op_norm(&pot));
        let mut b00 = w_keep.adjoint() * linalg::hermitian_part(&pot) * &w_keep;
        for (k, &j) in keep.iter().enumerate() {
            let half = 0.5 * phases[j].arg();
            b00[(k, k)] += real(2.0 / (h * h) + 2.0 * half.tan() / h);
        }
        diag.push(linalg::hermitian_part(&b00));
        upper.push(w_keep.adjoint() * real(-SQRT_2 / (h * h)));
        nodes.push(0.0);
    }
    for j in 1..points {
        let x = j as f64 * h;
        diag.push(diagonal_block(v, t, x, h, &mut vmax));
        nodes.push(x);
        if j + 1 < points {
            upper.push(id.clone());
        }
    }
    check_resolution(h, vmax)?;
    let matrix = BlockTridiagonal::new(diag, upper)?;
    let resid = matrix.hermitian_residual();
    if resid > tol.hermitian / (h * h) {
        return Err(Error::NotHermitian {
            residual: resid,
            tol: tol.hermitian / (h * h),
        });
    }
    Ok(EdgeDiscretization {
        geometry: Geometry::Edge,
        length,
        points,
        spacing: h,
        channels: n,
        nodes,
        boundary_channels: has_boundary_block.then_some(w_keep),
        matrix,
    })
}

/// `−∂² + V_L χ + V_R (1 − χ)` on `[−L, L]` with Dirichlet ends, `N` intervals per side.
pub fn discretize_junction(
    left: &SharedPotential,
    right: &SharedPotential,
    switch: Switch,
    t: f64,
    length: f64,
    points: usize,
    tol: &Tolerances,
) -> Result<EdgeDiscretization> {
    let junction = Junction::new(left.clone(), right.clone(), switch)?;
    discretize_line(&junction, t, length, points, tol)
}

/// Any family on `[−L, L]` with Dirichlet ends; the junction operator is the
/// special case of a [`Junction`] potential.
pub fn discretize_line(
    v: &dyn PotentialFamily,
    t: f64,
    length: f64,
    points: usize,
    tol: &Tolerances,
) -> Result<EdgeDiscretization> {
    if !(length > 2.0 * v.match_point()) || points < 4 {
        return Err(Error::InvalidDiscretization(format!(
            "need L > 2·X = {} and N ≥ 4",
            2.0 * v.match_point()
        )));
    }
    let n = v.channels();
    let h = length / points as f64;
    let mut vmax: f64 = 0.0;
    let count = 2 * points - 1;
    let id = linalg::identity(n) * real(-1.0 / (h * h));
    let mut diag = Vec::with_capacity(count);
    let mut nodes = Vec::with_capacity(count);
    for j in 1..=count {
        let x = -length + j as f64 * h;
        diag.push(diagonal_block(v, t, x, h, &mut vmax));
        nodes.push(x);
    }
    check_resolution(h, vmax)?;
    let upper = vec![id; count - 1];
    let matrix = BlockTridiagonal::new(diag, upper)?;
    let resid = matrix.hermitian_residual();
    if resid > tol.hermitian / (h * h) {
        return Err(Error::NotHermitian {
            residual: resid,
            tol: tol.hermitian / (h * h),
        });
    }
    Ok(EdgeDiscretization {
        geometry: Geometry::Junction,
        length,
        points,
        spacing: h,
        channels: n,
        nodes,
        boundary_channels: None,
        matrix,
    })
}
