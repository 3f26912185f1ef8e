use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::propagate::PotentialFamily;

use super::potential::SharedTubePotential;

/// Relative size of the aliasing error tolerated in the Fourier coefficients.
const QUADRATURE_TOL: f64 = 1e-10;

/// Galerkin projection of a tube potential onto the transverse modes
/// `e_k(y) = e^{2πik·y}`, `|k|_∞ ≤ K`.
pub struct ChannelReduction {
    potential: SharedTubePotential,
    truncation: usize,
    modes: Vec<Vec<i64>>,
    shifts: Vec<f64>,
    resolution: usize,
    /// Nodes `y` of the transverse trapezoid rule.
    nodes: Vec<Vec<f64>>,
    /// `e^{−2πi m·y}` for each difference `m = k − k'` and node.
    phases: Vec<Vec<C64>>,
    /// Index into `phases` for the pair `(k, k')`.
    pair: Vec<usize>,
    /// Largest aliasing estimate seen at construction.
    pub aliasing: f64,
}

fn lattice(dim: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-radius..=radius).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

fn grid(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (0..m).map(move |j| {
                    let mut q = p.clone();
                    q.push(j as f64 / m as f64);
                    q
                })
            })
            .collect();
    }
    out
}

fn coefficients(
    v: &SharedTubePotential,
    t: f64,
    x: f64,
    nodes: &[Vec<f64>],
    differences: &[Vec<i64>],
) -> Vec<C64> {
    let samples: Vec<f64> = nodes.iter().map(|y| v.evaluate(t, x, y)).collect();
    let w = 1.0 / nodes.len() as f64;
    differences
        .iter()
        .map(|m| {
            let mut s = C64::new(0.0, 0.0);
            for (y, &val) in nodes.iter().zip(&samples) {
                let arg: f64 = m.iter().zip(y).map(|(&mi, &yi)| mi as f64 * yi).sum();
                s += C64::from_polar(val, -2.0 * PI * arg);
            }
            s * w
        })
        .collect()
}

/// Transverse eigenvalue of `e_k` under the periodic `−Δ_y`.
pub fn transverse_eigenvalue(k: &[i64]) -> f64 {
    let s: i64 = k.iter().map(|&ki| ki * ki).sum();
    4.0 * PI * PI * s as f64
}

/// Projects `V` onto `(2K+1)^{d−1}` transverse modes, with the trapezoid
/// rule on `4(2K+1)` nodes per axis.
pub fn fourier_truncate(v: SharedTubePotential, truncation: usize) -> Result<ChannelReduction> {
    let d = v.dimension();
    if d < 2 {
        return Err(Error::InvalidPotential(format!(
            "tube dimension must be at least 2, got {d}"
        )));
    }
    let dim = d - 1;
    let k = truncation as i64;
    let modes = lattice(dim, k);
    let differences = lattice(dim, 2 * k);
    let resolution = 4 * (2 * truncation + 1);
    let nodes = grid(dim, resolution);
    let phases: Vec<Vec<C64>> = differences
        .iter()
        .map(|m| {
            nodes
                .iter()
                .map(|y| {
                    let arg: f64 = m.iter().zip(y).map(|(&mi, &yi)| mi as f64 * yi).sum();
                    C64::from_polar(1.0, -2.0 * PI * arg)
                })
                .collect()
        })
        .collect();
    let side = (4 * k + 1) as usize;
    let index = |m: &[i64]| {
        m.iter()
            .fold(0usize, |acc, &mi| acc * side + (mi + 2 * k) as usize)
    };
    let mut pair = Vec::with_capacity(modes.len() * modes.len());
    for a in &modes {
        for b in &modes {
            let m: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            pair.push(index(&m));
        }
    }
    let shifts = modes.iter().map(|m| transverse_eigenvalue(m)).collect();

    // Aliasing: compare against a rule with twice the nodes at a few points.
    let fine = grid(dim, 2 * resolution);
    let p_r = v.right_period();
    let p_l = v.left_period();
    let xm = v.match_point();
    let mut aliasing: f64 = 0.0;
    for &t in &[0.0, 0.137, 0.61] {
        for &x in &[
            0.0,
            0.3 * xm + 0.21 * p_r,
            xm + 0.43 * p_r,
            -xm - 0.57 * p_l,
        ] {
            let a = coefficients(&v, t, x, &nodes, &differences);
            let b = coefficients(&v, t, x, &fine, &differences);
            let scale = b.iter().map(|c| c.norm()).fold(1.0, f64::max);
            let err = a
                .iter()
                .zip(&b)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max)
                / scale;
            aliasing = aliasing.max(err);
        }
    }
    if aliasing > QUADRATURE_TOL {
        return Err(Error::TruncationNotConverged(format!(
            "transverse quadrature with {resolution} nodes per axis aliases at {aliasing:.2e}; increase K"
        )));
    }
    Ok(ChannelReduction {
        potential: v,
        truncation,
        modes,
        shifts,
        resolution,
        nodes,
        phases,
        pair,
        aliasing,
    })
}

impl ChannelReduction {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn modes(&self) -> &[Vec<i64>] {
        &self.modes
    }

    /// `μ_k` in mode order.
    pub fn transverse_shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }
}

impl PotentialFamily for ChannelReduction {
    fn channels(&self) -> usize {
        self.modes.len()
    }

    fn evaluate(&self, t: f64, x: f64) -> CMatrix {
        let samples: Vec<f64> = self
            .nodes
            .iter()
            .map(|y| self.potential.evaluate(t, x, y))
            .collect();
        let w = 1.0 / samples.len() as f64;
        let coeff: Vec<C64> = self
            .phases
            .iter()
            .map(|ph| ph.iter().zip(&samples).map(|(p, &s)| p * s).sum::<C64>() * w)
            .collect();
        let n = self.modes.len();
        let mut m = CMatrix::from_fn(n, n, |i, j| coeff[self.pair[i * n + j]]);
        for i in 0..n {
            m[(i, i)] = C64::new(m[(i, i)].re + self.shifts[i], 0.0);
        }
        // exact hermitian symmetry; the quadrature only guarantees it to roundoff
        (&m + m.adjoint()) * C64::new(0.5, 0.0)
    }

    fn right_period(&self) -> f64 {
        self.potential.right_period()
    }

    fn left_period(&self) -> f64 {
        self.potential.left_period()
    }

    fn match_point(&self) -> f64 {
        self.potential.match_point()
    }
}
