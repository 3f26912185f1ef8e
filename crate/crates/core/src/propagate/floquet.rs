//! Monodromies, gap classification and the decaying Lagrangian planes `ℓ±`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, identity, CMatrix, C64};
use crate::symplectic::{intersection_dimension, LagrangianFrame};
use crate::tolerances::Tolerances;

use super::magnus::{magnus_exponent, step_count, transfer_matrix, TransferMatrix};
use super::potential::PotentialFamily;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Integration settings shared by monodromies and decaying planes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub steps_per_period: usize,
    pub max_refinement_sweeps: usize,
    pub refinement_tol: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            steps_per_period: 64,
            max_refinement_sweeps: 400,
            refinement_tol: 1e-13,
        }
    }
}

/// Monodromy over the asymptotic cell on one side: `[X, X + p_R]` or `[−X − p_L, −X]`.
pub fn monodromy(
    v: &dyn PotentialFamily,
    t: f64,
    energy: f64,
    side: Side,
    cfg: &PropagationConfig,
    tol: &Tolerances,
) -> Result<TransferMatrix> {
    let (a, b) = cell(v, side);
    transfer_matrix(v, t, energy, a, b, cfg.steps_per_period, tol.symplectic)
}

fn cell(v: &dyn PotentialFamily, side: Side) -> (f64, f64) {
    let x = v.match_point();
    match side {
        Side::Right => (x, x + v.right_period()),
        Side::Left => (-x - v.left_period(), -x),
    }
}

fn period(v: &dyn PotentialFamily, side: Side) -> f64 {
    match side {
        Side::Right => v.right_period(),
        Side::Left => v.left_period(),
    }
}

/// Smallest `|log |λ||` over the Floquet multipliers.
pub fn circle_margin(m: &CMatrix) -> f64 {
    linalg::eigenvalues(m)
        .iter()
        .map(|z| z.norm().ln().abs())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyClass {
    InGap,
    Essential,
    Undecided,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyProbe {
    pub energy: f64,
    pub class: EnergyClass,
    /// Worst margin `min |log |λ||` over all sampled `t` and both sides.
    pub margin: f64,
    pub worst_t: f64,
    pub worst_side: Side,
    /// Largest scaled symplectic residual seen among the monodromies.
    pub symplectic_residual: f64,
}

/// Classifies `E` against the essential spectrum for every `t` in `ts`.
pub fn classify_energy(
    v: &dyn PotentialFamily,
    energy: f64,
    ts: &[f64],
    cfg: &PropagationConfig,
    tol: &Tolerances,
) -> Result<EnergyProbe> {
    classify_energy_on(v, energy, ts, &[Side::Left, Side::Right], cfg, tol)
}

/// As [`classify_energy`], restricted to the given sides (a half-line
/// operator only sees its right tail).
pub fn classify_energy_on(
    v: &dyn PotentialFamily,
    energy: f64,
    ts: &[f64],
    sides: &[Side],
    cfg: &PropagationConfig,
    tol: &Tolerances,
) -> Result<EnergyProbe> {
    let mut probe = EnergyProbe {
        energy,
        class: EnergyClass::InGap,
        margin: f64::INFINITY,
        worst_t: 0.0,
        worst_side: Side::Right,
        symplectic_residual: 0.0,
    };
    for &t in ts {
        for &side in sides {
            let m = monodromy(v, t, energy, side, cfg, tol)?;
            probe.symplectic_residual = probe
                .symplectic_residual
                .max(m.scaled_symplectic_residual());
            let margin = circle_margin(&m.matrix);
            if margin < probe.margin {
                probe.margin = margin;
                probe.worst_t = t;
                probe.worst_side = side;
            }
        }
    }
    probe.class = if probe.margin < tol.circle {
        EnergyClass::Essential
    } else if probe.margin < tol.circle * tol.circle_guard {
        EnergyClass::Undecided
    } else {
        EnergyClass::InGap
    };
    Ok(probe)
}

/// Edges of the common gap around `E`, searched up to `reach` on each side.
/// A side with no edge within `reach` reports `E ∓ reach`.
pub fn gap_edges(
    v: &dyn PotentialFamily,
    energy: f64,
    ts: &[f64],
    sides: &[Side],
    reach: f64,
    cfg: &PropagationConfig,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let in_gap = |e: f64| -> Result<bool> {
        Ok(classify_energy_on(v, e, ts, sides, cfg, tol)?.margin >= tol.circle)
    };
    if !in_gap(energy)? {
        return Err(Error::NotInGap {
            energy,
            margin: 0.0,
        });
    }
    let edge = |dir: f64| -> Result<f64> {
        let mut inside = 0.0;
        let mut step = 1e-2 * reach;
        let outside = loop {
            let d = (inside + step).min(reach);
            if !in_gap(energy + dir * d)? {
                break d;
            }
            if d >= reach {
                return Ok(energy + dir * reach);
            }
            inside = d;
            step *= 2.0;
        };
        let (mut a, mut b) = (inside, outside);
        while b - a > 1e-9 * (1.0 + energy.abs()) {
            let m = 0.5 * (a + b);
            if in_gap(energy + dir * m)? {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(energy + dir * a)
    };
    Ok((edge(-1.0)?, edge(1.0)?))
}

/// Errors unless `E` is decidedly in a common gap.
pub fn require_gap(probe: &EnergyProbe, tol: &Tolerances) -> Result<()> {
    match probe.class {
        EnergyClass::InGap => Ok(()),
        EnergyClass::Essential => Err(Error::NotInGap {
            energy: probe.energy,
            margin: probe.margin,
        }),
        EnergyClass::Undecided => Err(Error::UndecidedEnergy {
            energy: probe.energy,
            margin: probe.margin.max(tol.circle),
        }),
    }
}

/// Orthonormal frames along a sweep in the growing direction, with the QR
/// factors `T_k F_k = F_{k+1} R_k`.
#[derive(Clone, Debug)]
struct Sweep {
    xs: Vec<f64>,
    frames: Vec<CMatrix>,
    r: Vec<CMatrix>,
}

impl Sweep {
    fn run(steps: &[CMatrix], xs: Vec<f64>, start: CMatrix) -> Self {
        let mut frames = Vec::with_capacity(steps.len() + 1);
        let mut r = Vec::with_capacity(steps.len());
        frames.push(start);
        for s in steps {
            let (q, rk) = linalg::thin_qr(&(s * frames.last().unwrap()));
            frames.push(q);
            r.push(rk);
        }
        Self { xs, frames, r }
    }

    fn end(&self) -> &CMatrix {
        self.frames.last().unwrap()
    }

    /// Coefficients at every node for the solution whose coefficients at the
    /// sweep end are `c_end`; they decay back toward the sweep start.
    fn coefficients(&self, c_end: &CMatrix) -> Vec<CMatrix> {
        let m = self.r.len();
        let mut out = vec![CMatrix::zeros(0, 0); m + 1];
        out[m] = c_end.clone();
        for k in (0..m).rev() {
            out[k] = triangular_solve(&self.r[k], &out[k + 1]);
        }
        out
    }

    /// Gram `∫ ψ*ψ` of the solutions with end coefficients `c_end`: trapezoid
    /// rule plus the Euler-Maclaurin endpoint term, using `ψ'` from the frames.
    fn gram(&self, c_end: &CMatrix) -> CMatrix {
        let k = c_end.ncols();
        let m = self.r.len();
        let mut g = CMatrix::zeros(k, k);
        if m == 0 {
            return g;
        }
        let n = self.frames[0].nrows() / 2;
        let coeffs = self.coefficients(c_end);
        let h = (self.xs[1] - self.xs[0]).abs();
        for i in 0..=m {
            let w = if i == 0 || i == m { 0.5 * h } else { h };
            let psi = self.frames[i].rows(0, n) * &coeffs[i];
            g += psi.adjoint() * psi * C64::new(w, 0.0);
        }
        let slope = |i: usize| {
            let psi = self.frames[i].rows(0, n) * &coeffs[i];
            let dpsi = self.frames[i].rows(n, n) * &coeffs[i];
            psi.adjoint() * &dpsi + dpsi.adjoint() * psi
        };
        let (lo, hi) = if self.xs[m] > self.xs[0] {
            (0, m)
        } else {
            (m, 0)
        };
        g -= (slope(hi) - slope(lo)) * C64::new(h * h / 12.0, 0.0);
        g
    }
}

fn triangular_solve(r: &CMatrix, b: &CMatrix) -> CMatrix {
    r.solve_upper_triangular(b)
        .unwrap_or_else(|| linalg::solve(r, b).expect("singular QR factor"))
}

/// The decaying plane on one side, with everything needed for `L²` norms.
#[derive(Clone, Debug)]
pub struct DecayingPlane {
    pub side: Side,
    pub t: f64,
    pub energy: f64,
    /// `ℓ(t, E)` at `x = 0`.
    pub plane: LagrangianFrame,
    /// Multipliers of the decaying directions over one cell.
    pub multipliers: Vec<C64>,
    /// Plane change in the last refinement sweep.
    pub refinement_residual: f64,
    near: Sweep,
    cell: Sweep,
    /// Coefficient map from one cell to the next (basis: cell frame).
    tail_map: CMatrix,
}

impl DecayingPlane {
    /// `∫ ψ_i* ψ_j` over the half-line for the solutions with Cauchy data
    /// `data` (columns in `ℓ`) at `x = 0`.
    pub fn gram(&self, data: &CMatrix) -> CMatrix {
        let f0 = self.near.end();
        let c0 = f0.adjoint() * data;
        let near = self.near.gram(&c0);
        // coefficients at the match point, in the cell frame basis
        let coeffs = self.near.coefficients(&c0);
        let at_match = &self.near.frames[0] * &coeffs[0];
        let cell_frame = &self.cell.frames[self.cell.frames.len() - 1];
        let mut a = cell_frame.adjoint() * at_match;
        // the cell sweep ends at the match point; its Gram in cell-frame coords
        let q = self.cell.gram_in_end_basis();
        let mut tail = CMatrix::zeros(a.ncols(), a.ncols());
        for _ in 0..100_000 {
            let contrib = a.adjoint() * &q * &a;
            let size = contrib.norm();
            tail += contrib;
            a = &self.tail_map * a;
            if size <= 1e-16 * tail.norm() {
                break;
            }
        }
        near + tail
    }

    /// `L²` norms of the solutions with the given Cauchy data.
    pub fn l2_norms(&self, data: &CMatrix) -> Vec<f64> {
        let g = self.gram(data);
        (0..g.nrows())
            .map(|i| g[(i, i)].re.max(0.0).sqrt())
            .collect()
    }
}

impl Sweep {
    /// Gram over the sweep as a quadratic form in end-frame coefficients.
    fn gram_in_end_basis(&self) -> CMatrix {
        let n = self.end().ncols();
        self.gram(&identity(n))
    }
}

/// `ℓ+(t, E)` at `x = 0`.
pub fn ell_plus(
    v: &dyn PotentialFamily,
    t: f64,
    energy: f64,
    cfg: &PropagationConfig,
    tol: &Tolerances,
) -> Result<LagrangianFrame> {
    Ok(decaying_plane(v, t, energy, Side::Right, cfg, tol)?.plane)
}

/// `ℓ−(t, E)` at `x = 0`.
pub fn ell_minus(
    v: &dyn PotentialFamily,
    t: f64,
    energy: f64,
    cfg: &PropagationConfig,
    tol: &Tolerances,
) -> Result<LagrangianFrame> {
    Ok(decaying_plane(v, t, energy, Side::Left, cfg, tol)?.plane)
}

/// Decaying plane on `side`: an ordered-Schur guess from the cell monodromy,
/// refined by QR sweeps through the cell against the decay direction, then
/// carried to `x = 0`.
pub fn decaying_plane(
    v: &dyn PotentialFamily,
    t: f64,
    energy: f64,
    side: Side,
    cfg: &PropagationConfig,
    tol: &Tolerances,
) -> Result<DecayingPlane> {
    let n = v.channels();
    let p = period(v, side);
    let (a, b) = cell(v, side);
    let cell_steps = cfg.steps_per_period.max(1);
    let h = (b - a) / cell_steps as f64;
    let omegas: Vec<CMatrix> = (0..cell_steps)
        .map(|k| magnus_exponent(v, t, energy, a + k as f64 * h, h))
        .collect();
    let forward: Vec<CMatrix> = omegas.iter().map(|o| o.clone().exp()).collect();
    let mut mono = identity(2 * n);
    for s in &forward {
        mono = s * mono;
    }
    let resid = super::magnus::scaled_symplectic_residual(&mono);
    if resid > tol.symplectic {
        return Err(Error::SymplecticityExceeded {
            residual: resid,
            tol: tol.symplectic,
        });
    }
    let margin = circle_margin(&mono);
    if margin < tol.circle {
        return Err(Error::NotInGap { energy, margin });
    }
    let decaying = |z: C64| match side {
        Side::Right => z.norm() < 1.0,
        Side::Left => z.norm() > 1.0,
    };
    // Deep in a gap the small multipliers drown in the roundoff of the large
    // ones; the sweeps below converge from the frozen-coefficient guess too.
    let schur_guess = linalg::ordered_schur(&mono, decaying)
        .ok()
        .filter(|r| r.2 == n);
    let from_schur = schur_guess.is_some();
    let (mut frame, mut multipliers) = match schur_guess {
        Some((q, tri, _)) => (
            q.columns(0, n).into_owned(),
            (0..n).map(|i| tri[(i, i)]).collect::<Vec<C64>>(),
        ),
        None => (frozen_guess(v, t, energy, a, side), Vec::new()),
    };

    // Sweep through the cell in the growing direction: backward for the right
    // side, forward for the left side.
    let (sweep_steps, sweep_xs): (Vec<CMatrix>, Vec<f64>) = match side {
        Side::Right => (
            omegas.iter().rev().map(|o| (-o.clone()).exp()).collect(),
            (0..=cell_steps).map(|k| b - k as f64 * h).collect(),
        ),
        Side::Left => (
            forward.clone(),
            (0..=cell_steps).map(|k| a + k as f64 * h).collect(),
        ),
    };
    let mut refinement_residual = f64::INFINITY;
    let mut cell_sweep = Sweep::run(&sweep_steps, sweep_xs.clone(), frame.clone());
    for _ in 0..cfg.max_refinement_sweeps {
        let next = cell_sweep.end().clone();
        refinement_residual = projector_distance(&frame, &next);
        frame = next;
        cell_sweep = Sweep::run(&sweep_steps, sweep_xs.clone(), frame.clone());
        if refinement_residual < cfg.refinement_tol {
            break;
        }
    }
    // tail map: coefficients in the cell frame at the match point → one cell further out
    let end = cell_sweep.end();
    let w = end.adjoint() * &frame;
    let mut r_total = identity(n);
    for r in &cell_sweep.r {
        r_total = r * r_total;
    }
    // data at match = end·c_end; data one cell out = frame·c_start with c_end = R_total c_start.
    // In end-frame coordinates the far data is (end* frame)·c_start = w·R_total⁻¹·c_end.
    let tail_map = &w * triangular_solve(&r_total, &identity(n));
    if !from_schur {
        let far = linalg::eigenvalues(&tail_map);
        if far.iter().any(|z| z.norm() >= 1.0) {
            return Err(Error::StableDimension {
                expected: n,
                got: far.iter().filter(|z| z.norm() < 1.0).count(),
            });
        }
        multipliers = match side {
            Side::Right => far,
            Side::Left => far.iter().map(|z| z.inv()).collect(),
        };
    }

    // carry the plane from the match point to x = 0
    let x = v.match_point();
    let near_steps = if x > 0.0 {
        step_count(x, p, cfg.steps_per_period)
    } else {
        0
    };
    let near = if near_steps == 0 {
        Sweep {
            xs: vec![0.0],
            frames: vec![end.clone()],
            r: vec![],
        }
    } else {
        let hn = x / near_steps as f64;
        let (steps, xs): (Vec<CMatrix>, Vec<f64>) = match side {
            Side::Right => (
                (0..near_steps)
                    .map(|k| magnus_exponent(v, t, energy, x - k as f64 * hn, -hn).exp())
                    .collect(),
                (0..=near_steps).map(|k| x - k as f64 * hn).collect(),
            ),
            Side::Left => (
                (0..near_steps)
                    .map(|k| magnus_exponent(v, t, energy, -x + k as f64 * hn, hn).exp())
                    .collect(),
                (0..=near_steps).map(|k| -x + k as f64 * hn).collect(),
            ),
        };
        Sweep::run(&steps, xs, end.clone())
    };
    let plane = LagrangianFrame::new(near.end().clone(), tol)?;
    Ok(DecayingPlane {
        side,
        t,
        energy,
        plane,
        multipliers,
        refinement_residual,
        near,
        cell: cell_sweep,
        tail_map,
    })
}

/// Orthonormal `[I; ∓κ]` with `κ = (V(t, x) − E)^{1/2}` at the cell start.
fn frozen_guess(v: &dyn PotentialFamily, t: f64, energy: f64, x: f64, side: Side) -> CMatrix {
    let n = v.channels();
    let mut shifted = v.evaluate(t, x);
    for i in 0..n {
        shifted[(i, i)] -= C64::new(energy, 0.0);
    }
    let (vals, vecs) = linalg::hermitian_eigen(&linalg::hermitian_part(&shifted));
    let root = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        vals.iter().map(|l| C64::new(l.max(1.0).sqrt(), 0.0)),
    ));
    let kappa = &vecs * root * vecs.adjoint();
    let sign = match side {
        Side::Right => -1.0,
        Side::Left => 1.0,
    };
    let mut frame = CMatrix::zeros(2 * n, n);
    frame.view_mut((0, 0), (n, n)).copy_from(&identity(n));
    frame
        .view_mut((n, 0), (n, n))
        .copy_from(&(kappa * C64::new(sign, 0.0)));
    linalg::orthonormalize(&frame)
}

fn projector_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::op_norm(&(a * a.adjoint() - b * b.adjoint()))
}

/// `dim(ℓ+ ∩ ℓ−)`, the multiplicity of `E` as an eigenvalue of the bulk operator.
pub fn bulk_kernel_dimension(
    v: &dyn PotentialFamily,
    t: f64,
    energy: f64,
    cfg: &PropagationConfig,
    tol: &Tolerances,
) -> Result<usize> {
    let p = ell_plus(v, t, energy, cfg, tol)?;
    let m = ell_minus(v, t, energy, cfg, tol)?;
    intersection_dimension(&p, &m, tol.intersection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real};
    use crate::propagate::potential::{Cosine, Flat, SquareWell};
    use crate::symplectic::{plane_distance, LagrangianFrame};
    use nalgebra::DMatrix;

    fn frame(a: f64, b: f64) -> LagrangianFrame {
        LagrangianFrame::new(
            CMatrix::from_column_slice(2, 1, &[real(a), real(b)]),
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn free_decaying_planes() {
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        let v = Flat::zero(1);
        let p = ell_plus(&v, 0.0, -1.0, &cfg, &tol).unwrap();
        let m = ell_minus(&v, 0.0, -1.0, &cfg, &tol).unwrap();
        assert!(plane_distance(&p, &frame(1.0, -1.0)) < 1e-10);
        assert!(plane_distance(&m, &frame(1.0, 1.0)) < 1e-10);
        assert_eq!(bulk_kernel_dimension(&v, 0.0, -1.0, &cfg, &tol).unwrap(), 0);
    }

    #[test]
    fn free_decaying_gram_is_half() {
        // ψ = e^{−κx}: ∫₀^∞ ψ² = 1/(2κ)
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        for &(e, side) in &[(-1.0, Side::Right), (-4.0, Side::Left)] {
            let kappa: f64 = (-e as f64).sqrt();
            let dp = decaying_plane(&Flat::zero(1), 0.0, e, side, &cfg, &tol).unwrap();
            let sign = if side == Side::Right { -kappa } else { kappa };
            let data = CMatrix::from_column_slice(2, 1, &[real(1.0), real(sign)]);
            let g = dp.gram(&data);
            assert!((g[(0, 0)].re - 0.5 / kappa).abs() < 1e-7, "{}", g[(0, 0)]);
        }
    }

    #[test]
    fn square_well_gram_matches_closed_form() {
        // right half of the even bound state: cos(kx) on [0,1], cos(k)e^{−κ(x−1)} beyond
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        let (depth, e) = (3.0, -1.0);
        let k = ((depth + e) as f64).sqrt();
        let dp = decaying_plane(
            &SquareWell { depth, width: 2.0 },
            0.0,
            e,
            Side::Right,
            &cfg,
            &tol,
        )
        .unwrap();
        // the decaying solution with ψ(1) = cos k, ψ'(1) = −cos k; integrate back analytically
        let (c1, s1) = (k.cos(), k.sin());
        // ψ(x) = α cos(k(x−1)) + β sin(k(x−1)) on [0,1] with α = c1, β = −c1/k
        let (alpha, beta) = (c1, -c1 / k);
        let psi0 = alpha * k.cos() - beta * k.sin();
        let dpsi0 = alpha * k * k.sin() + beta * k * k.cos();
        let data = CMatrix::from_column_slice(2, 1, &[real(psi0), real(dpsi0)]);
        assert!(dp.plane.contains(&data.column(0).into_owned(), 1e-8));
        // ∫₀¹ (α cos(ku) + β sin(ku))² over u ∈ [−1, 0]
        let n = 20000;
        let inner: f64 = (0..n)
            .map(|i| {
                let u = -1.0 + (i as f64 + 0.5) / n as f64;
                let f = alpha * (k * u).cos() + beta * (k * u).sin();
                f * f / n as f64
            })
            .sum();
        let outer = c1 * c1 / 2.0;
        let g = dp.gram(&data)[(0, 0)].re;
        let _ = s1;
        assert!(
            (g - inner - outer).abs() < 1e-8 * (inner + outer),
            "{g} vs {}",
            inner + outer
        );
    }

    fn square_well_depth_for_bound_state() -> f64 {
        // even bound state at E = −1 for width 2: k·tan(k) = 1 with k² = depth − 1
        let (mut lo, mut hi) = (1e-9, std::f64::consts::FRAC_PI_2 - 1e-9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.tan() < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = 0.5 * (lo + hi);
        1.0 + k * k
    }

    #[test]
    fn square_well_bound_state_gives_kernel() {
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        let v = SquareWell {
            depth: square_well_depth_for_bound_state(),
            width: 2.0,
        };
        assert_eq!(bulk_kernel_dimension(&v, 0.0, -1.0, &cfg, &tol).unwrap(), 1);
        assert_eq!(bulk_kernel_dimension(&v, 0.0, -0.8, &cfg, &tol).unwrap(), 0);
        assert_eq!(bulk_kernel_dimension(&v, 0.0, -1.2, &cfg, &tol).unwrap(), 0);
    }

    /// Bloch eigenvalues of `−d² + a cos(2πx)` at quasimomentum θ in a plane-wave basis.
    fn mathieu_bloch(a: f64, theta: f64) -> Vec<f64> {
        let m = 30i32;
        let size = (2 * m + 1) as usize;
        let h = DMatrix::from_fn(size, size, |i, j| {
            let (ki, kj) = (i as i32 - m, j as i32 - m);
            if i == j {
                let q = 2.0 * std::f64::consts::PI * ki as f64 + theta;
                q * q
            } else if (ki - kj).abs() == 1 {
                a / 2.0
            } else {
                0.0
            }
        });
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn mathieu_gap_classification_matches_bloch_oracle() {
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        let v = Cosine::mathieu(2.0);
        let anti = mathieu_bloch(2.0, std::f64::consts::PI);
        let (lo, hi) = (anti[0], anti[1]);
        let mid = 0.5 * (lo + hi);
        let ts = [0.0, 0.5];
        let probe = classify_energy(&v, mid, &ts, &cfg, &tol).unwrap();
        assert_eq!(probe.class, EnergyClass::InGap);
        // inside the first band (between periodic ground and first antiperiodic edge)
        let per = mathieu_bloch(2.0, 0.0);
        let band = 0.5 * (per[0] + lo);
        assert_eq!(
            classify_energy(&v, band, &ts, &cfg, &tol).unwrap().class,
            EnergyClass::Essential
        );
        // band edges sit on the circle to within the integrator error
        for edge in [lo, hi] {
            let m = monodromy(&v, 0.0, edge, Side::Right, &cfg, &tol).unwrap();
            assert!(circle_margin(&m.matrix) < 1e-3, "edge {edge}");
        }
        assert!(require_gap(&probe, &tol).is_ok());
    }

    #[test]
    fn decaying_planes_are_invariant_under_the_cell() {
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        let v = Cosine::mathieu(2.0);
        let e = 9.87;
        let dp = decaying_plane(&v, 0.2, e, Side::Right, &cfg, &tol).unwrap();
        assert!(dp.refinement_residual < 1e-12);
        let m = monodromy(&v, 0.2, e, Side::Right, &cfg, &tol).unwrap();
        let image = LagrangianFrame::new(&m.matrix * dp.plane.matrix(), &tol).unwrap();
        assert!(plane_distance(&image, &dp.plane) < 1e-6);
        assert!(dp.multipliers.iter().all(|z| z.norm() < 1.0));
        let _ = c(0.0, 0.0);
    }

    #[test]
    fn essential_energy_is_refused() {
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        let err = ell_plus(&Flat::zero(1), 0.0, 1.0, &cfg, &tol).unwrap_err();
        assert!(matches!(err, Error::NotInGap { .. }));
    }
}

#[cfg(test)]
mod gap_tests {
    use super::*;
    use crate::propagate::potential::{Cosine, Flat};

    #[test]
    fn mathieu_first_gap_edges() {
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        let (lo, hi) = gap_edges(
            &Cosine::mathieu(2.0),
            9.857,
            &[0.0],
            &[Side::Right],
            5.0,
            &cfg,
            &tol,
        )
        .unwrap();
        // plane-wave Bloch values of the antiperiodic pair
        assert!((lo - 8.857_098_95).abs() < 1e-4, "{lo}");
        assert!((hi - 10.856_778_2).abs() < 1e-4, "{hi}");
    }

    #[test]
    fn free_lower_gap_is_unbounded_below() {
        let (cfg, tol) = (PropagationConfig::default(), Tolerances::default());
        let (lo, hi) = gap_edges(
            &Flat::zero(1),
            -1.0,
            &[0.0],
            &[Side::Right],
            3.0,
            &cfg,
            &tol,
        )
        .unwrap();
        assert_eq!(lo, -4.0);
        assert!(hi.abs() < 1e-6);
    }
}
