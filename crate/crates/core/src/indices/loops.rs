//! Periodic loops of Lagrangian planes.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, C64};
use crate::propagate::{decaying_plane, PotentialFamily, PropagationConfig, Side};
use crate::symplectic::{
    plane_distance, plane_to_unitary, robin_plane, unitary_to_plane, BoundaryUnitary,
    LagrangianFrame,
};
use crate::tolerances::Tolerances;

pub type PlaneFn = Arc<dyn Fn(f64) -> Result<LagrangianFrame> + Send + Sync>;

/// `t ↦ ℓ(t)` on `[0, 1]` with `ℓ(0) = ℓ(1)`.
#[derive(Clone)]
pub struct PlaneLoop {
    f: PlaneFn,
    channels: usize,
    label: String,
}

impl std::fmt::Debug for PlaneLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PlaneLoop({}, n={})", self.label, self.channels)
    }
}

impl PlaneLoop {
    pub fn new(label: impl Into<String>, channels: usize, f: PlaneFn) -> Self {
        Self {
            f,
            channels,
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn at(&self, t: f64) -> Result<LagrangianFrame> {
        (self.f)(t)
    }

    pub fn unitary(&self, t: f64, tol: &Tolerances) -> Result<BoundaryUnitary> {
        plane_to_unitary(&self.at(t)?, tol)
    }

    pub fn constant(label: impl Into<String>, frame: LagrangianFrame) -> Self {
        let n = frame.channels();
        Self::new(label, n, Arc::new(move |_| Ok(frame.clone())))
    }

    pub fn dirichlet(n: usize) -> Self {
        Self::constant("dirichlet", LagrangianFrame::dirichlet(n))
    }

    pub fn neumann(n: usize) -> Self {
        Self::constant("neumann", LagrangianFrame::neumann(n))
    }

    /// Robin planes `{(sin(πt) x, cos(πt) x)}`.
    pub fn robin(n: usize) -> Self {
        let tol = Tolerances::default();
        Self::new(
            "robin-loop",
            n,
            Arc::new(move |t| {
                let id = linalg::identity(n);
                robin_plane(
                    &(&id * real((PI * t).sin())),
                    &(&id * real((PI * t).cos())),
                    &tol,
                )
            }),
        )
    }

    /// Planes of the unitaries `u(t)`.
    pub fn from_unitaries(
        label: impl Into<String>,
        n: usize,
        u: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
    ) -> Self {
        let tol = Tolerances::default();
        Self::new(
            label,
            n,
            Arc::new(move |t| Ok(unitary_to_plane(&BoundaryUnitary::new(u(t), &tol)?))),
        )
    }

    /// Geodesic interpolation through unitaries sampled at `t_k = k/m`,
    /// closed by `U_m = U_0`.
    pub fn from_unitary_samples(
        label: impl Into<String>,
        samples: Vec<CMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("no unitary samples".into()));
        }
        let n = samples[0].nrows();
        for s in &samples {
            BoundaryUnitary::new(s.clone(), tol)?;
            if s.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.nrows(),
                });
            }
        }
        let m = samples.len();
        // principal logarithms of consecutive ratios
        let steps: Vec<(Vec<f64>, CMatrix)> = (0..m)
            .map(|k| {
                let ratio = samples[k].adjoint() * &samples[(k + 1) % m];
                let (vals, vecs) = linalg::normal_eigen(&ratio);
                (vals.iter().map(|z| z.arg()).collect(), vecs)
            })
            .collect();
        let samples = Arc::new(samples);
        let steps = Arc::new(steps);
        let f = move |t: f64| -> CMatrix {
            let x = t.rem_euclid(1.0) * m as f64;
            let k = (x.floor() as usize).min(m - 1);
            let s = x - k as f64;
            let (phases, vecs) = &steps[k];
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                phases.len(),
                phases.iter().map(|p| C64::from_polar(1.0, s * p)),
            ));
            &samples[k] * vecs * d * vecs.adjoint()
        };
        Ok(Self::from_unitaries(label, n, Arc::new(f)))
    }

    /// `t ↦ ℓ(1 − t)`.
    pub fn reversed(&self) -> Self {
        let f = self.f.clone();
        Self::new(
            format!("reverse({})", self.label),
            self.channels,
            Arc::new(move |t| f(1.0 - t)),
        )
    }

    /// Runs `a` on `[0, ½]` and `b` on `[½, 1]`; needs `a(1) = b(0)`.
    pub fn concatenate(a: &Self, b: &Self, tol: &Tolerances) -> Result<Self> {
        if a.channels != b.channels {
            return Err(Error::DimensionMismatch {
                expected: a.channels,
                got: b.channels,
            });
        }
        let gap = plane_distance(&a.at(1.0)?, &b.at(0.0)?);
        if gap > tol.isotropy.max(1e-8) {
            return Err(Error::Config(format!(
                "loops do not share endpoints (distance {gap:.2e})"
            )));
        }
        let (fa, fb) = (a.f.clone(), b.f.clone());
        Ok(Self::new(
            format!("{}*{}", a.label, b.label),
            a.channels,
            Arc::new(move |t| {
                let t = t.rem_euclid(1.0);
                if t <= 0.5 {
                    fa(2.0 * t)
                } else {
                    fb(2.0 * t - 1.0)
                }
            }),
        ))
    }

    /// `ℓ±(t, E)` at `x = 0` for the family `v`.
    pub fn decaying(
        v: Arc<dyn PotentialFamily>,
        side: Side,
        energy: f64,
        cfg: PropagationConfig,
        tol: Tolerances,
    ) -> Self {
        let n = v.channels();
        let label = match side {
            Side::Right => "ell-plus",
            Side::Left => "ell-minus",
        };
        Self::new(
            label,
            n,
            Arc::new(move |t| Ok(decaying_plane(&*v, t, energy, side, &cfg, &tol)?.plane)),
        )
    }

    /// `plane_distance(ℓ(0), ℓ(1))`.
    pub fn periodicity_residual(&self) -> Result<f64> {
        Ok(plane_distance(&self.at(0.0)?, &self.at(1.0)?))
    }

    /// Adaptive samples with consecutive plane distance below `max_step`.
    pub fn sample(
        &self,
        initial: usize,
        max_step: f64,
        min_spacing: f64,
    ) -> Result<Vec<(f64, LagrangianFrame)>> {
        let m = initial.max(2);
        let mut pending: Vec<(f64, LagrangianFrame)> = Vec::new();
        for k in (0..=m).rev() {
            let t = k as f64 / m as f64;
            pending.push((t, self.at(t)?));
        }
        let mut out = Vec::new();
        let mut current = pending.pop().unwrap();
        while let Some(next) = pending.pop() {
            if plane_distance(&current.1, &next.1) >= max_step {
                if next.0 - current.0 <= min_spacing {
                    return Err(Error::RefinementExhausted { t: current.0 });
                }
                let tm = 0.5 * (current.0 + next.0);
                let mid = (tm, self.at(tm)?);
                pending.push(next);
                pending.push(mid);
                continue;
            }
            out.push(current);
            current = next;
        }
        out.push(current);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn robin_loop_is_periodic_and_sampled_finely() {
        let l = PlaneLoop::robin(1);
        assert!(l.periodicity_residual().unwrap() < 1e-12);
        let s = l.sample(8, 0.2, 1e-6).unwrap();
        for w in s.windows(2) {
            assert!(plane_distance(&w[0].1, &w[1].1) < 0.2);
        }
    }

    #[test]
    fn unitary_samples_interpolate_through_nodes() {
        let tol = Tolerances::default();
        let samples: Vec<CMatrix> = (0..8)
            .map(|k| CMatrix::from_element(1, 1, C64::from_polar(1.0, 2.0 * PI * k as f64 / 8.0)))
            .collect();
        let l = PlaneLoop::from_unitary_samples("ramp", samples, &tol).unwrap();
        let u = l.unitary(0.3, &tol).unwrap();
        assert!((u.matrix()[(0, 0)] - C64::from_polar(1.0, 2.0 * PI * 0.3)).norm() < 1e-10);
        assert!(l.periodicity_residual().unwrap() < 1e-10);
    }
}
