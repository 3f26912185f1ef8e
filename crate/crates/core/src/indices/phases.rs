//! Continuous eigenphase tracking of unitary loops and winding numbers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Sampling contract shared by all loop computations.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    pub initial_samples: usize,
    /// Largest eigenphase (or determinant phase) motion between samples.
    pub max_phase_step: f64,
    pub min_spacing: f64,
    /// Width of the final bracket around a located crossing.
    pub crossing_resolution: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            initial_samples: 64,
            max_phase_step: PI / 4.0,
            min_spacing: 1e-9,
            crossing_resolution: 1e-12,
        }
    }
}

/// Eigenphases in `(−π, π]`, ascending.
pub fn eigenphases(u: &CMatrix) -> Vec<f64> {
    let mut p: Vec<f64> = linalg::normal_eigen(u).0.iter().map(|z| z.arg()).collect();
    p.sort_by(f64::total_cmp);
    p
}

pub fn wrap(phi: f64) -> f64 {
    let mut x = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Matches two sorted eigenphase lists by the cyclic shift of least total
/// displacement. Returns `(shift, displacements)`, pairing `a[i]` with
/// `b[(i + shift) % n]`.
pub fn match_phases(a: &[f64], b: &[f64]) -> (usize, Vec<f64>) {
    let n = a.len();
    let mut best = (0, f64::INFINITY, Vec::new());
    for shift in 0..n.max(1) {
        if n == 0 {
            break;
        }
        let d: Vec<f64> = (0..n).map(|i| wrap(b[(i + shift) % n] - a[i])).collect();
        let total: f64 = d.iter().map(|x| x.abs()).sum();
        if total < best.1 {
            best = (shift, total, d);
        }
    }
    (best.0, best.2)
}

/// A sign change of a tracked eigenphase (relative to the base) through 0.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PhasePassage {
    pub t_lo: f64,
    pub t_hi: f64,
    pub phase_lo: f64,
    pub phase_hi: f64,
    /// `+1` counter-clockwise, `−1` clockwise.
    pub direction: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseTrack {
    /// Start of the sampled period `[s, s + 1]`, chosen away from passages.
    pub offset: f64,
    pub ts: Vec<f64>,
    pub phases: Vec<Vec<f64>>,
    pub passages: Vec<PhasePassage>,
}

impl PhaseTrack {
    pub fn flow(&self) -> i64 {
        self.passages.iter().map(|p| p.direction).sum()
    }
}

type UnitaryFn<'a> = dyn Fn(f64) -> Result<CMatrix> + Sync + 'a;

/// Tracks the eigenphases of `conj(base)·W(t)` over one period and records
/// every passage through 0.
pub fn track_phases(w: &UnitaryFn<'_>, base: C64, cfg: &LoopConfig) -> Result<PhaseTrack> {
    let rot = base.conj() / base.norm();
    let phases_at = |t: f64| -> Result<Vec<f64>> { Ok(eigenphases(&(w(t)? * rot))) };
    // start where no eigenphase sits near the base point
    let mut offset = 0.0;
    let mut clearance = -1.0;
    for s in [0.0, 0.137, 0.291, 0.419, 0.613, 0.778] {
        let c = phases_at(s)?
            .iter()
            .fold(f64::INFINITY, |m, p| m.min(p.abs()));
        if c > clearance {
            clearance = c;
            offset = s;
        }
        if c > 0.3 {
            break;
        }
    }
    let m = cfg.initial_samples.max(2);
    let mut pending: Vec<(f64, Vec<f64>)> = Vec::new();
    for k in (0..=m).rev() {
        let t = offset + k as f64 / m as f64;
        pending.push((t, phases_at(t)?));
    }
    let mut ts = Vec::new();
    let mut phases = Vec::new();
    let mut passages = Vec::new();
    let mut current = pending.pop().unwrap();
    while let Some(next) = pending.pop() {
        let (shift, disp) = match_phases(&current.1, &next.1);
        let worst = disp.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if worst >= cfg.max_phase_step {
            if next.0 - current.0 <= cfg.min_spacing {
                return Err(Error::NonRegular {
                    t: current.0.rem_euclid(1.0),
                    reason: "eigenphases move too fast to track (collision at the base point?)"
                        .into(),
                });
            }
            let tm = 0.5 * (current.0 + next.0);
            let mid = (tm, phases_at(tm)?);
            pending.push(next);
            pending.push(mid);
            continue;
        }
        let n = current.1.len();
        for i in 0..n {
            let a = current.1[i];
            // the stored value, so that a phase landing exactly on 0 is seen
            // identically from both sides
            let b = next.1[(i + shift) % n];
            // passage through 0 (not through ±π, since |disp| < π/4)
            if a.abs() < PI / 2.0
                && b.abs() < PI / 2.0
                && ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0))
            {
                passages.push(PhasePassage {
                    t_lo: current.0,
                    t_hi: next.0,
                    phase_lo: a,
                    phase_hi: b,
                    direction: if b >= 0.0 { 1 } else { -1 },
                });
            }
        }
        ts.push(current.0);
        phases.push(current.1);
        current = next;
    }
    let (t_end, p_end) = current;
    ts.push(t_end);
    phases.push(p_end);
    Ok(PhaseTrack {
        offset,
        ts,
        phases,
        passages,
    })
}

/// `Sf(U, z₀, T¹)`: net counter-clockwise passages of eigenphases through `z₀`.
pub fn unitary_spectral_flow(u: &UnitaryFn<'_>, base: C64, cfg: &LoopConfig) -> Result<i64> {
    Ok(track_phases(u, base, cfg)?.flow())
}

/// Winding number with its pre-rounding value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub value: i64,
    pub raw: f64,
    pub residual: f64,
}

/// `(1/2π)·Σ Δarg` over a closed sampled loop (first and last samples are the
/// same point of the loop).
pub fn winding_number(samples: &[C64], integer_tol: f64) -> Result<Winding> {
    if samples.len() < 2 {
        return Err(Error::Config("a loop needs at least two samples".into()));
    }
    for (index, z) in samples.iter().enumerate() {
        if z.norm() < 1e-12 {
            return Err(Error::ZeroSample { index, tol: 1e-12 });
        }
    }
    let mut total = 0.0;
    for pair in samples.windows(2) {
        let d = (pair[1] / pair[0]).arg();
        if d.abs() >= PI * (1.0 - 1e-12) {
            return Err(Error::NonRegular {
                t: 0.0,
                reason: "phase step ≥ π; refine the loop".into(),
            });
        }
        total += d;
    }
    let raw = total / (2.0 * PI);
    let value = raw.round();
    let residual = (raw - value).abs();
    if residual >= integer_tol {
        return Err(Error::NotInteger {
            value: raw,
            tol: integer_tol,
        });
    }
    Ok(Winding {
        value: value as i64,
        raw,
        residual,
    })
}

/// Samples `f` on `[0, 1]` refining until consecutive phase steps are below `max_step`.
pub fn sample_phase_loop(
    f: &(dyn Fn(f64) -> Result<C64> + Sync),
    cfg: &LoopConfig,
) -> Result<Vec<(f64, C64)>> {
    let m = cfg.initial_samples.max(2);
    let mut pending: Vec<(f64, C64)> = Vec::new();
    for k in (0..=m).rev() {
        let t = k as f64 / m as f64;
        pending.push((t, f(t)?));
    }
    let mut out = Vec::new();
    let mut current = pending.pop().unwrap();
    while let Some(next) = pending.pop() {
        if (next.1 / current.1).arg().abs() >= cfg.max_phase_step {
            if next.0 - current.0 <= cfg.min_spacing {
                return Err(Error::RefinementExhausted { t: current.0 });
            }
            let tm = 0.5 * (current.0 + next.0);
            let mid = (tm, f(tm)?);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn scalar(z: C64) -> CMatrix {
        CMatrix::from_element(1, 1, z)
    }

    #[test]
    fn unitary_flow_examples() {
        let cfg = LoopConfig::default();
        let one = c(1.0, 0.0);
        let f = |t: f64| Ok(scalar(C64::from_polar(1.0, 2.0 * PI * t)));
        assert_eq!(unitary_spectral_flow(&f, one, &cfg).unwrap(), 1);
        let g = |_t: f64| Ok(-CMatrix::identity(3, 3));
        assert_eq!(unitary_spectral_flow(&g, one, &cfg).unwrap(), 0);
        let h = |t: f64| Ok(scalar(C64::from_polar(1.0, -4.0 * PI * t)));
        assert_eq!(unitary_spectral_flow(&h, one, &cfg).unwrap(), -2);
    }

    #[test]
    fn winding_examples() {
        let loop_of = |k: f64| -> Vec<C64> {
            (0..=100)
                .map(|i| C64::from_polar(1.0, 2.0 * PI * k * i as f64 / 100.0))
                .collect()
        };
        assert_eq!(winding_number(&loop_of(1.0), 0.1).unwrap().value, 1);
        assert_eq!(
            winding_number(&vec![c(0.3, 0.2); 10], 0.1).unwrap().value,
            0
        );
        assert_eq!(winding_number(&loop_of(-2.0), 0.1).unwrap().value, -2);
        let mut bad = loop_of(1.0);
        bad[3] = c(0.0, 0.0);
        assert!(matches!(
            winding_number(&bad, 0.1),
            Err(Error::ZeroSample { .. })
        ));
        // an open path is refused rather than rounded
        let open: Vec<C64> = (0..=100)
            .map(|i| C64::from_polar(1.0, 2.0 * PI * 0.5 * i as f64 / 100.0))
            .collect();
        assert!(matches!(
            winding_number(&open, 0.1),
            Err(Error::NotInteger { .. })
        ));
    }

    #[test]
    fn matching_follows_rotation() {
        let (shift, d) = match_phases(&[-3.0, 0.0, 3.0], &[-0.1, 2.9, 3.05]);
        // −3.0 → 3.05 across the branch cut, 0.0 → −0.1, 3.0 → 2.9
        assert_eq!(shift, 2);
        assert!(d.iter().all(|x| x.abs() < 0.35));
    }
}
