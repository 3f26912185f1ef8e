//! Maslov index of two plane loops from crossing forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, C64};
use crate::symplectic::{intersection_basis, j_matrix};
use crate::tolerances::Tolerances;

use super::loops::PlaneLoop;
use super::phases::{eigenphases, track_phases, LoopConfig};

/// One crossing `ℓ1(t*) ∩ ℓ2(t*) ≠ 0` with its form `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub t: f64,
    pub multiplicity: usize,
    /// Orthonormal basis of the intersection, `2n × k`.
    pub basis: CMatrix,
    /// `b(x, y) = ω(x, P1' y) − ω(x, P2' y)` on the basis.
    pub form: CMatrix,
    pub form_eigenvalues: Vec<f64>,
    pub signature: i64,
    pub regular: bool,
    /// Net counter-clockwise eigenphase passages of `𝒰₂*𝒰₁` through 1 here.
    pub unitary_degree: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaslovReport {
    pub value: i64,
    /// `Sf(𝒰₂*𝒰₁, 1)` from eigenphase tracking alone.
    pub unitary_flow: i64,
    pub crossings: Vec<CrossingRecord>,
}

fn unitary_product(l1: &PlaneLoop, l2: &PlaneLoop, t: f64, tol: &Tolerances) -> Result<CMatrix> {
    let u1 = l1.unitary(t, tol)?;
    let u2 = l2.unitary(t, tol)?;
    Ok(u2.matrix().adjoint() * u1.matrix())
}

/// Central-difference derivative of the orthogonal projector onto `ℓ(t)`,
/// optionally Richardson-extrapolated.
pub fn projector_derivative(
    l: &PlaneLoop,
    t: f64,
    delta: f64,
    richardson: bool,
) -> Result<CMatrix> {
    let d = |h: f64| -> Result<CMatrix> {
        Ok((l.at(t + h)?.projector() - l.at(t - h)?.projector()) * real(0.5 / h))
    };
    if richardson {
        Ok((d(0.5 * delta)? * real(4.0) - d(delta)?) * real(1.0 / 3.0))
    } else {
        d(delta)
    }
}

/// The crossing form on the columns of `basis` (not necessarily orthonormal).
pub fn crossing_form(
    l1: &PlaneLoop,
    l2: &PlaneLoop,
    t: f64,
    basis: &CMatrix,
    delta: f64,
    richardson: bool,
) -> Result<CMatrix> {
    let n = l1.channels();
    let dp = projector_derivative(l1, t, delta, richardson)?
        - projector_derivative(l2, t, delta, richardson)?;
    let b = basis.adjoint() * j_matrix(n) * dp * basis;
    Ok(b)
}

fn signature(vals: &[f64]) -> i64 {
    vals.iter().map(|v| if *v > 0.0 { 1 } else { -1 }).sum()
}

/// `Mas(ℓ1, ℓ2, T¹)`: crossings located by eigenphases of `𝒰₂*𝒰₁` passing
/// through 1, each weighted by the signature of its crossing form.
pub fn maslov_index(
    l1: &PlaneLoop,
    l2: &PlaneLoop,
    cfg: &LoopConfig,
    tol: &Tolerances,
) -> Result<MaslovReport> {
    if l1.channels() != l2.channels() {
        return Err(Error::DimensionMismatch {
            expected: l1.channels(),
            got: l2.channels(),
        });
    }
    let w = |t: f64| unitary_product(l1, l2, t, tol);
    let track = track_phases(&w, C64::new(1.0, 0.0), cfg)?;

    let mut located: Vec<(f64, i64)> = Vec::new();
    for p in &track.passages {
        let (mut ta, mut tb) = (p.t_lo, p.t_hi);
        let (mut pa, mut pb) = (p.phase_lo, p.phase_hi);
        while tb - ta > cfg.crossing_resolution {
            let tm = 0.5 * (ta + tb);
            let guess = 0.5 * (pa + pb);
            let phases = eigenphases(&w(tm)?);
            let pm = phases
                .iter()
                .copied()
                .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
                .unwrap_or(0.0);
            if (pm >= 0.0) == (pa >= 0.0) {
                ta = tm;
                pa = pm;
            } else {
                tb = tm;
                pb = pm;
            }
        }
        located.push(((0.5 * (ta + tb)).rem_euclid(1.0), p.direction));
    }
    located.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, usize, i64)> = Vec::new();
    for (t, dir) in located {
        match groups.last_mut() {
            Some(g) if (t - g.0).abs() < 1e-7 => {
                g.1 += 1;
                g.2 += dir;
            }
            _ => groups.push((t, 1, dir)),
        }
    }
    // wrap-around merge
    if groups.len() > 1 {
        let (first, last) = (groups[0].0, groups[groups.len() - 1].0);
        if (first + 1.0 - last) < 1e-7 {
            let g = groups.pop().unwrap();
            groups[0].1 += g.1;
            groups[0].2 += g.2;
        }
    }

    let mut crossings = Vec::new();
    for (t, k, unitary_degree) in groups {
        let f1 = l1.at(t)?;
        let f2 = l2.at(t)?;
        let basis = intersection_basis(&f1, &f2, k);
        let raw = crossing_form(l1, l2, t, &basis, tol.fd_step, false)?;
        let scale = raw.norm().max(1.0);
        if linalg::hermitian_residual(&raw) > 1e-5 * scale {
            return Err(Error::NotHermitian {
                residual: linalg::hermitian_residual(&raw),
                tol: 1e-5 * scale,
            });
        }
        let form = linalg::hermitian_part(&raw);
        let vals = linalg::hermitian_eigenvalues(&form);
        let regular = vals.iter().all(|v| v.abs() > tol.slope_floor);
        let sig = signature(&vals);
        crossings.push(CrossingRecord {
            t,
            multiplicity: k,
            basis,
            form,
            form_eigenvalues: vals,
            signature: sig,
            regular,
            unitary_degree,
        });
    }
    for c in &crossings {
        if !c.regular {
            return Err(Error::NonRegular {
                t: c.t,
                reason: format!("crossing form eigenvalues {:?}", c.form_eigenvalues),
            });
        }
        if c.signature != c.unitary_degree {
            return Err(Error::Inconsistent(format!(
                "crossing at t={:.9}: form signature {} but eigenphase degree {}",
                c.t, c.signature, c.unitary_degree
            )));
        }
    }
    Ok(MaslovReport {
        value: crossings.iter().map(|c| c.signature).sum(),
        unitary_flow: track.flow(),
        crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::LagrangianFrame;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn constant_transversal_loops_have_no_crossings() {
        let (cfg, tol) = (LoopConfig::default(), Tolerances::default());
        let r = maslov_index(&PlaneLoop::dirichlet(2), &PlaneLoop::neumann(2), &cfg, &tol).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.crossings.is_empty());
    }

    #[test]
    fn robin_loop_against_free_decaying_plane() {
        // ℓ⁺ = span(1, −1) for V = 0, E = −1; the Robin loop meets it once at t = 3/4
        let (cfg, tol) = (LoopConfig::default(), Tolerances::default());
        let plus = LagrangianFrame::new(
            CMatrix::from_column_slice(2, 1, &[real(1.0), real(-1.0)]),
            &tol,
        )
        .unwrap();
        let r = maslov_index(
            &PlaneLoop::constant("plus", plus),
            &PlaneLoop::robin(1),
            &cfg,
            &tol,
        )
        .unwrap();
        assert_eq!(r.crossings.len(), 1);
        assert!((r.crossings[0].t - 0.75).abs() < 1e-9);
        assert_eq!(r.value.abs(), 1);
        assert_eq!(r.value, r.unitary_flow);
    }

    #[test]
    fn double_winding_gives_multiplicity_two() {
        let (cfg, tol) = (LoopConfig::default(), Tolerances::default());
        let l = PlaneLoop::from_unitaries(
            "e2pit",
            2,
            Arc::new(|t| CMatrix::identity(2, 2) * C64::from_polar(1.0, 2.0 * PI * t + 0.3)),
        );
        let r = maslov_index(&l, &PlaneLoop::neumann(2), &cfg, &tol).unwrap();
        assert_eq!(r.crossings.len(), 1);
        assert_eq!(r.crossings[0].multiplicity, 2);
        assert_eq!(r.value, 2);
    }
}
