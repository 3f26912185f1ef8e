//! `I(ℓ)` by three routes, and end-to-end checks of the edge and junction
//! index identities.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::edgeop::{
    edge_flow, junction_flow, BranchSet, EigenCrossing, FlowReport, FlowSetup, ResolvedSetup,
};
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, C64};
use crate::propagate::{decaying_plane, Junction, PotentialFamily, SharedPotential, Side, Switch};
use crate::symplectic::intersection_dimension;
use crate::tolerances::Tolerances;

use super::loops::PlaneLoop;
use super::maslov::{crossing_form, maslov_index, MaslovReport};
use super::phases::{
    sample_phase_loop, unitary_spectral_flow, winding_number, LoopConfig, Winding,
};

/// `I(ℓ, T¹)` with each characterization kept for the record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexReport {
    pub label: String,
    pub value: i64,
    /// Winding of `det 𝒰(t)`.
    pub winding: Winding,
    /// `Mas(ℓ, ℓ_D)`.
    pub maslov_vs_dirichlet: i64,
    /// `Sf(𝒰, −1)`.
    pub unitary_flow_at_minus_one: i64,
    /// Phase of `det 𝒰` along the sampled loop (unwrapped).
    pub phase_trace: Vec<(f64, f64)>,
}

pub fn index_i(l: &PlaneLoop, cfg: &LoopConfig, tol: &Tolerances) -> Result<IndexReport> {
    let det = |t: f64| -> Result<C64> { Ok(l.unitary(t, tol)?.determinant()) };
    let samples = sample_phase_loop(&det, cfg)?;
    let values: Vec<C64> = samples.iter().map(|s| s.1).collect();
    let winding = winding_number(&values, tol.integer)?;
    let mut phase_trace = Vec::with_capacity(samples.len());
    let mut acc = values[0].arg();
    phase_trace.push((samples[0].0, acc));
    for k in 1..samples.len() {
        acc += (values[k] / values[k - 1]).arg();
        phase_trace.push((samples[k].0, acc));
    }
    let mas = maslov_index(l, &PlaneLoop::dirichlet(l.channels()), cfg, tol)?.value;
    let u = |t: f64| Ok(l.unitary(t, tol)?.into_matrix());
    let sf = unitary_spectral_flow(&u, C64::new(-1.0, 0.0), cfg)?;
    if mas != winding.value || sf != winding.value {
        return Err(Error::Inconsistent(format!(
            "I({}) disagrees: winding {}, Mas vs Dirichlet {}, Sf at −1 {}",
            l.label(),
            winding.value,
            mas,
            sf
        )));
    }
    Ok(IndexReport {
        label: l.label().to_string(),
        value: winding.value,
        winding,
        maslov_vs_dirichlet: mas,
        unitary_flow_at_minus_one: sf,
        phase_trace,
    })
}

/// `dim Ker` from the discrete eigensolve against `dim(ℓ1 ∩ ℓ2)` at the
/// nearest Maslov crossing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelCheck {
    pub t_discrete: f64,
    pub t_crossing: Option<f64>,
    pub discrete_multiplicity: usize,
    pub discrete_kernel_dimension: usize,
    pub intersection_dimension: usize,
    pub pass: bool,
}

/// Eigenvalues of the crossing form in the basis of `L²`-normalized
/// eigenfunctions against `−λ'(t*)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormCheck {
    pub t_crossing: f64,
    pub t_discrete: Option<f64>,
    pub normalized_form: Vec<f64>,
    pub slopes: Vec<f64>,
    /// `None` when no discrete crossing was matched.
    pub relative_error: Option<f64>,
    pub richardson: bool,
    pub pass: bool,
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

const FORM_TOLERANCE: f64 = 0.05;
const MATCH_DISTANCE: f64 = 0.02;

fn kernel_checks(
    discrete: &[EigenCrossing],
    maslov: &MaslovReport,
    l1: &PlaneLoop,
    l2: &PlaneLoop,
    tol: &Tolerances,
) -> Result<Vec<KernelCheck>> {
    let mut out = Vec::new();
    for d in discrete {
        let nearest = maslov
            .crossings
            .iter()
            .min_by(|a, b| circular_distance(a.t, d.t).total_cmp(&circular_distance(b.t, d.t)))
            .filter(|c| circular_distance(c.t, d.t) < MATCH_DISTANCE);
        let (t_crossing, dim) = match nearest {
            Some(c) => (
                Some(c.t),
                intersection_dimension(&l1.at(c.t)?, &l2.at(c.t)?, tol.intersection)?,
            ),
            None => (None, 0),
        };
        out.push(KernelCheck {
            t_discrete: d.t,
            t_crossing,
            discrete_multiplicity: d.multiplicity,
            discrete_kernel_dimension: d.kernel_dimension,
            intersection_dimension: dim,
            pass: dim == d.multiplicity && dim == d.kernel_dimension,
        });
    }
    Ok(out)
}

/// Gram matrix of the solutions with Cauchy data `basis` at `t`.
type GramFn<'a> = dyn Fn(f64, &CMatrix) -> Result<CMatrix> + 'a;

fn form_checks(
    discrete: &[EigenCrossing],
    maslov: &MaslovReport,
    l1: &PlaneLoop,
    l2: &PlaneLoop,
    gram: &GramFn<'_>,
    tol: &Tolerances,
) -> Result<Vec<FormCheck>> {
    let mut out = Vec::new();
    for c in &maslov.crossings {
        let nearest = discrete
            .iter()
            .min_by(|a, b| circular_distance(a.t, c.t).total_cmp(&circular_distance(b.t, c.t)))
            .filter(|d| circular_distance(d.t, c.t) < MATCH_DISTANCE);
        let slopes: Vec<f64> = {
            let mut s = nearest.map(|d| d.slopes.clone()).unwrap_or_default();
            s.sort_by(f64::total_cmp);
            s
        };
        let g = gram(c.t, &c.basis)?;
        let normalized = |form: &CMatrix| -> Vec<f64> {
            let (gv, gq) = linalg::hermitian_eigen(&linalg::hermitian_part(&g));
            let inv_sqrt = CMatrix::from_fn(gq.nrows(), gq.ncols(), |i, j| {
                gq[(i, j)] * real(1.0 / gv[j].sqrt())
            });
            let m = inv_sqrt.adjoint() * form * &inv_sqrt;
            let mut v: Vec<f64> = linalg::hermitian_eigenvalues(&linalg::hermitian_part(&m))
                .iter()
                .map(|x| -x)
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let error_of = |vals: &[f64]| -> Option<f64> {
            if vals.len() != slopes.len() || slopes.is_empty() {
                return None;
            }
            Some(
                vals.iter()
                    .zip(&slopes)
                    .map(|(a, b)| (a - b).abs() / b.abs())
                    .fold(0.0, f64::max),
            )
        };
        let fails = |e: Option<f64>| e.is_none_or(|e| e > FORM_TOLERANCE);
        let mut vals = normalized(&c.form);
        let mut err = error_of(&vals);
        let mut richardson = false;
        if fails(err) {
            let form =
                linalg::hermitian_part(&crossing_form(l1, l2, c.t, &c.basis, tol.fd_step, true)?);
            vals = normalized(&form);
            err = error_of(&vals);
            richardson = true;
        }
        out.push(FormCheck {
            t_crossing: c.t,
            t_discrete: nearest.map(|d| d.t),
            normalized_form: vals,
            slopes,
            relative_error: err,
            richardson,
            pass: !fails(err),
        });
    }
    Ok(out)
}

/// Optional extra work in the theorem checks.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Recompute every spectral flow with `N → 2N`, `L → 1.5 L`.
    pub grid_doubling: bool,
    /// Junctions only: run the `V_L = V_R` control.
    pub control: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid_doubling: false,
            control: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridCheck {
    pub flow: i64,
    pub length: f64,
    pub points: usize,
    pub pass: bool,
}

/// Junction with the right family on both sides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControlReport {
    pub flow: i64,
    pub index_plus: i64,
    pub index_minus: i64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MainTheoremReport {
    pub energy: f64,
    pub spectral_flow: FlowReport,
    pub branches: BranchSet,
    pub setup: ResolvedSetup,
    pub maslov: MaslovReport,
    pub index_plus: IndexReport,
    pub index_boundary: IndexReport,
    pub index_difference: i64,
    pub kernel_checks: Vec<KernelCheck>,
    pub form_checks: Vec<FormCheck>,
    pub grid_check: Option<GridCheck>,
    pub consistent: bool,
}

/// `Sf(h♯_t, E) = Mas(ℓ⁺(E), ℓ♯) = I(ℓ⁺) − I(ℓ♯)` with crossing-level checks.
pub fn verify_main_theorem(
    v: SharedPotential,
    boundary: &PlaneLoop,
    energy: f64,
    setup: &FlowSetup,
    loop_cfg: &LoopConfig,
    options: &VerifyOptions,
    tol: &Tolerances,
) -> Result<MainTheoremReport> {
    if boundary.channels() != v.channels() {
        return Err(Error::DimensionMismatch {
            expected: v.channels(),
            got: boundary.channels(),
        });
    }
    let bfn = |t: f64| boundary.at(t);
    let (flow, branches, resolved) = edge_flow(&*v, &bfn, energy, setup, tol)?;
    let plus = PlaneLoop::decaying(
        v.clone(),
        Side::Right,
        energy,
        setup.propagation,
        tol.clone(),
    );
    let maslov = maslov_index(&plus, boundary, loop_cfg, tol)?;
    let index_plus = index_i(&plus, loop_cfg, tol)?;
    let index_boundary = index_i(boundary, loop_cfg, tol)?;
    let index_difference = index_plus.value - index_boundary.value;
    let kernel = kernel_checks(&branches.crossings, &maslov, &plus, boundary, tol)?;
    let cfg = setup.propagation;
    let vv = v.clone();
    let gram = move |t: f64, basis: &CMatrix| -> Result<CMatrix> {
        Ok(decaying_plane(&*vv, t, energy, Side::Right, &cfg, tol)?.gram(basis))
    };
    let forms = form_checks(&branches.crossings, &maslov, &plus, boundary, &gram, tol)?;
    let grid_check = if options.grid_doubling {
        let fine = setup.refined(&resolved);
        let (r, _, res) = edge_flow(&*v, &bfn, energy, &fine, tol)?;
        Some(GridCheck {
            flow: r.flow,
            length: res.length,
            points: res.points,
            pass: r.flow == flow.flow,
        })
    } else {
        None
    };
    let consistent = flow.flow == maslov.value
        && maslov.value == index_difference
        && maslov.unitary_flow == maslov.value
        && kernel.iter().all(|k| k.pass)
        && forms.iter().all(|f| f.pass)
        && grid_check.as_ref().is_none_or(|g| g.pass);
    Ok(MainTheoremReport {
        energy,
        spectral_flow: flow,
        branches,
        setup: resolved,
        maslov,
        index_plus,
        index_boundary,
        index_difference,
        kernel_checks: kernel,
        form_checks: forms,
        grid_check,
        consistent,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwitchReport {
    pub switch: Switch,
    pub spectral_flow: FlowReport,
    pub branches: BranchSet,
    pub setup: ResolvedSetup,
    /// `Mas(ℓ⁺_χ, ℓ⁻_χ)` for the planes of the switched potential itself.
    pub maslov: MaslovReport,
    pub kernel_checks: Vec<KernelCheck>,
    pub form_checks: Vec<FormCheck>,
    pub grid_check: Option<GridCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JunctionTheoremReport {
    pub energy: f64,
    pub switches: Vec<SwitchReport>,
    /// `Mas(ℓ⁺_R, ℓ⁻_L)`.
    pub maslov: MaslovReport,
    pub index_right: IndexReport,
    pub index_left: IndexReport,
    pub index_difference: i64,
    pub control: Option<ControlReport>,
    pub consistent: bool,
}

/// `Sf(h^χ_t, E) = Mas(ℓ⁺_R, ℓ⁻_L) = I(ℓ⁺_R) − I(ℓ⁻_L)` for every switch.
pub fn verify_junction_theorem(
    left: SharedPotential,
    right: SharedPotential,
    switches: &[Switch],
    energy: f64,
    setup: &FlowSetup,
    loop_cfg: &LoopConfig,
    options: &VerifyOptions,
    tol: &Tolerances,
) -> Result<JunctionTheoremReport> {
    if switches.is_empty() {
        return Err(Error::Config(
            "at least one switch function is required".into(),
        ));
    }
    let cfg = setup.propagation;
    let plus_r = PlaneLoop::decaying(right.clone(), Side::Right, energy, cfg, tol.clone());
    let minus_l = PlaneLoop::decaying(left.clone(), Side::Left, energy, cfg, tol.clone());
    let maslov = maslov_index(&plus_r, &minus_l, loop_cfg, tol)?;
    let index_right = index_i(&plus_r, loop_cfg, tol)?;
    let index_left = index_i(&minus_l, loop_cfg, tol)?;
    let index_difference = index_right.value - index_left.value;

    let mut reports = Vec::new();
    for &switch in switches {
        let (flow, branches, resolved) = junction_flow(&left, &right, switch, energy, setup, tol)?;
        let junction: Arc<dyn PotentialFamily> =
            Arc::new(Junction::new(left.clone(), right.clone(), switch)?);
        let plus = PlaneLoop::decaying(junction.clone(), Side::Right, energy, cfg, tol.clone());
        let minus = PlaneLoop::decaying(junction.clone(), Side::Left, energy, cfg, tol.clone());
        let mas_chi = maslov_index(&plus, &minus, loop_cfg, tol)?;
        let kernel = kernel_checks(&branches.crossings, &mas_chi, &plus, &minus, tol)?;
        let jj = junction.clone();
        let gram = move |t: f64, basis: &CMatrix| -> Result<CMatrix> {
            let gp = decaying_plane(&*jj, t, energy, Side::Right, &cfg, tol)?.gram(basis);
            let gm = decaying_plane(&*jj, t, energy, Side::Left, &cfg, tol)?.gram(basis);
            Ok(gp + gm)
        };
        let forms = form_checks(&branches.crossings, &mas_chi, &plus, &minus, &gram, tol)?;
        let grid_check = if options.grid_doubling {
            let fine = setup.refined(&resolved);
            let (r, _, res) = junction_flow(&left, &right, switch, energy, &fine, tol)?;
            Some(GridCheck {
                flow: r.flow,
                length: res.length,
                points: res.points,
                pass: r.flow == flow.flow,
            })
        } else {
            None
        };
        reports.push(SwitchReport {
            switch,
            spectral_flow: flow,
            branches,
            setup: resolved,
            maslov: mas_chi,
            kernel_checks: kernel,
            form_checks: forms,
            grid_check,
        });
    }
    let control = if options.control {
        let (r, _, _) = junction_flow(&right, &right, switches[0], energy, setup, tol)?;
        let minus_r = PlaneLoop::decaying(right.clone(), Side::Left, energy, cfg, tol.clone());
        let index_minus = index_i(&minus_r, loop_cfg, tol)?.value;
        Some(ControlReport {
            flow: r.flow,
            index_plus: index_right.value,
            index_minus,
            pass: r.flow == 0 && index_minus == index_right.value,
        })
    } else {
        None
    };
    let consistent = maslov.value == index_difference
        && maslov.unitary_flow == maslov.value
        && reports.iter().all(|r| {
            r.spectral_flow.flow == maslov.value
                && r.maslov.value == maslov.value
                && r.kernel_checks.iter().all(|k| k.pass)
                && r.form_checks.iter().all(|f| f.pass)
                && r.grid_check.as_ref().is_none_or(|g| g.pass)
        })
        && control.as_ref().is_none_or(|c| c.pass);
    Ok(JunctionTheoremReport {
        energy,
        switches: reports,
        maslov,
        index_right,
        index_left,
        index_difference,
        control,
        consistent,
    })
}
