//! Domain, grid and window defaults derived from bulk Floquet data, and the
//! end-to-end edge and junction spectral flows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::propagate::{
    classify_energy_on, gap_edges, require_gap, Junction, PotentialFamily, PropagationConfig,
    SharedPotential, Side, Switch,
};
use crate::symplectic::LagrangianFrame;
use crate::tolerances::Tolerances;

use super::branches::{spectral_flow, track_branches, BranchConfig, BranchSet, FlowReport};
use super::discretize::{discretize_edge, discretize_line};

/// User-facing knobs; unset values are derived from the bulk.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSetup {
    pub length: Option<f64>,
    pub points: Option<usize>,
    pub window: Option<f64>,
    /// Grid points per period when `points` is unset.
    pub points_per_period: Option<usize>,
    /// `t` samples used for gap classification.
    pub probe_samples: Option<usize>,
    pub branches: BranchConfig,
    pub propagation: PropagationConfig,
}

impl FlowSetup {
    pub fn probe_grid(&self) -> Vec<f64> {
        let k = self.probe_samples.unwrap_or(8).max(1);
        (0..k).map(|i| i as f64 / k as f64).collect()
    }

    /// Same setup with `N → 2N`, `L → 1.5 L` (for grid-doubling checks).
    pub fn refined(&self, resolved: &ResolvedSetup) -> Self {
        let mut s = self.clone();
        s.length = Some(1.5 * resolved.length);
        s.points = Some(2 * resolved.points);
        s.window = Some(resolved.window);
        s
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResolvedSetup {
    pub length: f64,
    pub points: usize,
    pub window: f64,
    /// Gap edges around `E` (clipped to the search reach).
    pub gap: (f64, f64),
    /// `min |log |λ||` over the window energies: decay per period.
    pub decay_margin: f64,
}

/// Resolves `L`, `N` and the window for an operator seeing the tails on `sides`.
pub fn resolve_setup(
    v: &dyn PotentialFamily,
    energy: f64,
    sides: &[Side],
    setup: &FlowSetup,
    tol: &Tolerances,
) -> Result<ResolvedSetup> {
    let ts = setup.probe_grid();
    let cfg = &setup.propagation;
    let probe = classify_energy_on(v, energy, &ts, sides, cfg, tol)?;
    require_gap(&probe, tol)?;
    let gap = gap_edges(v, energy, &ts, sides, 5.0 * (1.0 + energy.abs()), cfg, tol)?;
    let window = setup
        .window
        .unwrap_or(0.5 * (energy - gap.0).min(gap.1 - energy));
    let mut decay_margin = probe.margin;
    for e in [energy - window, energy + window] {
        let p = classify_energy_on(v, e, &ts, sides, cfg, tol)?;
        if p.margin < tol.circle * tol.circle_guard {
            return Err(Error::NotInGap {
                energy: e,
                margin: p.margin,
            });
        }
        decay_margin = decay_margin.min(p.margin);
    }
    let period = sides
        .iter()
        .map(|s| match s {
            Side::Left => v.left_period(),
            Side::Right => v.right_period(),
        })
        .fold(0.0, f64::max);
    let length = setup
        .length
        .unwrap_or_else(|| period * 10f64.max(20.0 / decay_margin).ceil() + 2.0 * v.match_point());
    if !(length > 0.0) {
        return Err(Error::Config(format!(
            "domain length {length} must be positive"
        )));
    }
    let points = match setup.points {
        Some(n) => n,
        None => {
            let per = setup.points_per_period.unwrap_or(64) as f64;
            let mut n = (length / period * per).ceil() as usize;
            let vmax = potential_bound(v, &ts, length);
            while (length / n as f64).powi(2) * vmax >= 0.09 {
                n *= 2;
            }
            n
        }
    };
    Ok(ResolvedSetup {
        length,
        points,
        window,
        gap,
        decay_margin,
    })
}

fn potential_bound(v: &dyn PotentialFamily, ts: &[f64], length: f64) -> f64 {
    let mut vmax: f64 = 0.0;
    for &t in ts {
        for k in 0..=256 {
            let x = -length + 2.0 * length * k as f64 / 256.0;
            vmax = vmax.max(linalg::op_norm(&v.evaluate(t, x)));
        }
    }
    vmax
}

/// Edge spectral flow of `−∂² + V(t, ·)` on the half-line with boundary
/// planes `boundary(t)`.
pub fn edge_flow(
    v: &dyn PotentialFamily,
    boundary: &(dyn Fn(f64) -> Result<LagrangianFrame> + Sync),
    energy: f64,
    setup: &FlowSetup,
    tol: &Tolerances,
) -> Result<(FlowReport, BranchSet, ResolvedSetup)> {
    let resolved = resolve_setup(v, energy, &[Side::Right], setup, tol)?;
    let family =
        |t: f64| discretize_edge(v, t, &boundary(t)?, resolved.length, resolved.points, tol);
    let branches = track_branches(&family, energy, resolved.window, &setup.branches)?;
    let report = spectral_flow(&branches, resolved.length, resolved.points)?;
    Ok((report, branches, resolved))
}

/// Junction spectral flow of `−∂² + V_L χ + V_R (1 − χ)`.
pub fn junction_flow(
    left: &SharedPotential,
    right: &SharedPotential,
    switch: Switch,
    energy: f64,
    setup: &FlowSetup,
    tol: &Tolerances,
) -> Result<(FlowReport, BranchSet, ResolvedSetup)> {
    let junction = Junction::new(left.clone(), right.clone(), switch)?;
    let resolved = resolve_setup(&junction, energy, &[Side::Left, Side::Right], setup, tol)?;
    if switch.plateau() >= 0.5 * resolved.length {
        return Err(Error::InvalidSwitch(format!(
            "switch half width {} must be below L/2 = {}",
            switch.plateau(),
            0.5 * resolved.length
        )));
    }
    let family = |t: f64| discretize_line(&junction, t, resolved.length, resolved.points, tol);
    let branches = track_branches(&family, energy, resolved.window, &setup.branches)?;
    let report = spectral_flow(&branches, resolved.length, resolved.points)?;
    Ok((report, branches, resolved))
}
