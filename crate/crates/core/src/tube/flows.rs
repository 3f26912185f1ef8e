use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::edgeop::FlowSetup;
use crate::error::{Error, Result};
use crate::indices::{
    verify_junction_theorem, verify_main_theorem, JunctionTheoremReport, LoopConfig,
    MainTheoremReport, PlaneLoop, VerifyOptions,
};
use crate::propagate::{PotentialFamily, SharedPotential, Switch};
use crate::tolerances::Tolerances;

use super::potential::SharedTubePotential;
use super::reduction::fourier_truncate;

fn check_truncations(truncations: &[usize]) -> Result<()> {
    if truncations.len() < 2 || truncations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "need at least two increasing truncation radii to test stability, got {truncations:?}"
        )));
    }
    Ok(())
}

fn reduce(v: &SharedTubePotential, k: usize) -> Result<SharedPotential> {
    Ok(Arc::new(fourier_truncate(v.clone(), k)?))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubeJunctionReport {
    pub truncations: Vec<usize>,
    pub reports: Vec<JunctionTheoremReport>,
    /// Common value when `k_stable`.
    pub value: Option<i64>,
    pub k_stable: bool,
    pub consistent: bool,
}

/// Junction theorem on each truncation, plus stability of every integer in `K`.
#[allow(clippy::too_many_arguments)]
pub fn tube_junction_flow(
    left: SharedTubePotential,
    right: SharedTubePotential,
    switches: &[Switch],
    energy: f64,
    truncations: &[usize],
    setup: &FlowSetup,
    loop_cfg: &LoopConfig,
    options: &VerifyOptions,
    tol: &Tolerances,
) -> Result<TubeJunctionReport> {
    check_truncations(truncations)?;
    if left.dimension() != right.dimension() {
        return Err(Error::DimensionMismatch {
            expected: right.dimension(),
            got: left.dimension(),
        });
    }
    let mut reports = Vec::new();
    for &k in truncations {
        let (l, r) = (reduce(&left, k)?, reduce(&right, k)?);
        reports.push(verify_junction_theorem(
            l, r, switches, energy, setup, loop_cfg, options, tol,
        )?);
    }
    let integers = |r: &JunctionTheoremReport| -> Vec<i64> {
        let mut v = vec![r.maslov.value, r.index_right.value, r.index_left.value];
        v.extend(r.switches.iter().map(|s| s.spectral_flow.flow));
        v
    };
    let k_stable = reports
        .windows(2)
        .all(|w| integers(&w[0]) == integers(&w[1]));
    let consistent = k_stable && reports.iter().all(|r| r.consistent);
    Ok(TubeJunctionReport {
        truncations: truncations.to_vec(),
        value: k_stable.then(|| reports[0].maslov.value),
        reports,
        k_stable,
        consistent,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubeEdgeReport {
    pub truncations: Vec<usize>,
    pub dirichlet: Vec<MainTheoremReport>,
    pub neumann: Vec<MainTheoremReport>,
    pub dirichlet_equals_neumann: bool,
    pub value: Option<i64>,
    pub k_stable: bool,
    pub consistent: bool,
}

/// Edge spectral flows of the half tube under Dirichlet and Neumann walls.
pub fn tube_edge_flows(
    v: SharedTubePotential,
    energy: f64,
    truncations: &[usize],
    setup: &FlowSetup,
    loop_cfg: &LoopConfig,
    options: &VerifyOptions,
    tol: &Tolerances,
) -> Result<TubeEdgeReport> {
    check_truncations(truncations)?;
    let (mut dirichlet, mut neumann) = (Vec::new(), Vec::new());
    for &k in truncations {
        let red = reduce(&v, k)?;
        let n = red.channels();
        dirichlet.push(verify_main_theorem(
            red.clone(),
            &PlaneLoop::dirichlet(n),
            energy,
            setup,
            loop_cfg,
            options,
            tol,
        )?);
        neumann.push(verify_main_theorem(
            red,
            &PlaneLoop::neumann(n),
            energy,
            setup,
            loop_cfg,
            options,
            tol,
        )?);
    }
    let dirichlet_equals_neumann = dirichlet
        .iter()
        .zip(&neumann)
        .all(|(d, n)| d.spectral_flow.flow == n.spectral_flow.flow);
    let flows: Vec<i64> = dirichlet.iter().map(|r| r.spectral_flow.flow).collect();
    let k_stable = flows.windows(2).all(|w| w[0] == w[1])
        && neumann
            .windows(2)
            .all(|w| w[0].spectral_flow.flow == w[1].spectral_flow.flow);
    let consistent = dirichlet_equals_neumann
        && k_stable
        && dirichlet.iter().chain(&neumann).all(|r| r.consistent);
    Ok(TubeEdgeReport {
        truncations: truncations.to_vec(),
        value: (k_stable && dirichlet_equals_neumann).then(|| flows[0]),
        dirichlet,
        neumann,
        dirichlet_equals_neumann,
        k_stable,
        consistent,
    })
}
