//! Dispatch of configured experiments and the result bundle.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::edgeop::{edge_flow, junction_flow, BranchSet, FlowReport, FlowSetup, ResolvedSetup};
use crate::error::{Error, Result};
use crate::indices::{
    index_i, maslov_index, verify_junction_theorem, verify_main_theorem, IndexReport,
    JunctionTheoremReport, LoopConfig, MainTheoremReport, MaslovReport, PlaneLoop, VerifyOptions,
};
use crate::propagate::{classify_energy_on, EnergyProbe, SharedPotential, Side};
use crate::tolerances::Tolerances;
use crate::tube::{
    fourier_truncate, tube_edge_flows, tube_junction_flow, SharedTubePotential, TubeEdgeReport,
    TubeJunctionReport,
};

use super::config::{Experiment, ExperimentConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Gap classification of the bulk families.
    Probe,
    /// `I`, `Mas` and winding numbers.
    Indices,
    /// Spectral flow only.
    Flow,
    /// Full consistency suites.
    Verify,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub name: String,
    pub mode: Mode,
    pub experiment: String,
    pub version: String,
    pub tolerances: Tolerances,
    pub setup: FlowSetup,
    pub loops: LoopConfig,
    pub verify: VerifyOptions,
}

/// An emitted integer with the value it was rounded from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegerRecord {
    pub label: String,
    pub value: i64,
    pub raw: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub label: String,
    pub probe: EnergyProbe,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexRecord {
    pub label: String,
    pub report: IndexReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaslovRecord {
    pub label: String,
    pub report: MaslovReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowRecord {
    pub label: String,
    pub report: FlowReport,
    pub setup: ResolvedSetup,
    pub branches: BranchSet,
}

/// A named pass/fail outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub label: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultBundle {
    pub metadata: RunMetadata,
    pub probes: Vec<ProbeRecord>,
    pub indices: Vec<IndexRecord>,
    pub maslov: Vec<MaslovRecord>,
    pub flows: Vec<FlowRecord>,
    pub edge_theorems: Vec<MainTheoremReport>,
    pub junction_theorems: Vec<JunctionTheoremReport>,
    pub tube_edges: Vec<TubeEdgeReport>,
    pub tube_junctions: Vec<TubeJunctionReport>,
    pub integers: Vec<IntegerRecord>,
    pub checks: Vec<CheckRecord>,
    pub consistent: bool,
}

impl ResultBundle {
    fn new(cfg: &ExperimentConfig, mode: Mode) -> Self {
        Self {
            metadata: RunMetadata {
                name: cfg.name.clone(),
                mode,
                experiment: cfg.experiment.kind().to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                tolerances: cfg.tolerances.clone(),
                setup: cfg.setup.clone(),
                loops: cfg.loops,
                verify: cfg.verify,
            },
            probes: vec![],
            indices: vec![],
            maslov: vec![],
            flows: vec![],
            edge_theorems: vec![],
            junction_theorems: vec![],
            tube_edges: vec![],
            tube_junctions: vec![],
            integers: vec![],
            checks: vec![],
            consistent: true,
        }
    }

    fn exact(&mut self, label: String, value: i64) {
        self.integers.push(IntegerRecord {
            label,
            value,
            raw: value as f64,
            residual: 0.0,
        });
    }

    fn index(&mut self, label: String, report: IndexReport) {
        let w = &report.winding;
        self.integers.push(IntegerRecord {
            label: format!("{label}/I"),
            value: w.value,
            raw: w.raw,
            residual: w.residual,
        });
        self.indices.push(IndexRecord { label, report });
    }

    fn check(&mut self, label: String, pass: bool) {
        self.consistent &= pass;
        self.checks.push(CheckRecord { label, pass });
    }

    /// Every branch set in the bundle with a label.
    pub fn branch_sets(&self) -> Vec<(String, &BranchSet)> {
        let mut out: Vec<(String, &BranchSet)> = self
            .flows
            .iter()
            .map(|f| (f.label.clone(), &f.branches))
            .collect();
        for r in &self.edge_theorems {
            out.push((format!("E={}/edge", r.energy), &r.branches));
        }
        for r in &self.junction_theorems {
            for s in &r.switches {
                out.push((format!("E={}/{}", r.energy, s.switch.label()), &s.branches));
            }
        }
        for t in &self.tube_edges {
            for (k, (d, n)) in t.truncations.iter().zip(t.dirichlet.iter().zip(&t.neumann)) {
                out.push((format!("K={k}/E={}/dirichlet", d.energy), &d.branches));
                out.push((format!("K={k}/E={}/neumann", n.energy), &n.branches));
            }
        }
        for t in &self.tube_junctions {
            for (k, r) in t.truncations.iter().zip(&t.reports) {
                for s in &r.switches {
                    out.push((
                        format!("K={k}/E={}/{}", r.energy, s.switch.label()),
                        &s.branches,
                    ));
                }
            }
        }
        out
    }

    /// Every `I` computation in the bundle with a label.
    pub fn index_reports(&self) -> Vec<(String, &IndexReport)> {
        let mut out: Vec<(String, &IndexReport)> = self
            .indices
            .iter()
            .map(|r| (r.label.clone(), &r.report))
            .collect();
        for r in &self.edge_theorems {
            out.push((format!("E={}/plus", r.energy), &r.index_plus));
            out.push((format!("E={}/boundary", r.energy), &r.index_boundary));
        }
        for r in &self.junction_theorems {
            push_junction(&mut out, String::new(), r);
        }
        for t in &self.tube_edges {
            for (k, d) in t.truncations.iter().zip(&t.dirichlet) {
                out.push((format!("K={k}/E={}/plus", d.energy), &d.index_plus));
            }
        }
        for t in &self.tube_junctions {
            for (k, r) in t.truncations.iter().zip(&t.reports) {
                push_junction(&mut out, format!("K={k}/"), r);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn push_junction<'a>(
    out: &mut Vec<(String, &'a IndexReport)>,
    prefix: String,
    r: &'a JunctionTheoremReport,
) {
    out.push((format!("{prefix}E={}/right-plus", r.energy), &r.index_right));
    out.push((format!("{prefix}E={}/left-minus", r.energy), &r.index_left));
}

/// Runs `cfg` in `mode`.
pub fn run(cfg: &ExperimentConfig, mode: Mode) -> Result<ResultBundle> {
    cfg.validate()?;
    let mut b = ResultBundle::new(cfg, mode);
    let ctx = Context {
        setup: &cfg.setup,
        loops: &cfg.loops,
        options: &cfg.verify,
        tol: &cfg.tolerances,
    };
    match &cfg.experiment {
        Experiment::Edge {
            potential,
            boundary,
            energy,
        } => {
            let v = potential.build(ctx.tol)?;
            let l = boundary.build(ctx.tol)?;
            if l.channels() != v.channels() {
                return Err(Error::Config(format!(
                    "boundary has {} channels, potential {}",
                    l.channels(),
                    v.channels()
                )));
            }
            for e in energy.values() {
                ctx.edge(&mut b, "", &v, &l, e, mode)?;
            }
        }
        Experiment::Junction {
            left,
            right,
            switches,
            energy,
        } => {
            let (vl, vr) = (left.build(ctx.tol)?, right.build(ctx.tol)?);
            if vl.channels() != vr.channels() {
                return Err(Error::Config(
                    "left and right potentials differ in channel count".into(),
                ));
            }
            for e in energy.values() {
                ctx.junction(&mut b, "", &vl, &vr, switches, e, mode)?;
            }
        }
        Experiment::TubeEdge {
            potential,
            truncations,
            energy,
        } => {
            let v = potential.build()?;
            for e in energy.values() {
                ctx.tube_edge(&mut b, &v, truncations, e, mode)?;
            }
        }
        Experiment::TubeJunction {
            left,
            right,
            switches,
            truncations,
            energy,
        } => {
            let (vl, vr) = (left.build()?, right.build()?);
            for e in energy.values() {
                ctx.tube_junction(&mut b, &vl, &vr, switches, truncations, e, mode)?;
            }
        }
        Experiment::Loop { boundary } => {
            let l = boundary.build(ctx.tol)?;
            match mode {
                Mode::Indices | Mode::Verify => {
                    let r = index_i(&l, ctx.loops, ctx.tol)?;
                    b.index(l.label().to_string(), r);
                }
                Mode::Probe | Mode::Flow => {
                    return Err(Error::Config(format!(
                        "a loop experiment has no potential to {mode:?}"
                    )));
                }
            }
        }
    }
    Ok(b)
}

struct Context<'a> {
    setup: &'a FlowSetup,
    loops: &'a LoopConfig,
    options: &'a VerifyOptions,
    tol: &'a Tolerances,
}

impl Context<'_> {
    fn probe(
        &self,
        b: &mut ResultBundle,
        label: String,
        v: &SharedPotential,
        e: f64,
        side: Side,
    ) -> Result<()> {
        let probe = classify_energy_on(
            &**v,
            e,
            &self.setup.probe_grid(),
            &[side],
            &self.setup.propagation,
            self.tol,
        )?;
        b.probes.push(ProbeRecord { label, probe });
        Ok(())
    }

    fn decaying(&self, v: &SharedPotential, side: Side, e: f64) -> PlaneLoop {
        PlaneLoop::decaying(v.clone(), side, e, self.setup.propagation, self.tol.clone())
    }

    fn maslov(
        &self,
        b: &mut ResultBundle,
        label: String,
        l1: &PlaneLoop,
        l2: &PlaneLoop,
    ) -> Result<MaslovReport> {
        let r = maslov_index(l1, l2, self.loops, self.tol)?;
        b.exact(format!("{label}/Mas"), r.value);
        b.maslov.push(MaslovRecord {
            label,
            report: r.clone(),
        });
        Ok(r)
    }

    fn flow_record(
        &self,
        b: &mut ResultBundle,
        label: String,
        out: (FlowReport, BranchSet, ResolvedSetup),
    ) -> i64 {
        let (report, branches, setup) = out;
        let f = report.flow;
        b.exact(format!("{label}/Sf"), f);
        b.flows.push(FlowRecord {
            label,
            report,
            setup,
            branches,
        });
        f
    }

    fn edge(
        &self,
        b: &mut ResultBundle,
        prefix: &str,
        v: &SharedPotential,
        l: &PlaneLoop,
        e: f64,
        mode: Mode,
    ) -> Result<()> {
        let label = format!("{prefix}E={e}/{}", l.label());
        match mode {
            Mode::Probe => self.probe(b, format!("{prefix}E={e}/right"), v, e, Side::Right)?,
            Mode::Indices => {
                let plus = self.decaying(v, Side::Right, e);
                let ip = index_i(&plus, self.loops, self.tol)?;
                let il = index_i(l, self.loops, self.tol)?;
                let diff = ip.value - il.value;
                b.index(format!("{prefix}E={e}/plus"), ip);
                b.index(label.clone(), il);
                let m = self.maslov(b, label.clone(), &plus, l)?;
                b.check(
                    format!("{label}: Mas = I(plus) - I(boundary)"),
                    m.value == diff,
                );
            }
            Mode::Flow => {
                let bf = |t: f64| l.at(t);
                let out = edge_flow(&**v, &bf, e, self.setup, self.tol)?;
                self.flow_record(b, label, out);
            }
            Mode::Verify => {
                let r = verify_main_theorem(
                    v.clone(),
                    l,
                    e,
                    self.setup,
                    self.loops,
                    self.options,
                    self.tol,
                )?;
                self.theorem_integers(b, &label, &r);
                b.check(format!("{label}: Sf = Mas = I difference"), r.consistent);
                b.edge_theorems.push(r);
            }
        }
        Ok(())
    }

    fn theorem_integers(&self, b: &mut ResultBundle, label: &str, r: &MainTheoremReport) {
        b.exact(format!("{label}/Sf"), r.spectral_flow.flow);
        b.exact(format!("{label}/Mas"), r.maslov.value);
        for (tag, ix) in [("plus", &r.index_plus), ("boundary", &r.index_boundary)] {
            let w = &ix.winding;
            b.integers.push(IntegerRecord {
                label: format!("{label}/I({tag})"),
                value: w.value,
                raw: w.raw,
                residual: w.residual,
            });
        }
    }

    fn junction_integers(&self, b: &mut ResultBundle, label: &str, r: &JunctionTheoremReport) {
        b.exact(format!("{label}/Mas"), r.maslov.value);
        for (tag, ix) in [
            ("right-plus", &r.index_right),
            ("left-minus", &r.index_left),
        ] {
            let w = &ix.winding;
            b.integers.push(IntegerRecord {
                label: format!("{label}/I({tag})"),
                value: w.value,
                raw: w.raw,
                residual: w.residual,
            });
        }
        for s in &r.switches {
            b.exact(
                format!("{label}/{}/Sf", s.switch.label()),
                s.spectral_flow.flow,
            );
            b.exact(format!("{label}/{}/Mas", s.switch.label()), s.maslov.value);
        }
        if let Some(c) = &r.control {
            b.exact(format!("{label}/control/Sf"), c.flow);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn junction(
        &self,
        b: &mut ResultBundle,
        prefix: &str,
        vl: &SharedPotential,
        vr: &SharedPotential,
        switches: &[crate::propagate::Switch],
        e: f64,
        mode: Mode,
    ) -> Result<()> {
        let label = format!("{prefix}E={e}/junction");
        match mode {
            Mode::Probe => {
                self.probe(b, format!("{prefix}E={e}/left"), vl, e, Side::Left)?;
                self.probe(b, format!("{prefix}E={e}/right"), vr, e, Side::Right)?;
            }
            Mode::Indices => {
                let plus = self.decaying(vr, Side::Right, e);
                let minus = self.decaying(vl, Side::Left, e);
                let ip = index_i(&plus, self.loops, self.tol)?;
                let im = index_i(&minus, self.loops, self.tol)?;
                let diff = ip.value - im.value;
                b.index(format!("{prefix}E={e}/right-plus"), ip);
                b.index(format!("{prefix}E={e}/left-minus"), im);
                let m = self.maslov(b, label.clone(), &plus, &minus)?;
                b.check(
                    format!("{label}: Mas = I(right) - I(left)"),
                    m.value == diff,
                );
            }
            Mode::Flow => {
                let mut flows = vec![];
                for &s in switches {
                    let out = junction_flow(vl, vr, s, e, self.setup, self.tol)?;
                    flows.push(self.flow_record(b, format!("{prefix}E={e}/{}", s.label()), out));
                }
                b.check(
                    format!("{label}: flow independent of the switch"),
                    flows.windows(2).all(|w| w[0] == w[1]),
                );
            }
            Mode::Verify => {
                let r = verify_junction_theorem(
                    vl.clone(),
                    vr.clone(),
                    switches,
                    e,
                    self.setup,
                    self.loops,
                    self.options,
                    self.tol,
                )?;
                self.junction_integers(b, &label, &r);
                b.check(
                    format!("{label}: Sf = Mas = I difference for every switch"),
                    r.consistent,
                );
                b.junction_theorems.push(r);
            }
        }
        Ok(())
    }

    fn reduce(&self, v: &SharedTubePotential, k: usize) -> Result<SharedPotential> {
        Ok(Arc::new(fourier_truncate(v.clone(), k)?))
    }

    fn tube_edge(
        &self,
        b: &mut ResultBundle,
        v: &SharedTubePotential,
        ks: &[usize],
        e: f64,
        mode: Mode,
    ) -> Result<()> {
        if mode == Mode::Verify {
            let r = tube_edge_flows(
                v.clone(),
                e,
                ks,
                self.setup,
                self.loops,
                self.options,
                self.tol,
            )?;
            for (k, (d, n)) in ks.iter().zip(r.dirichlet.iter().zip(&r.neumann)) {
                self.theorem_integers(b, &format!("K={k}/E={e}/dirichlet"), d);
                self.theorem_integers(b, &format!("K={k}/E={e}/neumann"), n);
            }
            b.check(
                format!("E={e}: Dirichlet and Neumann flows agree"),
                r.dirichlet_equals_neumann,
            );
            b.check(format!("E={e}: integers stable in K"), r.k_stable);
            b.check(format!("E={e}: every truncation consistent"), r.consistent);
            b.tube_edges.push(r);
            return Ok(());
        }
        let start = b.integers.len();
        for &k in ks {
            let red = self.reduce(v, k)?;
            let n = red.channels();
            let prefix = format!("K={k}/");
            self.edge(b, &prefix, &red, &PlaneLoop::dirichlet(n), e, mode)?;
            if mode != Mode::Probe {
                self.edge(b, &prefix, &red, &PlaneLoop::neumann(n), e, mode)?;
            }
        }
        self.k_stability(b, start, ks, e);
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn tube_junction(
        &self,
        b: &mut ResultBundle,
        vl: &SharedTubePotential,
        vr: &SharedTubePotential,
        switches: &[crate::propagate::Switch],
        ks: &[usize],
        e: f64,
        mode: Mode,
    ) -> Result<()> {
        if mode == Mode::Verify {
            let r = tube_junction_flow(
                vl.clone(),
                vr.clone(),
                switches,
                e,
                ks,
                self.setup,
                self.loops,
                self.options,
                self.tol,
            )?;
            for (k, j) in ks.iter().zip(&r.reports) {
                self.junction_integers(b, &format!("K={k}/E={e}/junction"), j);
            }
            b.check(format!("E={e}: integers stable in K"), r.k_stable);
            b.check(format!("E={e}: every truncation consistent"), r.consistent);
            b.tube_junctions.push(r);
            return Ok(());
        }
        let start = b.integers.len();
        for &k in ks {
            let (l, r) = (self.reduce(vl, k)?, self.reduce(vr, k)?);
            self.junction(b, &format!("K={k}/"), &l, &r, switches, e, mode)?;
        }
        self.k_stability(b, start, ks, e);
        Ok(())
    }

    /// Integers recorded since `start` must not depend on the `K=` prefix.
    fn k_stability(&self, b: &mut ResultBundle, start: usize, ks: &[usize], e: f64) {
        let strip = |s: &str| {
            s.split_once('/')
                .map_or(s.to_string(), |(_, rest)| rest.to_string())
        };
        let first = format!("K={}/", ks[0]);
        let base: Vec<(String, i64)> = b.integers[start..]
            .iter()
            .filter(|r| r.label.starts_with(&first))
            .map(|r| (strip(&r.label), r.value))
            .collect();
        let stable = ks[1..].iter().all(|k| {
            let p = format!("K={k}/");
            let other: Vec<(String, i64)> = b.integers[start..]
                .iter()
                .filter(|r| r.label.starts_with(&p))
                .map(|r| (strip(&r.label), r.value))
                .collect();
            other == base
        });
        if !base.is_empty() {
            b.check(format!("E={e}: integers stable in K"), stable);
        }
    }
}
