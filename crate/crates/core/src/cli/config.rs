//! Experiment configuration documents (TOML).

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::edgeop::FlowSetup;
use crate::error::{Error, Result};
use crate::indices::{LoopConfig, PlaneLoop, VerifyOptions};
use crate::linalg::{CMatrix, C64};
use crate::propagate::{
    validate, Cosine, Diagonal, Dislocation, Flat, SharedPotential, SquareWell, Switch, Tabulated,
};
use crate::tolerances::Tolerances;
use crate::tube::{SharedTubePotential, TubeCosine, TubeFlat};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub experiment: Experiment,
    #[serde(default)]
    pub setup: FlowSetup,
    #[serde(default)]
    pub loops: LoopConfig,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Half-line operator with a boundary loop at `x = 0`.
    Edge {
        potential: PotentialSpec,
        boundary: BoundarySpec,
        energy: Energies,
    },
    /// Domain wall between two families.
    Junction {
        left: PotentialSpec,
        right: PotentialSpec,
        switches: Vec<Switch>,
        energy: Energies,
    },
    /// Half tube with Dirichlet and Neumann walls.
    TubeEdge {
        potential: TubePotentialSpec,
        truncations: Vec<usize>,
        energy: Energies,
    },
    TubeJunction {
        left: TubePotentialSpec,
        right: TubePotentialSpec,
        switches: Vec<Switch>,
        truncations: Vec<usize>,
        energy: Energies,
    },
    /// A boundary loop on its own (indices only).
    Loop { boundary: BoundarySpec },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Edge { .. } => "edge",
            Experiment::Junction { .. } => "junction",
            Experiment::TubeEdge { .. } => "tube-edge",
            Experiment::TubeJunction { .. } => "tube-junction",
            Experiment::Loop { .. } => "loop",
        }
    }
}

/// One energy or a scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Energies {
    Single(f64),
    Scan(Vec<f64>),
}

impl Energies {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Energies::Single(e) => vec![*e],
            Energies::Scan(v) => v.clone(),
        }
    }
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Flat {
        #[serde(default)]
        level: f64,
        #[serde(default = "one")]
        channels: usize,
    },
    /// `a·cos(2πx/p)`.
    Mathieu {
        amplitude: f64,
        #[serde(default = "unit")]
        period: f64,
    },
    /// `a·cos(2π(x − s·t)/p)`.
    Cosine {
        amplitude: f64,
        #[serde(default = "unit")]
        period: f64,
        shift_rate: f64,
    },
    /// `V(t, x − s·t)` for a periodic base.
    Dislocation {
        base: Box<PotentialSpec>,
        shift_rate: f64,
    },
    SquareWell {
        depth: f64,
        width: f64,
    },
    Diagonal {
        blocks: Vec<PotentialSpec>,
    },
    /// `values[i][j] = V(i/nt, j·period/nx)`.
    Tabulated {
        period: f64,
        values: Vec<Vec<f64>>,
    },
}

impl PotentialSpec {
    pub fn build(&self, tol: &Tolerances) -> Result<SharedPotential> {
        let v: SharedPotential = match self {
            PotentialSpec::Flat { level, channels } => {
                if *channels == 0 {
                    return Err(Error::Config(
                        "flat potential needs at least one channel".into(),
                    ));
                }
                Arc::new(Flat::new(
                    CMatrix::identity(*channels, *channels) * C64::new(*level, 0.0),
                ))
            }
            PotentialSpec::Mathieu { amplitude, period } => {
                Arc::new(Cosine::new(*amplitude, *period, 0.0)?)
            }
            PotentialSpec::Cosine {
                amplitude,
                period,
                shift_rate,
            } => Arc::new(Cosine::new(*amplitude, *period, *shift_rate)?),
            PotentialSpec::Dislocation { base, shift_rate } => {
                Arc::new(Dislocation::new(base.build(tol)?, *shift_rate)?)
            }
            PotentialSpec::SquareWell { depth, width } => {
                if !(*width > 0.0) {
                    return Err(Error::Config(format!(
                        "square well width must be positive, got {width}"
                    )));
                }
                Arc::new(SquareWell {
                    depth: *depth,
                    width: *width,
                })
            }
            PotentialSpec::Diagonal { blocks } => Arc::new(Diagonal::new(
                blocks.iter().map(|b| b.build(tol)).collect::<Result<_>>()?,
            )?),
            PotentialSpec::Tabulated { period, values } => {
                Arc::new(Tabulated::new(*period, values.clone())?)
            }
        };
        validate(&*v, tol.hermitian)?;
        Ok(v)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TubePotentialSpec {
    /// `a·cos(2π(x − s·t)/p) + b·Σ cos(2π y_j)`.
    TubeCosine {
        #[serde(default = "two")]
        dimension: usize,
        x_amplitude: f64,
        #[serde(default = "unit")]
        x_period: f64,
        #[serde(default)]
        shift_rate: i32,
        y_amplitude: f64,
    },
    TubeFlat {
        #[serde(default = "two")]
        dimension: usize,
        level: f64,
    },
}

fn two() -> usize {
    2
}

impl TubePotentialSpec {
    pub fn build(&self) -> Result<SharedTubePotential> {
        Ok(match self {
            TubePotentialSpec::TubeCosine {
                dimension,
                x_amplitude,
                x_period,
                shift_rate,
                y_amplitude,
            } => Arc::new(TubeCosine::new(
                *dimension,
                *x_amplitude,
                *x_period,
                *shift_rate,
                *y_amplitude,
            )?),
            TubePotentialSpec::TubeFlat { dimension, level } => {
                Arc::new(TubeFlat::new(*dimension, *level)?)
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundarySpec {
    Dirichlet {
        #[serde(default = "one")]
        channels: usize,
    },
    Neumann {
        #[serde(default = "one")]
        channels: usize,
    },
    /// `(Θ, Π) = (sin πt, cos πt)·I`.
    RobinLoop {
        #[serde(default = "one")]
        channels: usize,
    },
    /// Unitaries at `t = j/m`, `j < m`, as row-major `[re, im]` entries;
    /// joined by geodesics.
    UnitaryLoop { samples: Vec<Vec<Vec<[f64; 2]>>> },
}

impl BoundarySpec {
    pub fn build(&self, tol: &Tolerances) -> Result<PlaneLoop> {
        Ok(match self {
            BoundarySpec::Dirichlet { channels } => PlaneLoop::dirichlet(nonzero(*channels)?),
            BoundarySpec::Neumann { channels } => PlaneLoop::neumann(nonzero(*channels)?),
            BoundarySpec::RobinLoop { channels } => PlaneLoop::robin(nonzero(*channels)?),
            BoundarySpec::UnitaryLoop { samples } => {
                let mats = samples
                    .iter()
                    .map(|rows| {
                        let n = rows.len();
                        if n == 0 || rows.iter().any(|r| r.len() != n) {
                            return Err(Error::Config(
                                "unitary samples must be square and nonempty".into(),
                            ));
                        }
                        Ok(CMatrix::from_fn(n, n, |i, j| {
                            C64::new(rows[i][j][0], rows[i][j][1])
                        }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                PlaneLoop::from_unitary_samples("unitary-loop", mats, tol)?
            }
        })
    }

    pub fn channels(&self) -> usize {
        match self {
            BoundarySpec::Dirichlet { channels }
            | BoundarySpec::Neumann { channels }
            | BoundarySpec::RobinLoop { channels } => *channels,
            BoundarySpec::UnitaryLoop { samples } => samples.first().map_or(0, |s| s.len()),
        }
    }
}

fn nonzero(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Config("boundary needs at least one channel".into()));
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(Error::Config(format!("{name} must be positive, got {x}")))
        }
        _ => Ok(()),
    }
}

fn check_energies(e: &Energies) -> Result<()> {
    let v = e.values();
    if v.is_empty() {
        return Err(Error::Config("energy scan is empty".into()));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::Config(format!("energy must be finite, got {x}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Range checks beyond the schema.
    pub fn validate(&self) -> Result<()> {
        let s = &self.setup;
        positive("setup.length", s.length)?;
        positive("setup.window", s.window)?;
        if s.points == Some(0) || s.points_per_period == Some(0) || s.probe_samples == Some(0) {
            return Err(Error::Config("grid sizes must be positive".into()));
        }
        if s.branches.samples < 4 {
            return Err(Error::Config(
                "setup.branches.samples must be at least 4".into(),
            ));
        }
        if !(s.branches.localization > 0.0 && s.branches.localization <= 1.0) {
            return Err(Error::Config(
                "setup.branches.localization must lie in (0, 1]".into(),
            ));
        }
        if s.propagation.steps_per_period == 0 {
            return Err(Error::Config(
                "setup.propagation.steps_per_period must be positive".into(),
            ));
        }
        if self.loops.initial_samples < 4 || !(self.loops.max_phase_step > 0.0) {
            return Err(Error::Config(
                "loops need at least 4 samples and a positive phase step".into(),
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("isotropy", t.isotropy),
            ("unitarity", t.unitarity),
            ("rank", t.rank),
            ("intersection", t.intersection),
            ("hermitian", t.hermitian),
            ("symplectic", t.symplectic),
            ("circle", t.circle),
            ("circle_guard", t.circle_guard),
            ("slope_floor", t.slope_floor),
            ("loop_step", t.loop_step),
            ("fd_step", t.fd_step),
        ] {
            positive(&format!("tolerances.{name}"), Some(v))?;
        }
        if !(t.integer > 0.0 && t.integer < 0.5) {
            return Err(Error::Config(
                "tolerances.integer must lie in (0, 0.5)".into(),
            ));
        }
        match &self.experiment {
            Experiment::Edge { energy, .. } => check_energies(energy),
            Experiment::Junction {
                switches, energy, ..
            } => {
                if switches.is_empty() {
                    return Err(Error::Config("junction needs at least one switch".into()));
                }
                switches.iter().try_for_each(|s| s.validate())?;
                check_energies(energy)
            }
            Experiment::TubeEdge {
                truncations,
                energy,
                ..
            } => {
                check_truncations(truncations)?;
                check_energies(energy)
            }
            Experiment::TubeJunction {
                switches,
                truncations,
                energy,
                ..
            } => {
                if switches.is_empty() {
                    return Err(Error::Config("junction needs at least one switch".into()));
                }
                switches.iter().try_for_each(|s| s.validate())?;
                check_truncations(truncations)?;
                check_energies(energy)
            }
            Experiment::Loop { .. } => Ok(()),
        }
    }
}

fn check_truncations(k: &[usize]) -> Result<()> {
    if k.len() < 2 || k.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "truncations must list at least two increasing radii, got {k:?}"
        )));
    }
    Ok(())
}
