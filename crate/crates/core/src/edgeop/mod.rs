//! Edge and junction operators on truncated domains, eigenvalue branches and
//! their spectral flow.

pub mod blocktri;
pub mod branches;
pub mod discretize;
pub mod setup;

pub use blocktri::{BlockTridiagonal, EigenPair};
pub use branches::{
    spectral_flow, track_branches, BranchConfig, BranchSet, EigenCrossing, FlowReport,
    OperatorFamily, SpectrumSample,
};
pub use discretize::{
    discretize_edge, discretize_junction, discretize_line, EdgeDiscretization, Geometry,
};
pub use setup::{edge_flow, junction_flow, resolve_setup, FlowSetup, ResolvedSetup};
