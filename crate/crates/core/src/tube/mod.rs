//! Tube operators `−Δ + V` on `ℝ × T^{d−1}` through transverse Fourier
//! truncation onto Hill systems.

mod flows;
mod potential;
mod reduction;

pub use flows::{tube_edge_flows, tube_junction_flow, TubeEdgeReport, TubeJunctionReport};
pub use potential::{SharedTubePotential, TubeCosine, TubeFlat, TubePotentialFamily};
pub use reduction::{fourier_truncate, transverse_eigenvalue, ChannelReduction};
