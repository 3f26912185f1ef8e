//! Transfer matrices, Floquet data and decaying planes for `−ψ'' + V ψ = E ψ`.

pub mod floquet;
pub mod magnus;
pub mod potential;

pub use floquet::{
    bulk_kernel_dimension, circle_margin, classify_energy, classify_energy_on, decaying_plane,
    ell_minus, ell_plus, gap_edges, monodromy, require_gap, DecayingPlane, EnergyClass,
    EnergyProbe, PropagationConfig, Side,
};
pub use magnus::{
    scaled_symplectic_residual, symplectic_residual, transfer_matrix, TransferMatrix,
};
pub use potential::{
    validate, Cosine, Diagonal, Dislocation, Flat, Junction, PotentialFamily, SharedPotential,
    SquareWell, Switch, Tabulated,
};
