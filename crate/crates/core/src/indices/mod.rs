//! Maslov index, unitary spectral flow, winding numbers and the index
//! identities they satisfy.

pub mod loops;
pub mod maslov;
pub mod phases;
pub mod theorem;

pub use loops::{PlaneFn, PlaneLoop};
pub use maslov::{crossing_form, maslov_index, projector_derivative, CrossingRecord, MaslovReport};
pub use phases::{
    eigenphases, sample_phase_loop, track_phases, unitary_spectral_flow, winding_number,
    LoopConfig, PhasePassage, PhaseTrack, Winding,
};
pub use theorem::{
    index_i, verify_junction_theorem, verify_main_theorem, ControlReport, FormCheck, GridCheck,
    IndexReport, JunctionTheoremReport, KernelCheck, MainTheoremReport, SwitchReport,
    VerifyOptions,
};
