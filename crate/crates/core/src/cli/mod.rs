//! Configuration, orchestration and result emission behind the `edgeflow`
//! binary.

mod builtin;
mod config;
mod emit;
mod run;

pub use builtin::{builtin, BUILTINS};
pub use config::{
    BoundarySpec, Energies, Experiment, ExperimentConfig, Format, OutputConfig, PotentialSpec,
    TubePotentialSpec,
};
pub use emit::{emit, render, to_csv, to_plotdata};
pub use run::{
    run, CheckRecord, FlowRecord, IndexRecord, IntegerRecord, MaslovRecord, Mode, ProbeRecord,
    ResultBundle, RunMetadata,
};

use crate::error::Error;

/// Process exit status for a finished or failed run.
pub fn exit_code(outcome: &std::result::Result<ResultBundle, Error>) -> i32 {
    match outcome {
        Ok(b) if b.consistent => 0,
        Ok(_) => 2,
        Err(e) => error_code(e),
    }
}

pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Inconsistent(_) => 2,
        Error::NonRegular { .. }
        | Error::RefinementExhausted { .. }
        | Error::ZeroSample { .. }
        | Error::NotInteger { .. }
        | Error::NotInGap { .. }
        | Error::UndecidedEnergy { .. }
        | Error::StableDimension { .. }
        | Error::SymplecticityExceeded { .. }
        | Error::TruncationNotConverged(_)
        | Error::IntersectionDisagreement { .. }
        | Error::SchurReorder(_) => 3,
        _ => 4,
    }
}

/// What to try next after a refusal.
pub fn remediation(e: &Error) -> Option<&'static str> {
    Some(match e {
        Error::NonRegular { .. } | Error::NotInteger { .. } => "non-regular energy, perturb E",
        Error::RefinementExhausted { .. } => "perturb E or lower setup.branches.min_spacing",
        Error::NotInGap { .. } | Error::UndecidedEnergy { .. } => {
            "choose an energy inside a bulk gap"
        }
        Error::StableDimension { .. } => "energy is too close to a band edge, move it into the gap",
        Error::SymplecticityExceeded { .. } => "increase setup.propagation.steps_per_period",
        Error::TruncationNotConverged(_) => "increase the truncation radius K",
        Error::InvalidDiscretization(_) => "increase N or L",
        _ => return None,
    })
}
