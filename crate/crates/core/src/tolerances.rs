use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module.
///
/// All fields are overridable from an experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on `‖F*JF‖` for a frame to count as isotropic.
    pub isotropy: f64,
    /// Bound on `‖U*U - I‖` for a matrix to count as unitary.
    pub unitarity: f64,
    /// Floor on the smallest singular value of a frame.
    pub rank: f64,
    /// Eigenvalues of `U2* U1` closer than this to 1 count as intersection directions.
    pub intersection: f64,
    /// Bound on `‖A - A*‖` for hermitian inputs.
    pub hermitian: f64,
    /// Bound on the (norm-scaled) symplecticity residual of a transfer matrix.
    pub symplectic: f64,
    /// Floquet multipliers closer than this to the unit circle (in `|log|λ||`) are essential spectrum.
    pub circle: f64,
    /// Guard band factor applied to `circle` before an energy is declared in-gap.
    pub circle_guard: f64,
    /// Relative floor on crossing slopes and crossing-form eigenvalues.
    pub slope_floor: f64,
    /// Integers must round from values within this distance.
    pub integer: f64,
    /// Maximal plane distance between consecutive loop samples.
    pub loop_step: f64,
    /// Step used for central differences in `t`.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            isotropy: 1e-8,
            unitarity: 1e-8,
            rank: 1e-10,
            intersection: 1e-6,
            hermitian: 1e-10,
            symplectic: 1e-8,
            circle: 1e-6,
            circle_guard: 10.0,
            slope_floor: 1e-6,
            integer: 0.1,
            loop_step: 0.2,
            fd_step: 1e-5,
        }
    }
}
