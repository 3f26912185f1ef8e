use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Real potential `V(t, x, y)` on `ℝ × T^{d−1}`, `t`-periodic and eventually
/// periodic in `x` on both sides.
pub trait TubePotentialFamily: Send + Sync {
    /// Total dimension `d ≥ 2`.
    fn dimension(&self) -> usize;
    fn evaluate(&self, t: f64, x: f64, y: &[f64]) -> f64;
    fn right_period(&self) -> f64;
    fn left_period(&self) -> f64;
    fn match_point(&self) -> f64;
}

pub type SharedTubePotential = Arc<dyn TubePotentialFamily>;

impl<P: TubePotentialFamily + ?Sized> TubePotentialFamily for Arc<P> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn evaluate(&self, t: f64, x: f64, y: &[f64]) -> f64 {
        (**self).evaluate(t, x, y)
    }
    fn right_period(&self) -> f64 {
        (**self).right_period()
    }
    fn left_period(&self) -> f64 {
        (**self).left_period()
    }
    fn match_point(&self) -> f64 {
        (**self).match_point()
    }
}

/// `a·cos(2π(x − r t)/p) + b·Σ_j cos(2π y_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeCosine {
    pub dimension: usize,
    pub x_amplitude: f64,
    pub x_period: f64,
    pub shift_rate: i32,
    pub y_amplitude: f64,
}

impl TubeCosine {
    pub fn new(
        dimension: usize,
        x_amplitude: f64,
        x_period: f64,
        shift_rate: i32,
        y_amplitude: f64,
    ) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidPotential(format!(
                "tube dimension must be at least 2, got {dimension}"
            )));
        }
        if !(x_period > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "period must be positive, got {x_period}"
            )));
        }
        Ok(Self {
            dimension,
            x_amplitude,
            x_period,
            shift_rate,
            y_amplitude,
        })
    }

    /// `a·cos(2π(x − t)) + b·cos(2πy)` on the 2D tube.
    pub fn dislocation(a: f64, b: f64) -> Self {
        Self {
            dimension: 2,
            x_amplitude: a,
            x_period: 1.0,
            shift_rate: 1,
            y_amplitude: b,
        }
    }
}

impl TubePotentialFamily for TubeCosine {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn evaluate(&self, t: f64, x: f64, y: &[f64]) -> f64 {
        let s = self.shift_rate as f64 * self.x_period * t;
        let vx = self.x_amplitude * (2.0 * PI * (x - s) / self.x_period).cos();
        let vy: f64 = y.iter().map(|yj| (2.0 * PI * yj).cos()).sum();
        vx + self.y_amplitude * vy
    }
    fn right_period(&self) -> f64 {
        self.x_period
    }
    fn left_period(&self) -> f64 {
        self.x_period
    }
    fn match_point(&self) -> f64 {
        0.0
    }
}

/// Constant level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeFlat {
    pub dimension: usize,
    pub level: f64,
}

impl TubeFlat {
    pub fn new(dimension: usize, level: f64) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidPotential(format!(
                "tube dimension must be at least 2, got {dimension}"
            )));
        }
        Ok(Self { dimension, level })
    }
}

impl TubePotentialFamily for TubeFlat {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn evaluate(&self, _t: f64, _x: f64, _y: &[f64]) -> f64 {
        self.level
    }
    fn right_period(&self) -> f64 {
        1.0
    }
    fn left_period(&self) -> f64 {
        1.0
    }
    fn match_point(&self) -> f64 {
        0.0
    }
}
