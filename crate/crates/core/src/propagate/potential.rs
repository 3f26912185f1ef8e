//! `t`-periodic, eventually `x`-periodic hermitian potentials.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix};

/// A family `V(t, x)` of `n × n` hermitian matrices, 1-periodic in `t`.
///
/// On `x ≥ match_point()` the map `x ↦ V(t, x)` is exactly periodic with
/// period `right_period()`, and on `x ≤ −match_point()` with period
/// `left_period()`. Constant tails are periodic with any period.
pub trait PotentialFamily: Send + Sync {
    fn channels(&self) -> usize;
    fn evaluate(&self, t: f64, x: f64) -> CMatrix;
    fn right_period(&self) -> f64;
    fn left_period(&self) -> f64;
    fn match_point(&self) -> f64;

    /// Derivative in `t`, by central differences unless overridden.
    fn t_derivative(&self, t: f64, x: f64, dt: f64) -> CMatrix {
        (self.evaluate(t + dt, x) - self.evaluate(t - dt, x)) * real(0.5 / dt)
    }
}

pub type SharedPotential = Arc<dyn PotentialFamily>;

impl<P: PotentialFamily + ?Sized> PotentialFamily for Arc<P> {
    fn channels(&self) -> usize {
        (**self).channels()
    }
    fn evaluate(&self, t: f64, x: f64) -> CMatrix {
        (**self).evaluate(t, x)
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

/// Spot-checks hermiticity, `t`-periodicity and the declared `x`-periodicity.
pub fn validate(v: &dyn PotentialFamily, tol: f64) -> Result<()> {
    let n = v.channels();
    if n == 0 {
        return Err(Error::InvalidPotential("zero channels".into()));
    }
    if !(v.right_period() > 0.0 && v.left_period() > 0.0 && v.match_point() >= 0.0) {
        return Err(Error::InvalidPotential(
            "periods must be positive, match point nonnegative".into(),
        ));
    }
    let xm = v.match_point();
    let ts = [0.0, 0.13, 0.5, 0.77];
    let fracs = [0.0, 0.21, 0.5, 0.93];
    for &t in &ts {
        for &f in &fracs {
            for x in [
                xm + f * v.right_period(),
                -xm - f * v.left_period(),
                0.37 * xm - 0.1,
            ] {
                let m = v.evaluate(t, x);
                if m.shape() != (n, n) {
                    return Err(Error::InvalidPotential(format!(
                        "evaluate returned {:?}",
                        m.shape()
                    )));
                }
                let scale = m.norm().max(1.0);
                if linalg::hermitian_residual(&m) > tol * scale {
                    return Err(Error::InvalidPotential(format!(
                        "not hermitian at t={t}, x={x}"
                    )));
                }
                if (v.evaluate(t + 1.0, x) - &m).norm() > tol * scale {
                    return Err(Error::InvalidPotential(format!(
                        "not 1-periodic in t at x={x}"
                    )));
                }
            }
            let xr = xm + f * v.right_period();
            let shifted = v.evaluate(t, xr + v.right_period());
            if (shifted - v.evaluate(t, xr)).norm() > tol * v.evaluate(t, xr).norm().max(1.0) {
                return Err(Error::InvalidPotential(format!(
                    "right tail not periodic at t={t}"
                )));
            }
            let xl = -xm - f * v.left_period();
            let shifted = v.evaluate(t, xl - v.left_period());
            if (shifted - v.evaluate(t, xl)).norm() > tol * v.evaluate(t, xl).norm().max(1.0) {
                return Err(Error::InvalidPotential(format!(
                    "left tail not periodic at t={t}"
                )));
            }
        }
    }
    Ok(())
}

/// Constant hermitian potential.
#[derive(Clone, Debug)]
pub struct Flat {
    value: CMatrix,
    period: f64,
}

impl Flat {
    pub fn new(value: CMatrix) -> Self {
        Self { value, period: 1.0 }
    }

    pub fn scalar(level: f64) -> Self {
        Self::new(CMatrix::from_element(1, 1, real(level)))
    }

    pub fn zero(n: usize) -> Self {
        Self::new(CMatrix::zeros(n, n))
    }

    /// Period used for monodromy cells (any value is exact).
    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }
}

impl PotentialFamily for Flat {
    fn channels(&self) -> usize {
        self.value.nrows()
    }
    fn evaluate(&self, _t: f64, _x: f64) -> CMatrix {
        self.value.clone()
    }
    fn right_period(&self) -> f64 {
        self.period
    }
    fn left_period(&self) -> f64 {
        self.period
    }
    fn match_point(&self) -> f64 {
        0.0
    }
    fn t_derivative(&self, _t: f64, _x: f64, _dt: f64) -> CMatrix {
        CMatrix::zeros(self.channels(), self.channels())
    }
}

/// Scalar `a·cos(2π(x − s·t)/p)`: Mathieu for `s = 0`, a dislocation for
/// integer `s ≠ 0`.
#[derive(Clone, Debug)]
pub struct Cosine {
    pub amplitude: f64,
    pub period: f64,
    pub shift_rate: f64,
}

impl Cosine {
    pub fn mathieu(amplitude: f64) -> Self {
        Self {
            amplitude,
            period: 1.0,
            shift_rate: 0.0,
        }
    }

    /// `a·cos(2π(x − t))`, the potential translated by one period as `t` runs over `[0, 1)`.
    pub fn dislocation(amplitude: f64) -> Self {
        Self {
            amplitude,
            period: 1.0,
            shift_rate: 1.0,
        }
    }

    pub fn new(amplitude: f64, period: f64, shift_rate: f64) -> Result<Self> {
        if period <= 0.0 {
            return Err(Error::InvalidPotential("period must be positive".into()));
        }
        let cycles = shift_rate / period;
        if (cycles - cycles.round()).abs() > 1e-12 {
            return Err(Error::InvalidPotential(
                "shift rate must be an integer multiple of the period for t-periodicity".into(),
            ));
        }
        Ok(Self {
            amplitude,
            period,
            shift_rate,
        })
    }

    fn value(&self, t: f64, x: f64) -> f64 {
        self.amplitude * (2.0 * PI * (x - self.shift_rate * t) / self.period).cos()
    }
}

impl PotentialFamily for Cosine {
    fn channels(&self) -> usize {
        1
    }
    fn evaluate(&self, t: f64, x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, real(self.value(t, x)))
    }
    fn right_period(&self) -> f64 {
        self.period
    }
    fn left_period(&self) -> f64 {
        self.period
    }
    fn match_point(&self) -> f64 {
        0.0
    }
    fn t_derivative(&self, t: f64, x: f64, _dt: f64) -> CMatrix {
        let arg = 2.0 * PI * (x - self.shift_rate * t) / self.period;
        let d = self.amplitude * arg.sin() * 2.0 * PI * self.shift_rate / self.period;
        CMatrix::from_element(1, 1, real(d))
    }
}

/// Translates any family: `V(t, x − s·t)`.
#[derive(Clone)]
pub struct Dislocation {
    base: SharedPotential,
    shift_rate: f64,
}

impl Dislocation {
    pub fn new(base: SharedPotential, shift_rate: f64) -> Result<Self> {
        if base.match_point() > 0.0 || (base.left_period() - base.right_period()).abs() > 1e-14 {
            return Err(Error::InvalidPotential(
                "dislocations need a fully periodic base potential".into(),
            ));
        }
        let cycles = shift_rate / base.right_period();
        if (cycles - cycles.round()).abs() > 1e-12 {
            return Err(Error::InvalidPotential(
                "shift rate must be an integer multiple of the period".into(),
            ));
        }
        Ok(Self { base, shift_rate })
    }
}

impl PotentialFamily for Dislocation {
    fn channels(&self) -> usize {
        self.base.channels()
    }
    fn evaluate(&self, t: f64, x: f64) -> CMatrix {
        self.base.evaluate(t, x - self.shift_rate * t)
    }
    fn right_period(&self) -> f64 {
        self.base.right_period()
    }
    fn left_period(&self) -> f64 {
        self.base.left_period()
    }
    fn match_point(&self) -> f64 {
        0.0
    }
}

/// `−depth` on `|x| < width/2`, zero outside.
#[derive(Clone, Debug)]
pub struct SquareWell {
    pub depth: f64,
    pub width: f64,
}

impl PotentialFamily for SquareWell {
    fn channels(&self) -> usize {
        1
    }
    fn evaluate(&self, _t: f64, x: f64) -> CMatrix {
        let v = if x.abs() < 0.5 * self.width {
            -self.depth
        } else {
            0.0
        };
        CMatrix::from_element(1, 1, real(v))
    }
    fn right_period(&self) -> f64 {
        1.0
    }
    fn left_period(&self) -> f64 {
        1.0
    }
    fn match_point(&self) -> f64 {
        0.5 * self.width
    }
    fn t_derivative(&self, _t: f64, _x: f64, _dt: f64) -> CMatrix {
        CMatrix::zeros(1, 1)
    }
}

/// Block-diagonal stacking of independent channel families.
#[derive(Clone)]
pub struct Diagonal {
    blocks: Vec<SharedPotential>,
    channels: usize,
}

impl Diagonal {
    pub fn new(blocks: Vec<SharedPotential>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPotential("no blocks".into()));
        }
        let (rp, lp) = (blocks[0].right_period(), blocks[0].left_period());
        for b in &blocks {
            if (b.right_period() - rp).abs() > 1e-14 || (b.left_period() - lp).abs() > 1e-14 {
                return Err(Error::InvalidPotential(
                    "blocks must share their periods".into(),
                ));
            }
        }
        let channels = blocks.iter().map(|b| b.channels()).sum();
        Ok(Self { blocks, channels })
    }
}

impl PotentialFamily for Diagonal {
    fn channels(&self) -> usize {
        self.channels
    }
    fn evaluate(&self, t: f64, x: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.channels, self.channels);
        let mut offset = 0;
        for b in &self.blocks {
            let m = b.evaluate(t, x);
            let k = m.nrows();
            out.view_mut((offset, offset), (k, k)).copy_from(&m);
            offset += k;
        }
        out
    }
    fn right_period(&self) -> f64 {
        self.blocks[0].right_period()
    }
    fn left_period(&self) -> f64 {
        self.blocks[0].left_period()
    }
    fn match_point(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.match_point())
            .fold(0.0, f64::max)
    }
}

/// Scalar potential tabulated on a uniform `(t, x)` grid over one period,
/// extended periodically in both variables, bilinear in between.
#[derive(Clone, Debug)]
pub struct Tabulated {
    period: f64,
    /// `values[i][j]` = V(t_i, x_j), `t_i = i/nt`, `x_j = j·period/nx`.
    values: Vec<Vec<f64>>,
}

impl Tabulated {
    pub fn new(period: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if period <= 0.0 || values.is_empty() || values[0].is_empty() {
            return Err(Error::InvalidPotential(
                "empty table or non-positive period".into(),
            ));
        }
        let nx = values[0].len();
        if values.iter().any(|row| row.len() != nx) {
            return Err(Error::InvalidPotential("ragged table".into()));
        }
        Ok(Self { period, values })
    }

    fn value(&self, t: f64, x: f64) -> f64 {
        let nt = self.values.len();
        let nx = self.values[0].len();
        let ft = t.rem_euclid(1.0) * nt as f64;
        let fx = (x / self.period).rem_euclid(1.0) * nx as f64;
        let (i0, j0) = (ft.floor() as usize % nt, fx.floor() as usize % nx);
        let (i1, j1) = ((i0 + 1) % nt, (j0 + 1) % nx);
        let (wt, wx) = (ft - ft.floor(), fx - fx.floor());
        let v = &self.values;
        (1.0 - wt) * ((1.0 - wx) * v[i0][j0] + wx * v[i0][j1])
            + wt * ((1.0 - wx) * v[i1][j0] + wx * v[i1][j1])
    }
}

impl PotentialFamily for Tabulated {
    fn channels(&self) -> usize {
        1
    }
    fn evaluate(&self, t: f64, x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, real(self.value(t, x)))
    }
    fn right_period(&self) -> f64 {
        self.period
    }
    fn left_period(&self) -> f64 {
        self.period
    }
    fn match_point(&self) -> f64 {
        0.0
    }
}

/// Switch functions `χ` with `χ = 1` on `x ≤ −X` and `χ = 0` on `x ≥ X`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Switch {
    /// `χ = 1(x < 0)`.
    Step,
    /// Smooth `C^∞` transition built from `tanh(s / (1 − s²))`, `s = x/X`.
    Smooth { half_width: f64 },
    /// Linear ramp on `[−X, X]`.
    Linear { half_width: f64 },
}

impl Switch {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Switch::Step => {
                if x < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Switch::Smooth { half_width } => {
                let s = x / half_width;
                if s <= -1.0 {
                    1.0
                } else if s >= 1.0 {
                    0.0
                } else {
                    0.5 * (1.0 - (s / (1.0 - s * s)).tanh())
                }
            }
            Switch::Linear { half_width } => (0.5 - 0.5 * x / half_width).clamp(0.0, 1.0),
        }
    }

    pub fn plateau(&self) -> f64 {
        match *self {
            Switch::Step => 0.0,
            Switch::Smooth { half_width } | Switch::Linear { half_width } => half_width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let x = self.plateau();
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::InvalidSwitch(format!(
                "half width {x} must be nonnegative"
            )));
        }
        for k in 0..20 {
            let d = x + 0.5 * k as f64 + 1e-9;
            if self.value(-d) != 1.0 || self.value(d) != 0.0 {
                return Err(Error::InvalidSwitch(format!("plateau broken at ±{d}")));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match *self {
            Switch::Step => "step".into(),
            Switch::Smooth { half_width } => format!("smooth({half_width})"),
            Switch::Linear { half_width } => format!("linear({half_width})"),
        }
    }
}

/// `V_L χ + V_R (1 − χ)`.
#[derive(Clone)]
pub struct Junction {
    left: SharedPotential,
    right: SharedPotential,
    switch: Switch,
}

impl Junction {
    pub fn new(left: SharedPotential, right: SharedPotential, switch: Switch) -> Result<Self> {
        if left.channels() != right.channels() {
            return Err(Error::InvalidPotential(
                "left and right channel counts differ".into(),
            ));
        }
        switch.validate()?;
        Ok(Self {
            left,
            right,
            switch,
        })
    }

    pub fn switch(&self) -> Switch {
        self.switch
    }

    pub fn left(&self) -> &SharedPotential {
        &self.left
    }

    pub fn right(&self) -> &SharedPotential {
        &self.right
    }
}

impl PotentialFamily for Junction {
    fn channels(&self) -> usize {
        self.left.channels()
    }
    fn evaluate(&self, t: f64, x: f64) -> CMatrix {
        let chi = self.switch.value(x);
        if chi == 1.0 {
            self.left.evaluate(t, x)
        } else if chi == 0.0 {
            self.right.evaluate(t, x)
        } else {
            self.left.evaluate(t, x) * real(chi) + self.right.evaluate(t, x) * real(1.0 - chi)
        }
    }
    fn right_period(&self) -> f64 {
        self.right.right_period()
    }
    fn left_period(&self) -> f64 {
        self.left.left_period()
    }
    fn match_point(&self) -> f64 {
        // smallest whole number of periods beyond both the switch and the tails
        let need = self
            .switch
            .plateau()
            .max(self.left.match_point())
            .max(self.right.match_point());
        let p = self.right.right_period().max(self.left.left_period());
        (need / p).ceil() * p
    }
    fn t_derivative(&self, t: f64, x: f64, dt: f64) -> CMatrix {
        let chi = self.switch.value(x);
        self.left.t_derivative(t, x, dt) * real(chi)
            + self.right.t_derivative(t, x, dt) * real(1.0 - chi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        validate(&Flat::zero(2), 1e-12).unwrap();
        validate(&Cosine::mathieu(2.0), 1e-12).unwrap();
        validate(&Cosine::dislocation(2.0), 1e-12).unwrap();
        validate(
            &SquareWell {
                depth: 1.7,
                width: 2.0,
            },
            1e-12,
        )
        .unwrap();
        let d = Diagonal::new(vec![
            Arc::new(Cosine::mathieu(2.0)),
            Arc::new(Flat::zero(1)),
        ])
        .unwrap();
        assert_eq!(d.channels(), 2);
        validate(&d, 1e-12).unwrap();
        let j = Junction::new(
            Arc::new(Flat::scalar(20.0)),
            Arc::new(Cosine::dislocation(2.0)),
            Switch::Smooth { half_width: 2.0 },
        )
        .unwrap();
        validate(&j, 1e-12).unwrap();
        assert_eq!(j.match_point(), 2.0);
    }

    #[test]
    fn dislocation_rejects_fractional_shift() {
        assert!(Cosine::new(1.0, 1.0, 0.5).is_err());
        assert!(Dislocation::new(Arc::new(Cosine::mathieu(1.0)), 0.3).is_err());
        let d = Dislocation::new(Arc::new(Cosine::mathieu(2.0)), 1.0).unwrap();
        let direct = Cosine::dislocation(2.0);
        for &(t, x) in &[(0.1, 0.3), (0.7, -2.2)] {
            assert!((d.evaluate(t, x) - direct.evaluate(t, x)).norm() < 1e-14);
        }
    }

    #[test]
    fn switch_plateaus() {
        for s in [
            Switch::Step,
            Switch::Smooth { half_width: 1.5 },
            Switch::Linear { half_width: 0.5 },
        ] {
            s.validate().unwrap();
        }
        assert!(Switch::Smooth { half_width: -1.0 }.validate().is_err());
        let s = Switch::Smooth { half_width: 1.0 };
        assert!((s.value(0.0) - 0.5).abs() < 1e-15);
        assert!(s.value(-0.5) > 0.5 && s.value(0.5) < 0.5);
    }

    #[test]
    fn cosine_t_derivative_matches_differences() {
        let v = Cosine::dislocation(2.0);
        let exact = v.t_derivative(0.3, 0.4, 1e-5);
        let fd = (v.evaluate(0.3 + 1e-5, 0.4) - v.evaluate(0.3 - 1e-5, 0.4)) * real(0.5e5);
        assert!((exact - fd).norm() < 1e-6);
    }

    #[test]
    fn tabulated_interpolates_periodically() {
        let tab = Tabulated::new(1.0, vec![vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert!((tab.evaluate(0.0, 0.25)[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((tab.evaluate(1.0, 1.25)[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((tab.evaluate(0.25, 0.0)[(0, 0)].re - 1.0).abs() < 1e-15);
        validate(&tab, 1e-12).unwrap();
        assert!(Tabulated::new(1.0, vec![vec![0.0], vec![0.0, 1.0]]).is_err());
    }
}
