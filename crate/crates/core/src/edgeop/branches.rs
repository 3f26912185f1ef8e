//! Eigenvalue branches in an energy window over `t ∈ [0, 1]` and their
//! spectral flow through `E`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::discretize::EdgeDiscretization;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchConfig {
    /// Initial uniform samples on `[0, 1]`.
    pub samples: usize,
    /// Smallest `t` spacing adaptive refinement may reach.
    pub min_spacing: f64,
    /// Share of `‖ψ‖²` in the near region for a state to count.
    pub localization: f64,
    /// Width of the final crossing bracket in `t`.
    pub crossing_resolution: f64,
    /// Step of the central difference for `λ'(t*)`.
    pub slope_step: f64,
    /// Slopes below `slope_floor · max(1, |E|)` are non-regular.
    pub slope_floor: f64,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            samples: 64,
            min_spacing: 1e-5,
            localization: 0.9,
            crossing_resolution: 1e-10,
            slope_step: 1e-5,
            slope_floor: 1e-6,
        }
    }
}

/// Localized eigenvalues in the window at one `t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub t: f64,
    pub values: Vec<f64>,
    /// Window eigenvalues dropped as far-boundary states.
    pub rejected: usize,
}

/// A regular or non-regular passage of one or more branches through `E`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenCrossing {
    pub t: f64,
    pub multiplicity: usize,
    /// `λ_j'(t*)` for each branch through `E` at `t*`.
    pub slopes: Vec<f64>,
    /// Localized eigenvalues within the kernel tolerance of `E` at `t*`.
    pub kernel_dimension: usize,
    pub regular: bool,
}

impl EigenCrossing {
    /// Downward-positive degree contribution `−Σ sgn λ'`.
    pub fn flow(&self) -> i64 {
        -self.slopes.iter().map(|s| s.signum() as i64).sum::<i64>()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchSet {
    pub energy: f64,
    pub window: f64,
    pub samples: Vec<SpectrumSample>,
    /// Continued branch curves `(t, λ)`.
    pub branches: Vec<Vec<(f64, f64)>>,
    pub crossings: Vec<EigenCrossing>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowReport {
    pub flow: i64,
    pub downward: usize,
    pub upward: usize,
    pub crossings: Vec<EigenCrossing>,
    pub regular: bool,
    pub energy: f64,
    pub window: f64,
    pub samples: usize,
    pub length: f64,
    pub points: usize,
}

/// `t ↦` discretized operator; must be 1-periodic in `t`.
pub type OperatorFamily<'a> = dyn Fn(f64) -> Result<EdgeDiscretization> + Sync + 'a;

struct Evaluator<'a> {
    family: &'a OperatorFamily<'a>,
    lo: f64,
    hi: f64,
    localization: f64,
}

impl Evaluator<'_> {
    fn sample(&self, t: f64) -> Result<SpectrumSample> {
        let op = (self.family)(t)?;
        let pairs = op.eigenpairs_in(self.lo, self.hi)?;
        let mut values = Vec::new();
        let mut rejected = 0;
        for p in pairs {
            if op.near_fraction(&p.vector) >= self.localization {
                values.push(p.value);
            } else {
                rejected += 1;
            }
        }
        values.sort_by(f64::total_cmp);
        Ok(SpectrumSample {
            t,
            values,
            rejected,
        })
    }
}

/// Order-preserving matching of two sorted lists minimizing total jump.
/// Entries within `slack` of the window edges may stay unmatched.
fn monotone_match(
    a: &[f64],
    b: &[f64],
    lo: f64,
    hi: f64,
    slack: f64,
) -> Option<Vec<(usize, usize)>> {
    let free = |x: f64| x - lo < slack || hi - x < slack;
    let (m, n) = (a.len(), b.len());
    let inf = f64::INFINITY;
    let mut cost = vec![vec![inf; n + 1]; m + 1];
    cost[0][0] = 0.0;
    for i in 0..=m {
        for j in 0..=n {
            let c = cost[i][j];
            if c == inf {
                continue;
            }
            if i < m && free(a[i]) && c < cost[i + 1][j] {
                cost[i + 1][j] = c;
            }
            if j < n && free(b[j]) && c < cost[i][j + 1] {
                cost[i][j + 1] = c;
            }
            if i < m && j < n {
                let d = c + (a[i] - b[j]).abs();
                if d < cost[i + 1][j + 1] {
                    cost[i + 1][j + 1] = d;
                }
            }
        }
    }
    if cost[m][n] == inf {
        return None;
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let c = cost[i][j];
        if i > 0
            && j > 0
            && (cost[i - 1][j - 1] + (a[i - 1] - b[j - 1]).abs() - c).abs() <= 1e-12 * (1.0 + c)
        {
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && cost[i - 1][j] == c && free(a[i - 1]) {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    pairs.reverse();
    Some(pairs)
}

/// Samples the window, refines until all branch continuations are small,
/// and locates every crossing of `E`.
pub fn track_branches(
    family: &OperatorFamily<'_>,
    energy: f64,
    window: f64,
    cfg: &BranchConfig,
) -> Result<BranchSet> {
    if !(window > 0.0) || cfg.samples < 2 {
        return Err(Error::Config(
            "window must be positive and samples ≥ 2".into(),
        ));
    }
    let (lo, hi) = (energy - window, energy + window);
    let eval = Evaluator {
        family,
        lo,
        hi,
        localization: cfg.localization,
    };
    let slack = 0.25 * window;

    let ts: Vec<f64> = (0..=cfg.samples)
        .map(|i| i as f64 / cfg.samples as f64)
        .collect();
    let initial: Result<Vec<SpectrumSample>> = ts.par_iter().map(|&t| eval.sample(t)).collect();
    let initial = initial?;
    check_closure(&initial[0], &initial[initial.len() - 1])?;

    // refine every interval until the continuation is feasible with small jumps
    let mut samples: Vec<SpectrumSample> = Vec::new();
    let mut links: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut stack: Vec<SpectrumSample> = initial.into_iter().rev().collect();
    let mut current = stack.pop().unwrap();
    while let Some(next) = stack.pop() {
        let matched = monotone_match(&current.values, &next.values, lo, hi, slack).filter(|p| {
            p.iter()
                .all(|&(i, j)| (current.values[i] - next.values[j]).abs() <= slack)
        });
        match matched {
            Some(pairs) => {
                samples.push(current);
                links.push(pairs);
                current = next;
            }
            None => {
                if next.t - current.t <= cfg.min_spacing {
                    return Err(Error::RefinementExhausted { t: current.t });
                }
                let mid = eval.sample(0.5 * (current.t + next.t))?;
                stack.push(next);
                stack.push(mid);
            }
        }
    }
    samples.push(current);

    let branches = chain_branches(&samples, &links);

    let mut raw: Vec<(f64, f64)> = Vec::new(); // (t*, slope)
    for (k, pairs) in links.iter().enumerate() {
        let (a, b) = (&samples[k], &samples[k + 1]);
        for &(i, j) in pairs {
            let (la, lb) = (a.values[i], b.values[j]);
            if (la >= energy) != (lb >= energy) {
                raw.push(locate_crossing(&eval, energy, (a.t, la), (b.t, lb), cfg)?);
            }
        }
    }
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut crossings: Vec<EigenCrossing> = Vec::new();
    let scale = energy.abs().max(1.0);
    for (t, slope) in raw {
        let regular = slope.abs() > cfg.slope_floor * scale;
        match crossings.last_mut() {
            Some(last) if (t - last.t).abs() < 1e-7 => {
                last.multiplicity += 1;
                last.slopes.push(slope);
                last.regular &= regular;
            }
            _ => crossings.push(EigenCrossing {
                t,
                multiplicity: 1,
                slopes: vec![slope],
                kernel_dimension: 0,
                regular,
            }),
        }
    }
    for c in &mut crossings {
        let tol = 1e-6 * scale
            + c.slopes.iter().fold(0.0f64, |m, s| m.max(s.abs())) * 10.0 * cfg.crossing_resolution;
        let s = eval.sample(c.t)?;
        c.kernel_dimension = s
            .values
            .iter()
            .filter(|v| (*v - energy).abs() <= tol)
            .count();
    }
    Ok(BranchSet {
        energy,
        window,
        samples,
        branches,
        crossings,
    })
}

fn check_closure(first: &SpectrumSample, last: &SpectrumSample) -> Result<()> {
    let same = first.values.len() == last.values.len()
        && first
            .values
            .iter()
            .zip(&last.values)
            .all(|(a, b)| (a - b).abs() < 1e-6 * (1.0 + a.abs()));
    if !same {
        return Err(Error::Config(format!(
            "operator family is not periodic in t: window spectra at t=0 {:?} and t=1 {:?}",
            first.values, last.values
        )));
    }
    Ok(())
}

fn chain_branches(
    samples: &[SpectrumSample],
    links: &[Vec<(usize, usize)>],
) -> Vec<Vec<(f64, f64)>> {
    let mut branches: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut owner: Vec<usize> = samples[0]
        .values
        .iter()
        .map(|&v| {
            branches.push(vec![(samples[0].t, v)]);
            branches.len() - 1
        })
        .collect();
    for (k, pairs) in links.iter().enumerate() {
        let next = &samples[k + 1];
        let mut next_owner = vec![usize::MAX; next.values.len()];
        for &(i, j) in pairs {
            next_owner[j] = owner[i];
            branches[owner[i]].push((next.t, next.values[j]));
        }
        for (j, o) in next_owner.iter_mut().enumerate() {
            if *o == usize::MAX {
                branches.push(vec![(next.t, next.values[j])]);
                *o = branches.len() - 1;
            }
        }
        owner = next_owner;
    }
    branches
}

fn nearest(values: &[f64], target: f64) -> Option<f64> {
    values
        .iter()
        .copied()
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
}

/// Illinois regula falsi on `λ(t) − E` along one branch, then a
/// central-difference slope.
fn locate_crossing(
    eval: &Evaluator<'_>,
    energy: f64,
    (mut ta, mut la): (f64, f64),
    (mut tb, mut lb): (f64, f64),
    cfg: &BranchConfig,
) -> Result<(f64, f64)> {
    let (mut fa, mut fb) = (la - energy, lb - energy);
    let mut last_kept = 0i8;
    let mut hit = None;
    for _ in 0..200 {
        if tb - ta <= cfg.crossing_resolution {
            break;
        }
        let w = tb - ta;
        let tm = (ta + w * fa / (fa - fb)).clamp(ta + 1e-3 * w, tb - 1e-3 * w);
        let guess = la + (lb - la) * (tm - ta) / w;
        let s = eval.sample(tm)?;
        let lm = nearest(&s.values, guess).ok_or(Error::NonRegular {
            t: tm,
            reason: "branch lost during crossing search".into(),
        })?;
        let fm = lm - energy;
        let slope = ((lb - la) / w).abs();
        if fm.abs() <= slope * 0.1 * cfg.crossing_resolution {
            hit = Some(tm);
            break;
        }
        if (fm >= 0.0) == (fa >= 0.0) {
            ta = tm;
            la = lm;
            fa = fm;
            if last_kept == 1 {
                fb *= 0.5;
            }
            last_kept = 1;
        } else {
            tb = tm;
            lb = lm;
            fb = fm;
            if last_kept == -1 {
                fa *= 0.5;
            }
            last_kept = -1;
        }
    }
    let t = hit.unwrap_or(0.5 * (ta + tb));
    let secant = (lb - la) / (tb - ta).max(f64::MIN_POSITIVE);
    let d = cfg.slope_step;
    let at = |tt: f64, guess: f64| -> Result<f64> {
        let s = eval.sample(tt)?;
        nearest(&s.values, guess).ok_or(Error::NonRegular {
            t: tt,
            reason: "branch lost at slope step".into(),
        })
    };
    let mid = 0.5 * (la + lb);
    let plus = at(t + d, mid + secant * d)?;
    let minus = at(t - d, mid - secant * d)?;
    Ok((t, (plus - minus) / (2.0 * d)))
}

/// `Sf = #down − #up`; refuses non-regular crossings.
pub fn spectral_flow(branches: &BranchSet, length: f64, points: usize) -> Result<FlowReport> {
    let mut downward = 0;
    let mut upward = 0;
    for c in &branches.crossings {
        if !c.regular {
            return Err(Error::NonRegular {
                t: c.t,
                reason: format!("branch slopes {:?} below floor", c.slopes),
            });
        }
        for s in &c.slopes {
            if *s < 0.0 {
                downward += 1;
            } else {
                upward += 1;
            }
        }
    }
    Ok(FlowReport {
        flow: downward as i64 - upward as i64,
        downward,
        upward,
        crossings: branches.crossings.clone(),
        regular: true,
        energy: branches.energy,
        window: branches.window,
        samples: branches.samples.len(),
        length,
        points,
    })
}
