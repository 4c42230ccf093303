//! Saturated/unsaturated region maps over the (d, eta) error plane.
//!
//! The area metric counts grid nodes with `|eta| < eta_bar(d)` (strict),
//! while the per-node region tags use the closed S1 of
//! [`classify_region`](crate::guidance::classify_region).

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{GuidanceError, Result};
use crate::guidance::{
    classify_eta, lookahead, los_length, saturation_boundary, GuidanceLimits, LookaheadProfile, Region,
};

/// Uniform evaluation grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub d_min: f64,
    pub d_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub n_d: usize,
    pub n_eta: usize,
    /// Path curvature assumed at every node.
    pub kappa: f64,
}

impl Default for GridSpec {
    /// `d in [0, 200] m`, `eta in [-pi, pi]`, 1000 x 1000 nodes, straight path.
    fn default() -> Self {
        GridSpec {
            d_min: 0.0,
            d_max: 200.0,
            eta_min: -PI,
            eta_max: PI,
            n_d: 1000,
            n_eta: 1000,
            kappa: 0.0,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

impl GridSpec {
    pub fn with_resolution(mut self, n_d: usize, n_eta: usize) -> Self {
        self.n_d = n_d;
        self.n_eta = n_eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.d_min, self.d_max, self.eta_min, self.eta_max, self.kappa]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(GuidanceError::validation("grid", "bounds must be finite"));
        }
        if self.d_min >= self.d_max {
            return Err(GuidanceError::validation("d_max", "must exceed d_min"));
        }
        if self.eta_min >= self.eta_max {
            return Err(GuidanceError::validation("eta_max", "must exceed eta_min"));
        }
        if self.n_d < 2 {
            return Err(GuidanceError::validation("n_d", "need at least 2 nodes"));
        }
        if self.n_eta < 2 {
            return Err(GuidanceError::validation("n_eta", "need at least 2 nodes"));
        }
        for d in [self.d_min, self.d_max] {
            if 1.0 + d * self.kappa <= 0.0 {
                return Err(GuidanceError::infeasible(d, self.kappa));
            }
        }
        Ok(())
    }

    pub fn d_nodes(&self) -> impl Iterator<Item = f64> + Clone {
        linspace(self.d_min, self.d_max, self.n_d)
    }

    pub fn eta_nodes(&self) -> impl Iterator<Item = f64> + Clone {
        linspace(self.eta_min, self.eta_max, self.n_eta)
    }

    pub fn node_count(&self) -> usize {
        self.n_d * self.n_eta
    }
}

/// Saturation boundary for one profile at cross-track error `d`.
pub fn boundary_at(profile: &LookaheadProfile, d: f64, kappa: f64, limits: &GuidanceLimits) -> Result<f64> {
    let l1 = los_length(lookahead(profile, d), d, kappa)?;
    Ok(saturation_boundary(l1, limits))
}

fn boundary_curve(profile: &LookaheadProfile, grid: &GridSpec, limits: &GuidanceLimits) -> Result<Vec<f64>> {
    grid.d_nodes()
        .map(|d| boundary_at(profile, d, grid.kappa, limits))
        .collect()
}

fn count_strictly_inside(etas: &[f64], eta_bar: f64) -> usize {
    etas.iter().filter(|e| e.abs() < eta_bar).count()
}

/// Fraction of grid nodes with `|eta| < eta_bar(d)`.
pub fn unsaturated_fraction(profile: &LookaheadProfile, grid: &GridSpec, limits: &GuidanceLimits) -> Result<f64> {
    grid.validate()?;
    let bars = boundary_curve(profile, grid, limits)?;
    let etas: Vec<f64> = grid.eta_nodes().collect();
    let inside: usize = bars.par_iter().map(|&bar| count_strictly_inside(&etas, bar)).sum();
    Ok(inside as f64 / grid.node_count() as f64)
}

/// Absolute gain in percentage points and relative gain in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeGain {
    pub absolute: f64,
    pub relative: f64,
}

impl EnvelopeGain {
    pub fn from_fractions(a_const: f64, a_var: f64) -> Result<Self> {
        if a_const <= 0.0 {
            return Err(GuidanceError::DegenerateBaseline);
        }
        Ok(EnvelopeGain {
            absolute: (a_var - a_const) * 100.0,
            relative: (a_var / a_const - 1.0) * 100.0,
        })
    }
}

pub fn envelope_gain(
    grid: &GridSpec,
    limits: &GuidanceLimits,
    const_profile: &LookaheadProfile,
    var_profile: &LookaheadProfile,
) -> Result<EnvelopeGain> {
    let a_const = unsaturated_fraction(const_profile, grid, limits)?;
    let a_var = unsaturated_fraction(var_profile, grid, limits)?;
    EnvelopeGain::from_fractions(a_const, a_var)
}

/// Full grid analysis for a pair of profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub grid: GridSpec,
    pub a_const: f64,
    pub a_var: f64,
    pub gain: EnvelopeGain,
    /// `eta_bar(d)` at every d node for each law.
    pub boundary_const: Vec<f64>,
    pub boundary_var: Vec<f64>,
    /// Row-major over (d, eta): index `i_d * n_eta + i_eta`.
    pub regions_const: Vec<Region>,
    pub regions_var: Vec<Region>,
}

impl EnvelopeReport {
    pub fn d_nodes(&self) -> Vec<f64> {
        self.grid.d_nodes().collect()
    }

    pub fn eta_nodes(&self) -> Vec<f64> {
        self.grid.eta_nodes().collect()
    }
}

fn region_rows(bars: &[f64], etas: &[f64]) -> Vec<Region> {
    bars.par_iter()
        .flat_map_iter(|&bar| etas.iter().map(move |&eta| classify_eta(eta, bar)))
        .collect()
}

pub fn analyze_envelope(
    grid: &GridSpec,
    limits: &GuidanceLimits,
    const_profile: &LookaheadProfile,
    var_profile: &LookaheadProfile,
) -> Result<EnvelopeReport> {
    grid.validate()?;
    let boundary_const = boundary_curve(const_profile, grid, limits)?;
    let boundary_var = boundary_curve(var_profile, grid, limits)?;
    let etas: Vec<f64> = grid.eta_nodes().collect();
    let n = grid.node_count() as f64;
    let count = |bars: &[f64]| bars.par_iter().map(|&b| count_strictly_inside(&etas, b)).sum::<usize>() as f64 / n;
    let a_const = count(&boundary_const);
    let a_var = count(&boundary_var);
    let gain = EnvelopeGain::from_fractions(a_const, a_var)?;
    Ok(EnvelopeReport {
        grid: *grid,
        a_const,
        a_var,
        gain,
        regions_const: region_rows(&boundary_const, &etas),
        regions_var: region_rows(&boundary_var, &etas),
        boundary_const,
        boundary_var,
    })
}

/// Base configuration for a look-ahead ratio sweep: `L_min` and `d_c` fixed,
/// `L_max = ratio * L_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBase {
    pub grid: GridSpec,
    pub limits: GuidanceLimits,
    pub l_min: f64,
    pub d_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioGain {
    pub ratio: f64,
    pub a_const: f64,
    pub a_var: f64,
    pub gain: EnvelopeGain,
}

pub fn ratio_sweep(ratios: &[f64], base: &SweepBase) -> Result<Vec<RatioGain>> {
    if let Some(bad) = ratios.iter().find(|r| !(**r >= 1.0 && r.is_finite())) {
        return Err(GuidanceError::validation("ratios", format!("ratio {bad} must be >= 1")));
    }
    let constant = LookaheadProfile::constant(base.l_min)?;
    let a_const = unsaturated_fraction(&constant, &base.grid, &base.limits)?;
    ratios
        .par_iter()
        .map(|&ratio| {
            let var = LookaheadProfile::variable(base.l_min, ratio * base.l_min, base.d_c)?;
            let a_var = unsaturated_fraction(&var, &base.grid, &base.limits)?;
            Ok(RatioGain {
                ratio,
                a_const,
                a_var,
                gain: EnvelopeGain::from_fractions(a_const, a_var)?,
            })
        })
        .collect()
}

/// Parse `a:b:step` into an inclusive list of ratios.
pub fn ratio_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || end.is_nan() || end < start || !start.is_finite() || !end.is_finite() {
        return Err(GuidanceError::validation(
            "ratios",
            "expected start <= end and step > 0",
        ));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// Gap between the variable and constant boundaries at one `(d, kappa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryGap {
    pub l1_const: f64,
    pub l1_var: f64,
    /// `L1^v - L1^c` via the difference-of-squares factorization.
    pub delta_l1: f64,
    /// Mean-value expression with the derivative taken at `L1^v`.
    pub delta_eta_bar_bound: f64,
    pub delta_eta_bar: f64,
}

pub fn boundary_gap(
    d: f64,
    kappa: f64,
    const_profile: &LookaheadProfile,
    var_profile: &LookaheadProfile,
    limits: &GuidanceLimits,
) -> Result<BoundaryGap> {
    let l0c = lookahead(const_profile, d);
    let l0v = lookahead(var_profile, d);
    let l1_const = los_length(l0c, d, kappa)?;
    let l1_var = los_length(l0v, d, kappa)?;
    let two_r = 2.0 * limits.r_min;
    if l1_var >= two_r {
        return Err(GuidanceError::BoundUndefined {
            l1: l1_var,
            two_r_min: two_r,
        });
    }
    let delta_l1 = (l0v * l0v - l0c * l0c) * (1.0 + d * kappa) / (l1_var + l1_const);
    let ratio = l1_var / two_r;
    Ok(BoundaryGap {
        l1_const,
        l1_var,
        delta_l1,
        delta_eta_bar_bound: delta_l1 / (two_r * (1.0 - ratio * ratio).sqrt()),
        delta_eta_bar: saturation_boundary(l1_var, limits) - saturation_boundary(l1_const, limits),
    })
}

/// Far-field boundary gap `arcsin(L_max / 2R) - arcsin(L_min / 2R)`.
pub fn far_field_boundary_gap(
    limits: &GuidanceLimits,
    const_profile: &LookaheadProfile,
    var_profile: &LookaheadProfile,
) -> Result<f64> {
    let two_r = 2.0 * limits.r_min;
    let (lo, hi) = (const_profile.l_min(), var_profile.l_max());
    for l in [lo, hi] {
        if l >= two_r {
            return Err(GuidanceError::BoundUndefined {
                l1: l,
                two_r_min: two_r,
            });
        }
    }
    Ok((hi / two_r).asin() - (lo / two_r).asin())
}

/// Reduction of the far-field saturated phase, `(R_min / V) * gap`, as a positive time.
pub fn far_field_time_gain(
    limits: &GuidanceLimits,
    const_profile: &LookaheadProfile,
    var_profile: &LookaheadProfile,
) -> Result<f64> {
    let gap = far_field_boundary_gap(limits, const_profile, var_profile)?;
    Ok(limits.r_min / limits.speed * gap)
}

/// One grid node in polar form `(d cos eta, d sin eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub d: f64,
    pub eta: f64,
    pub x: f64,
    pub y: f64,
    pub region: Region,
}

pub fn polar_map(grid: &GridSpec, limits: &GuidanceLimits, profile: &LookaheadProfile) -> Result<Vec<PolarPoint>> {
    grid.validate()?;
    if grid.d_min < 0.0 {
        return Err(GuidanceError::validation("d_min", "polar export needs d >= 0"));
    }
    let bars = boundary_curve(profile, grid, limits)?;
    let etas: Vec<f64> = grid.eta_nodes().collect();
    Ok(grid
        .d_nodes()
        .zip(bars)
        .flat_map(|(d, bar)| {
            etas.iter().map(move |&eta| PolarPoint {
                d,
                eta,
                x: d * eta.cos(),
                y: d * eta.sin(),
                region: classify_eta(eta, bar),
            })
        })
        .collect())
}
