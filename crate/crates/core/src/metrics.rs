//! Settling time, control effort and overshoot of a recorded run.

use crate::sim::TrajectoryRecord;
use crate::stability::{saturated_exit_bound, saturated_exit_time};

/// First time `|d| <= eps`, interpolated between the bracketing samples.
pub fn settling_time(t: &[f64], d: &[f64], eps: f64) -> Option<f64> {
    let i = d.iter().position(|x| x.abs() <= eps)?;
    if i == 0 {
        return Some(t[0]);
    }
    let (d0, d1) = (d[i - 1].abs(), d[i].abs());
    let frac = if d0 > d1 {
        ((d0 - eps) / (d0 - d1)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Some(t[i - 1] + frac * (t[i] - t[i - 1]))
}

/// Trapezoidal integral of `a^2`.
pub fn control_effort(t: &[f64], a: &[f64]) -> f64 {
    t.windows(2)
        .zip(a.windows(2))
        .map(|(t, a)| 0.5 * (t[1] - t[0]).abs() * (a[0] * a[0] + a[1] * a[1]))
        .sum()
}

/// Largest `(-d - eps)^+` after the band is first entered.
///
/// Runs starting with `d < 0` are mirrored first, so the result always
/// measures how far the vehicle crosses beyond the far edge of the band.
/// Returns 0 when the band is never entered.
pub fn peak_overshoot(t: &[f64], d: &[f64], eps: f64) -> f64 {
    let Some(t_eps) = settling_time(t, d, eps) else {
        return 0.0;
    };
    let flip = if d.first().is_some_and(|&x| x < 0.0) { -1.0 } else { 1.0 };
    t.iter()
        .zip(d)
        .filter(|(&ti, _)| ti >= t_eps)
        .map(|(_, &di)| (-flip * di - eps).max(0.0))
        .fold(0.0, f64::max)
}

/// Measured duration of the initial saturated phase and its upper bound.
pub fn saturation_exit(traj: &TrajectoryRecord) -> (f64, f64) {
    let s0 = traj.first();
    (
        saturated_exit_time(traj),
        saturated_exit_bound(s0.eta, s0.eta_bar, &traj.limits),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceReport {
    pub settle_eps: f64,
    pub settling_time: Option<f64>,
    pub control_effort: f64,
    pub peak_overshoot: f64,
    pub t_far_measured: f64,
    pub t_far_bound: f64,
}

impl PerformanceReport {
    pub fn evaluate(traj: &TrajectoryRecord, eps: f64) -> Self {
        let t = traj.times();
        let d = traj.cross_track();
        let (t_far_measured, t_far_bound) = saturation_exit(traj);
        Self {
            settle_eps: eps,
            settling_time: settling_time(&t, &d, eps),
            control_effort: control_effort(&t, &traj.accel()),
            peak_overshoot: peak_overshoot(&t, &d, eps),
            t_far_measured,
            t_far_bound,
        }
    }

    pub fn settled(&self) -> bool {
        self.settling_time.is_some()
    }
}
