//! Lyapunov quantities and convergence diagnostics along a trajectory.
//!
//! These are numerical checks, evaluated on simulated data; nothing here
//! feeds back into the guidance law.

use crate::error::{GuidanceError, Result};
use crate::geometry::wrap_angle;
use crate::guidance::{lookahead, GuidanceLimits, LookaheadProfile};
use crate::sim::TrajectoryRecord;

/// Absolute tolerance of the Phi quadrature.
pub const PHI_TOLERANCE: f64 = 1e-9;

/// `g(d) = d + (1 + d kappa) L0 L0' + kappa L0^2 / 2`, half the d-derivative of `L1^2`.
pub fn g_function(d: f64, kappa: f64, profile: &LookaheadProfile) -> f64 {
    let l0 = lookahead(profile, d);
    d + (1.0 + d * kappa) * l0 * profile.derivative(d) + 0.5 * kappa * l0 * l0
}

fn phi_integrand(xi: f64, kappa: f64, profile: &LookaheadProfile) -> f64 {
    let l0 = lookahead(profile, xi);
    g_function(xi, kappa, profile) / (xi * xi + l0 * l0 * (1.0 + xi * kappa))
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }

    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// `Phi(d) = integral from 0 to d of g / L1^2`.
pub fn phi(d: f64, kappa: f64, profile: &LookaheadProfile) -> Result<f64> {
    if 1.0 + d * kappa <= 0.0 {
        return Err(GuidanceError::infeasible(d, kappa));
    }
    // 1 + xi kappa is monotone in xi, so checking the endpoint covers [0, d]
    Ok(adaptive_simpson(
        &|xi| phi_integrand(xi, kappa, profile),
        0.0,
        d,
        PHI_TOLERANCE,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValue {
    /// `V^2 sin^2(eta) / 2 + V^2 Phi(d)`.
    pub v: f64,
    pub phi: f64,
    pub g: f64,
}

pub fn lyapunov_value(
    d: f64,
    eta: f64,
    kappa: f64,
    profile: &LookaheadProfile,
    limits: &GuidanceLimits,
) -> Result<LyapunovValue> {
    let phi = phi(d, kappa, profile)?;
    let v2 = limits.speed * limits.speed;
    Ok(LyapunovValue {
        v: 0.5 * v2 * eta.sin().powi(2) + v2 * phi,
        phi,
        g: g_function(d, kappa, profile),
    })
}

/// Upper bound on the initial saturated phase, `(R_min / V) (|eta0| - eta_bar0)^+`.
pub fn saturated_exit_bound(eta0: f64, eta_bar0: f64, limits: &GuidanceLimits) -> f64 {
    limits.r_min / limits.speed * (eta0.abs() - eta_bar0).max(0.0)
}

/// Duration of the initial contiguous saturated phase, with the exit located
/// by linear interpolation of the margin `|eta| - eta_bar`.
pub fn saturated_exit_time(traj: &TrajectoryRecord) -> f64 {
    let s = &traj.samples;
    if !s[0].region.is_saturated() {
        return 0.0;
    }
    match s.iter().position(|x| !x.region.is_saturated()) {
        None => s.last().map(|x| x.t).unwrap_or(0.0),
        Some(i) => {
            let m0 = s[i - 1].eta.abs() - s[i - 1].eta_bar;
            let m1 = s[i].eta.abs() - s[i].eta_bar;
            let frac = if m0 > m1 { (m0 / (m0 - m1)).clamp(0.0, 1.0) } else { 1.0 };
            s[i - 1].t + frac * (s[i].t - s[i - 1].t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub lyapunov_initial: f64,
    /// Largest increase of V between consecutive unsaturated samples (0 if none).
    pub max_lyapunov_increase: f64,
    /// Smallest `|d eta / dt|` over the initial saturated phase, if there is one.
    pub min_saturated_eta_rate: Option<f64>,
    /// `V / (2 R_min)`.
    pub eta_rate_floor: f64,
    pub exit_time: f64,
    pub exit_time_bound: f64,
    /// Unsaturated-to-saturated transitions after the first entry into S1.
    pub s1_exits: usize,
    /// Longest run of saturated samples after the first entry into S1.
    pub longest_reentry: usize,
    /// Max of `|dd/dt + V sin(eta2)|` with `eta2 = eta - eta1`, `eta1 = -asin(d / L1)`.
    pub decomposition_residual: f64,
    pub terminal_d: f64,
    pub terminal_eta: f64,
}

impl StabilityReport {
    pub fn relative_lyapunov_increase(&self) -> f64 {
        if self.lyapunov_initial > 0.0 {
            self.max_lyapunov_increase / self.lyapunov_initial
        } else {
            self.max_lyapunov_increase
        }
    }
}

pub fn stability_diagnostics(traj: &TrajectoryRecord) -> StabilityReport {
    let s = &traj.samples;
    let limits = &traj.limits;
    let first = s[0];
    let last = *traj.last();

    let max_lyapunov_increase = s
        .windows(2)
        .filter(|w| !w[0].region.is_saturated() && !w[1].region.is_saturated())
        .map(|w| w[1].lyapunov - w[0].lyapunov)
        .filter(|x| x.is_finite())
        .fold(0.0f64, f64::max);

    let sat_end = s.iter().position(|x| !x.region.is_saturated()).unwrap_or(s.len());
    let min_saturated_eta_rate = (sat_end > 1).then(|| {
        s[..sat_end]
            .windows(2)
            .map(|w| wrap_angle(w[1].eta - w[0].eta).abs() / (w[1].t - w[0].t))
            .fold(f64::INFINITY, f64::min)
    });

    let mut s1_exits = 0;
    let mut longest_reentry = 0;
    let mut run = 0;
    for w in s[sat_end.min(s.len())..].windows(2) {
        if w[1].region.is_saturated() {
            if !w[0].region.is_saturated() {
                s1_exits += 1;
            }
            run += 1;
            longest_reentry = longest_reentry.max(run);
        } else {
            run = 0;
        }
    }

    let decomposition_residual = s
        .windows(2)
        .map(|w| {
            let eta1 = -(w[0].d / w[0].l1).clamp(-1.0, 1.0).asin();
            let eta2 = w[0].eta - eta1;
            let d_dot = (w[1].d - w[0].d) / (w[1].t - w[0].t);
            // midpoint-free forward difference: compare against the average rate
            let eta1b = -(w[1].d / w[1].l1).clamp(-1.0, 1.0).asin();
            let eta2b = w[1].eta - eta1b;
            (d_dot + limits.speed * 0.5 * (eta2.sin() + eta2b.sin())).abs()
        })
        .filter(|x| x.is_finite())
        .fold(0.0f64, f64::max);

    StabilityReport {
        lyapunov_initial: first.lyapunov,
        max_lyapunov_increase,
        min_saturated_eta_rate,
        eta_rate_floor: limits.speed / (2.0 * limits.r_min),
        exit_time: saturated_exit_time(traj),
        exit_time_bound: saturated_exit_bound(first.eta, first.eta_bar, limits),
        s1_exits,
        longest_reentry,
        decomposition_residual,
        terminal_d: last.d,
        terminal_eta: last.eta,
    }
}

/// Exponential decay rate of `|d(t)|` once `|d|` stays below `band`.
///
/// The near-path response is a damped oscillation, so the rate is fitted by
/// least squares to `ln|d|` at the local maxima of `|d|` (the envelope).
/// Peaks below `floor` are ignored as numerical noise. Returns `None` with
/// fewer than two usable peaks.
pub fn near_path_decay_rate(traj: &TrajectoryRecord, band: f64, floor: f64) -> Option<f64> {
    let s = &traj.samples;
    let entry = s.iter().rposition(|x| x.d.abs() >= band).map_or(0, |i| i + 1);
    let seg = &s[entry..];
    let peaks: Vec<(f64, f64)> = seg
        .windows(3)
        .filter(|w| w[1].d.abs() >= w[0].d.abs() && w[1].d.abs() > w[2].d.abs() && w[1].d.abs() > floor)
        .map(|w| (w[1].t, w[1].d.abs().ln()))
        .collect();
    if peaks.len() < 2 {
        return None;
    }
    let n = peaks.len() as f64;
    let mt = peaks.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = peaks.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = peaks.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sxx: f64 = peaks.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn origin_is_the_minimum() {
        let lim = GuidanceLimits::new(50.0, 100.0).unwrap();
        let c = LookaheadProfile::constant(50.0).unwrap();
        let l = lyapunov_value(0.0, 0.0, 0.0, &c, &lim).unwrap();
        assert_eq!((l.v, l.phi, l.g), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_profile_phi_closed_form() {
        let c = LookaheadProfile::constant(50.0).unwrap();
        assert_eq!(g_function(50.0, 0.0, &c), 50.0);
        let p = phi(50.0, 0.0, &c).unwrap();
        assert_abs_diff_eq!(p, 0.5 * 2f64.ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(p, 0.34657, epsilon = 1e-5);
    }

    #[test]
    fn simpson_handles_polynomials_and_reversed_limits() {
        let f = |x: f64| 3.0 * x * x;
        assert_abs_diff_eq!(adaptive_simpson(&f, 0.0, 2.0, 1e-12), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(adaptive_simpson(&f, 2.0, 0.0, 1e-12), -8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-10),
            2.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn g_sign_follows_d() {
        let v = LookaheadProfile::variable(50.0, 150.0, 30.0).unwrap();
        for kappa in [-0.005, 0.005] {
            for i in -100..=100 {
                let d = i as f64 * 1.9;
                if 1.0 + d * kappa <= 0.0 || d == 0.0 {
                    continue;
                }
                let g = g_function(d, kappa, &v);
                assert_eq!(g.signum(), d.signum(), "d={d} kappa={kappa} g={g}");
            }
        }
    }

    #[test]
    fn exit_bound_positive_part() {
        let lim = GuidanceLimits::new(50.0, 100.0).unwrap();
        assert_eq!(saturated_exit_bound(0.1, 0.25, &lim), 0.0);
        let b = saturated_exit_bound(std::f64::consts::PI, 0.25f64.asin(), &lim);
        assert_abs_diff_eq!(b, 2.0 * (std::f64::consts::PI - 0.25f64.asin()), epsilon = 1e-12);
        assert_abs_diff_eq!(b, 5.778, epsilon = 1e-3);
    }

    #[test]
    fn infeasible_phi_is_an_error() {
        let c = LookaheadProfile::constant(50.0).unwrap();
        assert!(phi(-300.0, 0.005, &c).is_err());
    }
}
