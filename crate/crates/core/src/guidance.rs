//! L0/L1 look-ahead guidance: profiles, line-of-sight geometry, saturation
//! boundary, region classification and the commanded lateral acceleration.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::error::{GuidanceError, Result};
use crate::geometry::Point;

/// Look-ahead distance as a function of cross-track error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LookaheadProfile {
    Constant {
        l0: f64,
    },
    /// `L_min + (L_max - L_min)(1 - exp(-|d|/d_c))`
    Variable {
        l_min: f64,
        l_max: f64,
        d_c: f64,
    },
}

impl LookaheadProfile {
    pub fn constant(l0: f64) -> Result<Self> {
        let p = LookaheadProfile::Constant { l0 };
        p.validate()?;
        Ok(p)
    }

    pub fn variable(l_min: f64, l_max: f64, d_c: f64) -> Result<Self> {
        let p = LookaheadProfile::Variable { l_min, l_max, d_c };
        p.validate()?;
        Ok(p)
    }

    /// `L_max == L_min` is accepted and collapses to the constant profile.
    pub fn validate(&self) -> Result<()> {
        match *self {
            LookaheadProfile::Constant { l0 } => {
                if !(l0 > 0.0 && l0.is_finite()) {
                    return Err(GuidanceError::validation("L0", "must be positive"));
                }
            }
            LookaheadProfile::Variable { l_min, l_max, d_c } => {
                if !(l_min > 0.0 && l_min.is_finite()) {
                    return Err(GuidanceError::validation("L_min", "must be positive"));
                }
                if !(l_max >= l_min && l_max.is_finite()) {
                    return Err(GuidanceError::validation("L_max", "must be >= L_min"));
                }
                if !(d_c > 0.0 && d_c.is_finite()) {
                    return Err(GuidanceError::validation("d_c", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Look-ahead at zero cross-track error.
    pub fn l_min(&self) -> f64 {
        match *self {
            LookaheadProfile::Constant { l0 } => l0,
            LookaheadProfile::Variable { l_min, .. } => l_min,
        }
    }

    /// Asymptotic look-ahead far from the path.
    pub fn l_max(&self) -> f64 {
        match *self {
            LookaheadProfile::Constant { l0 } => l0,
            LookaheadProfile::Variable { l_max, .. } => l_max,
        }
    }

    pub fn at(&self, d: f64) -> f64 {
        lookahead(self, d)
    }

    /// dL0/dd; zero at `d = 0` by evenness.
    pub fn derivative(&self, d: f64) -> f64 {
        match *self {
            LookaheadProfile::Constant { .. } => 0.0,
            LookaheadProfile::Variable { l_min, l_max, d_c } => {
                if d == 0.0 {
                    0.0
                } else {
                    (l_max - l_min) / d_c * (-d.abs() / d_c).exp() * d.signum()
                }
            }
        }
    }
}

/// Physical limits of the vehicle plus the optional projection-error cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceLimits {
    /// Airspeed V_u [m/s].
    pub speed: f64,
    /// Minimum turn radius [m].
    pub r_min: f64,
    /// Cap on the tangent-projection error [m]; `None` disables the cap.
    pub eps_proj: Option<f64>,
}

impl GuidanceLimits {
    pub fn new(speed: f64, r_min: f64) -> Result<Self> {
        let l = GuidanceLimits {
            speed,
            r_min,
            eps_proj: None,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn with_eps_proj(mut self, eps: f64) -> Result<Self> {
        self.eps_proj = Some(eps);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(GuidanceError::validation("speed", "must be positive"));
        }
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return Err(GuidanceError::validation("r_min", "must be positive"));
        }
        if let Some(e) = self.eps_proj {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(GuidanceError::validation("eps_proj", "must be >= 0"));
            }
        }
        Ok(())
    }

    /// Largest lateral acceleration the vehicle can produce, `V^2 / R_min`.
    pub fn max_accel(&self) -> f64 {
        self.speed * self.speed / self.r_min
    }
}

/// Tracking errors at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingGeometry {
    pub d: f64,
    pub kappa: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Unsaturated, `|eta| <= eta_bar`.
    S1,
    /// `eta > eta_bar`.
    S2,
    /// `eta < -eta_bar`.
    S3,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::S1 => "S1",
            Region::S2 => "S2",
            Region::S3 => "S3",
        }
    }

    pub fn is_saturated(self) -> bool {
        self != Region::S1
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluation of the guidance law with all intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceCommand {
    pub l0_eff: f64,
    pub s: f64,
    pub l1: f64,
    pub eta_bar: f64,
    pub region: Region,
    /// Commanded lateral acceleration [m/s^2].
    pub accel: f64,
    /// `accel / V^2` [1/m].
    pub curvature_cmd: f64,
    pub saturated: bool,
}

pub fn lookahead(profile: &LookaheadProfile, d: f64) -> f64 {
    match *profile {
        LookaheadProfile::Constant { l0 } => l0,
        LookaheadProfile::Variable { l_min, l_max, d_c } => l_min + (l_max - l_min) * (-(-d.abs() / d_c).exp_m1()),
    }
}

fn check_feasible(d: f64, kappa: f64) -> Result<f64> {
    let q = 1.0 + d * kappa;
    if q > 0.0 {
        Ok(q)
    } else {
        Err(GuidanceError::infeasible(d, kappa))
    }
}

/// Advance along the tangent, `L0 sqrt(1 + d kappa)`, optionally capped so
/// the projection error stays below `eps_proj`.
pub fn tangent_advance(l0_eff: f64, d: f64, kappa: f64, limits: &GuidanceLimits) -> Result<f64> {
    let q = check_feasible(d, kappa)?;
    let s = l0_eff * q.sqrt();
    Ok(match limits.eps_proj {
        Some(eps) if kappa != 0.0 => s.min((2.0 * eps / kappa.abs()).sqrt()),
        _ => s,
    })
}

/// Leading-order bound on the distance between the on-path target and its
/// tangent projection.
pub fn projection_error_bound(s: f64, kappa: f64) -> f64 {
    kappa.abs() * s * s / 2.0
}

/// Line-of-sight length `sqrt(d^2 + L0^2 (1 + d kappa))`.
pub fn los_length(l0_eff: f64, d: f64, kappa: f64) -> Result<f64> {
    let q = check_feasible(d, kappa)?;
    Ok((d * d + l0_eff * l0_eff * q).sqrt())
}

/// Signed angle from `velocity` to `los` in `(-pi, pi]`.
pub fn heading_error(velocity: Point, los: Point) -> Result<f64> {
    if velocity.norm() < 1e-12 || los.norm() < 1e-12 {
        return Err(GuidanceError::ZeroVector);
    }
    let cross = velocity.x * los.y - velocity.y * los.x;
    let dot = velocity.dot(&los);
    Ok(crate::geometry::wrap_angle(cross.atan2(dot)))
}

/// `arcsin(min(1, L1 / (2 R_min)))`.
pub fn saturation_boundary(l1: f64, limits: &GuidanceLimits) -> f64 {
    let ratio = l1 / (2.0 * limits.r_min);
    if ratio >= 1.0 {
        FRAC_PI_2
    } else {
        ratio.asin()
    }
}

/// The boundary `|eta| = eta_bar` belongs to S1.
pub fn classify_region(geom: &TrackingGeometry, eta_bar: f64) -> Region {
    classify_eta(geom.eta, eta_bar)
}

pub(crate) fn classify_eta(eta: f64, eta_bar: f64) -> Region {
    if eta.abs() <= eta_bar {
        Region::S1
    } else if eta > 0.0 {
        Region::S2
    } else {
        Region::S3
    }
}

/// Command for an already-constructed line of sight (advance `s`, error `d`).
pub fn command_from_los(l0_eff: f64, s: f64, d: f64, eta: f64, limits: &GuidanceLimits) -> GuidanceCommand {
    let l1 = d.hypot(s);
    let eta_bar = saturation_boundary(l1, limits);
    let region = classify_eta(eta, eta_bar);
    let v2 = limits.speed * limits.speed;
    let raw = match region {
        Region::S1 => 2.0 * v2 * eta.sin() / l1,
        // magnitude pinned at the boundary value, steering toward S1
        Region::S2 | Region::S3 => 2.0 * v2 * eta_bar.sin() / l1 * eta.signum(),
    };
    let a_max = limits.max_accel();
    let accel = raw.clamp(-a_max, a_max);
    GuidanceCommand {
        l0_eff,
        s,
        l1,
        eta_bar,
        region,
        accel,
        curvature_cmd: accel / v2,
        saturated: region.is_saturated(),
    }
}

/// Full guidance evaluation for the given tracking errors.
pub fn lateral_accel(
    geom: &TrackingGeometry,
    profile: &LookaheadProfile,
    limits: &GuidanceLimits,
) -> Result<GuidanceCommand> {
    let l0_eff = lookahead(profile, geom.d);
    let s = tangent_advance(l0_eff, geom.d, geom.kappa, limits)?;
    Ok(command_from_los(l0_eff, s, geom.d, geom.eta, limits))
}

/// Both clauses of the feasibility set, evaluated at `(d, kappa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub one_plus_dk: f64,
    /// `None` when `1 + d kappa <= 0`.
    pub l1: Option<f64>,
    /// `2R - d`; `None` on a straight path.
    pub arc_limit: Option<f64>,
    /// The stricter side condition `L1 < 2R` (true on a straight path).
    pub l1_below_diameter: bool,
}

pub fn feasibility_check(d: f64, kappa: f64, profile: &LookaheadProfile) -> Feasibility {
    let one_plus_dk = 1.0 + d * kappa;
    let l1 = los_length(lookahead(profile, d), d, kappa).ok();
    let radius = (kappa != 0.0).then(|| 1.0 / kappa.abs());
    let arc_limit = radius.map(|r| 2.0 * r - d);
    let feasible = match (l1, arc_limit) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(l1), Some(limit)) => l1 <= limit,
    };
    let l1_below_diameter = match (l1, radius) {
        (Some(l1), Some(r)) => l1 < 2.0 * r,
        (Some(_), None) => true,
        (None, _) => false,
    };
    Feasibility {
        feasible,
        one_plus_dk,
        l1,
        arc_limit,
        l1_below_diameter,
    }
}

/// Curvature sensitivity index `(kappa / a) da/dkappa` at fixed heading error.
pub fn curvature_sensitivity(d: f64, kappa: f64, profile: &LookaheadProfile) -> Result<f64> {
    let q = check_feasible(d, kappa)?;
    let l0 = lookahead(profile, d);
    Ok(-kappa * l0 * l0 * d / (2.0 * (d * d + l0 * l0 * q)))
}

/// Analytic `da/dkappa` at fixed heading error for the unsaturated command.
pub fn accel_curvature_derivative(
    d: f64,
    kappa: f64,
    eta: f64,
    profile: &LookaheadProfile,
    limits: &GuidanceLimits,
) -> Result<f64> {
    let q = check_feasible(d, kappa)?;
    let l0 = lookahead(profile, d);
    let l1_sq = d * d + l0 * l0 * q;
    let v2 = limits.speed * limits.speed;
    Ok(-v2 * eta.sin() * l0 * l0 * d / l1_sq.powf(1.5))
}

/// Unsaturated command `2 V^2 sin(eta) / L1` without region logic.
pub fn unsaturated_accel(
    d: f64,
    kappa: f64,
    eta: f64,
    profile: &LookaheadProfile,
    limits: &GuidanceLimits,
) -> Result<f64> {
    let l1 = los_length(lookahead(profile, d), d, kappa)?;
    Ok(2.0 * limits.speed * limits.speed * eta.sin() / l1)
}

/// Small-error approximation `2 V^2 d / L1^2`.
pub fn near_path_accel(d: f64, kappa: f64, profile: &LookaheadProfile, limits: &GuidanceLimits) -> Result<f64> {
    let q = check_feasible(d, kappa)?;
    let l0 = lookahead(profile, d);
    Ok(2.0 * limits.speed * limits.speed * d / (d * d + l0 * l0 * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn reference_variable() -> LookaheadProfile {
        LookaheadProfile::variable(50.0, 150.0, 30.0).unwrap()
    }

    fn limits(v: f64, r: f64) -> GuidanceLimits {
        GuidanceLimits::new(v, r).unwrap()
    }

    #[test]
    fn variable_lookahead_values() {
        let p = reference_variable();
        assert_eq!(p.at(0.0), 50.0);
        // 50 + 100 (1 - e^-1)
        assert_abs_diff_eq!(p.at(30.0), 113.212_055_882_855_77, epsilon = 1e-10);
        assert_abs_diff_eq!(p.at(-30.0), p.at(30.0), epsilon = 0.0);
        assert_abs_diff_eq!(p.at(1000.0), 150.0, epsilon = 1e-10);
    }

    #[test]
    fn tangent_advance_cases() {
        let lim = limits(50.0, 100.0);
        assert_eq!(tangent_advance(100.0, 0.0, 0.003, &lim).unwrap(), 100.0);
        assert_abs_diff_eq!(
            tangent_advance(100.0, 50.0, 0.005, &lim).unwrap(),
            111.803_398_874_989_48,
            epsilon = 1e-10
        );
        let capped = lim.with_eps_proj(10.0).unwrap();
        assert_abs_diff_eq!(
            tangent_advance(100.0, 0.0, 0.01, &capped).unwrap(),
            2000f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(matches!(
            tangent_advance(100.0, -250.0, 0.005, &lim),
            Err(GuidanceError::InfeasibleGeometry { .. })
        ));
    }

    #[test]
    fn projection_error_bound_cases() {
        assert_eq!(projection_error_bound(123.0, 0.0), 0.0);
        assert_abs_diff_eq!(projection_error_bound(2000f64.sqrt(), 0.01), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(projection_error_bound(100.0, 0.005), 25.0, epsilon = 1e-12);
    }

    #[test]
    fn los_length_cases() {
        assert_eq!(los_length(50.0, 0.0, 0.0).unwrap(), 50.0);
        assert_abs_diff_eq!(los_length(100.0, 50.0, 0.0).unwrap(), 12500f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            los_length(100.0, 50.0, 0.005).unwrap(),
            15000f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(los_length(100.0, -250.0, 0.005).is_err());
    }

    #[test]
    fn heading_error_cases() {
        let x = Point::new(1.0, 0.0);
        assert_eq!(heading_error(x, Point::new(3.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            heading_error(x, Point::new(0.0, 1.0)).unwrap(),
            PI / 2.0,
            epsilon = 1e-15
        );
        let near_pi = heading_error(x, Point::new(-1.0, 1e-3)).unwrap();
        assert_abs_diff_eq!(near_pi, PI - 1e-3f64.atan(), epsilon = 1e-12);
        assert_abs_diff_eq!(near_pi, 3.1406, epsilon = 1e-4);
        // exactly opposite maps to +pi, not -pi
        assert_eq!(heading_error(x, Point::new(-1.0, 0.0)).unwrap(), PI);
        assert_eq!(heading_error(Point::zeros(), x), Err(GuidanceError::ZeroVector));
    }

    #[test]
    fn saturation_boundary_cases() {
        let lim = limits(50.0, 100.0);
        assert_eq!(saturation_boundary(200.0, &lim), PI / 2.0);
        assert_eq!(saturation_boundary(350.0, &lim), PI / 2.0);
        assert_abs_diff_eq!(
            saturation_boundary(50.0, &lim),
            0.252_680_255_142_078_7,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(saturation_boundary(150.0, &lim), 0.848_062_078_981_481, epsilon = 1e-12);
    }

    #[test]
    fn region_classification() {
        let eb = 0.25f64.asin();
        let g = |eta| TrackingGeometry {
            d: 0.0,
            kappa: 0.0,
            eta,
        };
        assert_eq!(classify_region(&g(0.0), eb), Region::S1);
        assert_eq!(classify_region(&g(0.5), eb), Region::S2);
        assert_eq!(classify_region(&g(-0.5), eb), Region::S3);
        assert_eq!(classify_region(&g(eb), eb), Region::S1);
        assert_eq!(classify_region(&g(-eb), eb), Region::S1);
    }

    #[test]
    fn lateral_accel_cases() {
        let lim = limits(50.0, 100.0);
        let c100 = LookaheadProfile::constant(100.0).unwrap();
        let zero = lateral_accel(
            &TrackingGeometry {
                d: 0.0,
                kappa: 0.0,
                eta: 0.0,
            },
            &c100,
            &lim,
        )
        .unwrap();
        assert_eq!(zero.accel, 0.0);
        assert_eq!(zero.region, Region::S1);

        let cmd = lateral_accel(
            &TrackingGeometry {
                d: 50.0,
                kappa: 0.0,
                eta: 0.1,
            },
            &c100,
            &lim,
        )
        .unwrap();
        assert_abs_diff_eq!(cmd.l1, 111.803_398_874_989_48, epsilon = 1e-9);
        assert_abs_diff_eq!(cmd.eta_bar, 0.559_016_994_374_947_4f64.asin(), epsilon = 1e-12);
        assert_abs_diff_eq!(cmd.eta_bar, 0.5933, epsilon = 5e-4);
        assert_eq!(cmd.region, Region::S1);
        assert_abs_diff_eq!(cmd.accel, 5000.0 * 0.1f64.sin() / 12500f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(cmd.accel, 4.4648, epsilon = 5e-4);
        assert!(!cmd.saturated);
    }

    #[test]
    fn saturated_command_hits_the_limit() {
        let lim = limits(50.0, 100.0);
        let c = LookaheadProfile::constant(50.0).unwrap();
        for eta in [1.0, 2.0, 3.0, PI] {
            let up = lateral_accel(
                &TrackingGeometry {
                    d: 0.0,
                    kappa: 0.0,
                    eta,
                },
                &c,
                &lim,
            )
            .unwrap();
            let down = lateral_accel(
                &TrackingGeometry {
                    d: 0.0,
                    kappa: 0.0,
                    eta: -eta,
                },
                &c,
                &lim,
            )
            .unwrap();
            assert_eq!(up.region, Region::S2);
            assert_eq!(down.region, Region::S3);
            assert_relative_eq!(up.accel, 25.0, max_relative = 1e-12);
            assert_relative_eq!(down.accel, -25.0, max_relative = 1e-12);
            assert_relative_eq!(up.curvature_cmd, 0.01, max_relative = 1e-12);
        }
    }

    #[test]
    fn feasibility_cases() {
        let c100 = LookaheadProfile::constant(100.0).unwrap();
        let straight = feasibility_check(5000.0, 0.0, &c100);
        assert!(straight.feasible && straight.arc_limit.is_none());

        let f = feasibility_check(50.0, 0.005, &c100);
        assert!(f.feasible);
        assert_abs_diff_eq!(f.one_plus_dk, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(f.l1.unwrap(), 122.474_487_139_158_9, epsilon = 1e-9);
        assert_abs_diff_eq!(f.arc_limit.unwrap(), 350.0, epsilon = 1e-12);

        let bad = feasibility_check(-250.0, 0.005, &c100);
        assert!(!bad.feasible);
        assert_abs_diff_eq!(bad.one_plus_dk, -0.25, epsilon = 1e-15);
        assert!(bad.l1.is_none());
    }

    #[test]
    fn curvature_sensitivity_cases() {
        let c50 = LookaheadProfile::constant(50.0).unwrap();
        assert_eq!(curvature_sensitivity(0.0, 0.01, &c50).unwrap(), 0.0);
        let s = curvature_sensitivity(10.0, 0.01, &c50).unwrap();
        assert_abs_diff_eq!(s, -250.0 / (2.0 * 2850.0), epsilon = 1e-15);
        assert_abs_diff_eq!(s, -0.04386, epsilon = 1e-5);
        // near-path limit -kappa d / 2
        assert!((s - -0.05).abs() < 0.01);
    }

    #[test]
    fn far_field_sensitivity_below_half() {
        for &kappa in &[-0.009, -0.004, 0.001, 0.005, 0.01] {
            for &d in &[-90.0, -40.0, -5.0, 5.0, 40.0, 90.0] {
                if 1.0 + d * kappa <= 0.0 {
                    continue;
                }
                let huge = LookaheadProfile::constant(1e7).unwrap();
                let s = curvature_sensitivity(d, kappa, &huge).unwrap();
                let limit = -kappa * d / (2.0 * (1.0 + d * kappa));
                assert_relative_eq!(s, limit, max_relative = 1e-6);
                // the far-field limit stays inside (-1/2, 1/2) only while d kappa > -1/2
                if d * kappa > -0.5 {
                    assert!(s.abs() < 0.5, "sigma {s} at d={d} kappa={kappa}");
                } else {
                    assert!(s >= 0.5, "sigma {s} at d={d} kappa={kappa}");
                }
            }
        }
    }

    #[test]
    fn profile_validation() {
        let err = LookaheadProfile::variable(50.0, 40.0, 30.0).unwrap_err();
        assert!(matches!(err, GuidanceError::Validation { ref key, .. } if key == "L_max"));
        assert!(LookaheadProfile::variable(50.0, 50.0, 30.0).is_ok());
        assert!(LookaheadProfile::variable(0.0, 50.0, 30.0).is_err());
        assert!(LookaheadProfile::variable(10.0, 50.0, 0.0).is_err());
        assert!(LookaheadProfile::constant(-1.0).is_err());
        assert!(GuidanceLimits::new(0.0, 100.0).is_err());
        assert!(GuidanceLimits::new(10.0, 100.0).unwrap().with_eps_proj(-1.0).is_err());
    }

    #[test]
    fn profile_derivative_matches_finite_difference() {
        let p = reference_variable();
        for d in [-80.0, -3.0, 0.5, 12.0, 60.0] {
            let h = 1e-6;
            let fd = (p.at(d + h) - p.at(d - h)) / (2.0 * h);
            assert_relative_eq!(p.derivative(d), fd, max_relative = 1e-7);
        }
        assert_eq!(p.derivative(0.0), 0.0);
    }
}
