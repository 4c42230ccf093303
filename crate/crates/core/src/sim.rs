//! Constant-speed planar kinematics driven by the guidance command.

use crate::error::{GuidanceError, Result};
use crate::geometry::{wrap_angle, PathModel, Point};
use crate::guidance::{
    command_from_los, heading_error, lookahead, tangent_advance, GuidanceLimits, LookaheadProfile, Region,
};
use crate::stability::lyapunov_value;

/// Planar pose of the vehicle; heading in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        VehicleState {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn velocity(&self, speed: f64) -> Point {
        Point::new(self.heading.cos(), self.heading.sin()) * speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

impl Integrator {
    pub fn as_str(self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
            Integrator::Euler => "euler",
        }
    }
}

pub const DEFAULT_DT: f64 = 0.01;
const MAX_STEPS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    /// Settling band; `None` means `max(1 m, 2% of |d(0)|)`.
    pub settle_eps: Option<f64>,
}

impl SimConfig {
    pub fn new(t_final: f64) -> Self {
        SimConfig {
            dt: DEFAULT_DT,
            t_final,
            integrator: Integrator::Rk4,
            settle_eps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(GuidanceError::validation("dt", "must be positive"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(GuidanceError::validation("t_final", "must be positive"));
        }
        if self.dt > self.t_final {
            return Err(GuidanceError::validation("dt", "must not exceed t_final"));
        }
        if self.t_final / self.dt > MAX_STEPS {
            return Err(GuidanceError::validation("dt", "more than 1e7 steps requested"));
        }
        if let Some(eps) = self.settle_eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(GuidanceError::validation("settle_eps", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Settling band for a run starting at cross-track error `d0`.
    pub fn settle_band(&self, d0: f64) -> f64 {
        self.settle_eps.unwrap_or_else(|| default_settle_band(d0))
    }
}

pub fn default_settle_band(d0: f64) -> f64 {
    (0.02 * d0.abs()).max(1.0)
}

/// One integration step of the kinematics with the command held constant.
pub fn step(
    state: &VehicleState,
    accel: f64,
    limits: &GuidanceLimits,
    dt: f64,
    integrator: Integrator,
) -> VehicleState {
    let v = limits.speed;
    let turn_rate = accel / v;
    let deriv = |heading: f64| (v * heading.cos(), v * heading.sin());
    let (dx, dy) = match integrator {
        Integrator::Euler => {
            let (vx, vy) = deriv(state.heading);
            (vx * dt, vy * dt)
        }
        Integrator::Rk4 => {
            // heading is linear in time under a held command
            let k1 = deriv(state.heading);
            let k2 = deriv(state.heading + 0.5 * dt * turn_rate);
            let k4 = deriv(state.heading + dt * turn_rate);
            (
                dt / 6.0 * (k1.0 + 4.0 * k2.0 + k4.0),
                dt / 6.0 * (k1.1 + 4.0 * k2.1 + k4.1),
            )
        }
    };
    VehicleState {
        x: state.x + dx,
        y: state.y + dy,
        heading: wrap_angle(state.heading + turn_rate * dt),
    }
}

/// One row of a simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub d: f64,
    pub eta: f64,
    pub kappa: f64,
    pub l0_eff: f64,
    pub l1: f64,
    pub eta_bar: f64,
    pub region: Region,
    pub accel: f64,
    /// Lyapunov value; NaN where the quadrature interval is infeasible.
    pub lyapunov: f64,
    /// The target advance was clamped to zero because `1 + d kappa <= 0`.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimDiagnostics {
    /// The initial condition was outside the feasibility set.
    pub initially_infeasible: bool,
    pub clamped_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub limits: GuidanceLimits,
    pub profile: LookaheadProfile,
    pub samples: Vec<TrajectorySample>,
    pub diagnostics: SimDiagnostics,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn cross_track(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.d).collect()
    }

    pub fn accel(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.accel).collect()
    }

    pub fn first(&self) -> &TrajectorySample {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// Evaluate the guidance law at `state` and build the trajectory row.
fn evaluate(
    path: &PathModel,
    profile: &LookaheadProfile,
    limits: &GuidanceLimits,
    state: &VehicleState,
    t: f64,
) -> Result<TrajectorySample> {
    let proj = path
        .project(state.position())
        .map_err(|e| GuidanceError::ProjectionFailure { t, source: Box::new(e) })?;
    let d = proj.cross_track;
    let kappa = proj.curvature;
    let l0_eff = lookahead(profile, d);
    let (s, clamped) = match tangent_advance(l0_eff, d, kappa, limits) {
        Ok(s) => (s, false),
        Err(_) => (0.0, true),
    };
    let target = proj.tangent_point_at_offset(s);
    let eta = heading_error(state.velocity(limits.speed), target - state.position())?;
    let cmd = command_from_los(l0_eff, s, d, eta, limits);
    let lyapunov = lyapunov_value(d, eta, kappa, profile, limits)
        .map(|l| l.v)
        .unwrap_or(f64::NAN);
    Ok(TrajectorySample {
        t,
        x: state.x,
        y: state.y,
        psi: state.heading,
        d,
        eta,
        kappa,
        l0_eff,
        l1: cmd.l1,
        eta_bar: cmd.eta_bar,
        region: cmd.region,
        accel: cmd.accel,
        lyapunov,
        clamped,
    })
}

/// Closed-loop run from `init` to `cfg.t_final`, sampled every `cfg.dt`.
///
/// Aborts with `RunawayDivergence` once `|d|` exceeds 100 times
/// `max(|d(0)|, L0(0))`.
pub fn run_simulation(
    path: &PathModel,
    profile: &LookaheadProfile,
    limits: &GuidanceLimits,
    init: &VehicleState,
    cfg: &SimConfig,
) -> Result<TrajectoryRecord> {
    path.validate()?;
    profile.validate()?;
    limits.validate()?;
    cfg.validate()?;

    let steps = cfg.steps();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut state = VehicleState::new(init.x, init.y, init.heading);
    let mut diagnostics = SimDiagnostics::default();

    let first = evaluate(path, profile, limits, &state, 0.0)?;
    diagnostics.initially_infeasible = !crate::guidance::feasibility_check(first.d, first.kappa, profile).feasible;
    let runaway = 100.0 * first.d.abs().max(profile.l_min());
    samples.push(first);

    for i in 1..=steps {
        let accel = samples[i - 1].accel;
        state = step(&state, accel, limits, cfg.dt, cfg.integrator);
        let t = i as f64 * cfg.dt;
        let sample = evaluate(path, profile, limits, &state, t)?;
        if sample.d.abs() > runaway {
            return Err(GuidanceError::RunawayDivergence {
                t,
                d: sample.d.abs(),
                limit: runaway,
            });
        }
        if sample.clamped {
            diagnostics.clamped_steps += 1;
        }
        samples.push(sample);
    }
    if samples[0].clamped {
        diagnostics.clamped_steps += 1;
    }

    Ok(TrajectoryRecord {
        dt: cfg.dt,
        limits: *limits,
        profile: *profile,
        samples,
        diagnostics,
    })
}
