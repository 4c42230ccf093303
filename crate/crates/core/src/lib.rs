//! Look-ahead path-following guidance for a constant-speed planar vehicle.
//!
//! Constant and error-dependent (variable) look-ahead laws, their saturation
//! envelopes, a fixed-step kinematic simulator with Lyapunov diagnostics, and
//! the usual settling/effort/overshoot metrics.
//!
//! ```
//! use lookahead_core::{lateral_accel, GuidanceLimits, LookaheadProfile, TrackingGeometry};
//!
//! let limits = GuidanceLimits::new(50.0, 100.0).unwrap();
//! let profile = LookaheadProfile::variable(50.0, 150.0, 30.0).unwrap();
//! let cmd = lateral_accel(&TrackingGeometry { d: 20.0, kappa: 0.0, eta: 0.1 }, &profile, &limits).unwrap();
//! assert!(cmd.accel.abs() <= limits.max_accel());
//! ```

pub mod envelope;
pub mod error;
pub mod export;
pub mod geometry;
pub mod guidance;
pub mod metrics;
pub mod scenario;
pub mod sim;
pub mod stability;

pub use envelope::{
    analyze_envelope, boundary_gap, envelope_gain, polar_map, ratio_range, ratio_sweep, unsaturated_fraction,
    BoundaryGap, EnvelopeGain, EnvelopeReport, GridSpec, PolarPoint, RatioGain, SweepBase,
};
pub use error::{GuidanceError, Result};
pub use geometry::{wrap_angle, PathModel, PathProjection, Point, Traversal};
pub use guidance::{
    feasibility_check, heading_error, lateral_accel, lookahead, los_length, saturation_boundary, tangent_advance,
    Feasibility, GuidanceCommand, GuidanceLimits, LookaheadProfile, Region, TrackingGeometry,
};
pub use metrics::{control_effort, peak_overshoot, settling_time, PerformanceReport};
pub use scenario::{parse_envelope_config, parse_scenario, EnvelopeConfig, Scenario};
pub use sim::{run_simulation, step, Integrator, SimConfig, TrajectoryRecord, TrajectorySample, VehicleState};
pub use stability::{lyapunov_value, stability_diagnostics, LyapunovValue, StabilityReport};
