//! Desired paths and closest-point queries in the local Frenet frame.
//!
//! Sign conventions used throughout the crate:
//!
//! * the path normal is the unit tangent rotated by +90 degrees,
//! * cross-track error is `d = (P - O) . normal`,
//! * curvature is positive when the path turns toward that normal, so
//!   counter-clockwise circles and ellipses have `kappa > 0` and an inward
//!   normal.

use nalgebra::Vector2;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{GuidanceError, Result};

/// Planar point or vector in metres.
pub type Point = Vector2<f64>;

/// Two closest-point candidates closer than this (in distance) are a tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

const NEWTON_MAX_ITER: usize = 50;
const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Direction in which a closed path is traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traversal {
    Ccw,
    Cw,
}

impl Traversal {
    fn sign(self) -> f64 {
        match self {
            Traversal::Ccw => 1.0,
            Traversal::Cw => -1.0,
        }
    }
}

/// A desired path: straight line, circle or axis-aligned ellipse.
///
/// Lines are parameterized by arc length from the anchor; circles and
/// ellipses by the central parametric angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathModel {
    StraightLine {
        anchor: Point,
        direction: Point,
    },
    Circle {
        center: Point,
        radius: f64,
        traversal: Traversal,
    },
    Ellipse {
        center: Point,
        semi_major: f64,
        semi_minor: f64,
        traversal: Traversal,
    },
}

/// Result of projecting a position onto a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathProjection {
    pub closest_point: Point,
    pub parameter: f64,
    pub tangent_angle: f64,
    /// Signed curvature at the closest point [1/m].
    pub curvature: f64,
    /// Signed cross-track error [m].
    pub cross_track: f64,
    pub normal: Point,
}

impl PathProjection {
    pub fn tangent(&self) -> Point {
        Point::new(self.tangent_angle.cos(), self.tangent_angle.sin())
    }

    /// Point reached by advancing `s` metres along the tangent at the closest point.
    pub fn tangent_point_at_offset(&self, s: f64) -> Point {
        self.closest_point + self.tangent() * s
    }
}

fn rotate_ccw(v: Point) -> Point {
    Point::new(-v.y, v.x)
}

fn finite(p: Point) -> bool {
    p.x.is_finite() && p.y.is_finite()
}

impl PathModel {
    /// Straight line through `anchor`; `direction` is normalized.
    pub fn line(anchor: Point, direction: Point) -> Result<Self> {
        let n = direction.norm();
        if !finite(anchor) || !n.is_finite() || n < 1e-12 {
            return Err(GuidanceError::validation(
                "direction",
                "line direction must be a finite nonzero vector",
            ));
        }
        Ok(PathModel::StraightLine {
            anchor,
            direction: direction / n,
        })
    }

    pub fn circle(center: Point, radius: f64, traversal: Traversal) -> Result<Self> {
        let path = PathModel::Circle {
            center,
            radius,
            traversal,
        };
        path.validate()?;
        Ok(path)
    }

    pub fn ellipse(center: Point, semi_major: f64, semi_minor: f64, traversal: Traversal) -> Result<Self> {
        let path = PathModel::Ellipse {
            center,
            semi_major,
            semi_minor,
            traversal,
        };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PathModel::StraightLine { anchor, direction } => {
                if !finite(anchor) {
                    return Err(GuidanceError::validation("anchor", "must be finite"));
                }
                if (direction.norm() - 1.0).abs() > 1e-12 {
                    return Err(GuidanceError::validation("direction", "must have unit norm"));
                }
            }
            PathModel::Circle { center, radius, .. } => {
                if !finite(center) {
                    return Err(GuidanceError::validation("center", "must be finite"));
                }
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(GuidanceError::validation("radius", "must be positive"));
                }
            }
            PathModel::Ellipse {
                center,
                semi_major,
                semi_minor,
                ..
            } => {
                if !finite(center) {
                    return Err(GuidanceError::validation("center", "must be finite"));
                }
                if !(semi_minor > 0.0 && semi_minor.is_finite()) {
                    return Err(GuidanceError::validation("b", "semi-minor axis must be positive"));
                }
                if !(semi_major >= semi_minor && semi_major.is_finite()) {
                    return Err(GuidanceError::validation(
                        "a",
                        "semi-major axis must be >= semi-minor axis",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn point_at(&self, parameter: f64) -> Point {
        match *self {
            PathModel::StraightLine { anchor, direction } => anchor + direction * parameter,
            PathModel::Circle {
                center,
                radius,
                traversal,
            } => center + Point::new(parameter.cos(), traversal.sign() * parameter.sin()) * radius,
            PathModel::Ellipse {
                center,
                semi_major,
                semi_minor,
                traversal,
            } => {
                center
                    + Point::new(
                        semi_major * parameter.cos(),
                        traversal.sign() * semi_minor * parameter.sin(),
                    )
            }
        }
    }

    /// Unit tangent in the direction of travel.
    pub fn tangent_at(&self, parameter: f64) -> Point {
        match *self {
            PathModel::StraightLine { direction, .. } => direction,
            PathModel::Circle { traversal, .. } => Point::new(-parameter.sin(), traversal.sign() * parameter.cos()),
            PathModel::Ellipse {
                semi_major,
                semi_minor,
                traversal,
                ..
            } => Point::new(
                -semi_major * parameter.sin(),
                traversal.sign() * semi_minor * parameter.cos(),
            )
            .normalize(),
        }
    }

    /// Signed curvature; positive when the path bends toward the +90 degree normal.
    pub fn curvature_at(&self, parameter: f64) -> f64 {
        match *self {
            PathModel::StraightLine { .. } => 0.0,
            PathModel::Circle { radius, traversal, .. } => traversal.sign() / radius,
            PathModel::Ellipse {
                semi_major: a,
                semi_minor: b,
                traversal,
                ..
            } => {
                let (s, c) = parameter.sin_cos();
                let speed_sq = a * a * s * s + b * b * c * c;
                traversal.sign() * a * b / speed_sq.powf(1.5)
            }
        }
    }

    /// Closest point on the path to `position`, with the local frame there.
    pub fn project(&self, position: Point) -> Result<PathProjection> {
        if !finite(position) {
            return Err(GuidanceError::validation("position", "must be finite"));
        }
        let parameter = match *self {
            PathModel::StraightLine { anchor, direction } => (position - anchor).dot(&direction),
            PathModel::Circle { center, traversal, .. } => {
                let q = position - center;
                if q.norm() < TIE_TOLERANCE {
                    return Err(GuidanceError::AmbiguousProjection {
                        tolerance: TIE_TOLERANCE,
                    });
                }
                (traversal.sign() * q.y).atan2(q.x)
            }
            PathModel::Ellipse {
                center,
                semi_major,
                semi_minor,
                traversal,
            } => {
                let q = position - center;
                ellipse_parameter(semi_major, semi_minor, q.x, traversal.sign() * q.y)?
            }
        };
        Ok(self.frame_at(parameter, position))
    }

    fn frame_at(&self, parameter: f64, position: Point) -> PathProjection {
        let closest_point = self.point_at(parameter);
        let tangent = self.tangent_at(parameter);
        let normal = rotate_ccw(tangent);
        PathProjection {
            closest_point,
            parameter,
            tangent_angle: tangent.y.atan2(tangent.x),
            curvature: self.curvature_at(parameter),
            cross_track: (position - closest_point).dot(&normal),
            normal,
        }
    }
}

/// Orthogonality function for a counter-clockwise ellipse `(a cos t, b sin t)`:
/// `(P - E(t)) . E'(t)`, zero at every stationary point of the distance.
fn ortho(a: f64, b: f64, x: f64, y: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (a * a - b * b) * s * c - a * x * s + b * y * c
}

fn ortho_dt(a: f64, b: f64, x: f64, y: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (a * a - b * b) * (c * c - s * s) - a * x * c - b * y * s
}

fn ellipse_dist_sq(a: f64, b: f64, x: f64, y: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (a * c - x).powi(2) + (b * s - y).powi(2)
}

/// Newton iteration on the parametric angle. Returns `None` if it fails to
/// converge on the orthogonality residual.
fn newton_from(a: f64, b: f64, x: f64, y: f64, seed: f64) -> Option<f64> {
    let mut t = seed;
    for _ in 0..NEWTON_MAX_ITER {
        let f = ortho(a, b, x, y, t);
        let (s, c) = t.sin_cos();
        let speed = (a * a * s * s + b * b * c * c).sqrt();
        let dist = ellipse_dist_sq(a, b, x, y, t).sqrt();
        if (f / speed).abs() <= ORTHOGONALITY_TOL * (1.0 + dist) {
            return Some(t);
        }
        let fp = ortho_dt(a, b, x, y, t);
        if fp.abs() < 1e-300 {
            return None;
        }
        let step = (f / fp).clamp(-FRAC_PI_4 / 2.0, FRAC_PI_4 / 2.0);
        t -= step;
    }
    None
}

/// Bracketed closest point for a query in the closed first quadrant.
///
/// The minimizer of a first-quadrant query lies in the first quadrant and is
/// the unique root of a monotone secular function, found by bisection.
fn first_quadrant_closest(a: f64, b: f64, x: f64, y: f64) -> (f64, f64) {
    if y > 0.0 {
        if x > 0.0 {
            let z0 = x / a;
            let z1 = y / b;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return (x, y);
            }
            let r0 = (a / b).powi(2);
            let n0 = r0 * z0;
            let mut s0 = z1 - 1.0;
            let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
            let mut s = 0.0;
            for _ in 0..2200 {
                s = 0.5 * (s0 + s1);
                if s == s0 || s == s1 {
                    break;
                }
                let ratio0 = n0 / (s + r0);
                let ratio1 = z1 / (s + 1.0);
                let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
                if gs > 0.0 {
                    s0 = s;
                } else if gs < 0.0 {
                    s1 = s;
                } else {
                    break;
                }
            }
            (r0 * x / (s + r0), y / (s + 1.0))
        } else {
            (0.0, b)
        }
    } else {
        let numer = a * x;
        let denom = a * a - b * b;
        if numer < denom {
            let ratio = numer / denom;
            (a * ratio, b * (1.0 - ratio * ratio).max(0.0).sqrt())
        } else {
            (a, 0.0)
        }
    }
}

/// Parametric angle of the closest point on the counter-clockwise ellipse
/// `(a cos t, b sin t)` to the local query `(x, y)`.
fn ellipse_parameter(a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    let dist = |t: f64| ellipse_dist_sq(a, b, x, y, t).sqrt();

    let mut candidates: Vec<f64> = (0..4)
        .map(|k| FRAC_PI_4 + k as f64 * FRAC_PI_2)
        .filter_map(|seed| newton_from(a, b, x, y, seed))
        .collect();

    let (u, v) = first_quadrant_closest(a, b, x.abs(), y.abs());
    let sx = if x < 0.0 { -1.0 } else { 1.0 };
    let sy = if y < 0.0 { -1.0 } else { 1.0 };
    let bracketed = (sy * v / b).atan2(sx * u / a);
    candidates.push(newton_from(a, b, x, y, bracketed).unwrap_or(bracketed));

    let best = candidates
        .iter()
        .copied()
        .min_by(|l, r| dist(*l).total_cmp(&dist(*r)))
        .expect("at least one candidate");
    let best_dist = dist(best);
    let best_point = Point::new(a * best.cos(), b * best.sin());

    // Mirror images of the minimizer are the competing minimizers whenever
    // the query sits on (or near) a symmetry axis.
    let mirrors = [
        Point::new(best_point.x, -best_point.y),
        Point::new(-best_point.x, best_point.y),
    ];
    let competing = candidates
        .iter()
        .map(|&t| Point::new(a * t.cos(), b * t.sin()))
        .chain(mirrors);
    for p in competing {
        let d = (p - Point::new(x, y)).norm();
        if (p - best_point).norm() > 1e-6 && (d - best_dist).abs() <= TIE_TOLERANCE {
            return Err(GuidanceError::AmbiguousProjection {
                tolerance: TIE_TOLERANCE,
            });
        }
    }
    Ok(wrap_angle(best))
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ccw_ellipse() -> PathModel {
        PathModel::ellipse(Point::zeros(), 180.0, 110.0, Traversal::Ccw).unwrap()
    }

    #[test]
    fn line_projection_drops_onto_axis() {
        let line = PathModel::line(Point::zeros(), Point::new(1.0, 0.0)).unwrap();
        let p = line.project(Point::new(3.0, 5.0)).unwrap();
        assert_abs_diff_eq!(p.closest_point, Point::new(3.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(p.cross_track, 5.0, epsilon = 1e-12);
        assert_eq!(p.curvature, 0.0);
    }

    #[test]
    fn circle_projection_outside_point() {
        let circle = PathModel::circle(Point::zeros(), 100.0, Traversal::Ccw).unwrap();
        let p = circle.project(Point::new(150.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p.closest_point, Point::new(100.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(p.cross_track, -50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.curvature, 0.01, epsilon = 1e-15);
        // inward normal
        assert_abs_diff_eq!(p.normal, Point::new(-1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn cw_circle_has_negative_curvature_and_outward_normal() {
        let circle = PathModel::circle(Point::zeros(), 100.0, Traversal::Cw).unwrap();
        let p = circle.project(Point::new(150.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p.curvature, -0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(p.cross_track, 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.tangent(), Point::new(0.0, -1.0), epsilon = 1e-12);
    }

    #[test]
    fn ellipse_projection_on_major_axis() {
        let p = ccw_ellipse().project(Point::new(250.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p.closest_point, Point::new(180.0, 0.0), epsilon = 1e-9);
        assert_abs_diff_eq!(p.cross_track.abs(), 70.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.curvature, 19800.0 / 110f64.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn ellipse_curvature_at_covertex() {
        let k = ccw_ellipse().curvature_at(FRAC_PI_2);
        assert_abs_diff_eq!(k, 19800.0 / 180f64.powi(3), epsilon = 1e-15);
        assert_abs_diff_eq!(k, 0.0033951, epsilon = 1e-7);
    }

    #[test]
    fn straight_line_curvature_is_zero() {
        let line = PathModel::line(Point::new(1.0, 2.0), Point::new(1.0, 1.0)).unwrap();
        assert_eq!(line.curvature_at(-12.5), 0.0);
        assert_eq!(line.curvature_at(1e6), 0.0);
    }

    #[test]
    fn tangent_offset_points() {
        let line = PathModel::line(Point::zeros(), Point::new(1.0, 0.0)).unwrap();
        let p = line.project(Point::new(3.0, 7.0)).unwrap();
        assert_abs_diff_eq!(p.tangent_point_at_offset(40.0), Point::new(43.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(p.tangent_point_at_offset(0.0), p.closest_point, epsilon = 0.0);

        let circle = PathModel::circle(Point::zeros(), 100.0, Traversal::Ccw).unwrap();
        let p = circle.project(Point::new(120.0, 0.0)).unwrap();
        assert_abs_diff_eq!(
            p.tangent_point_at_offset(50.0),
            Point::new(100.0, 50.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn centers_are_ambiguous() {
        let circle = PathModel::circle(Point::new(5.0, 5.0), 10.0, Traversal::Ccw).unwrap();
        assert!(matches!(
            circle.project(Point::new(5.0, 5.0)),
            Err(GuidanceError::AmbiguousProjection { .. })
        ));
        assert!(matches!(
            ccw_ellipse().project(Point::zeros()),
            Err(GuidanceError::AmbiguousProjection { .. })
        ));
        // interior point on the major axis: two mirror minimizers
        assert!(matches!(
            ccw_ellipse().project(Point::new(20.0, 0.0)),
            Err(GuidanceError::AmbiguousProjection { .. })
        ));
    }

    #[test]
    fn ellipse_rejects_bad_axes() {
        let err = PathModel::ellipse(Point::zeros(), 100.0, 110.0, Traversal::Ccw).unwrap_err();
        assert!(matches!(err, GuidanceError::Validation { ref key, .. } if key == "a"));
        assert!(PathModel::circle(Point::zeros(), 0.0, Traversal::Ccw).is_err());
        assert!(PathModel::line(Point::zeros(), Point::zeros()).is_err());
    }

    #[test]
    fn cw_ellipse_mirrors_ccw() {
        let ccw = ccw_ellipse();
        let cw = PathModel::ellipse(Point::zeros(), 180.0, 110.0, Traversal::Cw).unwrap();
        let p = Point::new(130.0, 140.0);
        let a = ccw.project(p).unwrap();
        let b = cw.project(p).unwrap();
        assert_abs_diff_eq!(a.closest_point, b.closest_point, epsilon = 1e-9);
        assert_abs_diff_eq!(a.cross_track, -b.cross_track, epsilon = 1e-9);
        assert_abs_diff_eq!(a.curvature, -b.curvature, epsilon = 1e-12);
    }

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(0.5), 0.5, epsilon = 0.0);
        assert_abs_diff_eq!(wrap_angle(-0.5 - 4.0 * PI), -0.5, epsilon = 1e-12);
    }
}
