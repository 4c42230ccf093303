//! Fixtures shared by the criterion benchmarks.

use lookahead_core::{GridSpec, GuidanceLimits, LookaheadProfile, PathModel, Point, Traversal};

pub fn reference_limits() -> GuidanceLimits {
    GuidanceLimits::new(50.0, 100.0).expect("valid limits")
}

pub fn reference_profiles() -> (LookaheadProfile, LookaheadProfile) {
    (
        LookaheadProfile::constant(50.0).expect("valid profile"),
        LookaheadProfile::variable(50.0, 150.0, 30.0).expect("valid profile"),
    )
}

pub fn reference_grid(n: usize) -> GridSpec {
    GridSpec::default().with_resolution(n, n)
}

pub fn reference_ellipse() -> PathModel {
    PathModel::ellipse(Point::zeros(), 180.0, 110.0, Traversal::Ccw).expect("valid ellipse")
}

/// Deterministic spread of query points around the reference ellipse.
pub fn query_points(n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = i as f64 * 2.399_963_229_728_653;
            let r = 0.3 + 1.7 * ((i * 7919) % n) as f64 / n as f64;
            Point::new(180.0 * r * t.cos(), 110.0 * r * t.sin())
        })
        .collect()
}
