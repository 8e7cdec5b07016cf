//! Planar oriented-bounding-box primitives.
//!
//! Every actor footprint is an [`OrientedBox`]: a rectangle with a center,
//! half extents along its own axes and a yaw. The boolean contact test uses
//! the separating-axis theorem over the four face normals; the area of
//! contact is computed independently by clipping one quad against the
//! other's half-planes, so the two can be cross-checked.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Intersection area (m²) above which two boxes count as overlapping.
pub const EPS_AREA: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can land exactly on 2π for tiny negative inputs
    if wrapped >= PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Point2,
    pub half_length: f64,
    pub half_width: f64,
    pub yaw: f64,
}

impl OrientedBox {
    /// Builds a box, normalizing `yaw`.
    ///
    /// Panics if a half extent is not strictly positive and finite; footprints
    /// come from validated configuration so a bad value here is a bug.
    pub fn new(center: Point2, half_length: f64, half_width: f64, yaw: f64) -> Self {
        assert!(
            half_length > 0.0 && half_length.is_finite(),
            "half_length must be positive, got {half_length}"
        );
        assert!(
            half_width > 0.0 && half_width.is_finite(),
            "half_width must be positive, got {half_width}"
        );
        Self {
            center,
            half_length,
            half_width,
            yaw: normalize_angle(yaw),
        }
    }

    /// Unit vector along the box's length.
    pub fn axis_long(&self) -> Point2 {
        Point2::new(self.yaw.cos(), self.yaw.sin())
    }

    /// Unit vector along the box's width (long axis rotated by +90°).
    pub fn axis_lat(&self) -> Point2 {
        Point2::new(-self.yaw.sin(), self.yaw.cos())
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_length * self.half_width
    }

    /// Whether `p` lies inside or on the boundary of the box.
    pub fn contains(&self, p: Point2) -> bool {
        let rel = p - self.center;
        rel.dot(self.axis_long()).abs() <= self.half_length
            && rel.dot(self.axis_lat()).abs() <= self.half_width
    }

    /// Same box moved to a new pose.
    pub fn with_pose(&self, center: Point2, yaw: f64) -> Self {
        Self::new(center, self.half_length, self.half_width, yaw)
    }
}

/// Corners in counter-clockwise order, starting at the front-right corner.
pub fn corners(b: &OrientedBox) -> [Point2; 4] {
    let u = b.axis_long() * b.half_length;
    let v = b.axis_lat() * b.half_width;
    let c = b.center;
    [c + u - v, c + u + v, c - u + v, c - u - v]
}

/// Smallest per-axis push-out distance over the four face normals. Negative
/// or zero when some axis separates the boxes.
fn sat_min_depth(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let (ua, va) = (a.axis_long(), a.axis_lat());
    let (ub, vb) = (b.axis_long(), b.axis_lat());
    let offset = b.center - a.center;
    let mut depth = f64::INFINITY;
    for axis in [ua, va, ub, vb] {
        let ra = a.half_length * ua.dot(axis).abs() + a.half_width * va.dot(axis).abs();
        let rb = b.half_length * ub.dot(axis).abs() + b.half_width * vb.dot(axis).abs();
        let sep = offset.dot(axis);
        // push-out in either direction along the axis, the smaller one wins
        let push = (ra + rb - sep).min(ra + rb + sep);
        depth = depth.min(push);
    }
    depth
}

/// Separating-axis contact test.
pub fn overlaps(a: &OrientedBox, b: &OrientedBox) -> bool {
    sat_min_depth(a, b) > 0.0
}

/// Minimum translation distance along the four SAT axes; zero if disjoint.
pub fn penetration_depth(a: &OrientedBox, b: &OrientedBox) -> f64 {
    sat_min_depth(a, b).max(0.0)
}

pub fn center_distance(a: &OrientedBox, b: &OrientedBox) -> f64 {
    (a.center - b.center).norm()
}

/// Area of `a ∩ b`, by clipping `a`'s quad against each edge of `b`.
pub fn intersection_area(a: &OrientedBox, b: &OrientedBox) -> f64 {
    // quick reject keeps the clip off the hot path for distant actors
    let reach = a.half_length.hypot(a.half_width) + b.half_length.hypot(b.half_width);
    if center_distance(a, b) > reach {
        return 0.0;
    }
    let clip = corners(b);
    let mut poly: Vec<Point2> = corners(a).to_vec();
    let mut next = Vec::with_capacity(8);
    for i in 0..4 {
        let p0 = clip[i];
        let edge = clip[(i + 1) % 4] - p0;
        let side = |p: Point2| edge.cross(p - p0);
        next.clear();
        for j in 0..poly.len() {
            let cur = poly[j];
            let prev = poly[(j + poly.len() - 1) % poly.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    next.push(segment_cut(prev, cur, sp, sc));
                }
                next.push(cur);
            } else if sp >= 0.0 {
                next.push(segment_cut(prev, cur, sp, sc));
            }
        }
        std::mem::swap(&mut poly, &mut next);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    polygon_area(&poly).max(0.0)
}

fn segment_cut(p: Point2, q: Point2, sp: f64, sq: f64) -> Point2 {
    let t = sp / (sp - sq);
    p + (q - p) * t
}

/// Signed shoelace area (positive for CCW).
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum();
    0.5 * twice
}

/// Intersection over union of the two footprints.
pub fn iou(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let inter = intersection_area(a, b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}
