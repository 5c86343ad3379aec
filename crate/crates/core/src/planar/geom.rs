//! Small helpers for points of R² stored as `[f64; 2]`.

use std::f64::consts::PI;

pub type Point = [f64; 2];

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Rotation by +90°.
#[inline]
pub fn perp(a: Point) -> Point {
    [-a[1], a[0]]
}

#[inline]
pub fn polar(r: f64, theta: f64) -> Point {
    [r * theta.cos(), r * theta.sin()]
}

pub fn normalize(a: Point) -> Option<Point> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

/// Angle of `a` in `[0, 2π)`.
pub fn angle_0_2pi(a: Point) -> f64 {
    let t = a[1].atan2(a[0]);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Wraps an angle difference into `(-π, π]`.
pub fn wrap_pi(mut t: f64) -> f64 {
    t %= 2.0 * PI;
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

pub fn dist_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let d = sub(b, a);
    let len2 = dot(d, d);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), d) / len2).clamp(0.0, 1.0);
    dist(p, add(a, scale(d, t)))
}

/// Intersection points of two circles, if they cross.
pub fn circle_circle(c1: Point, r1: f64, c2: Point, r2: f64) -> Option<[Point; 2]> {
    let d = dist(c1, c2);
    if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
        return None;
    }
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let u = scale(sub(c2, c1), 1.0 / d);
    let m = add(c1, scale(u, a));
    let w = scale(perp(u), h);
    Some([add(m, w), sub(m, w)])
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox {
    pub min: Point,
    pub max: Point,
}

impl Bbox {
    pub fn around(center: Point, r: f64) -> Self {
        Bbox {
            min: [center[0] - r, center[1] - r],
            max: [center[0] + r, center[1] + r],
        }
    }

    pub fn union(&self, o: &Bbox) -> Bbox {
        Bbox {
            min: [self.min[0].min(o.min[0]), self.min[1].min(o.min[1])],
            max: [self.max[0].max(o.max[0]), self.max[1].max(o.max[1])],
        }
    }

    pub fn intersection(&self, o: &Bbox) -> Bbox {
        Bbox {
            min: [self.min[0].max(o.min[0]), self.min[1].max(o.min[1])],
            max: [self.max[0].min(o.max[0]), self.max[1].min(o.max[1])],
        }
    }

    pub fn inflate(&self, m: f64) -> Bbox {
        Bbox {
            min: [self.min[0] - m, self.min[1] - m],
            max: [self.max[0] + m, self.max[1] + m],
        }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn is_empty(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0)
    }
}

/// Signed area of a closed polyline (first point repeated at the end or not).
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        a += cross(p, q);
    }
    0.5 * a
}
