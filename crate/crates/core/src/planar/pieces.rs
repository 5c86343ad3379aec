//! Parametrized boundary pieces: segments, circular arcs, spiral arcs and
//! polylines. Each piece is evaluated on `t ∈ [0, 1]`.

use std::f64::consts::PI;

use super::geom::{self, Point};

/// A curve given in polar form `θ ↦ r(θ)(cos θ, sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolarCurve {
    /// `r = 1 + s e^{−θ}`
    Spiral { s: f64 },
    /// `r = 1 + ε(1/2 + arctan(θ + shift)/π)`
    Pinched { epsilon: f64, shift: f64 },
}

impl PolarCurve {
    pub fn radius(&self, theta: f64) -> f64 {
        match *self {
            PolarCurve::Spiral { s } => 1.0 + s * (-theta).exp(),
            PolarCurve::Pinched { epsilon, shift } => {
                1.0 + epsilon * (0.5 + (theta + shift).atan() / PI)
            }
        }
    }

    pub fn point(&self, theta: f64) -> Point {
        geom::polar(self.radius(theta), theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Segment { a: Point, b: Point },
    /// Angles in radians; `end < start` runs clockwise.
    Arc { center: Point, radius: f64, start: f64, end: f64 },
    Polar { curve: PolarCurve, theta0: f64, theta1: f64 },
    Polyline { points: Vec<Point> },
}

impl Piece {
    pub fn eval(&self, t: f64) -> Point {
        match self {
            Piece::Segment { a, b } => geom::add(*a, geom::scale(geom::sub(*b, *a), t)),
            Piece::Arc { center, radius, start, end } => {
                geom::add(*center, geom::polar(*radius, start + (end - start) * t))
            }
            Piece::Polar { curve, theta0, theta1 } => curve.point(theta0 + (theta1 - theta0) * t),
            Piece::Polyline { points } => {
                let n = points.len() - 1;
                let s = (t * n as f64).clamp(0.0, n as f64);
                let k = (s.floor() as usize).min(n - 1);
                let f = s - k as f64;
                geom::add(points[k], geom::scale(geom::sub(points[k + 1], points[k]), f))
            }
        }
    }

    pub fn start(&self) -> Point {
        self.eval(0.0)
    }

    pub fn end(&self) -> Point {
        self.eval(1.0)
    }

    pub fn reversed(&self) -> Piece {
        match self {
            Piece::Segment { a, b } => Piece::Segment { a: *b, b: *a },
            Piece::Arc { center, radius, start, end } => Piece::Arc {
                center: *center,
                radius: *radius,
                start: *end,
                end: *start,
            },
            Piece::Polar { curve, theta0, theta1 } => Piece::Polar {
                curve: *curve,
                theta0: *theta1,
                theta1: *theta0,
            },
            Piece::Polyline { points } => {
                let mut p = points.clone();
                p.reverse();
                Piece::Polyline { points: p }
            }
        }
    }

    /// Arc length, exact for segments and arcs, quadrature otherwise.
    pub fn length(&self) -> f64 {
        match self {
            Piece::Segment { a, b } => geom::dist(*a, *b),
            Piece::Arc { radius, start, end, .. } => radius * (end - start).abs(),
            Piece::Polar { theta0, theta1, .. } => {
                let n = ((theta1 - theta0).abs() * 64.0).ceil().clamp(64.0, 1e6) as usize;
                self.polyline_length(n)
            }
            Piece::Polyline { points } => points.windows(2).map(|w| geom::dist(w[0], w[1])).sum(),
        }
    }

    fn polyline_length(&self, n: usize) -> f64 {
        let mut len = 0.0;
        let mut prev = self.eval(0.0);
        for k in 1..=n {
            let p = self.eval(k as f64 / n as f64);
            len += geom::dist(prev, p);
            prev = p;
        }
        len
    }

    /// Samples at roughly `density` points per unit length, including the
    /// start point and excluding the end point.
    pub fn sample(&self, density: f64) -> Vec<Point> {
        if let Piece::Polyline { points } = self {
            return points[..points.len() - 1].to_vec();
        }
        let n = ((self.length() * density).ceil() as usize).max(2);
        (0..n).map(|k| self.eval(k as f64 / n as f64)).collect()
    }
}

/// A closed boundary component: pieces joined end to start, oriented so the
/// region lies on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub pieces: Vec<Piece>,
}

impl Component {
    pub fn new(pieces: Vec<Piece>) -> Self {
        Component { pieces }
    }

    pub fn reversed(&self) -> Component {
        Component {
            pieces: self.pieces.iter().rev().map(Piece::reversed).collect(),
        }
    }

    pub fn sample(&self, density: f64) -> Vec<Point> {
        self.pieces.iter().flat_map(|p| p.sample(density)).collect()
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    /// Largest gap between the end of a piece and the start of the next one.
    pub fn closure_gap(&self) -> f64 {
        let n = self.pieces.len();
        (0..n)
            .map(|i| geom::dist(self.pieces[i].end(), self.pieces[(i + 1) % n].start()))
            .fold(0.0, f64::max)
    }
}
