//! Real-linear geometry of C² ≅ R⁴.
//!
//! Points are stored as a pair of complex numbers `(z₁, z₂)` with
//! `z_k = x_k + i y_k`; the real coordinates are ordered `(x₁, x₂, y₁, y₂)`.
//! Complex lines through the origin are stored as linear forms
//! `ℓ(z) = a z₁ + b z₂`, and their translates through an offset point.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used when deciding that a point touches a line.
pub const LINE_CONTACT_TOL: f64 = 1e-12;

const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("plane is not transverse to the line; no graph representation")]
    NoGraph,
    #[error("pair is not transverse")]
    NotTransverse,
    #[error("path touches the branch locus near vertex {vertex} (|l| = {value:e})")]
    OnBranchLocus { vertex: usize, value: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point of C².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Complex64; 2]", into = "[Complex64; 2]")]
pub struct C2 {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl From<[Complex64; 2]> for C2 {
    fn from(v: [Complex64; 2]) -> Self {
        C2 { z1: v[0], z2: v[1] }
    }
}

impl From<C2> for [Complex64; 2] {
    fn from(p: C2) -> Self {
        [p.z1, p.z2]
    }
}

impl C2 {
    pub const ZERO: C2 = C2 {
        z1: Complex64::new(0.0, 0.0),
        z2: Complex64::new(0.0, 0.0),
    };

    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        C2 { z1, z2 }
    }

    /// The point `x + i y` with `x, y ∈ R²`.
    pub fn from_xy(x: [f64; 2], y: [f64; 2]) -> Self {
        C2 {
            z1: Complex64::new(x[0], y[0]),
            z2: Complex64::new(x[1], y[1]),
        }
    }

    /// A point of the real plane R²_x.
    pub fn real(x1: f64, x2: f64) -> Self {
        Self::from_xy([x1, x2], [0.0, 0.0])
    }

    pub fn x(&self) -> [f64; 2] {
        [self.z1.re, self.z2.re]
    }

    pub fn y(&self) -> [f64; 2] {
        [self.z1.im, self.z2.im]
    }

    /// Real coordinates `(x₁, x₂, y₁, y₂)`.
    pub fn to_r4(&self) -> Vector4<f64> {
        Vector4::new(self.z1.re, self.z2.re, self.z1.im, self.z2.im)
    }

    pub fn from_r4(v: &Vector4<f64>) -> Self {
        Self::from_xy([v[0], v[1]], [v[2], v[3]])
    }

    pub fn norm(&self) -> f64 {
        (self.z1.norm_sqr() + self.z2.norm_sqr()).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        C2 {
            z1: self.z1 * c,
            z2: self.z2 * c,
        }
    }

    /// Multiplication by `i`, i.e. the complex structure on R⁴.
    pub fn times_i(&self) -> Self {
        self.scale(I)
    }

    pub fn lerp(&self, other: &C2, t: f64) -> Self {
        *self + (*other - *self) * t
    }

    pub fn apply(&self, g: &Matrix2<Complex64>) -> Self {
        C2 {
            z1: g[(0, 0)] * self.z1 + g[(0, 1)] * self.z2,
            z2: g[(1, 0)] * self.z1 + g[(1, 1)] * self.z2,
        }
    }
}

impl Add for C2 {
    type Output = C2;
    fn add(self, o: C2) -> C2 {
        C2::new(self.z1 + o.z1, self.z2 + o.z2)
    }
}

impl Sub for C2 {
    type Output = C2;
    fn sub(self, o: C2) -> C2 {
        C2::new(self.z1 - o.z1, self.z2 - o.z2)
    }
}

impl Neg for C2 {
    type Output = C2;
    fn neg(self) -> C2 {
        C2::new(-self.z1, -self.z2)
    }
}

impl Mul<f64> for C2 {
    type Output = C2;
    fn mul(self, s: f64) -> C2 {
        C2::new(self.z1 * s, self.z2 * s)
    }
}

/// The linear form `ℓ(z) = a z₁ + b z₂`; its kernel is the complex line `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct ComplexLinearForm {
    a: Complex64,
    b: Complex64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormRepr {
    a: Complex64,
    b: Complex64,
}

impl TryFrom<FormRepr> for ComplexLinearForm {
    type Error = LinalgError;
    fn try_from(r: FormRepr) -> Result<Self, Self::Error> {
        ComplexLinearForm::new(r.a, r.b)
    }
}

impl From<ComplexLinearForm> for FormRepr {
    fn from(f: ComplexLinearForm) -> Self {
        FormRepr { a: f.a, b: f.b }
    }
}

impl ComplexLinearForm {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self, LinalgError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(LinalgError::InvalidInput("non-finite coefficient".into()));
        }
        if a.norm_sqr() + b.norm_sqr() == 0.0 {
            return Err(LinalgError::InvalidInput("(a, b) = (0, 0)".into()));
        }
        Ok(ComplexLinearForm { a, b })
    }

    /// `ℓ = z₁ − i z₂`, whose kernel is the line `{z₁ = i z₂}`.
    pub fn reference() -> Self {
        ComplexLinearForm {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, -1.0),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn eval(&self, z: &C2) -> Complex64 {
        self.a * z.z1 + self.b * z.z2
    }

    /// `ℓ(z − offset)`, the form defining the translate `offset + L`.
    pub fn eval_at(&self, z: &C2, offset: &C2) -> Complex64 {
        self.eval(&(*z - *offset))
    }

    pub fn coeff_norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr()).sqrt()
    }

    /// A complex spanning vector of `L = ker ℓ`.
    pub fn kernel_direction(&self) -> C2 {
        C2::new(-self.b, self.a)
    }

    /// `L` viewed as a real 2-plane in R⁴.
    pub fn real_plane(&self) -> RealPlane2 {
        let v = self.kernel_direction();
        RealPlane2::from_c2(v, v.times_i()).expect("kernel of a nonzero form has real rank 2")
    }

    /// The real 2×2 matrix of `ℓ` restricted to R²_x, mapping `x` to `(Re ℓ(x), Im ℓ(x))`.
    pub fn restricted_to_real(&self) -> Matrix2<f64> {
        Matrix2::new(self.a.re, self.b.re, self.a.im, self.b.im)
    }

    /// The form `ℓ ∘ g⁻¹`, whose kernel is the image `g·L`.
    pub fn pushed_forward(&self, g: &Matrix2<Complex64>) -> Result<Self, LinalgError> {
        let inv = g
            .try_inverse()
            .ok_or_else(|| LinalgError::InvalidInput("singular matrix".into()))?;
        ComplexLinearForm::new(
            self.a * inv[(0, 0)] + self.b * inv[(1, 0)],
            self.a * inv[(0, 1)] + self.b * inv[(1, 1)],
        )
    }
}

/// A real 2-dimensional linear subspace of R⁴, given by a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPlane2 {
    basis: [Vector4<f64>; 2],
    graph: Option<Matrix2<f64>>,
}

impl RealPlane2 {
    pub fn new(u: Vector4<f64>, v: Vector4<f64>) -> Result<Self, LinalgError> {
        let gram = u.dot(&u) * v.dot(&v) - u.dot(&v).powi(2);
        let scale = u.norm_squared() * v.norm_squared();
        if !(gram.is_finite() && scale > 0.0) || gram <= RANK_TOL * scale {
            return Err(LinalgError::InvalidInput("basis has real rank < 2".into()));
        }
        Ok(RealPlane2 {
            basis: [u, v],
            graph: None,
        })
    }

    pub fn from_c2(u: C2, v: C2) -> Result<Self, LinalgError> {
        Self::new(u.to_r4(), v.to_r4())
    }

    /// The real plane `R²_x = {y₁ = y₂ = 0}`.
    pub fn real_coordinate() -> Self {
        Self::new(Vector4::new(1.0, 0.0, 0.0, 0.0), Vector4::new(0.0, 1.0, 0.0, 0.0))
            .expect("coordinate basis")
    }

    pub fn basis(&self) -> &[Vector4<f64>; 2] {
        &self.basis
    }

    pub fn graph(&self) -> Option<&Matrix2<f64>> {
        self.graph.as_ref()
    }

    pub fn basis_c2(&self) -> [C2; 2] {
        [C2::from_r4(&self.basis[0]), C2::from_r4(&self.basis[1])]
    }

    /// Distance from `w` to the plane.
    pub fn distance(&self, w: &Vector4<f64>) -> f64 {
        let e1 = self.basis[0].normalize();
        let v2 = self.basis[1] - e1 * e1.dot(&self.basis[1]);
        let e2 = v2.normalize();
        let proj = e1 * e1.dot(w) + e2 * e2.dot(w);
        (w - proj).norm()
    }

    /// Largest distance of the normalized basis vectors of `other` from `self`.
    pub fn deviation(&self, other: &RealPlane2) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.distance(&b.normalize()))
            .fold(0.0, f64::max)
    }
}

/// `true` iff `L` and `P` span R⁴, i.e. `L ∩ P = {0}`.
///
/// `P` is transverse to `L` exactly when `ℓ|_P : P → C` is a real-linear
/// isomorphism, which is decided on an orthonormalized basis of `P`.
pub fn transversal(form: &ComplexLinearForm, plane: &RealPlane2) -> bool {
    let [u, v] = plane.basis;
    let e1 = u.normalize();
    let e2 = (v - e1 * e1.dot(&v)).normalize();
    let w1 = form.eval(&C2::from_r4(&e1));
    let w2 = form.eval(&C2::from_r4(&e2));
    let det = w1.re * w2.im - w1.im * w2.re;
    det.abs() > RANK_TOL * form.coeff_norm().powi(2)
}

/// Real linear coordinates `(s₁, s₂, t₁, t₂)` adapted to a transverse pair
/// `(L, P₀)`: `L = {s = 0}` and `P₀ = {t = 0}`.
#[derive(Debug, Clone)]
pub struct TransverseFrame {
    columns: Matrix4<f64>,
    inverse: Matrix4<f64>,
}

impl TransverseFrame {
    pub fn new(form: &ComplexLinearForm, reference: &RealPlane2) -> Result<Self, LinalgError> {
        if !transversal(form, reference) {
            return Err(LinalgError::NotTransverse);
        }
        let v = form.kernel_direction();
        let [p1, p2] = reference.basis;
        let columns = Matrix4::from_columns(&[p1, p2, v.to_r4(), v.times_i().to_r4()]);
        let inverse = columns
            .try_inverse()
            .ok_or_else(|| LinalgError::Numerical("frame matrix not invertible".into()))?;
        Ok(TransverseFrame { columns, inverse })
    }

    /// Frame coordinates `(s, t)` of a vector of R⁴.
    pub fn coords(&self, w: &Vector4<f64>) -> (Vector2<f64>, Vector2<f64>) {
        let c = self.inverse * w;
        (Vector2::new(c[0], c[1]), Vector2::new(c[2], c[3]))
    }

    pub fn embed(&self, s: &Vector2<f64>, t: &Vector2<f64>) -> Vector4<f64> {
        self.columns * Vector4::new(s[0], s[1], t[0], t[1])
    }

    /// The reference plane `P₀ = {t = 0}`.
    pub fn s_plane(&self) -> RealPlane2 {
        RealPlane2::new(self.columns.column(0).into(), self.columns.column(1).into())
            .expect("frame columns independent")
    }

    /// The line `L = {s = 0}` as a real plane.
    pub fn t_plane(&self) -> RealPlane2 {
        RealPlane2::new(self.columns.column(2).into(), self.columns.column(3).into())
            .expect("frame columns independent")
    }

    /// The plane `{t = A s}` carrying `A` as its graph matrix.
    pub fn graph_plane(&self, a: &Matrix2<f64>) -> RealPlane2 {
        let e1 = Vector2::new(1.0, 0.0);
        let e2 = Vector2::new(0.0, 1.0);
        let mut plane = RealPlane2::new(self.embed(&e1, &(a * e1)), self.embed(&e2, &(a * e2)))
            .expect("graph planes have rank 2");
        plane.graph = Some(*a);
        plane
    }
}

/// The matrix `A(P)` with `P = {t = A s}` in the frame of `(L, P₀)`.
pub fn graph_matrix(
    plane: &RealPlane2,
    form: &ComplexLinearForm,
    reference: &RealPlane2,
) -> Result<Matrix2<f64>, LinalgError> {
    let frame = TransverseFrame::new(form, reference)?;
    if !transversal(form, plane) {
        return Err(LinalgError::NoGraph);
    }
    let (s1, t1) = frame.coords(&plane.basis[0]);
    let (s2, t2) = frame.coords(&plane.basis[1]);
    let s = Matrix2::from_columns(&[s1, s2]);
    let t = Matrix2::from_columns(&[t1, t2]);
    let s_inv = s.try_inverse().ok_or(LinalgError::NoGraph)?;
    Ok(t * s_inv)
}

/// An element `g ∈ GL₂(C)` with `g·P = R²_x` and `g·L = ker(z₁ − i z₂)`.
///
/// `P` must be totally real (`P ∩ iP = {0}`); a complex line can never be
/// mapped onto R²_x by a complex-linear map.
pub fn normalize_pair(
    form: &ComplexLinearForm,
    plane: &RealPlane2,
) -> Result<Matrix2<Complex64>, LinalgError> {
    if !transversal(form, plane) {
        return Err(LinalgError::NotTransverse);
    }
    let [p1, p2] = plane.basis_c2();
    let m = Matrix2::new(p1.z1, p2.z1, p1.z2, p2.z2);
    let scale = p1.norm() * p2.norm();
    if m.determinant().norm() <= RANK_TOL * scale {
        return Err(LinalgError::InvalidInput(
            "plane is a complex line (not totally real)".into(),
        ));
    }
    let m_inv = m.try_inverse().ok_or(LinalgError::NotTransverse)?;
    // After m⁻¹ the plane is R²_x; the line direction v' = u + i w has
    // independent real and imaginary parts by transversality.
    let v = form.kernel_direction().apply(&m_inv);
    let uw = Matrix2::new(v.z1.re, v.z1.im, v.z2.re, v.z2.im);
    let uw_inv = uw.try_inverse().ok_or(LinalgError::NotTransverse)?;
    // target direction (i, 1) = (0, 1) + i (1, 0)
    let target = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let h = target * uw_inv;
    let h_c = h.map(|e| Complex64::new(e, 0.0));
    let g = h_c * m_inv;
    let residual = normalization_residual(&g, form, plane);
    if residual > 1e-10 {
        return Err(LinalgError::Numerical(format!(
            "normal form residual {residual:e}"
        )));
    }
    Ok(g)
}

/// Residual of `g` as a normal form for `(L, P)`: imaginary parts of the
/// normalized images of the basis of `P`, and `ℓ₀` on the normalized image of `L`.
pub fn normalization_residual(
    g: &Matrix2<Complex64>,
    form: &ComplexLinearForm,
    plane: &RealPlane2,
) -> f64 {
    let reference = ComplexLinearForm::reference();
    let mut res: f64 = 0.0;
    for p in plane.basis_c2() {
        let q = p.apply(g);
        let n = q.norm();
        res = res.max(q.z1.im.abs() / n).max(q.z2.im.abs() / n);
    }
    let gv = form.kernel_direction().apply(g);
    res = res.max(reference.eval(&gv).norm() / (gv.norm() * reference.coeff_norm()));
    // the two real images must stay independent
    let [p1, p2] = plane.basis_c2();
    let (q1, q2) = (p1.apply(g), p2.apply(g));
    let det = q1.z1.re * q2.z2.re - q1.z2.re * q2.z1.re;
    if det.abs() <= RANK_TOL * q1.norm() * q2.norm() {
        res = f64::INFINITY;
    }
    res
}

/// A polygonal path in C².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C2>", into = "Vec<C2>")]
pub struct PolyPath {
    vertices: Vec<C2>,
    closed: bool,
}

impl TryFrom<Vec<C2>> for PolyPath {
    type Error = LinalgError;
    fn try_from(vertices: Vec<C2>) -> Result<Self, Self::Error> {
        let closed = vertices.len() >= 2 && vertices.first() == vertices.last();
        PolyPath::new(vertices, closed)
    }
}

impl From<PolyPath> for Vec<C2> {
    fn from(p: PolyPath) -> Self {
        p.vertices
    }
}

impl PolyPath {
    pub fn new(vertices: Vec<C2>, closed: bool) -> Result<Self, LinalgError> {
        if vertices.len() < 2 {
            return Err(LinalgError::InvalidInput("path needs at least 2 vertices".into()));
        }
        if vertices
            .iter()
            .any(|v| !(v.z1.is_finite() && v.z2.is_finite()))
        {
            return Err(LinalgError::InvalidInput("non-finite vertex".into()));
        }
        if closed && vertices.first() != vertices.last() {
            return Err(LinalgError::InvalidInput(
                "closed path must end at its first vertex".into(),
            ));
        }
        Ok(PolyPath { vertices, closed })
    }

    pub fn open(vertices: Vec<C2>) -> Result<Self, LinalgError> {
        Self::new(vertices, false)
    }

    /// Closes the vertex list by repeating the first vertex when needed.
    pub fn closed(mut vertices: Vec<C2>) -> Result<Self, LinalgError> {
        if let Some(first) = vertices.first().copied() {
            if vertices.last() != Some(&first) || vertices.len() == 1 {
                vertices.push(first);
            }
        }
        Self::new(vertices, true)
    }

    /// A regular `n`-gon inscribed in the circle `center + ρ(cos t·e₁ + sin t·e₂)`.
    pub fn circle(center: C2, e1: C2, e2: C2, radius: f64, n: usize) -> Result<Self, LinalgError> {
        if n < 3 || !(radius > 0.0) {
            return Err(LinalgError::InvalidInput("circle needs n ≥ 3 and radius > 0".into()));
        }
        let pts = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                center + e1 * (radius * t.cos()) + e2 * (radius * t.sin())
            })
            .collect();
        Self::closed(pts)
    }

    /// Counterclockwise circle in R²_x.
    pub fn real_circle(center: [f64; 2], radius: f64, n: usize) -> Result<Self, LinalgError> {
        Self::circle(
            C2::real(center[0], center[1]),
            C2::real(1.0, 0.0),
            C2::real(0.0, 1.0),
            radius,
            n,
        )
    }

    pub fn vertices(&self) -> &[C2] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn first(&self) -> C2 {
        self.vertices[0]
    }

    pub fn last(&self) -> C2 {
        *self.vertices.last().expect("non-empty")
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        PolyPath {
            vertices: v,
            closed: self.closed,
        }
    }

    /// `self` followed by `other`; `other` must start where `self` ends.
    pub fn concat(&self, other: &PolyPath) -> Result<Self, LinalgError> {
        if self.last() != other.first() {
            return Err(LinalgError::InvalidInput("paths do not join".into()));
        }
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices[1..]);
        let closed = v.first() == v.last();
        Self::new(v, closed)
    }

    /// Inserts `k − 1` equally spaced vertices into every segment.
    pub fn subdivided(&self, k: usize) -> Self {
        let k = k.max(1);
        let mut v = Vec::with_capacity((self.vertices.len() - 1) * k + 1);
        for w in self.vertices.windows(2) {
            for j in 0..k {
                v.push(w[0].lerp(&w[1], j as f64 / k as f64));
            }
        }
        v.push(self.last());
        PolyPath {
            vertices: v,
            closed: self.closed,
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = (C2, C2)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// A translated line `offset + ker ℓ`.
#[derive(Debug, Clone, Copy)]
pub struct TranslatedLine<'a> {
    pub form: &'a ComplexLinearForm,
    pub offset: &'a C2,
}

impl TranslatedLine<'_> {
    pub fn eval(&self, z: &C2) -> Complex64 {
        self.form.eval_at(z, self.offset)
    }
}

/// Checks that the segment `[p, q]` stays off the translated line.
///
/// `ℓ` is complex-linear, so the image of the segment is the straight segment
/// `[ℓ(p), ℓ(q)]` in C and its closest approach to 0 is exact.
pub(crate) fn segment_clearance(line: &TranslatedLine<'_>, p: &C2, q: &C2) -> (f64, bool) {
    let w0 = line.eval(p);
    let w1 = line.eval(q);
    let d = w1 - w0;
    let t = if d.norm_sqr() > 0.0 {
        (-(w0.conj() * d).re / d.norm_sqr()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let v = p.lerp(q, t) - *line.offset;
    let value = (w0 + d * t).norm();
    let ok = value > LINE_CONTACT_TOL * (1.0 + v.norm());
    (value, ok)
}

/// Splits `[p, q]` into parameters `0 = t₀ < … < t_n = 1` such that every
/// line's argument moves by less than π/2 on each piece.
pub(crate) fn refine_segment(lines: &[TranslatedLine<'_>], p: &C2, q: &C2) -> Vec<f64> {
    fn jump_ok(lines: &[TranslatedLine<'_>], p: &C2, q: &C2) -> bool {
        lines
            .iter()
            .all(|l| (l.eval(q) / l.eval(p)).arg().abs() < FRAC_PI_2)
    }
    fn rec(lines: &[TranslatedLine<'_>], p: &C2, q: &C2, t0: f64, t1: f64, depth: u32, out: &mut Vec<f64>) {
        let a = p.lerp(q, t0);
        let b = p.lerp(q, t1);
        if depth >= 48 || jump_ok(lines, &a, &b) {
            out.push(t1);
            return;
        }
        let tm = 0.5 * (t0 + t1);
        rec(lines, p, q, t0, tm, depth + 1, out);
        rec(lines, p, q, tm, t1, depth + 1, out);
    }
    let mut out = vec![0.0];
    rec(lines, p, q, 0.0, 1.0, 0, &mut out);
    out
}

/// Signed winding of `t ↦ ℓ(path(t) − offset)` around `0 ∈ C`.
pub fn winding_number(path: &PolyPath, form: &ComplexLinearForm, offset: &C2) -> Result<i64, LinalgError> {
    if !path.is_closed() {
        return Err(LinalgError::InvalidInput("winding number needs a closed path".into()));
    }
    let line = TranslatedLine { form, offset };
    let lines = [line];
    let mut total = 0.0;
    for (k, (p, q)) in path.segments().enumerate() {
        let (value, ok) = segment_clearance(&line, &p, &q);
        if !ok {
            return Err(LinalgError::OnBranchLocus { vertex: k, value });
        }
        let ts = refine_segment(&lines, &p, &q);
        for w in ts.windows(2) {
            let a = line.eval(&p.lerp(&q, w[0]));
            let b = line.eval(&p.lerp(&q, w[1]));
            total += (b / a).arg();
        }
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 {
        return Err(LinalgError::Numerical(format!("non-integer winding {turns}")));
    }
    Ok(rounded as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_line_is_transverse_to_real_plane() {
        let l = ComplexLinearForm::reference();
        assert!(transversal(&l, &RealPlane2::real_coordinate()));
        assert!(!transversal(&l, &l.real_plane()));
    }

    #[test]
    fn zero_form_rejected() {
        assert!(ComplexLinearForm::new(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn degenerate_plane_rejected() {
        let u = Vector4::new(1.0, 2.0, 0.0, 0.0);
        assert!(RealPlane2::new(u, u * 3.0).is_err());
    }

    #[test]
    fn frame_planes_are_transverse() {
        let l = ComplexLinearForm::reference();
        let frame = TransverseFrame::new(&l, &RealPlane2::real_coordinate()).unwrap();
        assert!(transversal(&l, &frame.s_plane()));
        assert!(!transversal(&l, &frame.t_plane()));
    }

    #[test]
    fn graph_of_reference_is_zero_and_identity_coupling() {
        let l = ComplexLinearForm::reference();
        let p0 = RealPlane2::real_coordinate();
        let a = graph_matrix(&p0, &l, &p0).unwrap();
        assert_abs_diff_eq!(a.norm(), 0.0, epsilon = 1e-15);

        let frame = TransverseFrame::new(&l, &p0).unwrap();
        let v = l.kernel_direction();
        let coupled = RealPlane2::new(
            Vector4::new(1.0, 0.0, 0.0, 0.0) + v.to_r4(),
            Vector4::new(0.0, 1.0, 0.0, 0.0) + v.times_i().to_r4(),
        )
        .unwrap();
        let a = graph_matrix(&coupled, &l, &p0).unwrap();
        assert_abs_diff_eq!((a - Matrix2::identity()).norm(), 0.0, epsilon = 1e-14);
        assert!(frame.graph_plane(&a).deviation(&coupled) < 1e-12);
    }

    #[test]
    fn graph_matrix_rejects_line_itself() {
        let l = ComplexLinearForm::reference();
        let p0 = RealPlane2::real_coordinate();
        assert_eq!(graph_matrix(&l.real_plane(), &l, &p0), Err(LinalgError::NoGraph));
    }

    #[test]
    fn normal_form_of_reference_pair_fixes_it() {
        let l = ComplexLinearForm::reference();
        let p = RealPlane2::real_coordinate();
        let g = normalize_pair(&l, &p).unwrap();
        assert!(normalization_residual(&g, &l, &p) < 1e-12);
    }

    #[test]
    fn normal_form_for_horizontal_line() {
        // L = ker z₂ = C × {0}, P = R²_x: these meet along the x₁ axis
        let l = ComplexLinearForm::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let p = RealPlane2::real_coordinate();
        assert_eq!(normalize_pair(&l, &p), Err(LinalgError::NotTransverse));

        // a tilted totally real plane is transverse to ker z₂
        let tilted = RealPlane2::from_c2(C2::real(1.0, 1.0), C2::new(c(0.0, 0.0), c(0.0, 1.0))).unwrap();
        assert!(transversal(&l, &tilted));
        let g = normalize_pair(&l, &tilted).unwrap();
        assert!(normalization_residual(&g, &l, &tilted) < 1e-10);
    }

    #[test]
    fn complex_line_plane_is_rejected_by_normal_form() {
        let l = ComplexLinearForm::reference();
        let other = ComplexLinearForm::new(c(1.0, 0.0), c(0.0, 1.0)).unwrap().real_plane();
        assert!(transversal(&l, &other));
        assert!(matches!(normalize_pair(&l, &other), Err(LinalgError::InvalidInput(_))));
    }

    #[test]
    fn unit_circle_winds_negatively_around_reference_line() {
        let l = ComplexLinearForm::reference();
        let path = PolyPath::real_circle([0.0, 0.0], 1.0, 64).unwrap();
        assert_eq!(winding_number(&path, &l, &C2::ZERO).unwrap(), -1);
        assert_eq!(winding_number(&path.reversed(), &l, &C2::ZERO).unwrap(), 1);
    }

    #[test]
    fn square_loop_winding() {
        let l = ComplexLinearForm::reference();
        let sq = PolyPath::closed(vec![
            C2::real(2.0, 2.0),
            C2::real(-2.0, 2.0),
            C2::real(-2.0, -2.0),
            C2::real(2.0, -2.0),
        ])
        .unwrap();
        assert_eq!(winding_number(&sq, &l, &C2::ZERO).unwrap(), -1);
    }

    #[test]
    fn half_plane_loop_has_zero_winding() {
        let l = ComplexLinearForm::reference();
        let path = PolyPath::real_circle([3.0, 0.5], 1.0, 17).unwrap();
        assert_eq!(winding_number(&path, &l, &C2::ZERO).unwrap(), 0);
    }

    #[test]
    fn winding_detects_contact() {
        let l = ComplexLinearForm::reference();
        let sq = PolyPath::closed(vec![
            C2::real(-1.0, 0.0),
            C2::real(1.0, 0.0),
            C2::real(1.0, 1.0),
        ])
        .unwrap();
        assert!(matches!(
            winding_number(&sq, &l, &C2::ZERO),
            Err(LinalgError::OnBranchLocus { .. })
        ));
    }

    #[test]
    fn open_path_rejected_for_winding() {
        let l = ComplexLinearForm::reference();
        let p = PolyPath::open(vec![C2::real(1.0, 0.0), C2::real(2.0, 0.0)]).unwrap();
        assert!(winding_number(&p, &l, &C2::ZERO).is_err());
    }

    #[test]
    fn closed_path_must_repeat_first_vertex() {
        let v = vec![C2::real(1.0, 0.0), C2::real(2.0, 0.0)];
        assert!(PolyPath::new(v.clone(), true).is_err());
        assert!(PolyPath::closed(v).unwrap().is_closed());
    }

    #[test]
    fn path_json_is_an_array_of_complex_pairs() {
        let p = PolyPath::closed(vec![C2::real(1.0, 0.0), C2::real(0.0, 1.0), C2::real(-1.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("[[[1.0,0.0],[0.0,0.0]]"));
        let back: PolyPath = serde_json::from_str(&s).unwrap();
        assert!(back.is_closed());
        assert_eq!(back, p);
    }
}
