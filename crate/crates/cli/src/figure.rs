//! Standalone SVG figures of planar cross-sections and envelope slices.
//!
//! Output is a pure function of the input: coordinates are printed with a
//! fixed number of decimals and elements are emitted in a fixed order.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use tube_envelope_core::hull::{SliceClass, SliceGrid};
use tube_envelope_core::planar::geom::{Bbox, Point};
use tube_envelope_core::planar::{
    boundary_sample, pinched_spiral_point, spiral_point, CurveSamples, PlanarRegion, RegionError, Shape,
};

pub const FIGURE_SCHEMA_VERSION: u32 = 1;
const WIDTH: f64 = 640.0;
const BOUNDARY_DENSITY: f64 = 400.0;
const CENTERLINE_STEPS_PER_TURN: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FigureError {
    #[error("no data to draw: {0}")]
    Empty(String),
    #[error("figure kind does not match the region: {0}")]
    WrongShape(String),
    #[error(transparent)]
    Region(#[from] RegionError),
}

struct Canvas {
    view: Bbox,
    height: f64,
    scale: f64,
    body: String,
}

impl Canvas {
    fn new(view: Bbox) -> Self {
        let scale = WIDTH / view.width();
        Canvas { view, height: view.height() * scale, scale, body: String::new() }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        ((p[0] - self.view.min[0]) * self.scale, (self.view.max[1] - p[1]) * self.scale)
    }

    fn path_data(&self, pts: &[Point], closed: bool) -> String {
        let mut d = String::new();
        for (k, &p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            let _ = write!(d, "{}{x:.3},{y:.3}", if k == 0 { "M" } else { " L" });
        }
        if closed {
            d.push_str(" Z");
        }
        d
    }

    fn region(&mut self, comps: &[CurveSamples], id: &str) {
        let d: Vec<String> = comps.iter().map(|c| self.path_data(c.distinct(), true)).collect();
        let _ = writeln!(self.body, r#"<path id="{id}" class="region" fill-rule="evenodd" d="{}"/>"#, d.join(" "));
    }

    fn polyline(&mut self, pts: &[Point], id: &str, class: &str) {
        let d = self.path_data(pts, false);
        let _ = writeln!(self.body, r#"<path id="{id}" class="{class}" d="{d}"/>"#);
    }

    fn circle(&mut self, center: Point, radius: f64, class: &str) {
        let (x, y) = self.map(center);
        let r = radius * self.scale;
        let _ = writeln!(self.body, r#"<circle class="{class}" cx="{x:.3}" cy="{y:.3}" r="{r:.3}"/>"#);
    }

    fn mark(&mut self, p: Point, label: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(self.body, r#"<circle class="mark" cx="{x:.3}" cy="{y:.3}" r="3.000"/>"#);
        let _ = writeln!(self.body, r#"<text class="label" x="{:.3}" y="{:.3}">{label}</text>"#, x + 5.0, y - 5.0);
    }

    fn axes(&mut self) {
        let v = self.view;
        let (x0, _) = self.map([0.0f64.clamp(v.min[0], v.max[0]), 0.0]);
        let (_, y0) = self.map([0.0, 0.0f64.clamp(v.min[1], v.max[1])]);
        let mut s = String::new();
        let _ = writeln!(s, r#"<g class="axes">"#);
        let _ = writeln!(s, r#"<line x1="0.000" y1="{y0:.3}" x2="{WIDTH:.3}" y2="{y0:.3}"/>"#);
        let _ = writeln!(s, r#"<line x1="{x0:.3}" y1="0.000" x2="{x0:.3}" y2="{:.3}"/>"#, self.height);
        let step = tick_step(v.width().max(v.height()));
        let mut t = (v.min[0] / step).ceil() * step;
        while t <= v.max[0] {
            let (x, _) = self.map([t, 0.0]);
            let _ = writeln!(s, r#"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}"/>"#, y0 - 3.0, y0 + 3.0);
            let _ = writeln!(s, r#"<text x="{x:.3}" y="{:.3}">{}</text>"#, y0 + 14.0, tick_label(t));
            t += step;
        }
        let mut t = (v.min[1] / step).ceil() * step;
        while t <= v.max[1] {
            let (_, y) = self.map([0.0, t]);
            let _ = writeln!(s, r#"<line x1="{:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}"/>"#, x0 - 3.0, x0 + 3.0);
            let _ = writeln!(s, r#"<text x="{:.3}" y="{y:.3}">{}</text>"#, x0 + 5.0, tick_label(t));
            t += step;
        }
        s.push_str("</g>\n");
        self.body.insert_str(0, &s);
    }

    fn finish(self, kind: &str, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{h:.0}" viewBox="0 0 {WIDTH:.3} {h:.3}" data-kind="{kind}" data-schema-version="{FIGURE_SCHEMA_VERSION}" data-view="{:.6} {:.6} {:.6} {:.6}">"#,
            self.view.min[0],
            self.view.min[1],
            self.view.max[0],
            self.view.max[1],
            h = self.height,
        );
        let _ = writeln!(out, "<title>{title}</title>");
        out.push_str(STYLE);
        out.push_str(r##"<rect class="background" x="0" y="0" width="100%" height="100%"/>"##);
        out.push('\n');
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

const STYLE: &str = "<style>\n\
.background { fill: #ffffff; }\n\
.region { fill: #9ecae1; fill-opacity: 0.7; stroke: #08519c; stroke-width: 0.8; }\n\
.centerline { fill: none; stroke: #de2d26; stroke-width: 0.6; }\n\
.reference { fill: none; stroke: #444444; stroke-width: 0.8; stroke-dasharray: 4 3; }\n\
.mark { fill: #000000; }\n\
.label, text { font-family: sans-serif; font-size: 11px; fill: #222222; }\n\
.axes line { stroke: #888888; stroke-width: 0.6; }\n\
.in-D { fill: #3182bd; }\n\
.in-envelope-added { fill: #9ecae1; }\n\
.in-hull-certified { fill: #fd8d3c; }\n\
.unresolved-gap { fill: #bdbdbd; }\n\
.outside { fill: #ffffff; }\n\
</style>\n";

fn tick_step(span: f64) -> f64 {
    if span > 8.0 {
        2.0
    } else if span > 3.0 {
        1.0
    } else if span > 1.2 {
        0.5
    } else {
        0.1
    }
}

fn tick_label(t: f64) -> String {
    let r = (t * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn view_of(region: &PlanarRegion) -> Bbox {
    let b = region.bounding_box();
    let m = 0.08 * b.width().max(b.height());
    b.inflate(m)
}

/// Polar centerline samples `θ ↦ point(θ)` over `[a, b]`.
fn centerline(a: f64, b: f64, point: impl Fn(f64) -> Result<Point, RegionError>) -> Result<Vec<Point>, FigureError> {
    if !(b > a) {
        return Err(FigureError::Empty("centerline has no extent".into()));
    }
    let n = ((b - a) / (2.0 * PI) * CENTERLINE_STEPS_PER_TURN as f64).ceil().max(2.0) as usize;
    (0..=n).map(|k| point(a + (b - a) * k as f64 / n as f64).map_err(FigureError::from)).collect()
}

/// Cross-section of a spiral strip, with its central curve, the unit
/// circle `T` and the point `(3/2, 0)`.
pub fn spiral_cross_section(region: &PlanarRegion, truncate_at: f64) -> Result<String, FigureError> {
    let Shape::SpiralStrip { s_min, s_max, theta_min, theta_max } = *region.shape() else {
        return Err(FigureError::WrongShape("expected a spiral strip".into()));
    };
    let hi = theta_max.unwrap_or(truncate_at).min(truncate_at);
    let samples = boundary_sample(region, BOUNDARY_DENSITY, Some(truncate_at))?;
    let center = centerline(theta_min, hi, |t| spiral_point(0.5 * (s_min + s_max), t))?;
    let mut c = Canvas::new(Bbox::around([0.0, 0.0], 1.0 + s_max).inflate(0.2));
    c.region(&samples.components, "region");
    c.polyline(&center, "centerline", "centerline");
    c.circle([0.0, 0.0], 1.0, "reference");
    c.mark([1.5, 0.0], "(3/2, 0)");
    c.mark([0.0, 1.0], "T");
    c.axes();
    Ok(c.finish("spiral-cross-section", "Spiral strip in the real plane"))
}

/// Cross-section of a pinched spiral neighborhood accumulating on `T`.
pub fn pinched_spiral(region: &PlanarRegion, truncate_at: f64) -> Result<String, FigureError> {
    let Shape::PinchedSpiralNbhd { epsilon, theta_min, theta_max, .. } = *region.shape() else {
        return Err(FigureError::WrongShape("expected a pinched spiral neighborhood".into()));
    };
    let lo = theta_min.unwrap_or(-truncate_at).max(-truncate_at);
    let hi = theta_max.unwrap_or(truncate_at).min(truncate_at);
    let samples = boundary_sample(region, BOUNDARY_DENSITY, Some(truncate_at))?;
    let center = centerline(lo, hi, |t| pinched_spiral_point(epsilon, t))?;
    let mut c = Canvas::new(Bbox::around([0.0, 0.0], 1.0 + epsilon).inflate(0.2));
    c.region(&samples.components, "region");
    c.polyline(&center, "centerline", "centerline");
    c.circle([0.0, 0.0], 1.0, "reference");
    c.circle([0.0, 0.0], 1.0 + epsilon, "reference");
    c.mark([0.0, 1.0], "T");
    c.axes();
    Ok(c.finish("pinched-spiral", "Pinched spiral neighborhood in the real plane"))
}

/// The bridged annulus with its branch points `(±1, 0)`.
pub fn bridged_annulus(region: &PlanarRegion) -> Result<String, FigureError> {
    let Shape::BridgedAnnulus { ref channel, .. } = *region.shape() else {
        return Err(FigureError::WrongShape("expected a bridged annulus".into()));
    };
    let samples = boundary_sample(region, BOUNDARY_DENSITY, None)?;
    let mut c = Canvas::new(view_of(region));
    c.region(&samples.components, "region");
    c.circle(channel.center, channel.radius, "reference");
    c.mark([1.0, 0.0], "(1, 0)");
    c.mark([-1.0, 0.0], "(-1, 0)");
    c.axes();
    Ok(c.finish("bridged-annulus", "Bridged annulus in the real plane"))
}

/// One rectangle per slice cell, classed by its label and carrying its
/// slice coordinates.
pub fn envelope_slice(grid: &SliceGrid) -> Result<String, FigureError> {
    if grid.cells.is_empty() {
        return Err(FigureError::Empty("slice grid has no cells".into()));
    }
    let s = grid.spec;
    let view = Bbox { min: [s.u_range[0], s.v_range[0]], max: [s.u_range[1], s.v_range[1]] };
    let mut c = Canvas::new(view);
    let du = (s.u_range[1] - s.u_range[0]) / grid.nu as f64;
    let dv = (s.v_range[1] - s.v_range[0]) / grid.nv as f64;
    let (w, h) = (du * c.scale, dv * c.scale);
    let _ = writeln!(c.body, r#"<g class="cells">"#);
    for cell in &grid.cells {
        let (x, y) = c.map([cell.u - 0.5 * du, cell.v + 0.5 * dv]);
        let _ = writeln!(
            c.body,
            r#"<rect class="{}" x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" data-u="{:.9}" data-v="{:.9}"/>"#,
            cell.class.label(),
            cell.u,
            cell.v
        );
    }
    c.body.push_str("</g>\n");
    let legend = [
        SliceClass::InD,
        SliceClass::InEnvelopeAdded,
        SliceClass::InHullCertified,
        SliceClass::UnresolvedGap,
    ];
    for (k, cl) in legend.iter().enumerate() {
        let y = 14.0 + 16.0 * k as f64;
        let _ = writeln!(c.body, r##"<rect class="{}" x="8.000" y="{:.3}" width="10.000" height="10.000" stroke="#000000"/>"##, cl.label(), y - 9.0);
        let _ = writeln!(c.body, r#"<text x="24.000" y="{y:.3}">{}</text>"#, cl.label());
    }
    c.axes();
    Ok(c.finish("envelope-slice", "Envelope slice"))
}

/// Vertices of the `<path id="{id}">` element of an emitted figure, in
/// plane coordinates.
pub fn path_points(svg: &str, id: &str) -> Option<Vec<Point>> {
    let view = svg_view(svg)?;
    let canvas = Canvas::new(view);
    let start = svg.find(&format!(r#"<path id="{id}""#))?;
    let tail = &svg[start..];
    let d_start = tail.find(" d=\"")? + 4;
    let d = &tail[d_start..d_start + tail[d_start..].find('"')?];
    let mut out = Vec::new();
    for tok in d.split(['M', 'L', 'Z']) {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let (x, y) = tok.split_once(',')?;
        let (x, y): (f64, f64) = (x.trim().parse().ok()?, y.trim().parse().ok()?);
        out.push([canvas.view.min[0] + x / canvas.scale, canvas.view.max[1] - y / canvas.scale]);
    }
    Some(out)
}

fn svg_view(svg: &str) -> Option<Bbox> {
    let start = svg.find("data-view=\"")? + 11;
    let end = start + svg[start..].find('"')?;
    let v: Vec<f64> = svg[start..end].split(' ').map(|t| t.parse().ok()).collect::<Option<_>>()?;
    (v.len() == 4).then(|| Bbox { min: [v[0], v[1]], max: [v[2], v[3]] })
}

/// Total rotation of the edge directions of a polyline, in turns.
pub fn tangent_revolutions(pts: &[Point]) -> f64 {
    let dirs: Vec<f64> = pts
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| (w[1][1] - w[0][1]).atan2(w[1][0] - w[0][0]))
        .collect();
    let total: f64 = dirs
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            d - 2.0 * PI * (d / (2.0 * PI)).round()
        })
        .sum();
    total / (2.0 * PI)
}
