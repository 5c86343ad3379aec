//! Marching squares for regions without an explicit boundary description.

use std::collections::HashMap;

use super::geom::{self, Bbox, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Zero-level loops of `f` (positive inside) over `bbox` with `nx × ny` cells.
///
/// Loops are closed (first point not repeated), oriented with `{f > 0}` on
/// the left, and sorted by decreasing enclosed area.
pub fn level_loops<F: Fn(Point) -> f64>(f: F, bbox: &Bbox, nx: usize, ny: usize) -> Vec<Vec<Point>> {
    let hx = bbox.width() / nx as f64;
    let hy = bbox.height() / ny as f64;
    let at = |i: usize, j: usize| [bbox.min[0] + i as f64 * hx, bbox.min[1] + j as f64 * hy];
    let mut v = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            v[j * (nx + 1) + i] = f(at(i, j));
        }
    }
    let val = |i: usize, j: usize| v[j * (nx + 1) + i];
    let crossing = |e: Edge| -> Point {
        let (p, q, a, b) = match e {
            Edge::H(i, j) => (at(i, j), at(i + 1, j), val(i, j), val(i + 1, j)),
            Edge::V(i, j) => (at(i, j), at(i, j + 1), val(i, j), val(i, j + 1)),
        };
        let t = (a / (a - b)).clamp(0.0, 1.0);
        geom::add(p, geom::scale(geom::sub(q, p), t))
    };

    let mut segs: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let c = [val(i, j) > 0.0, val(i + 1, j) > 0.0, val(i + 1, j + 1) > 0.0, val(i, j + 1) > 0.0];
            let idx = c.iter().enumerate().fold(0, |m, (k, &b)| m | ((b as usize) << k));
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let center = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
            match idx {
                0 | 15 => {}
                1 | 14 => segs.push((left, bottom)),
                2 | 13 => segs.push((bottom, right)),
                3 | 12 => segs.push((left, right)),
                4 | 11 => segs.push((right, top)),
                6 | 9 => segs.push((bottom, top)),
                7 | 8 => segs.push((left, top)),
                5 => {
                    if center > 0.0 {
                        segs.push((left, top));
                        segs.push((bottom, right));
                    } else {
                        segs.push((left, bottom));
                        segs.push((right, top));
                    }
                }
                10 => {
                    if center > 0.0 {
                        segs.push((left, bottom));
                        segs.push((right, top));
                    } else {
                        segs.push((left, top));
                        segs.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segs.iter().enumerate() {
        incident.entry(*a).or_default().push(k);
        incident.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut loops = Vec::new();
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut cur) = segs[start];
        let mut edges = vec![first];
        while cur != first {
            edges.push(cur);
            let next = incident[&cur].iter().copied().find(|&k| !used[k]);
            let Some(k) = next else { break };
            used[k] = true;
            let (a, b) = segs[k];
            cur = if a == cur { b } else { a };
        }
        let mut pts: Vec<Point> = edges.iter().map(|&e| crossing(e)).collect();
        pts.dedup();
        while pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.len() < 3 {
            continue;
        }
        let a = pts[0];
        let b = pts[1];
        if let Some(d) = geom::normalize(geom::sub(b, a)) {
            let m = geom::scale(geom::add(a, b), 0.5);
            let probe = geom::add(m, geom::scale(geom::perp(d), 0.25 * hx.min(hy)));
            if f(probe) <= 0.0 {
                pts.reverse();
            }
        }
        loops.push(pts);
    }
    loops.sort_by(|a, b| {
        geom::signed_area(b)
            .abs()
            .partial_cmp(&geom::signed_area(a).abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    loops
}
