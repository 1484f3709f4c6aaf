//! Small planar polygon helpers. Polygons are vertex lists in
//! counterclockwise order.

use crate::kinematics::Point;

pub fn rotate(poly: &[Point], deg: f64) -> Vec<Point> {
    let (s, c) = deg.to_radians().sin_cos();
    poly.iter()
        .map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
        .collect()
}

pub fn translate(poly: &[Point], by: Point) -> Vec<Point> {
    poly.iter().map(|p| [p[0] + by[0], p[1] + by[1]]).collect()
}

/// Signed area; positive for counterclockwise polygons.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

/// True for a strictly convex counterclockwise polygon with at least three
/// vertices.
pub fn is_convex_ccw(poly: &[Point]) -> bool {
    let n = poly.len();
    n >= 3
        && (0..n).all(|i| {
            let (a, b, c) = (poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
            (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0
        })
}

/// Smallest signed distance from any point to the edge lines of a convex
/// counterclockwise `container`, positive inside. For a convex point set this
/// is the containment margin: positive iff every point is strictly inside.
pub fn clearance(container: &[Point], points: &[Point]) -> f64 {
    let n = container.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let p = container[i];
        let q = container[(i + 1) % n];
        let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
        let len = ex.hypot(ey);
        let (nx, ny) = (-ey / len, ex / len);
        for v in points {
            best = best.min((v[0] - p[0]) * nx + (v[1] - p[1]) * ny);
        }
    }
    best
}

/// Distance along the ray `origin + t * dir` (`t >= 0`, `dir` a unit vector)
/// to the first point of the polygon boundary, if the ray meets it.
pub fn ray_distance(origin: Point, dir: Point, poly: &[Point]) -> Option<f64> {
    let n = poly.len();
    let mut best: Option<f64> = None;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let e = [q[0] - p[0], q[1] - p[1]];
        let den = dir[0] * e[1] - dir[1] * e[0];
        if den.abs() < 1e-12 {
            continue;
        }
        let w = [p[0] - origin[0], p[1] - origin[1]];
        let t = (w[0] * e[1] - w[1] * e[0]) / den;
        let s = (w[0] * dir[1] - w[1] * dir[0]) / den;
        if t >= 0.0 && (0.0..=1.0).contains(&s) {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    }
    best
}
