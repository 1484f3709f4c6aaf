//! Palm framework geometry.
//!
//! Four actuator lengths do not fix a quadrilateral: a four-bar loop keeps one
//! residual degree of freedom. Here it is carried explicitly as the length of
//! the diagonal between vertices 0 and 2. [`resolve_embedding`] picks the
//! "most convex" diagonal (the one maximizing the smallest internal angle);
//! shape templates carry their own diagonal.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{parse_f64, PALM_MAX_MM, PALM_REST_MM};

pub type Point = [f64; 2];

/// Slack on the actuator range so values produced by clamping or by
/// interpolating the calibration curve are not rejected on rounding.
const RANGE_EPS: f64 = 1e-9;

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn distance(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Checks a length against the palm actuator range.
pub fn check_actuator_length(value: f64) -> Result<()> {
    if !(PALM_REST_MM - RANGE_EPS..=PALM_MAX_MM + RANGE_EPS).contains(&value) {
        return Err(Error::LengthOutOfRange {
            value,
            min: PALM_REST_MM,
            max: PALM_MAX_MM,
        });
    }
    Ok(())
}

/// Closed interval of diagonals allowed by the triangle inequalities of both
/// triangles, as `(lower, upper)`. The feasible set is the open interval.
pub fn diagonal_bounds(sides: [f64; 4]) -> (f64, f64) {
    let [a, b, c, d] = sides;
    ((a - b).abs().max((c - d).abs()), (a + b).min(c + d))
}

fn check_sides(sides: [f64; 4]) -> Result<()> {
    for (i, &s) in sides.iter().enumerate() {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InfeasibleGeometry(format!("side {i} must be positive, got {s}")));
        }
    }
    let total: f64 = sides.iter().sum();
    for (i, &s) in sides.iter().enumerate() {
        if s >= total - s {
            return Err(Error::InfeasibleGeometry(format!(
                "polygon inequality: side {i} ({s}) is not shorter than the other three combined ({})",
                total - s
            )));
        }
    }
    Ok(())
}

/// Places the quadrilateral with vertex 0 at the origin and vertex 1 on the
/// positive x axis. Vertex 2 lies above the x axis and vertex 3 on the other
/// side of the 0–2 diagonal from vertex 1, so the result is counterclockwise.
///
/// Fails if a triangle inequality is violated or the result is not strictly
/// convex.
pub fn embed_quadrilateral(sides: [f64; 4], diagonal: f64) -> Result<[Point; 4]> {
    check_sides(sides)?;
    let [a, b, c, d] = sides;
    if !(diagonal > (a - b).abs() && diagonal < a + b) {
        return Err(Error::InfeasibleGeometry(format!(
            "triangle inequality |a-b| < diagonal < a+b violated: diagonal {diagonal}, a {a}, b {b}"
        )));
    }
    if !(diagonal > (c - d).abs() && diagonal < c + d) {
        return Err(Error::InfeasibleGeometry(format!(
            "triangle inequality |c-d| < diagonal < c+d violated: diagonal {diagonal}, c {c}, d {d}"
        )));
    }
    let x2 = (a * a + diagonal * diagonal - b * b) / (2.0 * a);
    let y2 = (diagonal * diagonal - x2 * x2).max(0.0).sqrt();
    let v2 = [x2, y2];
    let u = [x2 / diagonal, y2 / diagonal];
    let n = [-u[1], u[0]];
    let t = (diagonal * diagonal + d * d - c * c) / (2.0 * diagonal);
    let h = (d * d - t * t).max(0.0).sqrt();
    let v3 = [u[0] * t + n[0] * h, u[1] * t + n[1] * h];
    let vs = [[0.0, 0.0], [a, 0.0], v2, v3];
    if !is_strictly_convex(&vs) {
        return Err(Error::InfeasibleGeometry(format!(
            "diagonal {diagonal} gives a non-convex embedding"
        )));
    }
    Ok(vs)
}

fn is_strictly_convex(vs: &[Point; 4]) -> bool {
    let scale = vs.iter().map(|p| norm(*p)).fold(1.0, f64::max);
    (0..4).all(|i| {
        let e0 = sub(vs[(i + 1) % 4], vs[i]);
        let e1 = sub(vs[(i + 2) % 4], vs[(i + 1) % 4]);
        cross(e0, e1) > 1e-12 * scale * scale
    })
}

/// Interior angle at each vertex of a convex quadrilateral, in degrees.
pub fn internal_angles(vertices: &[Point; 4]) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for i in 0..4 {
        let v = vertices[i];
        let p = sub(vertices[(i + 3) % 4], v);
        let q = sub(vertices[(i + 1) % 4], v);
        let (lp, lq) = (norm(p), norm(q));
        if lp < 1e-12 || lq < 1e-12 || cross(p, q).abs() < 1e-12 * lp * lq {
            return Err(Error::Degenerate(format!(
                "vertex {i} is coincident or collinear with its neighbours"
            )));
        }
        out[i] = cross(p, q).abs().atan2(dot(p, q)).to_degrees();
    }
    Ok(out)
}

/// Side lengths measured from vertices, in cyclic order starting at 0–1.
pub fn measure_sides(vertices: &[Point; 4]) -> [f64; 4] {
    std::array::from_fn(|i| distance(vertices[i], vertices[(i + 1) % 4]))
}

/// Area centroid of a simple polygon.
pub fn polygon_centroid(vertices: &[Point]) -> Point {
    let n = vertices.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let cr = cross(p, q);
        a += cr;
        cx += (p[0] + q[0]) * cr;
        cy += (p[1] + q[1]) * cr;
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

/// A palm shape: four actuator lengths and the resolved planar embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PalmConfiguration {
    sides: [f64; 4],
    diagonal: f64,
    vertices: [Point; 4],
    angles: [f64; 4],
}

impl PalmConfiguration {
    /// Embeds `sides` with the given 0–2 diagonal. Every side must lie in the
    /// actuator range.
    pub fn new(sides: [f64; 4], diagonal: f64) -> Result<Self> {
        for s in sides {
            check_actuator_length(s)?;
        }
        Self::unchecked_range(sides, diagonal)
    }

    fn unchecked_range(sides: [f64; 4], diagonal: f64) -> Result<Self> {
        let vertices = embed_quadrilateral(sides, diagonal)?;
        let angles = internal_angles(&vertices)?;
        Ok(Self {
            sides,
            diagonal,
            vertices,
            angles,
        })
    }

    /// Embeds a shape template.
    pub fn from_template(t: &ShapeTemplate) -> Result<Self> {
        let (sides, diagonal) = shape_template_to_lengths(t)?;
        Self::new(sides, diagonal)
    }

    pub fn sides(&self) -> [f64; 4] {
        self.sides
    }

    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    pub fn vertices(&self) -> &[Point; 4] {
        &self.vertices
    }

    pub fn angles(&self) -> [f64; 4] {
        self.angles
    }

    pub fn min_angle(&self) -> f64 {
        self.angles.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn centroid(&self) -> Point {
        polygon_centroid(&self.vertices)
    }

    /// Unit vector bisecting the interior angle at corner `i`, pointing into
    /// the palm.
    pub fn inward_bisector(&self, i: usize) -> Point {
        let v = self.vertices[i];
        let p = sub(self.vertices[(i + 3) % 4], v);
        let q = sub(self.vertices[(i + 1) % 4], v);
        let (lp, lq) = (norm(p), norm(q));
        let b = [p[0] / lp + q[0] / lq, p[1] / lp + q[1] / lq];
        let lb = norm(b);
        [b[0] / lb, b[1] / lb]
    }
}

/// Smallest internal angle for a diagonal, or `None` if the embedding is
/// infeasible or non-convex.
pub fn min_angle_at(sides: [f64; 4], diagonal: f64) -> Option<f64> {
    let vs = embed_quadrilateral(sides, diagonal).ok()?;
    let angles = internal_angles(&vs).ok()?;
    Some(angles.iter().copied().fold(f64::INFINITY, f64::min))
}

const RESOLVE_SCAN: usize = 256;
const GOLDEN_TOL: f64 = 1e-9;

/// Chooses the diagonal that maximizes the minimum internal angle: a coarse
/// scan of the feasible interval followed by golden-section refinement
/// around the best sample.
pub fn resolve_embedding(sides: [f64; 4]) -> Result<PalmConfiguration> {
    for s in sides {
        check_actuator_length(s)?;
    }
    check_sides(sides)?;
    let (lo, hi) = diagonal_bounds(sides);
    if lo >= hi {
        return Err(Error::InfeasibleGeometry(format!(
            "empty diagonal interval ({lo}, {hi})"
        )));
    }
    let score = |q: f64| min_angle_at(sides, q).unwrap_or(f64::NEG_INFINITY);
    let step = (hi - lo) / (RESOLVE_SCAN + 1) as f64;
    let (mut best_q, mut best) = (f64::NAN, f64::NEG_INFINITY);
    for i in 1..=RESOLVE_SCAN {
        let q = lo + step * i as f64;
        let s = score(q);
        if s > best {
            best = s;
            best_q = q;
        }
    }
    if !best.is_finite() {
        return Err(Error::InfeasibleGeometry(
            "no diagonal yields a convex embedding".into(),
        ));
    }
    // golden-section search for the maximum on the bracket around the best sample
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best_q - step).max(lo), (best_q + step).min(hi));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (score(c), score(d));
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = score(d);
        }
    }
    let mid = 0.5 * (a + b);
    let q = [mid, best_q]
        .into_iter()
        .max_by(|x, y| score(*x).total_cmp(&score(*y)))
        .expect("two candidates");
    PalmConfiguration::new(sides, q)
}

/// The three palm shape families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateKind {
    Kite,
    Rectangle,
    Trapezoid,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 3] = [TemplateKind::Rectangle, TemplateKind::Trapezoid, TemplateKind::Kite];

    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::Kite => "kite",
            TemplateKind::Rectangle => "rectangle",
            TemplateKind::Trapezoid => "trapezoid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kite" => Some(TemplateKind::Kite),
            "rectangle" | "rect" => Some(TemplateKind::Rectangle),
            "trapezoid" | "trap" => Some(TemplateKind::Trapezoid),
            _ => None,
        }
    }
}

impl std::fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A template and its two swept parameters (mm).
///
/// * Rectangle: sides `(x, y, x, y)`.
/// * Kite: sides `(x, x, y, y)`, embedded as the right kite (right angles at
///   the two vertices where unequal sides meet), which is the largest-area
///   kite with those sides.
/// * Trapezoid: isosceles, bottom `x`, top `y`, both legs `(x + y) / 2`
///   clamped to the actuator range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeTemplate {
    pub kind: TemplateKind,
    pub x: f64,
    pub y: f64,
}

impl ShapeTemplate {
    pub fn new(kind: TemplateKind, x: f64, y: f64) -> Self {
        Self { kind, x, y }
    }
}

/// Trapezoid leg length for bottom `x` and top `y`.
pub fn trapezoid_leg(x: f64, y: f64) -> f64 {
    (0.5 * (x + y)).clamp(PALM_REST_MM, PALM_MAX_MM)
}

/// Side lengths and 0–2 diagonal of a template.
pub fn shape_template_to_lengths(t: &ShapeTemplate) -> Result<([f64; 4], f64)> {
    check_actuator_length(t.x)?;
    check_actuator_length(t.y)?;
    let (x, y) = (t.x, t.y);
    Ok(match t.kind {
        TemplateKind::Rectangle => ([x, y, x, y], x.hypot(y)),
        TemplateKind::Kite => ([x, x, y, y], 2.0 * x * y / x.hypot(y)),
        TemplateKind::Trapezoid => {
            let leg = trapezoid_leg(x, y);
            let half_diff = 0.5 * (x - y);
            let h2 = leg * leg - half_diff * half_diff;
            if h2 <= 0.0 {
                return Err(Error::InfeasibleGeometry(format!(
                    "trapezoid legs {leg} too short for bases {x} and {y}"
                )));
            }
            ([x, leg, y, leg], (0.5 * (x + y)).hypot(h2.sqrt()))
        }
    })
}

/// Result of [`classify_shape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShapeKind {
    Kite,
    Rectangle,
    Trapezoid,
    General,
}

impl From<TemplateKind> for ShapeKind {
    fn from(k: TemplateKind) -> Self {
        match k {
            TemplateKind::Kite => ShapeKind::Kite,
            TemplateKind::Rectangle => ShapeKind::Rectangle,
            TemplateKind::Trapezoid => ShapeKind::Trapezoid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyTolerance {
    pub angle_deg: f64,
    pub length_mm: f64,
}

impl Default for ClassifyTolerance {
    fn default() -> Self {
        Self {
            angle_deg: 2.0,
            length_mm: 2.0,
        }
    }
}

/// Names the shape of a convex quadrilateral, preferring Rectangle, then
/// Kite, then Trapezoid.
pub fn classify_shape(vertices: &[Point; 4], tol: &ClassifyTolerance) -> ShapeKind {
    let Ok(angles) = internal_angles(vertices) else {
        return ShapeKind::General;
    };
    if angles.iter().all(|a| (a - 90.0).abs() <= tol.angle_deg) {
        return ShapeKind::Rectangle;
    }
    let s = measure_sides(vertices);
    let eq = |i: usize, j: usize| (s[i] - s[j]).abs() <= tol.length_mm;
    if (eq(0, 1) && eq(2, 3)) || (eq(1, 2) && eq(3, 0)) {
        return ShapeKind::Kite;
    }
    let edge = |i: usize| sub(vertices[(i + 1) % 4], vertices[i]);
    let parallel = |i: usize| {
        let (e, f) = (edge(i), edge(i + 2));
        // opposite edges of a convex polygon run antiparallel
        let ang = cross(e, f).abs().atan2(-dot(e, f)).to_degrees();
        ang <= tol.angle_deg
    };
    if parallel(0) != parallel(1) {
        return ShapeKind::Trapezoid;
    }
    ShapeKind::General
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Minimum internal angle over a grid of template parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldGrid {
    pub kind: TemplateKind,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    /// Row-major by x: entry `i * y_values.len() + j` is `(x_i, y_j)`;
    /// `None` marks an infeasible point.
    pub min_angle: Vec<Option<f64>>,
}

impl ManifoldGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.min_angle[i * self.y_values.len() + j]
    }

    pub fn feasible(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some()
    }

    pub fn feasible_count(&self) -> usize {
        self.min_angle.iter().filter(|v| v.is_some()).count()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["x_mm", "y_mm", "min_angle_deg", "feasible"])
            .map_err(io)?;
        for (i, x) in self.x_values.iter().enumerate() {
            for (j, y) in self.y_values.iter().enumerate() {
                let (angle, feasible) = match self.get(i, j) {
                    Some(a) => (a.to_string(), "true"),
                    None => (String::new(), "false"),
                };
                w.write_record([x.to_string(), y.to_string(), angle, feasible.to_string()])
                    .map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the CSV written by [`ManifoldGrid::write_csv`]. The template kind
    /// is not stored in the file and must be supplied.
    pub fn read_csv<R: Read>(kind: TemplateKind, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if headers.iter().ne(["x_mm", "y_mm", "min_angle_deg", "feasible"]) {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `x_mm,y_mm,min_angle_deg,feasible`".into(),
            });
        }
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        let mut cells = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != 4 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 4 fields, found {}", rec.len()),
                });
            }
            let x = parse_f64(&rec[0], line)?;
            let y = parse_f64(&rec[1], line)?;
            let angle = match &rec[3] {
                "true" => Some(parse_f64(&rec[2], line)?),
                "false" => None,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("feasible must be true or false, got `{other}`"),
                    })
                }
            };
            if xs.last() != Some(&x) {
                xs.push(x);
            }
            if xs.len() == 1 {
                ys.push(y);
            }
            cells.push(angle);
        }
        if cells.len() != xs.len() * ys.len() {
            return Err(Error::Parse {
                line: cells.len() + 1,
                message: "rows do not form a full grid".into(),
            });
        }
        Ok(Self {
            kind,
            x_values: xs,
            y_values: ys,
            min_angle: cells,
        })
    }
}

/// Evaluates template lengths plus [`resolve_embedding`] at every grid point.
pub fn sweep_manifold(kind: TemplateKind, x_values: &[f64], y_values: &[f64]) -> Result<ManifoldGrid> {
    for &v in x_values.iter().chain(y_values) {
        check_actuator_length(v)?;
    }
    let mut min_angle = Vec::with_capacity(x_values.len() * y_values.len());
    for &x in x_values {
        for &y in y_values {
            let cell = shape_template_to_lengths(&ShapeTemplate::new(kind, x, y))
                .and_then(|(sides, _)| resolve_embedding(sides))
                .ok()
                .map(|p| p.min_angle());
            min_angle.push(cell);
        }
    }
    Ok(ManifoldGrid {
        kind,
        x_values: x_values.to_vec(),
        y_values: y_values.to_vec(),
        min_angle,
    })
}
