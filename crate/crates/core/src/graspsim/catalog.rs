//! Test-object catalog.

use serde::{Deserialize, Serialize};

use super::geometry::{is_convex_ccw, signed_area, translate};
use crate::error::{Error, Result};
use crate::kinematics::{polygon_centroid, Point, TemplateKind};

const CATALOG_TOML: &str = include_str!("../../data/objects.toml");

/// Vertices used to approximate round cross-sections.
pub const CIRCLE_SEGMENTS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    /// The 3D-printed kite, rectangle and trapezoid primitives.
    Standard,
    Real,
}

/// Dimensions of an object's footprint, mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObjectShape {
    /// Diagonals `width` (long) and `depth`; the short diagonal crosses the
    /// long one at `cross * width` from its end.
    Kite {
        width: f64,
        depth: f64,
        cross: f64,
    },
    Rectangle {
        width: f64,
        depth: f64,
    },
    /// Isosceles trapezoid with parallel sides `bottom` and `top`.
    Trapezoid {
        bottom: f64,
        top: f64,
        depth: f64,
    },
    Circle {
        diameter: f64,
    },
}

impl ObjectShape {
    fn validate(&self) -> Result<()> {
        let dims: &[f64] = match self {
            ObjectShape::Kite { width, depth, .. } => &[*width, *depth],
            ObjectShape::Rectangle { width, depth } => &[*width, *depth],
            ObjectShape::Trapezoid { bottom, top, depth } => &[*bottom, *top, *depth],
            ObjectShape::Circle { diameter } => &[*diameter],
        };
        if dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::param("object", "dimensions must be positive"));
        }
        if let ObjectShape::Kite { cross, .. } = self {
            if !(*cross > 0.0 && *cross < 1.0) {
                return Err(Error::param("cross", "must lie strictly between 0 and 1"));
            }
        }
        Ok(())
    }

    /// Cross-section at the grasp plane, centred on its area centroid.
    ///
    /// Trapezoids are cut at mid-height: the section keeps the object's taper
    /// with its wider base equal to the mid-height width `(bottom + top) / 2`.
    pub fn cross_section(&self) -> Vec<Point> {
        let poly: Vec<Point> = match *self {
            ObjectShape::Kite { width, depth, cross } => vec![
                [-cross * width, 0.0],
                [0.0, -depth / 2.0],
                [(1.0 - cross) * width, 0.0],
                [0.0, depth / 2.0],
            ],
            ObjectShape::Rectangle { width, depth } => vec![
                [-width / 2.0, -depth / 2.0],
                [width / 2.0, -depth / 2.0],
                [width / 2.0, depth / 2.0],
                [-width / 2.0, depth / 2.0],
            ],
            ObjectShape::Trapezoid { bottom, top, depth } => {
                let b = 0.5 * (bottom + top);
                let t = b * top / bottom;
                vec![
                    [-b / 2.0, -depth / 2.0],
                    [b / 2.0, -depth / 2.0],
                    [t / 2.0, depth / 2.0],
                    [-t / 2.0, depth / 2.0],
                ]
            }
            ObjectShape::Circle { diameter } => (0..CIRCLE_SEGMENTS)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / CIRCLE_SEGMENTS as f64;
                    [diameter / 2.0 * a.cos(), diameter / 2.0 * a.sin()]
                })
                .collect(),
        };
        let c = polygon_centroid(&poly);
        translate(&poly, [-c[0], -c[1]])
    }

    /// Extents `(width, depth)` a coarse estimate would report. Trapezoids
    /// report their mid-height width.
    pub fn footprint(&self) -> (f64, f64) {
        match *self {
            ObjectShape::Kite { width, depth, .. } | ObjectShape::Rectangle { width, depth } => (width, depth),
            ObjectShape::Trapezoid { bottom, top, depth } => (0.5 * (bottom + top), depth),
            ObjectShape::Circle { diameter } => (diameter, diameter),
        }
    }

    /// Matching palm template, if the shape belongs to one of the families.
    pub fn template_hint(&self) -> Option<TemplateKind> {
        match self {
            ObjectShape::Kite { .. } => Some(TemplateKind::Kite),
            ObjectShape::Rectangle { .. } => Some(TemplateKind::Rectangle),
            ObjectShape::Trapezoid { .. } => Some(TemplateKind::Trapezoid),
            ObjectShape::Circle { .. } => None,
        }
    }

    /// Same shape with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            ObjectShape::Kite { width, depth, cross } => ObjectShape::Kite {
                width: width * factor,
                depth: depth * factor,
                cross,
            },
            ObjectShape::Rectangle { width, depth } => ObjectShape::Rectangle {
                width: width * factor,
                depth: depth * factor,
            },
            ObjectShape::Trapezoid { bottom, top, depth } => ObjectShape::Trapezoid {
                bottom: bottom * factor,
                top: top * factor,
                depth: depth * factor,
            },
            ObjectShape::Circle { diameter } => ObjectShape::Circle {
                diameter: diameter * factor,
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDef {
    id: String,
    name: String,
    category: Category,
    shape: ObjectShape,
    height: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    object: Vec<ObjectDef>,
}

/// A named object and its grasp-plane cross-section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectSpec {
    pub id: String,
    pub name: String,
    pub category: Category,
    pub shape: ObjectShape,
    pub height: f64,
    cross_section: Vec<Point>,
}

impl ObjectSpec {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        category: Category,
        shape: ObjectShape,
        height: f64,
    ) -> Result<Self> {
        shape.validate()?;
        if !(height > 0.0) {
            return Err(Error::param("height", "must be positive"));
        }
        let cross_section = shape.cross_section();
        debug_assert!(is_convex_ccw(&cross_section) && signed_area(&cross_section) > 0.0);
        Ok(Self {
            id: id.into(),
            name: name.into(),
            category,
            shape,
            height,
            cross_section,
        })
    }

    pub fn cross_section(&self) -> &[Point] {
        &self.cross_section
    }

    /// A uniformly scaled copy, named after the original.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            format!("{}@{factor}", self.id),
            format!("{} x{factor}", self.name),
            self.category,
            self.shape.scaled(factor),
            self.height * factor,
        )
    }
}

/// Every object in the shipped catalog, in file order.
pub fn catalog() -> Vec<ObjectSpec> {
    let file: CatalogFile = toml::from_str(CATALOG_TOML).expect("shipped object catalog parses");
    file.object
        .into_iter()
        .map(|d| ObjectSpec::new(d.id, d.name, d.category, d.shape, d.height).expect("shipped object is valid"))
        .collect()
}

/// Looks an object up by id or display name, ignoring case.
pub fn object_from_table(name: &str) -> Result<ObjectSpec> {
    catalog()
        .into_iter()
        .find(|o| o.id.eq_ignore_ascii_case(name) || o.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownObject(name.to_string()))
}

pub fn standard_objects() -> Vec<ObjectSpec> {
    catalog()
        .into_iter()
        .filter(|o| o.category == Category::Standard)
        .collect()
}

pub fn real_objects() -> Vec<ObjectSpec> {
    catalog().into_iter().filter(|o| o.category == Category::Real).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn extent(poly: &[Point], axis: usize) -> f64 {
        let (lo, hi) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[axis]), hi.max(p[axis]))
        });
        hi - lo
    }

    #[test]
    fn catalog_lists_standard_then_real() {
        let ids: Vec<_> = catalog().into_iter().map(|o| o.id).collect();
        assert_eq!(
            ids,
            [
                "kite-s",
                "kite-l",
                "rect-s",
                "rect-l",
                "trap-s",
                "trap-l",
                "pear",
                "cube",
                "cup-noodles"
            ]
        );
        assert_eq!(standard_objects().len(), 6);
        assert_eq!(real_objects().len(), 3);
    }

    #[test]
    fn lookup_by_name_or_id() {
        let r = object_from_table("Rectangle (Small)").unwrap();
        assert_eq!(r.id, "rect-s");
        assert_abs_diff_eq!(extent(r.cross_section(), 0), 20.0);
        assert_abs_diff_eq!(extent(r.cross_section(), 1), 20.0);
        assert!(object_from_table("KITE-L").is_ok());
        assert!(matches!(object_from_table("teapot"), Err(Error::UnknownObject(_))));
    }

    #[test]
    fn trapezoid_uses_mid_height_width() {
        let t = object_from_table("Trapezoid (Large)").unwrap();
        assert_eq!(t.shape.footprint(), (105.0, 70.0));
        assert_abs_diff_eq!(extent(t.cross_section(), 0), 105.0, epsilon = 1e-9);
        assert_abs_diff_eq!(extent(t.cross_section(), 1), 70.0, epsilon = 1e-9);
    }

    #[test]
    fn round_objects() {
        let cup = object_from_table("Cup Noodles").unwrap();
        assert_eq!(cup.shape, ObjectShape::Circle { diameter: 90.0 });
        assert_abs_diff_eq!(extent(cup.cross_section(), 0), 90.0, epsilon = 1e-9);
        assert_eq!(cup.shape.template_hint(), None);
    }

    #[test]
    fn cross_sections_are_centred_and_convex() {
        for o in catalog() {
            let cs = o.cross_section();
            assert!(is_convex_ccw(cs), "{}", o.id);
            let c = polygon_centroid(cs);
            assert_abs_diff_eq!(c[0], 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn kite_diagonals() {
        let k = object_from_table("kite-s").unwrap();
        assert_abs_diff_eq!(extent(k.cross_section(), 0), 80.0, epsilon = 1e-9);
        assert_abs_diff_eq!(extent(k.cross_section(), 1), 50.0, epsilon = 1e-9);
    }
}
