//! Constant-curvature finger model.
//!
//! A finger hangs from a palm corner and curls toward the palm interior. Its
//! shadow on the grasp plane is a segment along the corner's inward bisector;
//! the segment length is the largest horizontal excursion of the arc so far.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::Point;

const REACH_EPS: f64 = 1e-9;

/// Horizontal excursion of a circular arc of length `arc_length` bent through
/// `theta` radians, starting vertical.
pub fn projected_reach(arc_length: f64, theta: f64) -> f64 {
    if theta <= 1e-9 {
        // (1 - cos t) / t -> t / 2
        return arc_length * theta / 2.0;
    }
    let r = arc_length / theta;
    r * (1.0 - theta.min(std::f64::consts::PI).cos())
}

/// Bend angle (radians) at which [`projected_reach`] peaks, about 133.6°:
/// the root of `t sin t = 1 - cos t` in `(pi/2, pi)`.
pub fn peak_reach_angle() -> f64 {
    static PEAK: OnceLock<f64> = OnceLock::new();
    *PEAK.get_or_init(|| {
        let g = |t: f64| t * t.sin() - (1.0 - t.cos());
        let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Largest footprint the finger has swept by the time it has bent through
/// `theta` radians.
pub fn swept_reach(arc_length: f64, theta: f64) -> f64 {
    projected_reach(arc_length, theta.max(0.0).min(peak_reach_angle()))
}

/// Smallest bend angle (radians) whose swept footprint reaches `distance`,
/// or `None` if it is beyond the finger's reach at `max_theta`.
pub fn contact_angle(arc_length: f64, max_theta: f64, distance: f64) -> Option<f64> {
    if distance <= 0.0 {
        return Some(0.0);
    }
    let top = max_theta.min(peak_reach_angle());
    if swept_reach(arc_length, top) < distance {
        return None;
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if swept_reach(arc_length, mid) >= distance {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Finger dimensions shared by all four corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerParams {
    pub arc_length_mm: f64,
    /// Bend angle at full supply pressure.
    pub max_angle_deg: f64,
}

impl Default for FingerParams {
    fn default() -> Self {
        Self {
            arc_length_mm: 63.5,
            max_angle_deg: crate::plant::DEFAULT_FINGER_MAX_DEG,
        }
    }
}

impl FingerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.arc_length_mm > 0.0 && self.arc_length_mm.is_finite()) {
            return Err(Error::param("arc_length_mm", "must be positive"));
        }
        if !(self.max_angle_deg > 0.0 && self.max_angle_deg <= 360.0) {
            return Err(Error::param("max_angle_deg", "must lie in (0, 360]"));
        }
        Ok(())
    }

    pub fn max_theta(&self) -> f64 {
        self.max_angle_deg.to_radians()
    }

    /// Footprint length at full curl.
    pub fn max_reach(&self) -> f64 {
        swept_reach(self.arc_length_mm, self.max_theta())
    }
}

/// One finger mounted at a palm corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerModel {
    pub corner: usize,
    pub mount: Point,
    /// Unit vector along the corner's interior-angle bisector.
    pub inward: Point,
    pub arc_length: f64,
    /// Current curvature, 1/mm; the bend angle is `arc_length * curvature`.
    pub curvature: f64,
    pub max_angle_deg: f64,
}

impl FingerModel {
    pub fn at_corner(palm: &crate::kinematics::PalmConfiguration, corner: usize, params: &FingerParams) -> Self {
        Self {
            corner,
            mount: palm.vertices()[corner],
            inward: palm.inward_bisector(corner),
            arc_length: params.arc_length_mm,
            curvature: 0.0,
            max_angle_deg: params.max_angle_deg,
        }
    }

    pub fn with_angle_deg(mut self, deg: f64) -> Self {
        self.curvature = deg.clamp(0.0, self.max_angle_deg).to_radians() / self.arc_length;
        self
    }

    pub fn theta(&self) -> f64 {
        self.arc_length * self.curvature
    }

    /// Footprint length swept so far.
    pub fn reach(&self) -> f64 {
        swept_reach(self.arc_length, self.theta())
    }

    pub fn max_reach(&self) -> f64 {
        swept_reach(self.arc_length, self.max_angle_deg.to_radians())
    }

    pub fn point_at(&self, distance: f64) -> Point {
        [
            self.mount[0] + self.inward[0] * distance,
            self.mount[1] + self.inward[1] * distance,
        ]
    }
}

/// Where the finger first touches the object, and how far from its mount.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub point: Point,
    pub distance: f64,
}

/// Distance from the mount to the object boundary along the finger's
/// footprint line, if the line meets the object.
pub fn boundary_distance(finger: &FingerModel, object: &[Point]) -> Option<f64> {
    super::geometry::ray_distance(finger.mount, finger.inward, object)
}

/// Contact of the fully curled finger with an object polygon placed in palm
/// coordinates. A boundary exactly at maximum reach counts as contact; the
/// comparison allows for round-off in the ray intersection.
pub fn finger_contact(finger: &FingerModel, object: &[Point]) -> Option<Contact> {
    let d = boundary_distance(finger, object)?;
    (d <= finger.max_reach() + REACH_EPS).then(|| Contact {
        point: finger.point_at(d),
        distance: d,
    })
}
