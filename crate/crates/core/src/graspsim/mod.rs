//! Planar quasi-static grasp evaluation.
//!
//! An object's cross-section is lowered into the palm, centred on the palm
//! centroid and turned to the orientation with the most clearance. The grasp
//! succeeds when the approach clears the palm and at least three of the four
//! fingers can reach the object along their corner bisectors.

pub mod catalog;
pub mod finger;
pub mod geometry;
pub mod matrix;

use serde::{Deserialize, Serialize};

pub use catalog::{catalog, object_from_table, ObjectShape, ObjectSpec};
pub use finger::{finger_contact, Contact, FingerModel, FingerParams};

use crate::error::{Error, Result};
use crate::kinematics::{PalmConfiguration, Point};
use crate::FINGER_COUNT;

/// Why a grasp failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureReason {
    /// The object cannot be lowered into the palm.
    NoDescend,
    /// Fewer than the required number of fingers reach the object.
    InsufficientContacts,
    /// A contact was lost during the hold window.
    Slip,
    /// The object is larger than the largest palm the planner can form.
    Oversize,
    /// No finger registered contact before envelopment ended.
    Timeout,
    /// The palm did not reach its setpoints in time.
    SettleTimeout,
}

impl FailureReason {
    pub fn code(self) -> &'static str {
        match self {
            FailureReason::NoDescend => "no_descend",
            FailureReason::InsufficientContacts => "insufficient_contacts",
            FailureReason::Slip => "slip",
            FailureReason::Oversize => "oversize",
            FailureReason::Timeout => "timeout",
            FailureReason::SettleTimeout => "settle_timeout",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        [
            FailureReason::NoDescend,
            FailureReason::InsufficientContacts,
            FailureReason::Slip,
            FailureReason::Oversize,
            FailureReason::Timeout,
            FailureReason::SettleTimeout,
        ]
        .into_iter()
        .find(|r| r.code() == s)
    }
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Settings of the grasp evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspParams {
    pub finger: FingerParams,
    /// Minimum gap between object and palm edges during the approach, mm.
    pub approach_margin_mm: f64,
    /// Angular resolution of the placement orientation search.
    pub placement_step_deg: f64,
    pub min_contacts: usize,
}

impl Default for GraspParams {
    fn default() -> Self {
        Self {
            finger: FingerParams::default(),
            approach_margin_mm: 0.0,
            placement_step_deg: 1.0,
            min_contacts: 3,
        }
    }
}

impl GraspParams {
    pub fn validate(&self) -> Result<()> {
        self.finger.validate()?;
        if !(self.approach_margin_mm >= 0.0 && self.approach_margin_mm.is_finite()) {
            return Err(Error::param("approach_margin_mm", "must be non-negative"));
        }
        if !(self.placement_step_deg > 0.0 && self.placement_step_deg <= 360.0) {
            return Err(Error::param("placement_step_deg", "must lie in (0, 360]"));
        }
        if !(1..=FINGER_COUNT).contains(&self.min_contacts) {
            return Err(Error::param("min_contacts", "must be between 1 and 4"));
        }
        Ok(())
    }
}

/// The object's pose inside the palm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub angle_deg: f64,
    /// Smallest distance from an object vertex to a palm edge, mm; negative
    /// when the object sticks out.
    pub clearance: f64,
    pub polygon: Vec<Point>,
}

/// Centres the object on the palm centroid and picks the orientation, on a
/// grid of `step_deg`, that maximizes clearance. Ties keep the smallest
/// angle.
pub fn place_object(palm: &PalmConfiguration, obj: &ObjectSpec, step_deg: f64) -> Placement {
    let c = palm.centroid();
    let steps = (360.0 / step_deg).ceil() as usize;
    let mut best: Option<Placement> = None;
    for k in 0..steps.max(1) {
        let angle = k as f64 * step_deg;
        let poly = geometry::translate(&geometry::rotate(obj.cross_section(), angle), c);
        let clr = geometry::clearance(palm.vertices(), &poly);
        if best.as_ref().is_none_or(|b| clr > b.clearance) {
            best = Some(Placement {
                angle_deg: angle,
                clearance: clr,
                polygon: poly,
            });
        }
    }
    best.expect("at least one orientation")
}

/// True when the object, centred in the palm, fits strictly inside with at
/// least `margin` to spare.
pub fn approach_feasible(palm: &PalmConfiguration, obj: &ObjectSpec, margin: f64, step_deg: f64) -> bool {
    placement_clears(&place_object(palm, obj, step_deg), margin)
}

fn placement_clears(p: &Placement, margin: f64) -> bool {
    p.clearance > 0.0 && p.clearance >= margin
}

/// The four fingers of a palm at zero curl.
pub fn fingers(palm: &PalmConfiguration, params: &FingerParams) -> [FingerModel; FINGER_COUNT] {
    std::array::from_fn(|i| FingerModel::at_corner(palm, i, params))
}

/// Result of a static grasp evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspOutcome {
    pub feasible_approach: bool,
    pub placement: Placement,
    /// Distance from each finger mount to the object along its footprint line.
    pub boundary_distance: [Option<f64>; FINGER_COUNT],
    pub contacts: [Option<Contact>; FINGER_COUNT],
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
}

impl GraspOutcome {
    pub fn contact_count(&self) -> usize {
        self.contacts.iter().filter(|c| c.is_some()).count()
    }
}

/// Approach gate, then the four finger contacts, then the majority rule.
pub fn evaluate_grasp(palm: &PalmConfiguration, obj: &ObjectSpec, params: &GraspParams) -> GraspOutcome {
    let placement = place_object(palm, obj, params.placement_step_deg);
    let feasible_approach = placement_clears(&placement, params.approach_margin_mm);
    let fingers = fingers(palm, &params.finger);
    let boundary_distance = fingers.map(|f| finger::boundary_distance(&f, &placement.polygon));
    let contacts = if feasible_approach {
        fingers.map(|f| finger_contact(&f, &placement.polygon))
    } else {
        [None; FINGER_COUNT]
    };
    let n = contacts.iter().filter(|c| c.is_some()).count();
    let failure_reason = if !feasible_approach {
        Some(FailureReason::NoDescend)
    } else if n < params.min_contacts {
        Some(FailureReason::InsufficientContacts)
    } else {
        None
    };
    GraspOutcome {
        feasible_approach,
        placement,
        boundary_distance,
        contacts,
        success: failure_reason.is_none(),
        failure_reason,
    }
}
