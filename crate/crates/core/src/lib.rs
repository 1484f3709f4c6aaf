//! Simulation and control stack for a shape-morphing soft pneumatic gripper.
//!
//! The gripper has a quadrilateral palm whose four sides are linear
//! pneumatic actuators and a bending finger at each palm corner. This crate
//! models the pneumatic plant, the per-actuator valve/PID loop, palm
//! kinematics, bend-sensor contact detection, the three-phase grasping
//! policy, and a planar quasi-static grasp evaluator.
//!
//! ```
//! use morphgrip::kinematics::{resolve_embedding, ShapeKind, classify_shape, ClassifyTolerance};
//!
//! let palm = resolve_embedding([135.0, 68.0, 135.0, 68.0]).unwrap();
//! assert!((palm.min_angle() - 90.0).abs() < 1e-3);
//! assert_eq!(classify_shape(palm.vertices(), &ClassifyTolerance::default()), ShapeKind::Rectangle);
//! ```

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod control;
pub mod error;
pub mod graspsim;
pub mod kinematics;
pub mod plant;
pub mod policy;
pub mod sensing;

pub use error::{Error, Result};

/// Number of palm actuators, palm corners and fingers.
pub const FINGER_COUNT: usize = 4;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/plant.md")]
    mod plant {}
    #[doc = include_str!("../../../book/src/control.md")]
    mod control {}
    #[doc = include_str!("../../../book/src/kinematics.md")]
    mod kinematics {}
    #[doc = include_str!("../../../book/src/sensing.md")]
    mod sensing {}
    #[doc = include_str!("../../../book/src/policy.md")]
    mod policy {}
    #[doc = include_str!("../../../book/src/graspsim.md")]
    mod graspsim {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
