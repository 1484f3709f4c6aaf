//! Per-actuator closed-loop control.
//!
//! A positional PID maps displacement error to an absolute target pressure;
//! a deadband valve rule then chooses inflate, hold or deflate so the plant
//! pressure tracks that target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{step_pneumatic, ActuatorState, CalibrationCurve, PneumaticParams, Valve};

/// PID gains and limits. Gains are in kPa per unit of displacement error
/// (mm for palm actuators, degrees for fingers).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on the accumulated error integral (error units times seconds).
    pub integral_limit: f64,
    /// Upper clamp on the output target pressure, kPa.
    pub output_limit: f64,
    /// Errors no larger than this are not integrated. Keeps a settled
    /// actuator from drifting into a valve pulse.
    pub integral_deadzone: f64,
}

impl PidGains {
    /// Default palm gains, tuned against the default plant.
    pub fn palm_default() -> Self {
        Self {
            kp: 1.0,
            ki: 3.0,
            kd: 0.0,
            integral_limit: 50.0,
            output_limit: crate::plant::SUPPLY_PRESSURE_KPA,
            integral_deadzone: 0.4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "gains must be non-negative"));
            }
        }
        if !(self.integral_limit >= 0.0) {
            return Err(Error::param("integral_limit", "must be non-negative"));
        }
        if !(self.integral_deadzone >= 0.0 && self.integral_deadzone.is_finite()) {
            return Err(Error::param("integral_deadzone", "must be non-negative"));
        }
        if !(self.output_limit > 0.0) {
            return Err(Error::param("output_limit", "must be positive"));
        }
        Ok(())
    }
}

/// PID gains together with the controller memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub gains: PidGains,
    pub integral: f64,
    /// Error seen on the previous step; `None` before the first step.
    pub prev_error: Option<f64>,
}

impl PidState {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integral: 0.0,
            prev_error: None,
        }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
    }
}

/// One positional PID update. Returns the target pressure and the new state.
///
/// The derivative uses a single backward difference on the error and is zero
/// on the first step. Errors inside `integral_deadzone` are not integrated.
/// The integral is clamped to `integral_limit` and frozen
/// while the output saturates in the direction of the error.
pub fn pid_step(desired: f64, measured: f64, pid: &PidState, dt: f64) -> (f64, PidState) {
    let g = &pid.gains;
    let error = desired - measured;
    let derivative = match pid.prev_error {
        Some(prev) => (error - prev) / dt,
        None => 0.0,
    };
    let output = |integral: f64| g.kp * error + g.ki * integral + g.kd * derivative;
    let step = if error.abs() > g.integral_deadzone {
        error * dt
    } else {
        0.0
    };
    let mut integral = (pid.integral + step).clamp(-g.integral_limit, g.integral_limit);
    // conditional integration: while the output is pinned at a limit, do not
    // accumulate error that pushes further into that limit
    let raw = output(integral);
    if (raw > g.output_limit && error > 0.0) || (raw < 0.0 && error < 0.0) {
        integral = pid.integral.clamp(-g.integral_limit, g.integral_limit);
    }
    let target = output(integral).clamp(0.0, g.output_limit);
    (
        target,
        PidState {
            gains: pid.gains,
            integral,
            prev_error: Some(error),
        },
    )
}

/// Symmetric hold band around the target pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValvePolicy {
    /// Half-width of the hold band, kPa.
    pub deadband: f64,
}

impl Default for ValvePolicy {
    fn default() -> Self {
        Self { deadband: 1.5 }
    }
}

impl ValvePolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.deadband > 0.0 && self.deadband.is_finite()) {
            return Err(Error::param("deadband", "must be positive"));
        }
        Ok(())
    }
}

/// Valve decision. Band edges resolve to [`Valve::Hold`].
pub fn valve_command(target: f64, measured: f64, policy: &ValvePolicy) -> Valve {
    if measured < target - policy.deadband {
        Valve::Inflate
    } else if measured > target + policy.deadband {
        Valve::Deflate
    } else {
        Valve::Hold
    }
}

/// Record of a closed-loop run. `states[0]` is the initial state; entry
/// `i + 1` is the state after tick `i`, whose target is `targets[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub setpoint: f64,
    pub states: Vec<ActuatorState>,
    pub targets: Vec<f64>,
    pub pid: PidState,
}

impl Trajectory {
    pub fn last(&self) -> &ActuatorState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// First state index from which the displacement stays within `band`
    /// of the setpoint until the end of the run.
    pub fn settling_index(&self, band: f64) -> Option<usize> {
        let inside = |s: &ActuatorState| (s.displacement - self.setpoint).abs() <= band;
        if !inside(self.last()) {
            return None;
        }
        let mut idx = self.states.len() - 1;
        while idx > 0 && inside(&self.states[idx - 1]) {
            idx -= 1;
        }
        Some(idx)
    }
}

/// Runs `pid_step -> valve_command -> step_pneumatic` for `max_ticks` ticks.
#[allow(clippy::too_many_arguments)]
pub fn track_setpoint(
    setpoint: f64,
    initial: &ActuatorState,
    pid: &PidState,
    policy: &ValvePolicy,
    params: &PneumaticParams,
    curve: &CalibrationCurve,
    max_ticks: usize,
) -> Result<Trajectory> {
    if !(curve.rest()..=curve.max()).contains(&setpoint) {
        return Err(Error::UnreachableSetpoint {
            setpoint,
            min: curve.rest(),
            max: curve.max(),
        });
    }
    let mut states = Vec::with_capacity(max_ticks + 1);
    let mut targets = Vec::with_capacity(max_ticks);
    let mut state = *initial;
    let mut pid = *pid;
    states.push(state);
    for _ in 0..max_ticks {
        let (target, next_pid) = pid_step(setpoint, state.displacement, &pid, params.dt);
        pid = next_pid;
        state.valve = valve_command(target, state.pressure, policy);
        state = step_pneumatic(&state, params, curve);
        targets.push(target);
        states.push(state);
    }
    Ok(Trajectory {
        setpoint,
        states,
        targets,
        pid,
    })
}
