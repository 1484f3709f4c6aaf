//! Simulated pneumatic plant.
//!
//! Each actuator is a pressure state driven by a three-way valve command.
//! Displacement (palm length in mm, finger bend angle in degrees) is a
//! memoryless function of pressure given by a [`CalibrationCurve`]; all of the
//! dynamics live in the first-order pressure update of [`step_pneumatic`].

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supply pressure of the 15 psi pump, in kPa.
pub const SUPPLY_PRESSURE_KPA: f64 = 103.4;

/// Palm actuator length at rest, in mm.
pub const PALM_REST_MM: f64 = 68.0;

/// Palm actuator length at full supply pressure, in mm.
pub const PALM_MAX_MM: f64 = 135.0;

/// Default finger bend angle at full supply pressure, in degrees.
pub const DEFAULT_FINGER_MAX_DEG: f64 = 160.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveKind {
    PalmLength,
    FingerAngle,
}

impl CurveKind {
    fn name(self) -> &'static str {
        match self {
            CurveKind::PalmLength => "PalmLength",
            CurveKind::FingerAngle => "FingerAngle",
        }
    }
}

/// Monotone pressure-to-displacement map, interpolated piecewise linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    kind: CurveKind,
    points: Vec<(f64, f64)>,
}

impl CalibrationCurve {
    /// Builds a curve from `(pressure_kpa, displacement)` knots.
    ///
    /// Pressures must start at 0 and increase strictly; displacements must not
    /// decrease. The last knot's pressure is the supply pressure.
    pub fn new(kind: CurveKind, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCalibration("at least two knots are required".into()));
        }
        if points.iter().any(|(p, d)| !p.is_finite() || !d.is_finite()) {
            return Err(Error::InvalidCalibration("non-finite knot".into()));
        }
        if points[0].0 != 0.0 {
            return Err(Error::InvalidCalibration(format!(
                "first knot must be at 0 kPa, found {}",
                points[0].0
            )));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidCalibration(format!(
                    "pressures must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidCalibration(format!(
                    "displacement decreases between {} and {} kPa",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self { kind, points })
    }

    /// Two-point linear curve from `rest` at 0 kPa to `max` at `supply`.
    pub fn linear(kind: CurveKind, supply: f64, rest: f64, max: f64) -> Result<Self> {
        Self::new(kind, vec![(0.0, rest), (supply, max)])
    }

    /// Palm curve spanning 68 mm to 135 mm over the supply range.
    pub fn default_palm() -> Self {
        Self::linear(CurveKind::PalmLength, SUPPLY_PRESSURE_KPA, PALM_REST_MM, PALM_MAX_MM)
            .expect("default palm curve is valid")
    }

    /// Finger curve from a straight finger to `max_angle_deg`.
    pub fn default_finger(max_angle_deg: f64) -> Result<Self> {
        Self::linear(CurveKind::FingerAngle, SUPPLY_PRESSURE_KPA, 0.0, max_angle_deg)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Pressure of the last knot.
    pub fn supply(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    /// Displacement at 0 kPa.
    pub fn rest(&self) -> f64 {
        self.points[0].1
    }

    /// Displacement at supply pressure.
    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }

    /// Interpolated displacement at pressure `p`.
    pub fn eval(&self, p: f64) -> Result<f64> {
        let supply = self.supply();
        if !(0.0..=supply).contains(&p) {
            return Err(Error::PressureOutOfRange { pressure: p, supply });
        }
        // first knot with pressure >= p
        let idx = self.points.partition_point(|&(kp, _)| kp < p);
        if idx == 0 {
            return Ok(self.points[0].1);
        }
        let (p0, d0) = self.points[idx - 1];
        let (p1, d1) = self.points[idx];
        if p == p1 {
            return Ok(d1);
        }
        Ok(d0 + (d1 - d0) * (p - p0) / (p1 - p0))
    }

    /// Smallest pressure whose displacement reaches `displacement`.
    pub fn inverse(&self, displacement: f64) -> Result<f64> {
        if displacement < self.rest() || displacement > self.max() {
            return Err(Error::UnreachableSetpoint {
                setpoint: displacement,
                min: self.rest(),
                max: self.max(),
            });
        }
        let idx = self.points.partition_point(|&(_, d)| d < displacement);
        if idx == 0 {
            return Ok(0.0);
        }
        let (p0, d0) = self.points[idx - 1];
        let (p1, d1) = self.points[idx];
        Ok(p0 + (p1 - p0) * (displacement - d0) / (d1 - d0))
    }

    /// Reads a curve from CSV with header `pressure_kpa,displacement`.
    pub fn read_csv<R: Read>(kind: CurveKind, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if headers.len() != 2 || headers.get(0) != Some("pressure_kpa") || headers.get(1) != Some("displacement") {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `pressure_kpa,displacement`".into(),
            });
        }
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 fields, found {}", rec.len()),
                });
            }
            let p = parse_f64(&rec[0], line)?;
            let d = parse_f64(&rec[1], line)?;
            points.push((p, d));
        }
        Self::new(kind, points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["pressure_kpa", "displacement"]).map_err(io)?;
        for (p, d) in &self.points {
            w.write_record([p.to_string(), d.to_string()]).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("`{s}`: {e}"),
    })
}

fn expect_kind(curve: &CalibrationCurve, kind: CurveKind) -> Result<()> {
    if curve.kind != kind {
        return Err(Error::CurveKind {
            expected: kind.name(),
            actual: curve.kind.name(),
        });
    }
    Ok(())
}

/// Palm actuator length in mm at pressure `p` kPa.
pub fn palm_length_from_pressure(p: f64, curve: &CalibrationCurve) -> Result<f64> {
    expect_kind(curve, CurveKind::PalmLength)?;
    curve.eval(p)
}

/// Finger bend angle in degrees at pressure `p` kPa.
pub fn finger_angle_from_pressure(p: f64, curve: &CalibrationCurve) -> Result<f64> {
    expect_kind(curve, CurveKind::FingerAngle)?;
    curve.eval(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valve {
    Inflate,
    Hold,
    Deflate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActuatorKind {
    Palm,
    Finger,
}

/// Instantaneous state of one actuator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorState {
    pub kind: ActuatorKind,
    /// Chamber pressure, kPa.
    pub pressure: f64,
    /// Valve command applied on the next step.
    pub valve: Valve,
    /// Length in mm (palm) or bend angle in degrees (finger).
    pub displacement: f64,
}

impl ActuatorState {
    /// State at `pressure` with displacement taken from `curve`.
    pub fn at_pressure(kind: ActuatorKind, pressure: f64, curve: &CalibrationCurve) -> Result<Self> {
        Ok(Self {
            kind,
            pressure,
            valve: Valve::Hold,
            displacement: curve.eval(pressure)?,
        })
    }

    pub fn vented(kind: ActuatorKind, curve: &CalibrationCurve) -> Self {
        Self {
            kind,
            pressure: 0.0,
            valve: Valve::Hold,
            displacement: curve.rest(),
        }
    }
}

/// Rate constants for the first-order pressure model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PneumaticParams {
    /// Supply pressure, kPa.
    pub supply: f64,
    /// Inflate rate constant, 1/s.
    pub k_in: f64,
    /// Deflate rate constant, 1/s.
    pub k_out: f64,
    /// Leak rate while holding, 1/s.
    pub leak: f64,
    /// Integration step, s.
    pub dt: f64,
}

impl Default for PneumaticParams {
    fn default() -> Self {
        Self {
            supply: SUPPLY_PRESSURE_KPA,
            k_in: 2.0,
            k_out: 2.0,
            leak: 0.0,
            dt: 0.01,
        }
    }
}

impl PneumaticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.supply > 0.0 && self.supply.is_finite()) {
            return Err(Error::param("supply", "must be positive"));
        }
        for (name, v) in [("k_in", self.k_in), ("k_out", self.k_out), ("leak", self.leak)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be non-negative"));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", "must be positive"));
        }
        let fastest = self.k_in.max(self.k_out).max(self.leak);
        if self.dt * fastest >= 1.0 {
            return Err(Error::param(
                "dt",
                format!("dt * max rate = {} must stay below 1", self.dt * fastest),
            ));
        }
        Ok(())
    }
}

/// Advances one actuator by one explicit Euler step.
///
/// The pressure is clamped to `[0, supply]` and the displacement recomputed
/// from `curve`, so the returned state always satisfies the plant invariants.
pub fn step_pneumatic(s: &ActuatorState, params: &PneumaticParams, curve: &CalibrationCurve) -> ActuatorState {
    let supply = params.supply.min(curve.supply());
    let p = s.pressure;
    let next = match s.valve {
        Valve::Inflate => p + params.k_in * (supply - p) * params.dt,
        Valve::Deflate => p - params.k_out * p * params.dt,
        Valve::Hold => p - params.leak * p * params.dt,
    };
    let pressure = next.clamp(0.0, supply);
    let displacement = curve
        .eval(pressure)
        .expect("clamped pressure lies inside the calibration range");
    ActuatorState {
        kind: s.kind,
        pressure,
        valve: s.valve,
        displacement,
    }
}
