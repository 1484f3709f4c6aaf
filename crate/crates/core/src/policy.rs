//! Three-phase adaptive grasping.
//!
//! Phase 0 opens the palm fully with straight fingers. Phase 1 pre-shapes the
//! palm from a coarse size estimate. Phase 2 ramps every finger's pressure
//! until its bend sensor reports contact, then holds that finger. A grasp
//! succeeds when a majority of fingers made contact and kept it for the whole
//! hold window.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{Baseline, RunConfig};
use crate::control::{pid_step, valve_command, PidGains, PidState, ValvePolicy};
use crate::error::{Error, Result};
use crate::graspsim::finger::swept_reach;
use crate::graspsim::matrix::{MatrixCell, SuccessMatrix};
use crate::graspsim::{evaluate_grasp, FailureReason, GraspOutcome, ObjectSpec};
use crate::kinematics::{resolve_embedding, shape_template_to_lengths, PalmConfiguration, ShapeTemplate, TemplateKind};
use crate::plant::{
    step_pneumatic, ActuatorKind, ActuatorState, CalibrationCurve, PneumaticParams, Valve, PALM_MAX_MM, PALM_REST_MM,
};
use crate::sensing::{StreamingDetector, RISE_PROFILE};
use crate::FINGER_COUNT;

/// Policy state. Variants are listed in the only order they may occur;
/// `Done` and `Failed` are terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseState {
    Init,
    Reconfigure,
    Envelop,
    Hold,
    Done,
    Failed,
}

impl PhaseState {
    /// Position in the phase sequence; the two terminal states share a rank.
    pub fn rank(self) -> u8 {
        match self {
            PhaseState::Init => 0,
            PhaseState::Reconfigure => 1,
            PhaseState::Envelop => 2,
            PhaseState::Hold => 3,
            PhaseState::Done | PhaseState::Failed => 4,
        }
    }

    pub fn is_terminal(self) -> bool {
        self.rank() == 4
    }
}

/// Current phase plus the tick at which each finger registered contact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraspPhase {
    pub state: PhaseState,
    pub tick: usize,
    pub finger_contacts: [Option<usize>; FINGER_COUNT],
}

impl Default for GraspPhase {
    fn default() -> Self {
        Self {
            state: PhaseState::Init,
            tick: 0,
            finger_contacts: [None; FINGER_COUNT],
        }
    }
}

impl GraspPhase {
    pub fn contact_count(&self) -> usize {
        self.finger_contacts.iter().filter(|c| c.is_some()).count()
    }

    /// Moves to `to`. Going backwards, or leaving a terminal state, is a bug.
    fn enter(&mut self, to: PhaseState) {
        assert!(
            to.rank() > self.state.rank(),
            "phase may not move from {:?} to {:?}",
            self.state,
            to
        );
        self.state = to;
    }
}

/// Coarse object size, as a vision system or operator would supply it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectEstimate {
    pub footprint_width: f64,
    pub footprint_depth: f64,
    pub shape_hint: Option<TemplateKind>,
}

impl ObjectEstimate {
    pub fn new(footprint_width: f64, footprint_depth: f64, shape_hint: Option<TemplateKind>) -> Result<Self> {
        for (name, v) in [
            ("footprint_width", footprint_width),
            ("footprint_depth", footprint_depth),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be a non-negative length"));
            }
        }
        Ok(Self {
            footprint_width,
            footprint_depth,
            shape_hint,
        })
    }

    /// Exact footprint of a catalog object. Trapezoids report their
    /// mid-height width.
    pub fn from_object(obj: &ObjectSpec) -> Self {
        let (w, d) = obj.shape.footprint();
        Self {
            footprint_width: w,
            footprint_depth: d,
            shape_hint: obj.shape.template_hint(),
        }
    }

    pub fn with_hint(self, hint: Option<TemplateKind>) -> Self {
        Self {
            shape_hint: hint,
            ..self
        }
    }
}

/// Palm pre-shape chosen in Phase 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PalmPlan {
    pub template: ShapeTemplate,
    pub sides: [f64; FINGER_COUNT],
    pub diagonal: f64,
    /// The object plus clearance exceeds the largest palm on both axes. The
    /// attempt still proceeds.
    pub oversize: bool,
}

impl PalmPlan {
    pub fn palm(&self) -> Result<PalmConfiguration> {
        PalmConfiguration::new(self.sides, self.diagonal)
    }
}

/// Sizes the template named by the hint (rectangle if none) to the object's
/// footprint plus `clearance` on every side, clamped to the actuator range.
pub fn phase1_plan(est: &ObjectEstimate, clearance: f64) -> Result<PalmPlan> {
    if !(clearance >= 0.0 && clearance.is_finite()) {
        return Err(Error::param("clearance", "must be non-negative"));
    }
    let want_x = est.footprint_width + 2.0 * clearance;
    let want_y = est.footprint_depth + 2.0 * clearance;
    let kind = est.shape_hint.unwrap_or(TemplateKind::Rectangle);
    let template = ShapeTemplate::new(
        kind,
        want_x.clamp(PALM_REST_MM, PALM_MAX_MM),
        want_y.clamp(PALM_REST_MM, PALM_MAX_MM),
    );
    let (sides, diagonal) = shape_template_to_lengths(&template)?;
    Ok(PalmPlan {
        template,
        sides,
        diagonal,
        oversize: want_x > PALM_MAX_MM && want_y > PALM_MAX_MM,
    })
}

/// Bend-sensor model: a reading proportional to the bend angle, a sharp
/// rise when the finger meets the object, and Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BendSensor {
    /// Reading per degree of bend.
    pub gain_per_deg: f64,
    /// Rise of the reading on contact.
    pub contact_jump: f64,
    pub noise_sigma: f64,
}

/// Policy timing and sizing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyParams {
    /// Gap added on each side of the object when sizing the palm, mm.
    pub clearance_mm: f64,
    /// Per-tick increase of an un-contacted finger's pressure target, kPa.
    pub inflate_step_kpa: f64,
    /// Palm actuators count as settled within this distance of setpoint, mm.
    pub settle_band_mm: f64,
    pub settle_timeout_s: f64,
    pub envelop_timeout_s: f64,
    pub hold_s: f64,
    pub sensor: BendSensor,
}

impl PolicyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("inflate_step_kpa", self.inflate_step_kpa),
            ("settle_band_mm", self.settle_band_mm),
            ("settle_timeout_s", self.settle_timeout_s),
            ("envelop_timeout_s", self.envelop_timeout_s),
            ("hold_s", self.hold_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        let non_negative = [
            ("clearance_mm", self.clearance_mm),
            ("sensor.gain_per_deg", self.sensor.gain_per_deg),
            ("sensor.contact_jump", self.sensor.contact_jump),
            ("sensor.noise_sigma", self.sensor.noise_sigma),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Eight actuators and their setpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gripper {
    pub palm: [ActuatorState; FINGER_COUNT],
    pub fingers: [ActuatorState; FINGER_COUNT],
    pub palm_setpoint: [f64; FINGER_COUNT],
    pub finger_setpoint: [f64; FINGER_COUNT],
    pub palm_pid: [PidState; FINGER_COUNT],
    pub finger_pid: [PidState; FINGER_COUNT],
}

impl Gripper {
    /// All actuators vented, setpoints at rest.
    pub fn vented(
        palm_gains: PidGains,
        finger_gains: PidGains,
        palm: &CalibrationCurve,
        finger: &CalibrationCurve,
    ) -> Self {
        Self {
            palm: [ActuatorState::vented(ActuatorKind::Palm, palm); FINGER_COUNT],
            fingers: [ActuatorState::vented(ActuatorKind::Finger, finger); FINGER_COUNT],
            palm_setpoint: [palm.rest(); FINGER_COUNT],
            finger_setpoint: [finger.rest(); FINGER_COUNT],
            palm_pid: [PidState::new(palm_gains); FINGER_COUNT],
            finger_pid: [PidState::new(finger_gains); FINGER_COUNT],
        }
    }

    pub fn palm_lengths(&self) -> [f64; FINGER_COUNT] {
        self.palm.map(|s| s.displacement)
    }

    fn set_palm(&mut self, setpoints: [f64; FINGER_COUNT]) {
        self.palm_setpoint = setpoints;
        self.palm_pid.iter_mut().for_each(PidState::reset);
    }
}

/// Phase 0: palm fully extended, fingers straight. Controller memory is
/// cleared, so applying it twice changes nothing.
pub fn phase0_init(mut g: Gripper) -> Gripper {
    g.set_palm([PALM_MAX_MM; FINGER_COUNT]);
    g.finger_setpoint = [0.0; FINGER_COUNT];
    g.finger_pid.iter_mut().for_each(PidState::reset);
    g
}

/// What happened to each contact during the hold window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldRecord {
    pub ticks: usize,
    /// Hold tick at which a contacted finger lost the object.
    pub dropped: [Option<usize>; FINGER_COUNT],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
}

impl Verdict {
    fn failed(reason: FailureReason) -> Self {
        Self {
            success: false,
            failure_reason: Some(reason),
        }
    }
}

/// Majority rule over the envelopment contacts, then persistence over the
/// full hold window.
pub fn grasp_success(phase: &GraspPhase, hold: &HoldRecord, hold_ticks: usize, min_contacts: usize) -> Verdict {
    if phase.contact_count() < min_contacts {
        return Verdict::failed(FailureReason::InsufficientContacts);
    }
    let dropped = phase
        .finger_contacts
        .iter()
        .zip(&hold.dropped)
        .any(|(c, d)| c.is_some() && d.is_some());
    if dropped || hold.ticks < hold_ticks {
        return Verdict::failed(FailureReason::Slip);
    }
    Verdict {
        success: true,
        failure_reason: None,
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: usize,
    pub phase: PhaseState,
    pub palm_pressure: [f64; FINGER_COUNT],
    pub palm_length: [f64; FINGER_COUNT],
    pub finger_pressure: [f64; FINGER_COUNT],
    pub finger_angle: [f64; FINGER_COUNT],
    /// Bend-sensor readings; only sampled during envelopment.
    pub sensor: Option<[f64; FINGER_COUNT]>,
    pub contacts: [bool; FINGER_COUNT],
}

/// How the palm is shaped for a grasp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GraspMode {
    /// Template and size from the object estimate.
    Adaptive,
    /// Adaptive sizing with the template forced.
    Template(TemplateKind),
    /// A locked palm configuration.
    Fixed(Baseline),
}

/// Everything a grasp attempt produced. The tick log is kept separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspRun {
    pub object: String,
    pub mode: GraspMode,
    pub plan: PalmPlan,
    /// Palm sides measured once Phase 1 settled.
    pub realized_sides: Option<[f64; FINGER_COUNT]>,
    /// Geometry of the object in the realized palm (the planned palm if the
    /// run stopped earlier).
    pub outcome: GraspOutcome,
    pub phase: GraspPhase,
    pub transitions: Vec<(PhaseState, usize)>,
    pub hold: Option<HoldRecord>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub log: Vec<TickRecord>,
}

impl GraspRun {
    /// The tick log as JSON lines.
    pub fn log_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.log {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

fn template_plan(t: &ShapeTemplate) -> Result<PalmPlan> {
    let (sides, diagonal) = shape_template_to_lengths(t)?;
    Ok(PalmPlan {
        template: *t,
        sides,
        diagonal,
        oversize: false,
    })
}

/// Plans the palm for `obj` under `mode`.
pub fn plan_for(cfg: &RunConfig, obj: &ObjectSpec, mode: &GraspMode) -> Result<PalmPlan> {
    let est = ObjectEstimate::from_object(obj);
    match mode {
        GraspMode::Adaptive => phase1_plan(&est, cfg.policy.clearance_mm),
        GraspMode::Template(kind) => phase1_plan(&est.with_hint(Some(*kind)), cfg.policy.clearance_mm),
        GraspMode::Fixed(b) => template_plan(&b.shape()),
    }
}

struct Sim<'a> {
    cfg: &'a RunConfig,
    params: PneumaticParams,
    valve: ValvePolicy,
    palm_curve: CalibrationCurve,
    finger_curve: CalibrationCurve,
    gripper: Gripper,
    phase: GraspPhase,
    transitions: Vec<(PhaseState, usize)>,
    log: Vec<TickRecord>,
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        let palm_curve = cfg.palm_curve();
        let finger_curve = cfg.finger_curve();
        let gripper = Gripper::vented(cfg.control.palm, cfg.control.finger, &palm_curve, &finger_curve);
        Self {
            cfg,
            params: cfg.plant,
            valve: cfg.control.valve,
            palm_curve,
            finger_curve,
            gripper,
            phase: GraspPhase::default(),
            transitions: vec![(PhaseState::Init, 0)],
            log: Vec::new(),
        }
    }

    fn ticks(&self, seconds: f64) -> usize {
        (seconds / self.params.dt).round() as usize
    }

    fn enter(&mut self, to: PhaseState) {
        self.phase.enter(to);
        self.transitions.push((to, self.phase.tick));
    }

    fn step_palm(&mut self) {
        let g = &mut self.gripper;
        for i in 0..FINGER_COUNT {
            let (target, pid) = pid_step(
                g.palm_setpoint[i],
                g.palm[i].displacement,
                &g.palm_pid[i],
                self.params.dt,
            );
            g.palm_pid[i] = pid;
            g.palm[i].valve = valve_command(target, g.palm[i].pressure, &self.valve);
            g.palm[i] = step_pneumatic(&g.palm[i], &self.params, &self.palm_curve);
        }
    }

    fn step_fingers_pid(&mut self) {
        let g = &mut self.gripper;
        for i in 0..FINGER_COUNT {
            let (target, pid) = pid_step(
                g.finger_setpoint[i],
                g.fingers[i].displacement,
                &g.finger_pid[i],
                self.params.dt,
            );
            g.finger_pid[i] = pid;
            g.fingers[i].valve = valve_command(target, g.fingers[i].pressure, &self.valve);
            g.fingers[i] = step_pneumatic(&g.fingers[i], &self.params, &self.finger_curve);
        }
    }

    fn record(&mut self, sensor: Option<[f64; FINGER_COUNT]>) {
        let g = &self.gripper;
        self.log.push(TickRecord {
            tick: self.phase.tick,
            phase: self.phase.state,
            palm_pressure: g.palm.map(|s| s.pressure),
            palm_length: g.palm.map(|s| s.displacement),
            finger_pressure: g.fingers.map(|s| s.pressure),
            finger_angle: g.fingers.map(|s| s.displacement),
            sensor,
            contacts: self.phase.finger_contacts.map(|c| c.is_some()),
        });
        self.phase.tick += 1;
    }

    fn palm_settled(&self) -> bool {
        let g = &self.gripper;
        (0..FINGER_COUNT).all(|i| {
            (g.palm[i].displacement - g.palm_setpoint[i]).abs() <= self.cfg.policy.settle_band_mm
                && g.palm[i].valve == Valve::Hold
        })
    }

    /// Runs the palm (and fingers, under PID) until settled or timed out.
    fn settle(&mut self) -> bool {
        for _ in 0..self.ticks(self.cfg.policy.settle_timeout_s) {
            self.step_palm();
            self.step_fingers_pid();
            self.record(None);
            if self.palm_settled() {
                return true;
            }
        }
        false
    }

    /// Bend angle the finger would reach at its current pressure if nothing
    /// were in the way, degrees.
    fn free_angle(&self, i: usize) -> f64 {
        self.finger_curve
            .eval(self.gripper.fingers[i].pressure)
            .expect("plant keeps pressure in range")
    }

    fn reaches(&self, i: usize, distance: f64) -> bool {
        swept_reach(self.cfg.grasp.finger.arc_length_mm, self.free_angle(i).to_radians()) + 1e-9 >= distance
    }

    /// Phase 2. Returns once every finger is latched or saturated, or on
    /// timeout.
    fn envelop(&mut self, distances: [Option<f64>; FINGER_COUNT]) -> Result<()> {
        let supply = self.params.supply.min(self.finger_curve.supply());
        let sensor = self.cfg.policy.sensor;
        let noise =
            Normal::new(0.0, sensor.noise_sigma).map_err(|e| Error::param("sensor.noise_sigma", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut detectors: Vec<StreamingDetector> = (0..FINGER_COUNT)
            .map(|_| StreamingDetector::new(self.cfg.sensing))
            .collect::<Result<_>>()?;
        let mut targets = self.gripper.fingers.map(|s| s.pressure);
        let mut touching: [Option<(usize, f64)>; FINGER_COUNT] = [None; FINGER_COUNT];
        let mut latched = [false; FINGER_COUNT];
        for _ in 0..self.ticks(self.cfg.policy.envelop_timeout_s) {
            self.step_palm();
            let g = &mut self.gripper;
            for i in 0..FINGER_COUNT {
                if !latched[i] {
                    targets[i] = (targets[i] + self.cfg.policy.inflate_step_kpa).min(supply);
                    g.fingers[i].valve = valve_command(targets[i], g.fingers[i].pressure, &self.valve);
                } else {
                    g.fingers[i].valve = Valve::Hold;
                }
                g.fingers[i] = step_pneumatic(&g.fingers[i], &self.params, &self.finger_curve);
            }
            let mut readings = [0.0; FINGER_COUNT];
            for i in 0..FINGER_COUNT {
                let free = self.free_angle(i);
                if touching[i].is_none() {
                    if let Some(d) = distances[i] {
                        if self.reaches(i, d) {
                            touching[i] = Some((self.phase.tick, free));
                        }
                    }
                }
                // the object stops the finger at the angle of first touch
                let (angle, jump) = match touching[i] {
                    Some((t0, a)) => {
                        let k = self.phase.tick - t0;
                        let frac = RISE_PROFILE.get(k).copied().unwrap_or(1.0);
                        (a, sensor.contact_jump * frac)
                    }
                    None => (free, 0.0),
                };
                self.gripper.fingers[i].displacement = angle;
                let n = if sensor.noise_sigma > 0.0 {
                    noise.sample(&mut rng)
                } else {
                    0.0
                };
                readings[i] = sensor.gain_per_deg * angle + jump + n;
                if !latched[i] && detectors[i].push(readings[i]).is_some() {
                    latched[i] = true;
                    self.phase.finger_contacts[i] = Some(self.phase.tick);
                    self.gripper.fingers[i].valve = Valve::Hold;
                }
            }
            self.record(Some(readings));
            let saturated = |i: usize| targets[i] >= supply && self.gripper.fingers[i].valve == Valve::Hold;
            if (0..FINGER_COUNT).all(|i| latched[i] || saturated(i)) {
                break;
            }
        }
        Ok(())
    }

    /// Hold window: every contact must persist on every tick.
    fn hold(&mut self, distances: [Option<f64>; FINGER_COUNT]) -> HoldRecord {
        let n = self.ticks(self.cfg.policy.hold_s);
        let mut dropped = [None; FINGER_COUNT];
        for k in 0..n {
            self.step_palm();
            for (i, f) in self.gripper.fingers.iter_mut().enumerate() {
                f.valve = Valve::Hold;
                let blocked = f.displacement;
                *f = step_pneumatic(f, &self.params, &self.finger_curve);
                // a finger on the object stays where the object stopped it
                if self.phase.finger_contacts[i].is_some() && dropped[i].is_none() {
                    f.displacement = f.displacement.min(blocked);
                }
            }
            for i in 0..FINGER_COUNT {
                if self.phase.finger_contacts[i].is_some() && dropped[i].is_none() {
                    let d = distances[i].expect("contacted fingers have a target distance");
                    if !self.reaches(i, d) {
                        dropped[i] = Some(k);
                        self.gripper.fingers[i].displacement = self.free_angle(i);
                    }
                }
            }
            self.record(None);
        }
        HoldRecord { ticks: n, dropped }
    }
}

/// Runs Phases 0–2 and the hold window on `obj`.
pub fn run_grasp(cfg: &RunConfig, obj: &ObjectSpec, mode: &GraspMode) -> Result<GraspRun> {
    cfg.validate()?;
    let plan = plan_for(cfg, obj, mode)?;
    let planned_palm = plan.palm()?;
    let mut sim = Sim::new(cfg);
    let mut outcome = evaluate_grasp(&planned_palm, obj, &cfg.grasp);
    let mut realized_sides = None;
    let mut hold = None;

    let finish = |sim: Sim, outcome, realized_sides, hold, verdict: Verdict| GraspRun {
        object: obj.id.clone(),
        mode: mode.clone(),
        plan,
        realized_sides,
        outcome,
        phase: sim.phase,
        transitions: sim.transitions,
        hold,
        verdict,
        log: sim.log,
    };

    sim.gripper = phase0_init(sim.gripper);
    if !sim.settle() {
        sim.enter(PhaseState::Failed);
        let v = Verdict::failed(FailureReason::SettleTimeout);
        return Ok(finish(sim, outcome, realized_sides, hold, v));
    }

    sim.enter(PhaseState::Reconfigure);
    sim.gripper.set_palm(plan.sides);
    if !sim.settle() {
        sim.enter(PhaseState::Failed);
        let v = Verdict::failed(FailureReason::SettleTimeout);
        return Ok(finish(sim, outcome, realized_sides, hold, v));
    }
    let measured = sim.gripper.palm_lengths();
    realized_sides = Some(measured);
    let palm = PalmConfiguration::new(measured, plan.diagonal).or_else(|_| resolve_embedding(measured))?;
    outcome = evaluate_grasp(&palm, obj, &cfg.grasp);
    if !outcome.feasible_approach {
        sim.enter(PhaseState::Failed);
        let reason = if plan.oversize {
            FailureReason::Oversize
        } else {
            FailureReason::NoDescend
        };
        return Ok(finish(sim, outcome, realized_sides, hold, Verdict::failed(reason)));
    }

    sim.enter(PhaseState::Envelop);
    let distances = outcome.boundary_distance;
    sim.envelop(distances)?;
    if sim.phase.contact_count() == 0 {
        sim.enter(PhaseState::Failed);
        return Ok(finish(
            sim,
            outcome,
            realized_sides,
            hold,
            Verdict::failed(FailureReason::Timeout),
        ));
    }

    sim.enter(PhaseState::Hold);
    let record = sim.hold(distances);
    let verdict = grasp_success(
        &sim.phase,
        &record,
        sim.ticks(cfg.policy.hold_s),
        cfg.grasp.min_contacts,
    );
    hold = Some(record);
    sim.enter(if verdict.success {
        PhaseState::Done
    } else {
        PhaseState::Failed
    });
    Ok(finish(sim, outcome, realized_sides, hold, verdict))
}

/// Runs the policy with each template forced, over every object. Cells carry
/// the realized-palm geometry with the policy's verdict.
pub fn adaptive_template_matrix(
    cfg: &RunConfig,
    templates: &[TemplateKind],
    objects: &[ObjectSpec],
) -> Result<SuccessMatrix> {
    let mut cells = Vec::with_capacity(templates.len());
    for &kind in templates {
        let mut row = Vec::with_capacity(objects.len());
        for obj in objects {
            let run = run_grasp(cfg, obj, &GraspMode::Template(kind))?;
            let mut outcome = run.outcome;
            outcome.success = run.verdict.success;
            outcome.failure_reason = run.verdict.failure_reason;
            row.push(MatrixCell {
                config: kind.name().to_string(),
                object: obj.id.clone(),
                outcome,
            });
        }
        cells.push(row);
    }
    Ok(SuccessMatrix {
        rows: templates.iter().map(|k| k.name().to_string()).collect(),
        cols: objects.iter().map(|o| o.id.clone()).collect(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graspsim::object_from_table;

    fn est(w: f64, d: f64) -> ObjectEstimate {
        ObjectEstimate::new(w, d, None).unwrap()
    }

    #[test]
    fn plan_small_object_clamps_to_floor() {
        let p = phase1_plan(&est(20.0, 20.0), 10.0).unwrap();
        assert_eq!(p.template, ShapeTemplate::new(TemplateKind::Rectangle, 68.0, 68.0));
        assert_eq!(p.sides, [68.0; 4]);
        assert!(!p.oversize);
    }

    #[test]
    fn plan_large_rectangle() {
        let p = phase1_plan(&est(110.0, 110.0), 10.0).unwrap();
        assert_eq!(p.template, ShapeTemplate::new(TemplateKind::Rectangle, 130.0, 130.0));
    }

    #[test]
    fn plan_zero_size_and_oversize() {
        assert_eq!(phase1_plan(&est(0.0, 0.0), 10.0).unwrap().sides, [68.0; 4]);
        let big = phase1_plan(&est(130.0, 120.0), 10.0).unwrap();
        assert!(big.oversize);
        assert_eq!(big.sides, [135.0; 4]);
        assert!(!phase1_plan(&est(130.0, 100.0), 10.0).unwrap().oversize);
        assert!(ObjectEstimate::new(-1.0, 5.0, None).is_err());
    }

    #[test]
    fn plan_follows_hint() {
        let k = phase1_plan(
            &ObjectEstimate::new(80.0, 50.0, Some(TemplateKind::Kite)).unwrap(),
            10.0,
        )
        .unwrap();
        assert_eq!(k.sides, [100.0, 100.0, 70.0, 70.0]);
    }

    #[test]
    fn phase0_is_idempotent() {
        let cfg = RunConfig::default();
        let g = Gripper::vented(
            cfg.control.palm,
            cfg.control.finger,
            &cfg.palm_curve(),
            &cfg.finger_curve(),
        );
        let once = phase0_init(g);
        assert_eq!(once.palm_setpoint, [135.0; 4]);
        assert_eq!(once.finger_setpoint, [0.0; 4]);
        assert_eq!(phase0_init(once.clone()), once);
    }

    fn phase_with(contacts: [bool; 4]) -> GraspPhase {
        GraspPhase {
            state: PhaseState::Hold,
            tick: 0,
            finger_contacts: contacts.map(|c| c.then_some(1)),
        }
    }

    #[test]
    fn verdict_examples() {
        let stable = HoldRecord {
            ticks: 500,
            dropped: [None; 4],
        };
        assert!(grasp_success(&phase_with([true, true, true, false]), &stable, 500, 3).success);
        assert_eq!(
            grasp_success(&phase_with([true, true, false, false]), &stable, 500, 3).failure_reason,
            Some(FailureReason::InsufficientContacts)
        );
        let slipped = HoldRecord {
            ticks: 500,
            dropped: [None, Some(40), None, None],
        };
        assert_eq!(
            grasp_success(&phase_with([true; 4]), &slipped, 500, 3).failure_reason,
            Some(FailureReason::Slip)
        );
    }

    #[test]
    #[should_panic(expected = "phase may not move")]
    fn phases_never_go_back() {
        let mut p = GraspPhase::default();
        p.enter(PhaseState::Envelop);
        p.enter(PhaseState::Reconfigure);
    }

    #[test]
    fn adaptive_grasp_on_large_rectangle() {
        let cfg = RunConfig::default();
        let run = run_grasp(&cfg, &object_from_table("rect-l").unwrap(), &GraspMode::Adaptive).unwrap();
        assert!(run.verdict.success, "{:?}", run.verdict);
        assert_eq!(run.phase.state, PhaseState::Done);
        assert_eq!(run.phase.contact_count(), 4);
        let states: Vec<_> = run.transitions.iter().map(|t| t.0).collect();
        assert_eq!(
            states,
            [
                PhaseState::Init,
                PhaseState::Reconfigure,
                PhaseState::Envelop,
                PhaseState::Hold,
                PhaseState::Done
            ]
        );
        assert_eq!(run.log.len(), run.phase.tick);
    }
}
