use morphgrip::config::RunConfig;
use morphgrip::control::{pid_step, track_setpoint, valve_command, PidGains, PidState, ValvePolicy};
use morphgrip::plant::{
    step_pneumatic, ActuatorKind, ActuatorState, CalibrationCurve, CurveKind, PneumaticParams, Valve,
};
use proptest::prelude::*;

fn valve() -> impl Strategy<Value = Valve> {
    prop_oneof![Just(Valve::Inflate), Just(Valve::Deflate), Just(Valve::Hold)]
}

proptest! {
    #[test]
    fn pressure_stays_within_supply(p0 in 0.0..=103.4f64, valves in prop::collection::vec(valve(), 1..300)) {
        let curve = CalibrationCurve::default_palm();
        let params = PneumaticParams::default();
        let mut s = ActuatorState::at_pressure(ActuatorKind::Palm, p0, &curve).unwrap();
        for v in valves {
            s.valve = v;
            let next = step_pneumatic(&s, &params, &curve);
            prop_assert!((0.0..=params.supply).contains(&next.pressure));
            prop_assert!((68.0..=135.0).contains(&next.displacement));
            match v {
                Valve::Inflate => prop_assert!(next.pressure >= s.pressure),
                Valve::Deflate => prop_assert!(next.pressure <= s.pressure),
                Valve::Hold => prop_assert_eq!(next.pressure, s.pressure),
            }
            s = next;
        }
    }

    #[test]
    fn calibration_is_monotone(mut ys in prop::collection::vec(0.0..50.0f64, 2..12), p in 0.0..=103.4f64, q in 0.0..=103.4f64) {
        // cumulative sums give a non-decreasing displacement column
        let mut acc = 68.0;
        for y in ys.iter_mut() {
            acc += *y;
            *y = acc;
        }
        let n = ys.len();
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (103.4 * i as f64 / (n - 1) as f64, y)).collect();
        let curve = CalibrationCurve::new(CurveKind::PalmLength, pts).unwrap();
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(curve.eval(lo).unwrap() <= curve.eval(hi).unwrap());
    }

    #[test]
    fn linear_curve_inverts(p in 0.0..=103.4f64) {
        let curve = CalibrationCurve::default_palm();
        let l = curve.eval(p).unwrap();
        prop_assert!((curve.inverse(l).unwrap() - p).abs() < 1e-9);
    }

    #[test]
    fn pid_integral_is_bounded(errors in prop::collection::vec(-200.0..200.0f64, 1..200)) {
        let gains = PidGains::palm_default();
        let mut pid = PidState::new(gains);
        for e in errors {
            let (_, next) = pid_step(100.0 + e, 100.0, &pid, 0.01);
            prop_assert!(next.integral.abs() <= gains.integral_limit + 1e-12);
            pid = next;
        }
    }

    #[test]
    fn valve_deadband_holds(target in 0.0..103.4f64, offset in -1.5..=1.5f64) {
        let policy = ValvePolicy::default();
        prop_assert_eq!(valve_command(target, target + offset, &policy), Valve::Hold);
    }

    #[test]
    fn every_palm_setpoint_settles(setpoint in 68.0..=135.0f64, start in 0.0..=103.4f64) {
        let cfg = RunConfig::default();
        let curve = cfg.palm_curve();
        let init = ActuatorState::at_pressure(ActuatorKind::Palm, start, &curve).unwrap();
        let tr = track_setpoint(setpoint, &init, &PidState::new(cfg.control.palm), &cfg.control.valve, &cfg.plant, &curve, 1000).unwrap();
        let idx = tr.settling_index(1.0);
        prop_assert!(idx.is_some_and(|i| i <= 500), "setpoint {setpoint} from {start} kPa: {idx:?}");
    }
}

#[test]
fn config_gains_match_library_defaults() {
    let cfg = RunConfig::default();
    assert_eq!(cfg.control.palm, PidGains::palm_default());
    assert_eq!(cfg.control.valve, ValvePolicy::default());
    assert_eq!(cfg.plant, PneumaticParams::default());
}

#[test]
fn unreachable_setpoint_is_rejected() {
    let cfg = RunConfig::default();
    let curve = cfg.palm_curve();
    let init = ActuatorState::vented(ActuatorKind::Palm, &curve);
    let pid = PidState::new(cfg.control.palm);
    for sp in [60.0, 140.0] {
        assert!(track_setpoint(sp, &init, &pid, &cfg.control.valve, &cfg.plant, &curve, 10).is_err());
    }
}
