//! Proprioceptive contact detection from finger bend-sensor streams.
//!
//! The pipeline per finger is: subtract the first sample, apply a sliding
//! median of width 5, then flag the first sample whose first-order difference
//! exceeds the contact threshold. The gripper's transit point is the earliest
//! flagged sample across the four fingers.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::parse_f64;
use crate::FINGER_COUNT;

/// Contact threshold on the per-sample difference of the filtered signal.
pub const TRANSITION_THRESHOLD: f64 = 5.0;

/// Median filter width.
pub const MEDIAN_KERNEL: usize = 5;

/// Uniformly sampled readings from the four finger bend sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorTrace {
    dt: f64,
    channels: [Vec<f64>; FINGER_COUNT],
}

impl SensorTrace {
    pub fn new(dt: f64, channels: [Vec<f64>; FINGER_COUNT]) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", "sample period must be positive"));
        }
        let len = channels[0].len();
        if len == 0 {
            return Err(Error::EmptyInput("sensor trace"));
        }
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::param("channels", "all channels must have equal length"));
        }
        Ok(Self { dt, channels })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Raw readings.
    pub fn raw(&self) -> &[Vec<f64>; FINGER_COUNT] {
        &self.channels
    }

    pub fn normalized(&self) -> [Vec<f64>; FINGER_COUNT] {
        std::array::from_fn(|i| normalize_trace(&self.channels[i]).expect("trace is non-empty"))
    }

    pub fn filtered(&self, kernel: usize) -> Result<[Vec<f64>; FINGER_COUNT]> {
        let norm = self.normalized();
        let mut out: [Vec<f64>; FINGER_COUNT] = Default::default();
        for (dst, src) in out.iter_mut().zip(norm.iter()) {
            *dst = median_filter(src, kernel)?;
        }
        Ok(out)
    }

    /// Reads a trace with header `t_s,f0,f1,f2,f3`. The sample period is the
    /// spacing of the `t_s` column, which must be uniform.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let expected = ["t_s", "f0", "f1", "f2", "f3"];
        if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `t_s,f0,f1,f2,f3`".into(),
            });
        }
        let mut times = Vec::new();
        let mut channels: [Vec<f64>; FINGER_COUNT] = Default::default();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != expected.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", expected.len(), rec.len()),
                });
            }
            times.push(parse_f64(&rec[0], line)?);
            for (ch, field) in channels.iter_mut().zip(rec.iter().skip(1)) {
                ch.push(parse_f64(field, line)?);
            }
        }
        if times.is_empty() {
            return Err(Error::EmptyInput("sensor trace"));
        }
        if times.len() < 2 {
            return Err(Error::Parse {
                line: 2,
                message: "at least two samples are needed to infer the sample period".into(),
            });
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::Parse {
                line: 3,
                message: "timestamps must increase".into(),
            });
        }
        for (i, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if (step - dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(Error::Parse {
                    line: i + 3,
                    message: format!("non-uniform sample spacing {step} (expected {dt})"),
                });
            }
        }
        Self::new(dt, channels)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["t_s", "f0", "f1", "f2", "f3"]).map_err(io)?;
        for i in 0..self.len() {
            let mut row = vec![format_time(i as f64 * self.dt)];
            row.extend(self.channels.iter().map(|c| c[i].to_string()));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn format_time(t: f64) -> String {
    // trim float noise from i * dt so the file round-trips with uniform spacing
    let s = format!("{t:.9}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

/// Loads a trace CSV from disk.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<SensorTrace> {
    let file = File::open(path)?;
    SensorTrace::read_csv(BufReader::new(file))
}

/// Readings relative to the first sample.
pub fn normalize_trace(raw: &[f64]) -> Result<Vec<f64>> {
    let first = *raw.first().ok_or(Error::EmptyInput("trace"))?;
    Ok(raw.iter().map(|v| v - first).collect())
}

/// Mirror index into `0..n` without repeating the edge sample.
fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Sliding median of odd width `k` with reflect padding at both ends.
pub fn median_filter(x: &[f64], k: usize) -> Result<Vec<f64>> {
    if k.is_multiple_of(2) {
        return Err(Error::param("kernel", format!("must be odd and positive, got {k}")));
    }
    let n = x.len();
    let half = (k / 2) as isize;
    let mut window = vec![0.0; k];
    Ok((0..n as isize)
        .map(|i| {
            for (slot, off) in window.iter_mut().zip(-half..=half) {
                *slot = x[reflect_index(i + off, n)];
            }
            window.sort_by(f64::total_cmp);
            window[k / 2]
        })
        .collect())
}

/// First index `i >= 1` whose step `|x[i] - x[i-1]|` strictly exceeds
/// `threshold`.
pub fn detect_contact_per_finger(filtered: &[f64], threshold: f64) -> Option<usize> {
    filtered
        .windows(2)
        .position(|w| (w[1] - w[0]).abs() > threshold)
        .map(|i| i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionParams {
    pub threshold: f64,
    pub kernel: usize,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            threshold: TRANSITION_THRESHOLD,
            kernel: MEDIAN_KERNEL,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::param("threshold", "must be positive"));
        }
        if self.kernel.is_multiple_of(2) {
            return Err(Error::param("kernel", "must be odd and positive"));
        }
        Ok(())
    }
}

/// Per-finger detections and the gripper transit point. Serializes as the
/// detection report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub per_finger: [Option<usize>; FINGER_COUNT],
    pub transit_point: Option<usize>,
    pub threshold: f64,
    pub kernel: usize,
}

impl DetectionResult {
    fn from_indices(per_finger: [Option<usize>; FINGER_COUNT], params: &DetectionParams) -> Self {
        Self {
            per_finger,
            transit_point: per_finger.iter().flatten().copied().min(),
            threshold: params.threshold,
            kernel: params.kernel,
        }
    }
}

/// Runs normalize, median filter and thresholded differencing on every
/// channel.
pub fn detect_transit_point(trace: &SensorTrace, params: &DetectionParams) -> Result<DetectionResult> {
    params.validate()?;
    let filtered = trace.filtered(params.kernel)?;
    let per_finger = std::array::from_fn(|i| detect_contact_per_finger(&filtered[i], params.threshold));
    Ok(DetectionResult::from_indices(per_finger, params))
}

/// Incremental detector for one finger.
///
/// A sample is only tested once every sample of its median window has
/// arrived, so any index it reports matches the batch pipeline on the full
/// trace. Detection latency is `kernel / 2` samples.
#[derive(Debug, Clone)]
pub struct StreamingDetector {
    params: DetectionParams,
    first_raw: f64,
    normalized: Vec<f64>,
    filtered: Vec<f64>,
    detected: Option<usize>,
}

impl StreamingDetector {
    pub fn new(params: DetectionParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            first_raw: 0.0,
            normalized: Vec::new(),
            filtered: Vec::new(),
            detected: None,
        })
    }

    /// Appends one raw reading; returns the detection index once known.
    pub fn push(&mut self, raw: f64) -> Option<usize> {
        if self.normalized.is_empty() {
            self.first_raw = raw;
        }
        self.normalized.push(raw - self.first_raw);
        if self.detected.is_some() {
            return self.detected;
        }
        let half = self.params.kernel / 2;
        let n = self.normalized.len();
        // indices whose window lies inside the data, plus the leading ones that
        // reflect at the start
        while self.filtered.len() + half < n {
            let i = self.filtered.len();
            let v = self.window_median(i);
            self.filtered.push(v);
            if i >= 1 && (v - self.filtered[i - 1]).abs() > self.params.threshold {
                self.detected = Some(i);
                break;
            }
        }
        self.detected
    }

    fn window_median(&self, i: usize) -> f64 {
        let k = self.params.kernel;
        let half = (k / 2) as isize;
        let n = self.normalized.len();
        let mut w: Vec<f64> = (-half..=half)
            .map(|off| {
                let j = i as isize + off;
                // only the leading edge ever reflects here
                let j = if j < 0 { reflect_index(j, n) } else { j as usize };
                self.normalized[j]
            })
            .collect();
        w.sort_by(f64::total_cmp);
        w[k / 2]
    }

    pub fn detected(&self) -> Option<usize> {
        self.detected
    }

    pub fn len(&self) -> usize {
        self.normalized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }
}

/// Parameters of a synthetic contact trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticStep {
    pub pre_level: f64,
    pub post_level: f64,
    /// First sample of the rise.
    pub step_index: usize,
    pub noise_sigma: f64,
    pub length: usize,
    pub dt: f64,
    pub seed: u64,
}

/// Fraction of the step reached on each of the three rise samples
/// (raised-cosine profile).
pub const RISE_PROFILE: [f64; 3] = [0.25, 0.75, 1.0];

/// Mean level of a synthetic contact signal at sample `i`: flat, a smooth
/// three-sample rise starting at `step_index`, then flat again.
pub fn step_profile(i: usize, pre: f64, post: f64, step_index: usize) -> f64 {
    if i < step_index {
        pre
    } else {
        let frac = RISE_PROFILE.get(i - step_index).copied().unwrap_or(1.0);
        pre + (post - pre) * frac
    }
}

/// Four-channel trace with the same step on every channel plus independent
/// Gaussian noise. Deterministic for a given seed.
pub fn synthesize_trace(spec: &SyntheticStep) -> Result<SensorTrace> {
    if spec.length == 0 {
        return Err(Error::EmptyInput("synthetic trace length"));
    }
    if spec.step_index >= spec.length {
        return Err(Error::param("step_index", "must lie inside the trace"));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::param("noise_sigma", "must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::param("noise_sigma", e.to_string()))?;
    let channels = std::array::from_fn(|_| {
        (0..spec.length)
            .map(|i| {
                let mean = step_profile(i, spec.pre_level, spec.post_level, spec.step_index);
                if spec.noise_sigma > 0.0 {
                    mean + noise.sample(&mut rng)
                } else {
                    mean
                }
            })
            .collect()
    });
    SensorTrace::new(spec.dt, channels)
}
