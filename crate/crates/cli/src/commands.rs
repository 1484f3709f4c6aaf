//! Subcommand implementations. Every command writes its artifacts under the
//! configured output directory and returns a one-line summary.

use std::fs;
use std::path::{Path, PathBuf};

use morphgrip::config::RunConfig;
use morphgrip::graspsim::catalog::{real_objects, standard_objects};
use morphgrip::graspsim::matrix::{
    compare, run_matrix, table2_truth, table3_truth, Comparison, PatternTable, SuccessMatrix,
};
use morphgrip::graspsim::object_from_table;
use morphgrip::kinematics::{linspace, sweep_manifold, TemplateKind};
use morphgrip::plant::CalibrationCurve;
use morphgrip::policy::{adaptive_template_matrix, run_grasp, GraspMode};
use morphgrip::sensing::{detect_transit_point, ingest_csv};
use morphgrip::{Error, Result};
use serde_json::json;

/// Outcome of a command, for the caller to print and map to an exit code.
pub struct Report {
    pub summary: String,
    /// Set when a comparison against reference data found differences.
    pub mismatch: bool,
}

impl Report {
    fn ok(summary: String) -> Self {
        Self {
            summary,
            mismatch: false,
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(&cfg.output_dir)
}

fn write_json(path: PathBuf, value: &impl serde::Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn sampled(curve: &CalibrationCurve, n: usize) -> Result<CalibrationCurve> {
    let points = linspace(0.0, curve.supply(), n)
        .into_iter()
        .map(|p| Ok((p, curve.eval(p)?)))
        .collect::<Result<Vec<_>>>()?;
    CalibrationCurve::new(curve.kind(), points)
}

/// Pressure sweeps of both actuator types.
pub fn characterize(cfg: &RunConfig) -> Result<Report> {
    let dir = out_dir(cfg)?;
    let n = cfg.characterize.points;
    let palm = sampled(&cfg.palm_curve(), n)?;
    let finger = sampled(&cfg.finger_curve(), n)?;
    palm.write_csv(fs::File::create(dir.join("palm_characterization.csv"))?)?;
    finger.write_csv(fs::File::create(dir.join("finger_characterization.csv"))?)?;
    let (p0, l0) = palm.points()[0];
    let (p1, l1) = palm.points()[n - 1];
    Ok(Report::ok(format!(
        "palm {l0} mm at {p0} kPa to {l1} mm at {p1} kPa; finger 0 to {} deg ({n} rows each)",
        finger.max()
    )))
}

/// Minimum-angle heatmap for one or all templates.
pub fn manifold(cfg: &RunConfig, template: Option<TemplateKind>) -> Result<Report> {
    let dir = out_dir(cfg)?;
    let m = &cfg.manifold;
    let axis = linspace(m.min_mm, m.max_mm, m.grid_n);
    let kinds = template.map_or(TemplateKind::ALL.to_vec(), |k| vec![k]);
    let mut parts = Vec::new();
    for kind in kinds {
        let grid = sweep_manifold(kind, &axis, &axis)?;
        grid.write_csv(fs::File::create(dir.join(format!("manifold_{kind}.csv")))?)?;
        let feasible = grid.feasible_count();
        if feasible == 0 {
            eprintln!("warning: no feasible {kind} configuration in the requested range");
        }
        parts.push(format!("{kind} {feasible}/{}", grid.min_angle.len()));
    }
    Ok(Report::ok(format!("feasible cells: {}", parts.join(", "))))
}

/// Contact detection on a recorded trace.
pub fn detect(cfg: &RunConfig, trace: &Path) -> Result<Report> {
    let trace = ingest_csv(trace)?;
    let result = detect_transit_point(&trace, &cfg.sensing)?;
    write_json(out_dir(cfg)?.join("detection.json"), &result)?;
    Ok(Report::ok(match result.transit_point {
        Some(i) => format!("transit point at sample {i} ({:.3} s)", i as f64 * trace.dt()),
        None => "no contact detected".to_string(),
    }))
}

/// Parses `adaptive`, `fixed:<name>` or `template:<kind>`.
pub fn parse_mode(cfg: &RunConfig, s: &str) -> Result<GraspMode> {
    if s.eq_ignore_ascii_case("adaptive") {
        return Ok(GraspMode::Adaptive);
    }
    if let Some(name) = s.strip_prefix("fixed:") {
        return Ok(GraspMode::Fixed(cfg.baseline(name)?.clone()));
    }
    if let Some(kind) = s.strip_prefix("template:") {
        return TemplateKind::parse(kind)
            .map(GraspMode::Template)
            .ok_or_else(|| Error::Config(format!("unknown template `{kind}`")));
    }
    Err(Error::Config(format!(
        "mode must be `adaptive`, `fixed:<configuration>` or `template:<kind>`, got `{s}`"
    )))
}

fn mode_tag(mode: &GraspMode) -> String {
    match mode {
        GraspMode::Adaptive => "adaptive".into(),
        GraspMode::Template(k) => format!("template-{k}"),
        GraspMode::Fixed(b) => format!("fixed-{}", b.name.to_ascii_lowercase()),
    }
}

/// One full grasp attempt: tick log plus outcome.
pub fn grasp(cfg: &RunConfig, object: &str, mode: &GraspMode) -> Result<Report> {
    let obj = object_from_table(object)?;
    let run = run_grasp(cfg, &obj, mode)?;
    let dir = out_dir(cfg)?;
    let stem = format!("grasp_{}_{}", obj.id, mode_tag(mode));
    fs::write(dir.join(format!("{stem}.jsonl")), run.log_jsonl()?)?;
    write_json(dir.join(format!("{stem}.json")), &run)?;
    let verdict = match run.verdict.failure_reason {
        None => "success".to_string(),
        Some(r) => format!("failure ({r})"),
    };
    Ok(Report::ok(format!(
        "{}: {verdict}, {} contacts, {} ticks",
        obj.name,
        run.phase.contact_count(),
        run.phase.tick
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    Table2,
    Table3,
}

impl Table {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table2" => Some(Table::Table2),
            "table3" => Some(Table::Table3),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Table::Table2 => "table2",
            Table::Table3 => "table3",
        }
    }
}

/// Computes a success matrix and compares it with the reference table.
pub fn matrix(cfg: &RunConfig, which: Table) -> Result<Report> {
    let (m, truth): (SuccessMatrix, PatternTable) = match which {
        Table::Table2 => (
            run_matrix(&cfg.baseline_palms()?, &standard_objects(), &cfg.grasp),
            table2_truth(),
        ),
        Table::Table3 => (
            adaptive_template_matrix(cfg, &TemplateKind::ALL, &real_objects())?,
            table3_truth(),
        ),
    };
    let cmp: Comparison = compare(&m.pattern(), &truth)?;
    let dir = out_dir(cfg)?;
    let name = which.name();
    m.pattern()
        .write_csv(fs::File::create(dir.join(format!("{name}.csv")))?)?;
    write_json(dir.join(format!("{name}.json")), &m)?;
    write_json(
        dir.join(format!("{name}_diff.json")),
        &json!({
            "table": name,
            "matches": cmp.matches,
            "total": cmp.total,
            "mismatches": cmp.mismatches,
        }),
    )?;
    let mut summary = format!("{name}: {}/{} cells match the reference", cmp.matches, cmp.total);
    for mm in &cmp.mismatches {
        let got = match mm.reason {
            Some(r) => format!("F:{r}"),
            None if mm.actual => "S".into(),
            None => "F".into(),
        };
        summary.push_str(&format!(
            "\n  {} x {}: expected {}, got {got}",
            mm.config,
            mm.object,
            if mm.expected { "S" } else { "F" }
        ));
    }
    Ok(Report {
        summary,
        mismatch: !cmp.is_exact(),
    })
}
