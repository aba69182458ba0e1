//! Machine-first report emission: JSON documents, CSV tables and SVG plots,
//! written atomically (write-then-rename). With a fixed seed the JSON output
//! is byte-identical across runs except for the timestamp field.

pub mod svg;

use crate::dynamics::{Trajectory, TrajectoryForceReport};
use crate::error::Result;
use crate::oplab::CommutatorReport;
use crate::qfactor::{OdeResidualReport, QFactorProfile};
use serde::Serialize;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub generated_at_unix_ms: u128,
}

impl ReportMeta {
    pub fn new(seed: u64) -> Self {
        let generated_at_unix_ms = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        ReportMeta { seed, generated_at_unix_ms }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureRow {
    pub label: String,
    pub position: [f64; 3],
    pub normal: [f64; 3],
    pub mean: f64,
    pub gauss: f64,
    pub geometric_potential: f64,
    pub oracle_mean_abs_dev: f64,
    pub oracle_gauss_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub surface: String,
    pub rows: Vec<CurvatureRow>,
    pub max_oracle_deviation: f64,
    pub meta: ReportMeta,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairDeviation {
    pub form_a: String,
    pub form_b: String,
    pub samples: usize,
    pub max_rel_deviation: f64,
    pub mean_rel_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenRatioRow {
    pub position: [f64; 3],
    pub ratio: f64,
    pub mu_grad_f: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenCalibration {
    pub hypothesis: String,
    pub rows: Vec<GenRatioRow>,
    pub max_abs_difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForceReport {
    pub surface: String,
    pub samples: usize,
    pub pairs: Vec<PairDeviation>,
    pub gen_calibration: Option<GenCalibration>,
    pub meta: ReportMeta,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RhsComparisonRow {
    pub case: String,
    pub component: String,
    pub x: f64,
    pub printed_rhs: Option<f64>,
    pub closed_form_derivative: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub surface: String,
    pub gates: Vec<GateResult>,
    pub closed_form_residuals: Vec<OdeResidualReport>,
    pub first_order_vs_closed_form: Vec<RhsComparisonRow>,
    pub commutator_reports: Vec<CommutatorReport>,
    pub notes: Vec<String>,
    pub meta: ReportMeta,
}

impl VerifyReport {
    pub fn all_gates_pass(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub surface: String,
    pub steps: usize,
    pub dt: f64,
    pub relative_energy_drift: f64,
    pub max_constraint_residual: f64,
    pub force_check: TrajectoryForceReport,
    pub meta: ReportMeta,
}

/// Write a file atomically: dump to a sibling temp path, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::Eval(format!("serialization failed: {e}")))?;
    write_atomic(path, &(body + "\n"))
}

/// CSV with header `t,x,y,z,px,py,pz,Hc,f_residual`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,y,z,px,py,pz,Hc,f_residual\n");
    for i in 0..traj.times.len() {
        let s = &traj.states[i];
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            traj.times[i], s.x.x, s.x.y, s.x.z, s.p.x, s.p.y, s.p.z, traj.energy[i], traj.constraint_residual[i]
        ));
    }
    out
}

/// CSV with header `coord,q`.
pub fn profile_csv(profile: &QFactorProfile) -> String {
    let mut out = String::from("coord,q\n");
    for (c, v) in profile.grid.iter().zip(&profile.values) {
        out.push_str(&format!("{c},{v}\n"));
    }
    out
}

pub fn curvature_csv(rows: &[CurvatureRow]) -> String {
    let mut out = String::from("label,x,y,z,nx,ny,nz,M,K,Vg,oracle_dev_absM,oracle_dev_K\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.label,
            r.position[0],
            r.position[1],
            r.position[2],
            r.normal[0],
            r.normal[1],
            r.normal[2],
            r.mean,
            r.gauss,
            r.geometric_potential,
            r.oracle_mean_abs_dev,
            r.oracle_gauss_dev
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join(format!("gcfl-report-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.json");
        write_atomic(&path, "first").unwrap();
        write_atomic(&path, "second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn trajectory_csv_header_is_stable() {
        let spec = crate::surface::SurfaceSpec::implicit_from_source("z").unwrap();
        let state = crate::dynamics::ClassicalState::new(
            crate::math::Vec3::ZERO,
            crate::math::Vec3::new(1.0, 0.0, 0.0),
            1.0,
        );
        let traj = crate::dynamics::integrate_constrained(&spec, state, 0.1, 3).unwrap();
        let csv = trajectory_csv(&traj);
        assert!(csv.starts_with("t,x,y,z,px,py,pz,Hc,f_residual\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
