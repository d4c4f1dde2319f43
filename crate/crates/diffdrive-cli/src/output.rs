//! Trace and summary serialization.
//!
//! The CSV layout is fixed: one header row, then one row per control period
//! with the columns
//!
//! ```text
//! t,x_true,y_true,theta_true,x_odo,y_odo,theta_odo,err1,err2,err3,
//! v_cmd,omega_cmd,wl_cmd,wr_cmd,power_l,power_r,saturated
//! ```
//!
//! `err1..err3` carry `(along, lateral, heading)` for tracking runs and
//! `(r, bearing, goal_heading)` for regulation runs. Numbers render with
//! nine significant digits, rows end with a single `\n`, and the bytes are
//! a pure function of the scenario, so identical runs produce identical
//! files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use diffdrive::SimTrace64;

use crate::scenario::{doc_from_config, PoseDoc, ScenarioDoc};
use crate::CliError;

pub const CSV_HEADER: &str = "t,x_true,y_true,theta_true,x_odo,y_odo,theta_odo,err1,err2,err3,v_cmd,omega_cmd,wl_cmd,wr_cmd,power_l,power_r,saturated";

/// Nine significant digits, scientific notation.
fn sig9(value: f64) -> String {
    format!("{value:.8e}")
}

/// Writes the CSV trace to any writer.
pub fn write_trace_csv<W: Write>(trace: &SimTrace64, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for record in &trace.records {
        let [err1, err2, err3] = record.error.components();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            sig9(record.t),
            sig9(record.pose_true.x),
            sig9(record.pose_true.y),
            sig9(record.pose_true.theta),
            sig9(record.pose_odometry.x),
            sig9(record.pose_odometry.y),
            sig9(record.pose_odometry.theta),
            sig9(err1),
            sig9(err2),
            sig9(err3),
            sig9(record.command.v),
            sig9(record.command.omega),
            sig9(record.wheel_command.omega_l),
            sig9(record.wheel_command.omega_r),
            sig9(record.power_left),
            sig9(record.power_right),
            u8::from(record.saturated),
        )?;
    }
    Ok(())
}

/// Renders the CSV trace to a byte buffer.
pub fn trace_csv_bytes(trace: &SimTrace64) -> Vec<u8> {
    let mut buffer = Vec::new();
    write_trace_csv(trace, &mut buffer).expect("writing to a Vec cannot fail");
    buffer
}

#[derive(Serialize)]
struct SummaryDoc {
    scenario: ScenarioDoc,
    outcome: String,
    sim_time: f64,
    steps: usize,
    final_pose_true: PoseDoc,
    final_pose_odometry: PoseDoc,
    final_error_norm: f64,
    rms_error_norm: f64,
    peak_power: f64,
    peak_raw_power: f64,
    saturation_steps: usize,
}

/// Renders the run summary as pretty JSON with a trailing newline. The
/// wall-clock duration is deliberately left out so the bytes depend only on
/// the scenario.
pub fn summary_json(trace: &SimTrace64) -> String {
    let summary = &trace.summary;
    let doc = SummaryDoc {
        scenario: doc_from_config(&trace.config),
        outcome: summary.outcome.to_string(),
        sim_time: summary.sim_time,
        steps: summary.steps,
        final_pose_true: summary.final_pose_true.into(),
        final_pose_odometry: summary.final_pose_odometry.into(),
        final_error_norm: summary.final_error_norm,
        rms_error_norm: summary.rms_error_norm,
        peak_power: summary.peak_power,
        peak_raw_power: summary.peak_raw_power,
        saturation_steps: summary.saturation_steps,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    text
}

/// Writes rendered bytes to a file, mapping failures to [`CliError::Write`].
pub fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
