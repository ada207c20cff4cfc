//! Subcommand implementations.

pub mod eval;
pub mod label;
pub mod run;
pub mod simulate;
pub mod train;

use std::path::{Path, PathBuf};

use bldc_core::motor::SpeedProfile;

use crate::error::{CliError, Result};

/// Parse a profile argument: `triangle`, `updown`, `constant:<rpm>` or
/// `ramp:<rpm>`, with an optional duration override.
pub fn parse_profile(spec: &str, duration: Option<f64>) -> Result<(SpeedProfile, String)> {
    let profile = match spec {
        "triangle" => SpeedProfile::triangle(85.0, 1450.0, 12.0, duration.unwrap_or(30.0)),
        "updown" => SpeedProfile::up_down(duration.unwrap_or(34.0)),
        other => {
            if let Some(rpm) = other.strip_prefix("constant:") {
                let rpm: f64 = rpm
                    .parse()
                    .map_err(|_| CliError::usage(format!("bad speed in \"{other}\"")))?;
                SpeedProfile::constant(rpm, duration.unwrap_or(10.0))
            } else if let Some(rpm) = other.strip_prefix("ramp:") {
                let rpm: f64 = rpm
                    .parse()
                    .map_err(|_| CliError::usage(format!("bad speed in \"{other}\"")))?;
                let dur = duration.unwrap_or(10.0);
                SpeedProfile::ramp_up(rpm, (dur * 0.5).min(rpm / 300.0), dur)
            } else {
                return Err(CliError::usage(format!(
                    "unknown profile \"{other}\" (triangle | updown | constant:<rpm> | ramp:<rpm>)"
                )));
            }
        }
    };
    Ok((profile, spec.to_string()))
}

/// Create the output directory if needed and return it.
pub fn prepare_out_dir(out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", out_dir.display())))?;
    Ok(out_dir.to_path_buf())
}

/// Speed values like `125,175,325`.
pub fn parse_speeds(spec: &str) -> Result<Vec<f64>> {
    let speeds: Result<Vec<f64>> = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad speed \"{s}\"")))
        })
        .collect();
    let speeds = speeds?;
    if speeds.is_empty() {
        return Err(CliError::usage("empty speed list".to_string()));
    }
    Ok(speeds)
}

/// File-name-friendly speed label (drops a trailing `.0`).
pub fn speed_label(rpm: f64) -> String {
    if (rpm - rpm.round()).abs() < 1e-9 {
        format!("{}", rpm.round() as i64)
    } else {
        format!("{rpm}")
    }
}
