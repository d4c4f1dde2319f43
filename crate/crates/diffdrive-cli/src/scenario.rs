//! Scenario files: a strict TOML schema mapped onto
//! [`diffdrive::sim::ScenarioConfig`].
//!
//! Unknown keys are rejected everywhere, so a typo in a gain name fails the
//! load instead of silently running with defaults. Every scalar is optional
//! with documented defaults; the only required pieces are the mode section
//! itself (`[regulation]` or `[tracking]`, exactly one), the regulation
//! goal, and the tracking profile.
//!
//! `--override key=value` arguments are applied to the parsed TOML document
//! before deserialization, so overrides go through the same strict schema
//! and validation as the file itself.

use std::path::Path;

use serde::{Deserialize, Serialize};

use diffdrive::kinematics::{Pose, RobotGeometry};
use diffdrive::hardware::MotorCalibration;
use diffdrive::regulator::{GoalSpec, RampConfig, RampMode, RegulatorGains};
use diffdrive::sim::{
    RegulationSetup, ScenarioConfig, ScenarioMode, TrackingGainSource, TrackingSetup,
    DEFAULT_CONTROL_PERIOD, DEFAULT_MAX_TIME, DEFAULT_PLANT_SUBSTEP, DEFAULT_STOP_HEADING,
    DEFAULT_STOP_RADIUS,
};
use diffdrive::tracking::{DesignSpec, TrackingGains, DEFAULT_SPEED_FLOOR};
use diffdrive::trajectory::{ReferenceProfile, Segment};
use diffdrive::ScenarioConfig64;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plant_substep: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub use_odometry: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp_power: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_pose: Option<PoseDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regulation: Option<RegulationDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tracking: Option<TrackingDoc>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wheel_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axle_length: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rad_to_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_per_degps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_offset: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDoc {
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub theta: f64,
}

impl From<Pose<f64>> for PoseDoc {
    fn from(pose: Pose<f64>) -> Self {
        PoseDoc {
            x: pose.x,
            y: pose.y,
            theta: pose.theta,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RegulationDoc {
    pub goal: PoseDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<RegulatorGainsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp_enabled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_heading: Option<f64>,
}

/// Each gain falls back to its stock value `(0.4, 2, -1)` when omitted, so
/// a single gain can be overridden or swept in isolation.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RegulatorGainsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bearing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal_heading: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RampDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_bearing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_goal_heading: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<RampModeDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RampModeDoc {
    Time,
    Distance,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingDoc {
    pub profile: ProfileDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub natural_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<TrackingGainsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingGainsDoc {
    pub along: f64,
    pub lateral: f64,
    pub heading: f64,
}

/// A profile is either a builtin shape (`line`, `circle`, `s-curve`) with
/// optional `v`/`omega`/`duration` parameters, or an explicit `segments`
/// list. `initial_pose` applies to both.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<SegmentDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_pose: Option<PoseDoc>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDoc {
    pub v: f64,
    pub omega: f64,
    pub duration: f64,
}

/// Loads, patches with overrides, and validates a scenario file.
pub fn load_scenario(path: &Path, overrides: &[String]) -> Result<ScenarioConfig64, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, overrides).map_err(|err| match err {
        CliError::Parse { path: None, message } => CliError::Parse {
            path: Some(path.to_path_buf()),
            message,
        },
        other => other,
    })
}

/// Parses a scenario from TOML text, applying `key=value` overrides onto
/// the document before schema validation.
pub fn parse_scenario(text: &str, overrides: &[String]) -> Result<ScenarioConfig64, CliError> {
    let mut value: toml::Value = text.parse().map_err(|err: toml::de::Error| CliError::Parse {
        path: None,
        message: err.to_string(),
    })?;
    for entry in overrides {
        apply_override(&mut value, entry)?;
    }
    let doc: ScenarioDoc = value.try_into().map_err(|err: toml::de::Error| CliError::Parse {
        path: None,
        message: err.to_string(),
    })?;
    let config = convert(&doc)?;
    config.validate()?;
    Ok(config)
}

/// Applies one `key=value` override as a path assignment into the TOML
/// document. Values parse as bool, then number, then fall back to string.
fn apply_override(doc: &mut toml::Value, entry: &str) -> Result<(), CliError> {
    let bad = |message: &str| CliError::BadArgument {
        argument: entry.to_string(),
        message: message.to_string(),
    };
    let (key, raw) = entry.split_once('=').ok_or_else(|| bad("expected key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(bad("empty key"));
    }
    let parsed = parse_override_value(raw.trim());

    let mut node = doc;
    let segments: Vec<&str> = key.split('.').collect();
    for (index, segment) in segments.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| bad("key path crosses a non-table value"))?;
        if index == segments.len() - 1 {
            table.insert(segment.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(segment.to_string())
            .or_insert_with(|| toml::Value::Table(toml::map::Map::new()));
    }
    unreachable!("segments is nonempty");
}

fn parse_override_value(raw: &str) -> toml::Value {
    match raw {
        "true" => return toml::Value::Boolean(true),
        "false" => return toml::Value::Boolean(false),
        _ => {}
    }
    if let Ok(number) = raw.parse::<f64>() {
        return toml::Value::Float(number);
    }
    toml::Value::String(raw.to_string())
}

fn invalid(key: &str, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Maps the parsed document onto a validated core configuration.
pub fn convert(doc: &ScenarioDoc) -> Result<ScenarioConfig64, CliError> {
    let geometry = match &doc.geometry {
        None => RobotGeometry::nxt(),
        Some(g) => RobotGeometry::new(
            g.wheel_radius.unwrap_or(0.0275),
            g.axle_length.unwrap_or(0.135),
        )
        .map_err(|err| invalid("geometry", err.to_string()))?,
    };
    let calibration = match &doc.calibration {
        None => MotorCalibration::nxt(),
        Some(c) => MotorCalibration {
            rad_to_deg: c.rad_to_deg.unwrap_or(57.2957),
            power_per_degps: c.power_per_degps.unwrap_or(0.1010),
            power_offset: c.power_offset.unwrap_or(0.4372),
        },
    };
    let initial_pose = doc
        .initial_pose
        .map(|p| Pose::new(p.x, p.y, p.theta))
        .unwrap_or_else(Pose::origin);

    let mode = match (&doc.regulation, &doc.tracking) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                "regulation/tracking",
                "give exactly one of [regulation] and [tracking], not both",
            ))
        }
        (None, None) => {
            return Err(invalid(
                "regulation/tracking",
                "one of [regulation] or [tracking] is required",
            ))
        }
        (Some(reg), None) => ScenarioMode::Regulation(convert_regulation(reg)?),
        (None, Some(track)) => ScenarioMode::Tracking(convert_tracking(track)?),
    };

    Ok(ScenarioConfig {
        geometry,
        calibration,
        initial_pose,
        control_period: doc.control_period.unwrap_or(DEFAULT_CONTROL_PERIOD),
        plant_substep: doc.plant_substep.unwrap_or(DEFAULT_PLANT_SUBSTEP),
        max_time: doc.max_time.unwrap_or(DEFAULT_MAX_TIME),
        use_odometry: doc.use_odometry.unwrap_or(true),
        clamp_power: doc.clamp_power.unwrap_or(true),
        mode,
    })
}

fn convert_regulation(doc: &RegulationDoc) -> Result<RegulationSetup<f64>, CliError> {
    let stock_gains: RegulatorGains<f64> = RegulatorGains::default();
    let gains = doc
        .gains
        .map(|g| {
            RegulatorGains::new(
                g.distance.unwrap_or(stock_gains.distance),
                g.bearing.unwrap_or(stock_gains.bearing),
                g.goal_heading.unwrap_or(stock_gains.goal_heading),
            )
        })
        .unwrap_or(stock_gains);
    let ramp = match &doc.ramp {
        None => RampConfig::default(),
        Some(r) => {
            let stock: RampConfig<f64> = RampConfig::default();
            RampConfig::new(
                r.alpha_distance.unwrap_or(stock.alpha_distance),
                r.alpha_bearing.unwrap_or(stock.alpha_bearing),
                r.alpha_goal_heading.unwrap_or(stock.alpha_goal_heading),
                match r.mode.unwrap_or(RampModeDoc::Time) {
                    RampModeDoc::Time => RampMode::Time,
                    RampModeDoc::Distance => RampMode::Distance,
                },
            )
        }
    };
    Ok(RegulationSetup {
        goal: GoalSpec::new(Pose::new(doc.goal.x, doc.goal.y, doc.goal.theta)),
        gains,
        ramp,
        ramp_enabled: doc.ramp_enabled.unwrap_or(true),
        stop_radius: doc.stop_radius.unwrap_or(DEFAULT_STOP_RADIUS),
        stop_heading: doc.stop_heading.unwrap_or(DEFAULT_STOP_HEADING),
    })
}

fn convert_tracking(doc: &TrackingDoc) -> Result<TrackingSetup<f64>, CliError> {
    let gains = match (&doc.gains, doc.damping, doc.natural_frequency) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(invalid(
                "tracking.gains",
                "give either fixed gains or damping + natural_frequency, not both",
            ))
        }
        (Some(g), None, None) => TrackingGainSource::Fixed(TrackingGains {
            along: g.along,
            lateral: g.lateral,
            heading: g.heading,
        }),
        (None, damping, natural_frequency) => {
            let spec = DesignSpec::new(damping.unwrap_or(1.0), natural_frequency.unwrap_or(1.0))
                .map_err(|_| {
                    invalid(
                        "tracking.damping/natural_frequency",
                        "must both be positive",
                    )
                })?;
            TrackingGainSource::Design(spec)
        }
    };
    Ok(TrackingSetup {
        profile: convert_profile(&doc.profile)?,
        gains,
        speed_floor: doc.speed_floor.unwrap_or(DEFAULT_SPEED_FLOOR),
    })
}

fn convert_profile(doc: &ProfileDoc) -> Result<ReferenceProfile<f64>, CliError> {
    let key = "tracking.profile";
    let profile = match (&doc.builtin, &doc.segments) {
        (Some(_), Some(_)) => {
            return Err(invalid(key, "give either builtin or segments, not both"))
        }
        (None, None) => return Err(invalid(key, "one of builtin or segments is required")),
        (Some(name), None) => {
            let v = doc.v.unwrap_or(0.2);
            let omega = doc.omega.unwrap_or(0.5);
            match name.as_str() {
                "line" => ReferenceProfile::line(v, doc.duration.unwrap_or(10.0)),
                "circle" => {
                    if omega == 0.0 {
                        return Err(invalid(key, "circle needs a nonzero omega"));
                    }
                    ReferenceProfile::circle(v, omega)
                }
                "s-curve" => {
                    ReferenceProfile::s_curve(v, omega, doc.duration.unwrap_or(6.0))
                }
                other => {
                    return Err(invalid(
                        key,
                        format!("unknown builtin `{other}` (expected line, circle or s-curve)"),
                    ))
                }
            }
        }
        (None, Some(segments)) => {
            let segments: Vec<Segment<f64>> = segments
                .iter()
                .map(|s| Segment::new(s.v, s.omega, s.duration))
                .collect();
            ReferenceProfile::new(Pose::origin(), segments)
                .map_err(|err| invalid(key, err.to_string()))?
        }
    };
    Ok(match doc.initial_pose {
        Some(p) => profile.with_initial_pose(Pose::new(p.x, p.y, p.theta)),
        None => profile,
    })
}

/// Rebuilds a fully-populated document from a resolved configuration, for
/// the summary's configuration echo.
pub fn doc_from_config(config: &ScenarioConfig64) -> ScenarioDoc {
    let mut doc = ScenarioDoc {
        control_period: Some(config.control_period),
        plant_substep: Some(config.plant_substep),
        max_time: Some(config.max_time),
        use_odometry: Some(config.use_odometry),
        clamp_power: Some(config.clamp_power),
        geometry: Some(GeometryDoc {
            wheel_radius: Some(config.geometry.wheel_radius()),
            axle_length: Some(config.geometry.axle_length()),
        }),
        calibration: Some(CalibrationDoc {
            rad_to_deg: Some(config.calibration.rad_to_deg),
            power_per_degps: Some(config.calibration.power_per_degps),
            power_offset: Some(config.calibration.power_offset),
        }),
        initial_pose: Some(config.initial_pose.into()),
        regulation: None,
        tracking: None,
    };
    match &config.mode {
        ScenarioMode::Regulation(setup) => {
            doc.regulation = Some(RegulationDoc {
                goal: setup.goal.pose.into(),
                gains: Some(RegulatorGainsDoc {
                    distance: Some(setup.gains.distance),
                    bearing: Some(setup.gains.bearing),
                    goal_heading: Some(setup.gains.goal_heading),
                }),
                ramp: Some(RampDoc {
                    alpha_distance: Some(setup.ramp.alpha_distance),
                    alpha_bearing: Some(setup.ramp.alpha_bearing),
                    alpha_goal_heading: Some(setup.ramp.alpha_goal_heading),
                    mode: Some(match setup.ramp.mode {
                        RampMode::Time => RampModeDoc::Time,
                        RampMode::Distance => RampModeDoc::Distance,
                    }),
                }),
                ramp_enabled: Some(setup.ramp_enabled),
                stop_radius: Some(setup.stop_radius),
                stop_heading: Some(setup.stop_heading),
            });
        }
        ScenarioMode::Tracking(setup) => {
            let (damping, natural_frequency, gains) = match &setup.gains {
                TrackingGainSource::Design(spec) => {
                    (Some(spec.damping()), Some(spec.natural_frequency()), None)
                }
                TrackingGainSource::Fixed(g) => (
                    None,
                    None,
                    Some(TrackingGainsDoc {
                        along: g.along,
                        lateral: g.lateral,
                        heading: g.heading,
                    }),
                ),
            };
            doc.tracking = Some(TrackingDoc {
                profile: ProfileDoc {
                    builtin: None,
                    v: None,
                    omega: None,
                    duration: None,
                    segments: Some(
                        setup
                            .profile
                            .segments()
                            .iter()
                            .map(|s| SegmentDoc {
                                v: s.v,
                                omega: s.omega,
                                duration: s.duration,
                            })
                            .collect(),
                    ),
                    initial_pose: Some(setup.profile.initial_pose().into()),
                },
                damping,
                natural_frequency,
                gains,
                speed_floor: Some(setup.speed_floor),
            });
        }
    }
    doc
}
