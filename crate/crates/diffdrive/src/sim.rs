//! Deterministic closed-loop simulator.
//!
//! One control period (30 ms by default) looks like the real firmware loop:
//! sample the quantized encoders, update odometry, run the controller on the
//! estimated (or true) pose, convert the twist to wheel speeds, push them
//! through the power calibration and clamp, then integrate the true plant
//! with RK4 substeps while the commands are held. Every quantity of interest
//! is recorded per step, and identical configurations produce bit-identical
//! traces.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::hardware::{
    power_to_wheel_speed, quantize_wheel_angle, unclamped_power, wheel_speed_to_power,
    MotorCalibration, OdometryState,
};
use crate::kinematics::{
    integrate_pose, wrap_angle, BodyTwist, Pose, RobotGeometry, WheelSpeeds,
};
use crate::real::Real;
use crate::regulator::{
    effective_gains, polar_components, regulator_control, GoalSpec, PolarState, RampConfig,
    RegulatorGains,
};
use crate::tracking::{
    design_gains, tracking_control, tracking_error, DesignError, DesignSpec, TrackingError,
    TrackingGains, DEFAULT_SPEED_FLOOR,
};
use crate::trajectory::ReferenceProfile;

/// Default control period (s), matching the 30 ms firmware loop.
pub const DEFAULT_CONTROL_PERIOD: f64 = 0.03;
/// Default plant integration substep (s).
pub const DEFAULT_PLANT_SUBSTEP: f64 = 0.001;
/// Default simulated-time budget (s).
pub const DEFAULT_MAX_TIME: f64 = 60.0;
/// Default stop radius for regulation runs (m).
pub const DEFAULT_STOP_RADIUS: f64 = 0.01;
/// Default stop tolerance on the final heading (rad).
pub const DEFAULT_STOP_HEADING: f64 = 0.05;
/// Position magnitude beyond which a run is declared diverged (m).
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Full description of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    pub geometry: RobotGeometry<T>,
    pub calibration: MotorCalibration<T>,
    pub initial_pose: Pose<T>,
    /// Controller sampling period (s).
    pub control_period: T,
    /// Plant integration substep (s), at most one control period.
    pub plant_substep: T,
    /// Simulated-time budget (s).
    pub max_time: T,
    /// Feed the controller the odometry pose (true) or the exact plant pose.
    pub use_odometry: bool,
    /// Clamp motor power to +/-100 before it reaches the plant.
    pub clamp_power: bool,
    pub mode: ScenarioMode<T>,
}

/// Which controller the scenario runs.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioMode<T> {
    Regulation(RegulationSetup<T>),
    Tracking(TrackingSetup<T>),
}

/// Pose-regulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulationSetup<T> {
    pub goal: GoalSpec<T>,
    pub gains: RegulatorGains<T>,
    pub ramp: RampConfig<T>,
    pub ramp_enabled: bool,
    /// Goal distance below which the regulator commands a stop (m).
    pub stop_radius: T,
    /// Heading tolerance for declaring convergence (rad).
    pub stop_heading: T,
}

/// Trajectory-tracking parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSetup<T> {
    pub profile: ReferenceProfile<T>,
    pub gains: TrackingGainSource<T>,
    /// Floor on `|v_ref|` for the gain design (m/s).
    pub speed_floor: T,
}

/// Where tracking gains come from: redesigned every period from the current
/// reference commands, or fixed by hand (possibly unstable, for demos).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackingGainSource<T> {
    Design(DesignSpec<T>),
    Fixed(TrackingGains<T>),
}

impl<T: Real> ScenarioConfig<T> {
    /// Regulation scenario with the stock defaults: NXT geometry and
    /// calibration, 30 ms loop, 1 ms substeps, ramped default gains,
    /// odometry feedback and power clamping.
    pub fn regulation(goal: GoalSpec<T>) -> Self {
        ScenarioConfig {
            geometry: RobotGeometry::nxt(),
            calibration: MotorCalibration::nxt(),
            initial_pose: Pose::origin(),
            control_period: T::cast(DEFAULT_CONTROL_PERIOD),
            plant_substep: T::cast(DEFAULT_PLANT_SUBSTEP),
            max_time: T::cast(DEFAULT_MAX_TIME),
            use_odometry: true,
            clamp_power: true,
            mode: ScenarioMode::Regulation(RegulationSetup {
                goal,
                gains: RegulatorGains::default(),
                ramp: RampConfig::default(),
                ramp_enabled: true,
                stop_radius: T::cast(DEFAULT_STOP_RADIUS),
                stop_heading: T::cast(DEFAULT_STOP_HEADING),
            }),
        }
    }

    /// Tracking scenario with the stock defaults.
    pub fn tracking(profile: ReferenceProfile<T>, gains: TrackingGainSource<T>) -> Self {
        ScenarioConfig {
            geometry: RobotGeometry::nxt(),
            calibration: MotorCalibration::nxt(),
            initial_pose: profile.initial_pose(),
            control_period: T::cast(DEFAULT_CONTROL_PERIOD),
            plant_substep: T::cast(DEFAULT_PLANT_SUBSTEP),
            max_time: T::cast(DEFAULT_MAX_TIME),
            use_odometry: true,
            clamp_power: true,
            mode: ScenarioMode::Tracking(TrackingSetup {
                profile,
                gains,
                speed_floor: T::cast(DEFAULT_SPEED_FLOOR),
            }),
        }
    }

    /// Checks every invariant the engine relies on. Field names in the
    /// errors refer to this struct.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        fn check(ok: bool, field: &'static str, message: &str) -> Result<(), ScenarioError> {
            if ok {
                Ok(())
            } else {
                Err(ScenarioError::Invalid {
                    field,
                    message: message.to_string(),
                })
            }
        }

        check(
            self.initial_pose.is_finite(),
            "initial_pose",
            "must be finite",
        )?;
        check(
            self.control_period > T::zero() && self.control_period.is_finite(),
            "control_period",
            "must be positive and finite",
        )?;
        check(
            self.plant_substep > T::zero() && self.plant_substep <= self.control_period,
            "plant_substep",
            "must be positive and at most control_period",
        )?;
        check(
            self.max_time > T::zero() && self.max_time.is_finite(),
            "max_time",
            "must be positive and finite",
        )?;
        check(
            self.calibration.is_valid(),
            "calibration",
            "scale factors must be positive and the offset nonnegative",
        )?;
        match &self.mode {
            ScenarioMode::Regulation(setup) => {
                check(
                    setup.goal.pose.is_finite(),
                    "regulation.goal",
                    "must be finite",
                )?;
                check(
                    setup.gains.is_finite(),
                    "regulation.gains",
                    "must be finite",
                )?;
                check(
                    setup.ramp.is_valid(),
                    "regulation.ramp",
                    "alphas must be positive and finite",
                )?;
                check(
                    setup.stop_radius > T::zero() && setup.stop_radius.is_finite(),
                    "regulation.stop_radius",
                    "must be positive and finite",
                )?;
                check(
                    setup.stop_heading > T::zero() && setup.stop_heading.is_finite(),
                    "regulation.stop_heading",
                    "must be positive and finite",
                )?;
            }
            ScenarioMode::Tracking(setup) => {
                check(
                    setup.speed_floor > T::zero() && setup.speed_floor.is_finite(),
                    "tracking.speed_floor",
                    "must be positive and finite",
                )?;
                if let TrackingGainSource::Fixed(gains) = &setup.gains {
                    check(
                        gains.along.is_finite()
                            && gains.lateral.is_finite()
                            && gains.heading.is_finite(),
                        "tracking.gains",
                        "must be finite",
                    )?;
                }
                if matches!(setup.gains, TrackingGainSource::Design(_)) {
                    // The design divides by |v_ref|; refuse profiles with a
                    // segment slower than the floor up front.
                    for segment in setup.profile.segments() {
                        if segment.v.abs() < setup.speed_floor {
                            return Err(ScenarioError::Design(DesignError::ReferenceTooSlow {
                                v_ref: segment
                                    .v
                                    .to_f64()
                                    .unwrap_or(f64::NAN),
                                floor: setup
                                    .speed_floor
                                    .to_f64()
                                    .unwrap_or(f64::NAN),
                            }));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Scenario rejection reasons.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error("scenario mode mismatch: this entry point needs a {expected} scenario")]
    ModeMismatch { expected: &'static str },
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// Controller-side error snapshot stored in each record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorState<T> {
    Tracking(TrackingError<T>),
    Polar(PolarState<T>),
}

impl<T: Real> ErrorState<T> {
    /// The three error components in record order.
    pub fn components(&self) -> [T; 3] {
        match self {
            ErrorState::Tracking(e) => [e.along, e.lateral, e.heading],
            ErrorState::Polar(p) => [p.distance, p.bearing, p.goal_heading],
        }
    }

    pub fn norm(&self) -> T {
        match self {
            ErrorState::Tracking(e) => e.norm(),
            ErrorState::Polar(p) => p.norm(),
        }
    }
}

/// Everything measured and commanded in one control period, sampled at the
/// start of the period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<T> {
    /// Sample time (s); nondecreasing across the trace.
    pub t: T,
    /// Exact plant pose at `t`.
    pub pose_true: Pose<T>,
    /// Dead-reckoned pose at `t`.
    pub pose_odometry: Pose<T>,
    /// Controller error state (tracking errors or polar state).
    pub error: ErrorState<T>,
    /// Commanded body twist.
    pub command: BodyTwist<T>,
    /// Commanded wheel speeds (rad/s).
    pub wheel_command: WheelSpeeds<T>,
    /// Power actually applied to the left motor.
    pub power_left: T,
    /// Power actually applied to the right motor.
    pub power_right: T,
    /// Calibration output before clamping, left motor.
    pub raw_power_left: T,
    /// Calibration output before clamping, right motor.
    pub raw_power_right: T,
    /// True when either unclamped power exceeded the +/-100 range.
    pub saturated: bool,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    /// Regulation stop rule met.
    Converged,
    /// Simulated-time budget exhausted.
    MaxTime,
    /// State became non-finite or left the divergence guard box.
    Diverged,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        matches!(self, RunOutcome::Converged)
    }
}

impl core::fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RunOutcome::Converged => write!(f, "converged"),
            RunOutcome::MaxTime => write!(f, "max-time"),
            RunOutcome::Diverged => write!(f, "diverged"),
        }
    }
}

/// Aggregates over a finished run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary<T> {
    pub outcome: RunOutcome,
    /// Simulated time at exit (s).
    pub sim_time: T,
    /// Number of control periods recorded.
    pub steps: usize,
    pub final_pose_true: Pose<T>,
    pub final_pose_odometry: Pose<T>,
    /// Truth-referenced error norm at exit (polar norm for regulation,
    /// tracking-error norm against the reference for tracking).
    pub final_error_norm: T,
    /// RMS of the controller-view error norm over the trace.
    pub rms_error_norm: T,
    /// Largest applied |power| seen.
    pub peak_power: T,
    /// Largest unclamped |power| seen.
    pub peak_raw_power: T,
    /// Number of steps with a saturated wheel.
    pub saturation_steps: usize,
    /// Wall-clock duration of the run. Measured for reporting only; it is
    /// never serialized, so emitted artifacts stay a pure function of the
    /// configuration.
    pub wall: Duration,
}

/// A finished run: the configuration echo, the per-step records, and the
/// summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace<T> {
    pub config: ScenarioConfig<T>,
    pub records: Vec<StepRecord<T>>,
    pub summary: RunSummary<T>,
}

/// Runs a regulation scenario; rejects configs in tracking mode.
pub fn run_regulation<T: Real>(config: &ScenarioConfig<T>) -> Result<SimTrace<T>, ScenarioError> {
    match config.mode {
        ScenarioMode::Regulation(_) => run_scenario(config),
        ScenarioMode::Tracking(_) => Err(ScenarioError::ModeMismatch {
            expected: "regulation",
        }),
    }
}

/// Runs a tracking scenario; rejects configs in regulation mode.
pub fn run_tracking<T: Real>(config: &ScenarioConfig<T>) -> Result<SimTrace<T>, ScenarioError> {
    match config.mode {
        ScenarioMode::Tracking(_) => run_scenario(config),
        ScenarioMode::Regulation(_) => Err(ScenarioError::ModeMismatch {
            expected: "tracking",
        }),
    }
}

/// Validates and runs a scenario of either mode.
pub fn run_scenario<T: Real>(config: &ScenarioConfig<T>) -> Result<SimTrace<T>, ScenarioError> {
    config.validate()?;
    let wall_start = Instant::now();

    let period = config.control_period;
    let substeps = substeps_per_period(period, config.plant_substep);

    let mut plant = PlantState {
        pose: config.initial_pose,
        wheel_angle_left: T::zero(),
        wheel_angle_right: T::zero(),
    };
    let mut odometry = OdometryState::new(config.initial_pose);
    let mut records: Vec<StepRecord<T>> = Vec::new();
    let mut held_gains: Option<TrackingGains<T>> = None;

    let outcome;
    let sim_time;
    let mut step_index: usize = 0;
    loop {
        let t = T::from_usize(step_index).expect("step index fits in Real") * period;

        // Measure: sample encoders, advance dead reckoning.
        let ticks_left = quantize_wheel_angle(plant.wheel_angle_left);
        let ticks_right = quantize_wheel_angle(plant.wheel_angle_right);
        odometry = odometry.update(ticks_left, ticks_right, &config.geometry);
        let controller_pose = if config.use_odometry {
            odometry.pose
        } else {
            plant.pose
        };

        if t >= config.max_time {
            outcome = RunOutcome::MaxTime;
            sim_time = t;
            break;
        }

        // Control.
        let (command, error_state, converged) = match &config.mode {
            ScenarioMode::Regulation(setup) => {
                let raw = regulation_polar(controller_pose, setup.goal);
                let heading_error = wrap_angle(controller_pose.theta - setup.goal.pose.theta);
                let converged =
                    raw.distance < setup.stop_radius && heading_error.abs() < setup.stop_heading;
                let control_state = if raw.distance < setup.stop_radius {
                    PolarState::terminal()
                } else {
                    raw
                };
                let gains = if setup.ramp_enabled {
                    effective_gains(setup.gains, &setup.ramp, t, raw.distance)
                } else {
                    setup.gains
                };
                (
                    regulator_control(control_state, gains),
                    ErrorState::Polar(raw),
                    converged,
                )
            }
            ScenarioMode::Tracking(setup) => {
                let reference = setup.profile.reference_at(t);
                let error = tracking_error(controller_pose, reference);
                let gains = match &setup.gains {
                    TrackingGainSource::Fixed(gains) => Some(*gains),
                    TrackingGainSource::Design(spec) => {
                        if reference.v.abs() >= setup.speed_floor {
                            // Reschedule from the current reference commands;
                            // validation guarantees this cannot fail here.
                            match design_gains(spec, reference.v, reference.omega, setup.speed_floor)
                            {
                                Ok(design) => {
                                    held_gains = Some(design.gains);
                                    held_gains
                                }
                                Err(_) => held_gains,
                            }
                        } else {
                            // Past the end of the profile: hold the last
                            // schedule (sign(v_ref) = 0 already disables the
                            // lateral term).
                            held_gains
                        }
                    }
                };
                let command = match gains {
                    Some(gains) => tracking_control(error, reference, gains),
                    None => BodyTwist::zero(),
                };
                (command, ErrorState::Tracking(error), false)
            }
        };

        if step_index >= 1 && converged {
            outcome = RunOutcome::Converged;
            sim_time = t;
            break;
        }

        // Actuate and integrate one period.
        let step = plant_step(
            &mut plant,
            command,
            &config.geometry,
            &config.calibration,
            config.clamp_power,
            period,
            substeps,
        );

        records.push(StepRecord {
            t,
            pose_true: step.pose_before,
            pose_odometry: odometry.pose,
            error: error_state,
            command,
            wheel_command: step.wheel_command,
            power_left: step.applied_left,
            power_right: step.applied_right,
            raw_power_left: step.raw_left,
            raw_power_right: step.raw_right,
            saturated: step.saturated,
        });

        if !plant.is_finite() || plant.pose.x.abs() > T::cast(DIVERGENCE_LIMIT)
            || plant.pose.y.abs() > T::cast(DIVERGENCE_LIMIT)
        {
            outcome = RunOutcome::Diverged;
            sim_time = t + period;
            break;
        }

        step_index += 1;
    }

    let summary = summarize(
        config,
        &records,
        outcome,
        sim_time,
        plant.pose,
        odometry.pose,
        wall_start.elapsed(),
    );
    Ok(SimTrace {
        config: config.clone(),
        records,
        summary,
    })
}

fn substeps_per_period<T: Real>(period: T, substep: T) -> u32 {
    let ratio = (period / substep).round();
    ratio.to_u32().unwrap_or(1).max(1)
}

/// Polar state of the goal offset as the regulator sees it.
///
/// The polar transform measures headings from the +x axis while poses store
/// them from +y, so both the robot heading and the goal heading are shifted
/// by a quarter turn before the transform; the bearing then measures the
/// angle from the forward direction, which is what the control law needs.
fn regulation_polar<T: Real>(pose: Pose<T>, goal: GoalSpec<T>) -> PolarState<T> {
    let datum = T::FRAC_PI_2();
    let measured = Pose::new(pose.x, pose.y, pose.theta + datum);
    let shifted_goal = GoalSpec::new(Pose::new(
        goal.pose.x,
        goal.pose.y,
        goal.pose.theta + datum,
    ));
    polar_components(measured, shifted_goal)
}

struct PlantState<T> {
    pose: Pose<T>,
    wheel_angle_left: T,
    wheel_angle_right: T,
}

impl<T: Real> PlantState<T> {
    fn is_finite(&self) -> bool {
        self.pose.is_finite()
            && self.wheel_angle_left.is_finite()
            && self.wheel_angle_right.is_finite()
    }
}

struct PlantStepOutput<T> {
    pose_before: Pose<T>,
    wheel_command: WheelSpeeds<T>,
    applied_left: T,
    applied_right: T,
    raw_left: T,
    raw_right: T,
    saturated: bool,
}

/// Applies one zero-order-hold command to the plant: twist to wheel speeds,
/// calibration to power (clamped or not), power back to the speeds the
/// motors actually run, then RK4 over the period.
fn plant_step<T: Real>(
    plant: &mut PlantState<T>,
    command: BodyTwist<T>,
    geometry: &RobotGeometry<T>,
    calibration: &MotorCalibration<T>,
    clamp_power: bool,
    period: T,
    substeps: u32,
) -> PlantStepOutput<T> {
    let wheel_command = geometry.twist_to_wheels(command);
    let raw_left = unclamped_power(wheel_command.omega_l, calibration);
    let raw_right = unclamped_power(wheel_command.omega_r, calibration);
    let left_cmd = wheel_speed_to_power(wheel_command.omega_l, calibration);
    let right_cmd = wheel_speed_to_power(wheel_command.omega_r, calibration);
    let (applied_left, applied_right) = if clamp_power {
        (left_cmd.value, right_cmd.value)
    } else {
        (raw_left, raw_right)
    };

    let actual = WheelSpeeds {
        omega_l: power_to_wheel_speed(applied_left, calibration),
        omega_r: power_to_wheel_speed(applied_right, calibration),
    };
    let plant_twist = geometry.wheels_to_twist(actual);

    let pose_before = plant.pose;
    plant.pose = integrate_pose(plant.pose, plant_twist, period, substeps);
    plant.wheel_angle_left += actual.omega_l * period;
    plant.wheel_angle_right += actual.omega_r * period;

    PlantStepOutput {
        pose_before,
        wheel_command,
        applied_left,
        applied_right,
        raw_left,
        raw_right,
        saturated: left_cmd.saturated || right_cmd.saturated,
    }
}

#[allow(clippy::too_many_arguments)]
fn summarize<T: Real>(
    config: &ScenarioConfig<T>,
    records: &[StepRecord<T>],
    outcome: RunOutcome,
    sim_time: T,
    final_pose_true: Pose<T>,
    final_pose_odometry: Pose<T>,
    wall: Duration,
) -> RunSummary<T> {
    let mut peak_power = T::zero();
    let mut peak_raw_power = T::zero();
    let mut saturation_steps = 0;
    let mut sum_sq = T::zero();
    for record in records {
        peak_power = peak_power
            .max(record.power_left.abs())
            .max(record.power_right.abs());
        peak_raw_power = peak_raw_power
            .max(record.raw_power_left.abs())
            .max(record.raw_power_right.abs());
        if record.saturated {
            saturation_steps += 1;
        }
        let norm = record.error.norm();
        sum_sq += norm * norm;
    }
    let rms_error_norm = if records.is_empty() {
        T::zero()
    } else {
        (sum_sq / T::from_usize(records.len()).expect("record count fits in Real")).sqrt()
    };

    let final_error_norm = match &config.mode {
        ScenarioMode::Regulation(setup) => regulation_polar(final_pose_true, setup.goal).norm(),
        ScenarioMode::Tracking(setup) => {
            tracking_error(final_pose_true, setup.profile.reference_at(sim_time)).norm()
        }
    };

    RunSummary {
        outcome,
        sim_time,
        steps: records.len(),
        final_pose_true,
        final_pose_odometry,
        final_error_norm,
        rms_error_norm,
        peak_power,
        peak_raw_power,
        saturation_steps,
        wall,
    }
}
