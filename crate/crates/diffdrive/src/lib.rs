//! Differential-drive mobile robot control toolkit.
//!
//! Two controllers around one deterministic closed-loop simulator that
//! emulates the LEGO NXT actuator and encoder path:
//!
//! * [`tracking`] — trajectory following: body-frame error transform,
//!   proportional law with reference feedforward, and pole-placement gain
//!   design from a damping factor and natural frequency.
//! * [`regulator`] — pose regulation in polar coordinates with exponential
//!   gain ramping to keep the start-up command inside the +/-100 power
//!   range, plus a closed-form stability test.
//!
//! Supporting modules: [`kinematics`] (unicycle model, RK4 pose
//! integration, angle wrapping), [`trajectory`] (exact piecewise-constant
//! references), [`hardware`] (power calibration, clamp, encoder
//! quantization, odometry), [`linalg`] (3x3 characteristic roots) and
//! [`sim`] (the 30 ms control loop producing a [`sim::SimTrace`]).
//!
//! # Heading convention
//!
//! Zero heading points along **+y** and angles grow counter-clockwise, so
//! `xdot = -v sin(theta)` and `ydot = v cos(theta)`. Angles are stored
//! wrapped to `(-pi, pi]`.
//!
//! # Scalar genericity
//!
//! Everything is generic over the [`Real`] scalar (`f32` or `f64`). The
//! `*64` aliases below pin the common double-precision instantiation.

// Validation uses `!(x > 0)` so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod hardware;
pub mod kinematics;
pub mod linalg;
pub mod real;
pub mod regulator;
pub mod sim;
pub mod tracking;
pub mod trajectory;

pub use real::Real;

pub use kinematics::{integrate_pose, pose_derivative, wrap_angle};
pub use regulator::{atan2_custom, polar_transform, ramp_factor, stability_check};
pub use sim::{run_regulation, run_scenario, run_tracking};
pub use tracking::{design_gains, tracking_control, tracking_error};

/// `f64` alias for [`kinematics::Pose`].
pub type Pose64 = kinematics::Pose<f64>;
/// `f64` alias for [`kinematics::BodyTwist`].
pub type BodyTwist64 = kinematics::BodyTwist<f64>;
/// `f64` alias for [`kinematics::WheelSpeeds`].
pub type WheelSpeeds64 = kinematics::WheelSpeeds<f64>;
/// `f64` alias for [`kinematics::RobotGeometry`].
pub type RobotGeometry64 = kinematics::RobotGeometry<f64>;
/// `f64` alias for [`trajectory::ReferenceProfile`].
pub type ReferenceProfile64 = trajectory::ReferenceProfile<f64>;
/// `f64` alias for [`trajectory::ReferenceState`].
pub type ReferenceState64 = trajectory::ReferenceState<f64>;
/// `f64` alias for [`tracking::TrackingError`].
pub type TrackingError64 = tracking::TrackingError<f64>;
/// `f64` alias for [`tracking::TrackingGains`].
pub type TrackingGains64 = tracking::TrackingGains<f64>;
/// `f64` alias for [`tracking::DesignSpec`].
pub type DesignSpec64 = tracking::DesignSpec<f64>;
/// `f64` alias for [`regulator::PolarState`].
pub type PolarState64 = regulator::PolarState<f64>;
/// `f64` alias for [`regulator::RegulatorGains`].
pub type RegulatorGains64 = regulator::RegulatorGains<f64>;
/// `f64` alias for [`regulator::RampConfig`].
pub type RampConfig64 = regulator::RampConfig<f64>;
/// `f64` alias for [`regulator::GoalSpec`].
pub type GoalSpec64 = regulator::GoalSpec<f64>;
/// `f64` alias for [`hardware::MotorCalibration`].
pub type MotorCalibration64 = hardware::MotorCalibration<f64>;
/// `f64` alias for [`hardware::OdometryState`].
pub type OdometryState64 = hardware::OdometryState<f64>;
/// `f64` alias for [`linalg::Matrix3`].
pub type Matrix364 = linalg::Matrix3<f64>;
/// `f64` alias for [`sim::ScenarioConfig`].
pub type ScenarioConfig64 = sim::ScenarioConfig<f64>;
/// `f64` alias for [`sim::SimTrace`].
pub type SimTrace64 = sim::SimTrace<f64>;
/// `f64` alias for [`sim::StepRecord`].
pub type StepRecord64 = sim::StepRecord<f64>;
/// `f64` alias for [`sim::RunSummary`].
pub type RunSummary64 = sim::RunSummary<f64>;
