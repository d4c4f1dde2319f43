//! Pose regulation in polar coordinates.
//!
//! The goal offset is expressed as a distance `r`, a bearing error
//! `e_bearing` (angle from the heading to the goal direction) and a
//! goal-frame heading term. The control law is linear in those three
//! coordinates:
//!
//! ```text
//! v     = k_distance * r
//! omega = k_bearing * e_bearing + k_goal_heading * e_goal_heading
//! ```
//!
//! To keep the initial command inside the actuator's range, each gain can be
//! multiplied by the ramp `1 - exp(-alpha * s)`, where `s` is either elapsed
//! time or remaining distance. The four-quadrant arctangent used by the
//! transform is built from the single-argument `atan` alone, mirroring the
//! target compiler which lacks `atan2`.

use thiserror::Error;

use crate::kinematics::{wrap_angle, BodyTwist, Pose};
use crate::linalg::Matrix3;
use crate::real::{sign, Real};

/// Distance below which the polar dynamics are singular (m); the transform
/// and derivative refuse to divide by `r` under this value.
pub const SINGULARITY_RADIUS: f64 = 1e-6;

/// Four-quadrant arctangent in `(-pi, pi]` built from single-argument
/// `atan`, sign tests and constants only.
///
/// Conventions: `atan2_custom(0, 0) = 0` and the negative x axis maps to
/// `+pi`.
pub fn atan2_custom<T: Real>(y: T, x: T) -> T {
    let zero = T::zero();
    if y == zero {
        if x > zero {
            return zero;
        }
        if x == zero {
            return zero;
        }
        return T::PI();
    }
    if x > zero {
        (y / x).atan()
    } else if x == zero {
        T::FRAC_PI_2() * sign(y)
    } else {
        (y / x).atan() + T::PI() * sign(y)
    }
}

/// Goal offset in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState<T> {
    /// Distance to the goal (m), nonnegative.
    pub distance: T,
    /// Bearing error (rad): angle from the heading to the goal direction.
    pub bearing: T,
    /// Goal-frame heading term (rad).
    pub goal_heading: T,
}

impl<T: Real> PolarState<T> {
    pub fn new(distance: T, bearing: T, goal_heading: T) -> Self {
        PolarState {
            distance,
            bearing: wrap_angle(bearing),
            goal_heading: wrap_angle(goal_heading),
        }
    }

    /// Terminal state reported inside the stop radius: all zeros, so the
    /// control law commands a full stop.
    pub fn terminal() -> Self {
        PolarState {
            distance: T::zero(),
            bearing: T::zero(),
            goal_heading: T::zero(),
        }
    }

    pub fn norm(&self) -> T {
        (self.distance * self.distance
            + self.bearing * self.bearing
            + self.goal_heading * self.goal_heading)
            .sqrt()
    }
}

/// Time derivative of a [`PolarState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRate<T> {
    pub distance: T,
    pub bearing: T,
    pub goal_heading: T,
}

/// Regulator gains. Stability requires `k_distance > 0`,
/// `k_goal_heading < 0` and `k_bearing - k_distance > 0` (see
/// [`stability_check`]); construction does not enforce this so unstable
/// configurations can be explored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegulatorGains<T> {
    /// Gain on the goal distance (1/s).
    pub distance: T,
    /// Gain on the bearing error (1/s).
    pub bearing: T,
    /// Gain on the goal-frame heading term (1/s).
    pub goal_heading: T,
}

impl<T: Real> RegulatorGains<T> {
    pub fn new(distance: T, bearing: T, goal_heading: T) -> Self {
        RegulatorGains {
            distance,
            bearing,
            goal_heading,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.distance.is_finite() && self.bearing.is_finite() && self.goal_heading.is_finite()
    }
}

impl<T: Real> Default for RegulatorGains<T> {
    /// The toolkit's stock regulator gains: `(0.4, 2, -1)`.
    fn default() -> Self {
        RegulatorGains::new(T::cast(0.4), T::cast(2.0), T::cast(-1.0))
    }
}

/// What the ramp argument `s` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RampMode {
    /// `s` is elapsed time (alphas in 1/s).
    #[default]
    Time,
    /// `s` is the current goal distance (alphas in 1/m).
    Distance,
}

/// Per-gain exponential ramp configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampConfig<T> {
    pub alpha_distance: T,
    pub alpha_bearing: T,
    pub alpha_goal_heading: T,
    pub mode: RampMode,
}

impl<T: Real> RampConfig<T> {
    pub fn new(alpha_distance: T, alpha_bearing: T, alpha_goal_heading: T, mode: RampMode) -> Self {
        RampConfig {
            alpha_distance,
            alpha_bearing,
            alpha_goal_heading,
            mode,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.alpha_distance > T::zero()
            && self.alpha_bearing > T::zero()
            && self.alpha_goal_heading > T::zero()
            && self.alpha_distance.is_finite()
            && self.alpha_bearing.is_finite()
            && self.alpha_goal_heading.is_finite()
    }
}

impl<T: Real> Default for RampConfig<T> {
    /// Stock time-based ramps `(0.1, 0.1, 0.3)`.
    fn default() -> Self {
        RampConfig::new(T::cast(0.1), T::cast(0.1), T::cast(0.3), RampMode::Time)
    }
}

/// Target pose for a regulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalSpec<T> {
    pub pose: Pose<T>,
}

impl<T: Real> GoalSpec<T> {
    pub fn new(pose: Pose<T>) -> Self {
        GoalSpec { pose }
    }
}

/// Polar transform of the goal offset.
///
/// With `d = goal - pose`:
///
/// ```text
/// r              = |d|
/// e_bearing      = wrap(-theta + atan2(dy, dx))
/// e_goal_heading = wrap(-theta - e_bearing + theta_goal)
/// ```
///
/// Note the datum: `atan2` measures world angles from the **+x axis**, so
/// this transform reads `pose.theta` and the goal heading against +x as
/// well. Poses that follow the crate's +y-forward kinematic convention must
/// shift both headings by `+pi/2` before calling this (the simulator does);
/// otherwise the bearing is off by a quarter turn and the closed loop steers
/// sideways.
///
/// Below `stop_radius` the transform reports the terminal state `(0, 0, 0)`,
/// which makes the control law command a stop; pass `0` to disable that
/// convention.
pub fn polar_transform<T: Real>(pose: Pose<T>, goal: GoalSpec<T>, stop_radius: T) -> PolarState<T> {
    let state = polar_components(pose, goal);
    if state.distance < stop_radius {
        PolarState::terminal()
    } else {
        state
    }
}

/// Raw polar transform without the stop-radius convention.
pub(crate) fn polar_components<T: Real>(pose: Pose<T>, goal: GoalSpec<T>) -> PolarState<T> {
    let dx = goal.pose.x - pose.x;
    let dy = goal.pose.y - pose.y;
    let distance = dx.hypot(dy);
    let bearing = wrap_angle(-pose.theta + atan2_custom(dy, dx));
    let goal_heading = wrap_angle(-pose.theta - bearing + goal.pose.theta);
    PolarState {
        distance,
        bearing,
        goal_heading,
    }
}

/// The regulation control law (see the module docs).
pub fn regulator_control<T: Real>(state: PolarState<T>, gains: RegulatorGains<T>) -> BodyTwist<T> {
    BodyTwist {
        v: gains.distance * state.distance,
        omega: gains.bearing * state.bearing + gains.goal_heading * state.goal_heading,
    }
}

/// Exponential ramp `1 - exp(-alpha * s)`, clamped to `s >= 0`; strictly
/// increasing in `s` and bounded in `[0, 1)`.
pub fn ramp_factor<T: Real>(alpha: T, s: T) -> T {
    T::one() - (-alpha * s.max(T::zero())).exp()
}

/// Scales each gain by its own ramp factor. The ramp argument is `t` in
/// time mode and `r` (current goal distance) in distance mode.
pub fn effective_gains<T: Real>(
    base: RegulatorGains<T>,
    ramp: &RampConfig<T>,
    t: T,
    r: T,
) -> RegulatorGains<T> {
    let s = match ramp.mode {
        RampMode::Time => t,
        RampMode::Distance => r,
    };
    RegulatorGains {
        distance: base.distance * ramp_factor(ramp.alpha_distance, s),
        bearing: base.bearing * ramp_factor(ramp.alpha_bearing, s),
        goal_heading: base.goal_heading * ramp_factor(ramp.alpha_goal_heading, s),
    }
}

/// One violated stability inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityViolation {
    /// Requires `k_distance > 0`.
    DistanceGainNotPositive,
    /// Requires `k_goal_heading < 0`.
    GoalHeadingGainNotNegative,
    /// Requires `k_bearing - k_distance > 0`.
    BearingMarginNotPositive,
}

impl core::fmt::Display for StabilityViolation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StabilityViolation::DistanceGainNotPositive => write!(f, "k_distance > 0 violated"),
            StabilityViolation::GoalHeadingGainNotNegative => {
                write!(f, "k_goal_heading < 0 violated")
            }
            StabilityViolation::BearingMarginNotPositive => {
                write!(f, "k_bearing - k_distance > 0 violated")
            }
        }
    }
}

/// Verdict of [`stability_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    Unstable(Vec<StabilityViolation>),
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdict::Stable)
    }

    pub fn violations(&self) -> &[StabilityViolation] {
        match self {
            StabilityVerdict::Stable => &[],
            StabilityVerdict::Unstable(list) => list,
        }
    }
}

/// Checks the three strict inequalities that put every closed-loop pole in
/// the open left half plane: `k_distance > 0`, `k_goal_heading < 0`,
/// `k_bearing - k_distance > 0`. These are exactly the Routh conditions of
/// the linearized characteristic polynomial
/// `(s + k_distance)(s^2 + s (k_bearing - k_distance) - k_distance * k_goal_heading)`.
pub fn stability_check<T: Real>(gains: RegulatorGains<T>) -> StabilityVerdict {
    let mut violations = Vec::new();
    if !(gains.distance > T::zero()) {
        violations.push(StabilityViolation::DistanceGainNotPositive);
    }
    if !(gains.goal_heading < T::zero()) {
        violations.push(StabilityViolation::GoalHeadingGainNotNegative);
    }
    if !(gains.bearing - gains.distance > T::zero()) {
        violations.push(StabilityViolation::BearingMarginNotPositive);
    }
    if violations.is_empty() {
        StabilityVerdict::Stable
    } else {
        StabilityVerdict::Unstable(violations)
    }
}

/// State matrix of the polar dynamics linearized about the goal
/// (`cos x ~ 1`, `sin x ~ x`):
///
/// ```text
///     [ -k_distance   0                          0               ]
/// A = [ 0             -(k_bearing - k_distance)  -k_goal_heading ]
///     [ 0             -k_distance                0               ]
/// ```
pub fn linearized_matrix<T: Real>(gains: RegulatorGains<T>) -> Matrix3<T> {
    let zero = T::zero();
    Matrix3::from_rows([
        [-gains.distance, zero, zero],
        [zero, -(gains.bearing - gains.distance), -gains.goal_heading],
        [zero, -gains.distance, zero],
    ])
}

/// Error for polar dynamics evaluated too close to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("polar singularity: distance {distance} m is at or below the singular radius {radius} m")]
pub struct PolarSingularityError {
    pub distance: f64,
    pub radius: f64,
}

/// Nonlinear polar dynamics under a body twist:
///
/// ```text
/// rdot              = -v cos(e_bearing)
/// e_bearing_dot     =  v sin(e_bearing) / r - omega
/// e_goal_heading_dot = -v sin(e_bearing) / r
/// ```
///
/// Fails inside [`SINGULARITY_RADIUS`], where the division by `r` is
/// undefined; callers must switch to the terminal convention there.
pub fn nonlinear_derivative<T: Real>(
    state: PolarState<T>,
    twist: BodyTwist<T>,
) -> Result<PolarRate<T>, PolarSingularityError> {
    let radius = T::cast(SINGULARITY_RADIUS);
    if state.distance <= radius {
        return Err(PolarSingularityError {
            distance: state.distance.to_f64().unwrap_or(f64::NAN),
            radius: SINGULARITY_RADIUS,
        });
    }
    let (sin_b, cos_b) = state.bearing.sin_cos();
    let swirl = twist.v * sin_b / state.distance;
    Ok(PolarRate {
        distance: -twist.v * cos_b,
        bearing: swirl - twist.omega,
        goal_heading: -swirl,
    })
}
