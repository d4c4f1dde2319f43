//! NXT actuator and sensing path emulation.
//!
//! The motor takes a dimensionless power command clamped to +/-100 units.
//! The calibration from wheel speed to power is affine in degrees/second:
//! `power = omega * 57.2957 * 0.1010 + 0.4372 * sign(omega)`. The offset is
//! applied with the sign of the speed (and is zero at zero speed), so the
//! model is symmetric; the plant-side inverse has a matching dead zone.
//! Encoders report cumulative wheel rotation quantized to whole degrees.

use crate::kinematics::{wrap_angle, Pose, RobotGeometry};
use crate::real::{sign, Real};

/// Hardware power limit in either direction.
pub const POWER_LIMIT: f64 = 100.0;

/// Affine wheel-speed-to-power calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorCalibration<T> {
    /// Degrees per radian (57.2957 in the stock calibration).
    pub rad_to_deg: T,
    /// Power units per degree/second (0.1010).
    pub power_per_degps: T,
    /// Power offset added with the sign of the speed (0.4372).
    pub power_offset: T,
}

impl<T: Real> MotorCalibration<T> {
    /// Stock NXT servo calibration.
    pub fn nxt() -> Self {
        MotorCalibration {
            rad_to_deg: T::cast(57.2957),
            power_per_degps: T::cast(0.1010),
            power_offset: T::cast(0.4372),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.rad_to_deg > T::zero()
            && self.power_per_degps > T::zero()
            && self.power_offset >= T::zero()
            && self.rad_to_deg.is_finite()
            && self.power_per_degps.is_finite()
            && self.power_offset.is_finite()
    }

    fn scale(&self) -> T {
        self.rad_to_deg * self.power_per_degps
    }
}

impl<T: Real> Default for MotorCalibration<T> {
    fn default() -> Self {
        MotorCalibration::nxt()
    }
}

/// Clamped motor power plus a saturation flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCommand<T> {
    /// Power in `[-100, 100]`.
    pub value: T,
    /// True when the unclamped value exceeded the range.
    pub saturated: bool,
}

/// The calibration map before clamping.
pub fn unclamped_power<T: Real>(omega: T, calib: &MotorCalibration<T>) -> T {
    omega * calib.scale() + calib.power_offset * sign(omega)
}

/// Converts a wheel speed (rad/s) to a clamped power command.
pub fn wheel_speed_to_power<T: Real>(omega: T, calib: &MotorCalibration<T>) -> PowerCommand<T> {
    let limit = T::cast(POWER_LIMIT);
    let raw = unclamped_power(omega, calib);
    PowerCommand {
        value: raw.max(-limit).min(limit),
        saturated: raw.abs() > limit,
    }
}

/// Plant-side inverse of the calibration: power back to wheel speed (rad/s).
///
/// Powers inside the offset dead zone produce no motion. For calibrated
/// commands the round trip is exact, so the emulated motor executes the
/// commanded speed unless it saturates.
pub fn power_to_wheel_speed<T: Real>(power: T, calib: &MotorCalibration<T>) -> T {
    let magnitude = power.abs();
    if magnitude <= calib.power_offset {
        T::zero()
    } else {
        (magnitude - calib.power_offset) / calib.scale() * sign(power)
    }
}

/// Cumulative encoder reading in whole degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EncoderState {
    pub ticks: i64,
}

impl EncoderState {
    /// Samples the encoder from the true cumulative wheel angle (rad).
    pub fn sample<T: Real>(wheel_angle: T) -> EncoderState {
        EncoderState {
            ticks: quantize_wheel_angle(wheel_angle),
        }
    }
}

/// Quantizes a cumulative wheel angle (rad) to whole degrees, rounding
/// toward zero. Angles within 1e-9 degrees of a whole degree snap to it so
/// exact multiples survive the radian round trip.
pub fn quantize_wheel_angle<T: Real>(wheel_angle: T) -> i64 {
    let degrees = wheel_angle.to_degrees();
    let nearest = degrees.round();
    let quantized = if (degrees - nearest).abs() < T::cast(1e-9) {
        nearest
    } else {
        degrees.trunc()
    };
    quantized.to_i64().unwrap_or_else(|| {
        if quantized > T::zero() {
            i64::MAX
        } else {
            i64::MIN
        }
    })
}

/// Dead-reckoned pose estimate driven by encoder ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryState<T> {
    /// Current pose estimate.
    pub pose: Pose<T>,
    /// Left encoder reading consumed by the last update (deg).
    pub last_ticks_left: i64,
    /// Right encoder reading consumed by the last update (deg).
    pub last_ticks_right: i64,
}

impl<T: Real> OdometryState<T> {
    /// Starts dead reckoning from a known pose with zeroed encoders.
    pub fn new(initial_pose: Pose<T>) -> Self {
        OdometryState {
            pose: initial_pose,
            last_ticks_left: 0,
            last_ticks_right: 0,
        }
    }

    /// Consumes new encoder readings and advances the estimate with a
    /// midpoint (second-order) update:
    ///
    /// ```text
    /// ds     = c (dphi_l + dphi_r) / 2
    /// dtheta = c (dphi_r - dphi_l) / b
    /// x += -ds sin(theta + dtheta/2);  y += ds cos(theta + dtheta/2)
    /// ```
    pub fn update(
        &self,
        ticks_left: i64,
        ticks_right: i64,
        geometry: &RobotGeometry<T>,
    ) -> OdometryState<T> {
        let dphi_l = T::from_i64(ticks_left - self.last_ticks_left)
            .expect("tick delta fits in Real")
            .to_radians();
        let dphi_r = T::from_i64(ticks_right - self.last_ticks_right)
            .expect("tick delta fits in Real")
            .to_radians();
        let half = T::cast(0.5);
        let ds = geometry.wheel_radius() * (dphi_l + dphi_r) * half;
        let dtheta = geometry.wheel_radius() * (dphi_r - dphi_l) / geometry.axle_length();
        let mid_heading = self.pose.theta + dtheta * half;
        OdometryState {
            pose: Pose::new(
                self.pose.x - ds * mid_heading.sin(),
                self.pose.y + ds * mid_heading.cos(),
                wrap_angle(self.pose.theta + dtheta),
            ),
            last_ticks_left: ticks_left,
            last_ticks_right: ticks_right,
        }
    }
}
