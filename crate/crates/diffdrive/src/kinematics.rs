//! Differential-drive and unicycle kinematic models.
//!
//! Heading convention used across the whole crate: `theta = 0` points along
//! the **+y axis** and grows counter-clockwise, so the unicycle velocity map
//! is
//!
//! ```text
//! xdot     = -v * sin(theta)
//! ydot     =  v * cos(theta)
//! thetadot =  omega
//! ```
//!
//! This differs from the more common +x-forward convention; it is the
//! convention every controller and test in this crate assumes. All stored
//! angles are wrapped to `(-pi, pi]`.

use thiserror::Error;

use crate::real::Real;

/// Wraps an angle to `(-pi, pi]`.
///
/// The upper bound is closed so that ties at the cut are deterministic:
/// `wrap_angle(-pi) == pi` and `wrap_angle(pi) == pi`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut wrapped = theta % two_pi;
    if wrapped > T::PI() {
        wrapped -= two_pi;
    } else if wrapped <= -T::PI() {
        wrapped += two_pi;
    }
    wrapped
}

/// Planar robot configuration: position of the back-shaft centre plus heading.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose<T> {
    /// World-frame x position (m).
    pub x: T,
    /// World-frame y position (m).
    pub y: T,
    /// Heading (rad), wrapped to `(-pi, pi]`; `0` faces +y.
    pub theta: T,
}

impl<T: Real> Pose<T> {
    /// Builds a pose, wrapping `theta` to `(-pi, pi]`.
    pub fn new(x: T, y: T, theta: T) -> Self {
        Pose {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    /// Pose at the origin facing +y.
    pub fn origin() -> Self {
        Pose::new(T::zero(), T::zero(), T::zero())
    }

    /// Euclidean distance between the position parts of two poses.
    pub fn distance_to(&self, other: &Pose<T>) -> T {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// True when all three fields are finite.
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Time derivative of a [`Pose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRate<T> {
    /// xdot (m/s).
    pub x: T,
    /// ydot (m/s).
    pub y: T,
    /// thetadot (rad/s).
    pub theta: T,
}

/// Unicycle-level command: linear speed and turn rate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyTwist<T> {
    /// Linear speed along the heading (m/s).
    pub v: T,
    /// Turn rate (rad/s), counter-clockwise positive.
    pub omega: T,
}

impl<T: Real> BodyTwist<T> {
    pub fn new(v: T, omega: T) -> Self {
        BodyTwist { v, omega }
    }

    pub fn zero() -> Self {
        BodyTwist {
            v: T::zero(),
            omega: T::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.omega.is_finite()
    }
}

/// Angular velocities of the two drive wheels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelSpeeds<T> {
    /// Left wheel angular velocity (rad/s).
    pub omega_l: T,
    /// Right wheel angular velocity (rad/s).
    pub omega_r: T,
}

impl<T: Real> WheelSpeeds<T> {
    pub fn new(omega_l: T, omega_r: T) -> Self {
        WheelSpeeds { omega_l, omega_r }
    }
}

/// Error building a [`RobotGeometry`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("wheel_radius must be positive and finite")]
    InvalidWheelRadius,
    #[error("axle_length must be positive and finite")]
    InvalidAxleLength,
}

/// Physical parameters of the drive: wheel radius and axle (back shaft) length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotGeometry<T> {
    wheel_radius: T,
    axle_length: T,
}

impl<T: Real> RobotGeometry<T> {
    /// Validates and builds a geometry. Both lengths are in meters and must
    /// be positive.
    pub fn new(wheel_radius: T, axle_length: T) -> Result<Self, GeometryError> {
        if !(wheel_radius > T::zero()) || !wheel_radius.is_finite() {
            return Err(GeometryError::InvalidWheelRadius);
        }
        if !(axle_length > T::zero()) || !axle_length.is_finite() {
            return Err(GeometryError::InvalidAxleLength);
        }
        Ok(RobotGeometry {
            wheel_radius,
            axle_length,
        })
    }

    /// Geometry of the LEGO NXT differential base this crate emulates:
    /// 0.0275 m wheel radius, 0.135 m axle length.
    pub fn nxt() -> Self {
        RobotGeometry {
            wheel_radius: T::cast(0.0275),
            axle_length: T::cast(0.135),
        }
    }

    pub fn wheel_radius(&self) -> T {
        self.wheel_radius
    }

    pub fn axle_length(&self) -> T {
        self.axle_length
    }

    /// Forward kinematics: wheel speeds to body twist,
    /// `v = (omega_l + omega_r) * c / 2`, `omega = (omega_r - omega_l) * c / b`.
    pub fn wheels_to_twist(&self, wheels: WheelSpeeds<T>) -> BodyTwist<T> {
        let c = self.wheel_radius;
        let half = T::cast(0.5);
        BodyTwist {
            v: (wheels.omega_l + wheels.omega_r) * c * half,
            omega: (wheels.omega_r - wheels.omega_l) * c / self.axle_length,
        }
    }

    /// Inverse kinematics: body twist to wheel speeds. Exact inverse of
    /// [`RobotGeometry::wheels_to_twist`].
    pub fn twist_to_wheels(&self, twist: BodyTwist<T>) -> WheelSpeeds<T> {
        let half_axle = self.axle_length * T::cast(0.5);
        WheelSpeeds {
            omega_l: (twist.v - half_axle * twist.omega) / self.wheel_radius,
            omega_r: (twist.v + half_axle * twist.omega) / self.wheel_radius,
        }
    }
}

impl<T: Real> Default for RobotGeometry<T> {
    fn default() -> Self {
        RobotGeometry::nxt()
    }
}

/// Unicycle velocity map under the crate's +y-forward heading convention.
pub fn pose_derivative<T: Real>(pose: Pose<T>, twist: BodyTwist<T>) -> PoseRate<T> {
    let (sin_t, cos_t) = pose.theta.sin_cos();
    PoseRate {
        x: -twist.v * sin_t,
        y: twist.v * cos_t,
        theta: twist.omega,
    }
}

/// Integrates a pose under a constant (zero-order-hold) twist with classical
/// fourth-order Runge-Kutta, split into `substeps` equal steps.
///
/// `substeps` is clamped to at least 1. The result heading is wrapped.
pub fn integrate_pose<T: Real>(pose: Pose<T>, twist: BodyTwist<T>, dt: T, substeps: u32) -> Pose<T> {
    let n = substeps.max(1);
    let h = dt / T::from_u32(n).expect("u32 fits in Real");
    let half = T::cast(0.5);
    let sixth = T::cast(1.0 / 6.0);
    let two = T::cast(2.0);

    let mut x = pose.x;
    let mut y = pose.y;
    let mut theta = pose.theta;
    for _ in 0..n {
        // The rates depend on the state only through theta.
        let k1 = rate_at(theta, twist);
        let k2 = rate_at(theta + half * h * k1.theta, twist);
        let k3 = rate_at(theta + half * h * k2.theta, twist);
        let k4 = rate_at(theta + h * k3.theta, twist);
        x += h * sixth * (k1.x + two * k2.x + two * k3.x + k4.x);
        y += h * sixth * (k1.y + two * k2.y + two * k3.y + k4.y);
        theta += h * sixth * (k1.theta + two * k2.theta + two * k3.theta + k4.theta);
    }
    Pose::new(x, y, theta)
}

fn rate_at<T: Real>(theta: T, twist: BodyTwist<T>) -> PoseRate<T> {
    let (sin_t, cos_t) = theta.sin_cos();
    PoseRate {
        x: -twist.v * sin_t,
        y: twist.v * cos_t,
        theta: twist.omega,
    }
}
