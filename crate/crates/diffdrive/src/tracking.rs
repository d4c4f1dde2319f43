//! Trajectory-tracking controller.
//!
//! The tracking error is the reference offset rotated into the body frame.
//! The control law is proportional in those errors plus the reference
//! feedforward:
//!
//! ```text
//! v     = v_ref cos(e_heading) + k_along e_along
//! omega = omega_ref + k_lateral sign(v_ref) e_lateral + k_heading e_heading
//! ```
//!
//! Gains come from a pole-placement design driven by a damping factor and a
//! natural frequency: the closed-loop error dynamics, linearized about zero
//! error, get the characteristic polynomial
//! `(s + 2 xi wn)(s^2 + 2 xi wn s + wn^2)`.

use thiserror::Error;

use crate::kinematics::{wrap_angle, BodyTwist, Pose};
use crate::linalg::Matrix3;
use crate::real::{sign, Real};
use crate::trajectory::ReferenceState;

/// Default floor on `|v_ref|` below which gain design is refused (m/s).
pub const DEFAULT_SPEED_FLOOR: f64 = 1e-3;

/// Tracking error in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError<T> {
    /// Error along the heading direction (m).
    pub along: T,
    /// Error across the heading direction (m).
    pub lateral: T,
    /// Heading error (rad), wrapped to `(-pi, pi]`.
    pub heading: T,
}

impl<T: Real> TrackingError<T> {
    /// Euclidean norm of the full `(along, lateral, heading)` error.
    pub fn norm(&self) -> T {
        (self.along * self.along + self.lateral * self.lateral + self.heading * self.heading)
            .sqrt()
    }

    /// Norm of the position part only.
    pub fn position_norm(&self) -> T {
        self.along.hypot(self.lateral)
    }
}

/// Proportional gains of the tracking law.
///
/// The pole-placement design always produces positive `along`/`heading`
/// gains; hand-set gains are deliberately unrestricted so unstable
/// configurations can be simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingGains<T> {
    /// Gain on the along-heading error (1/s).
    pub along: T,
    /// Gain on the lateral error (1/(m*s)).
    pub lateral: T,
    /// Gain on the heading error (1/s).
    pub heading: T,
}

/// Second-order design target: damping factor and natural frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec<T> {
    damping: T,
    natural_frequency: T,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("reference too slow: |v_ref| = {v_ref} is below the floor {floor} (the lateral gain divides by |v_ref|)")]
    ReferenceTooSlow { v_ref: f64, floor: f64 },
    #[error("design spec requires damping > 0 and natural_frequency > 0")]
    InvalidSpec,
}

impl<T: Real> DesignSpec<T> {
    pub fn new(damping: T, natural_frequency: T) -> Result<Self, DesignError> {
        if !(damping > T::zero())
            || !(natural_frequency > T::zero())
            || !damping.is_finite()
            || !natural_frequency.is_finite()
        {
            return Err(DesignError::InvalidSpec);
        }
        Ok(DesignSpec {
            damping,
            natural_frequency,
        })
    }

    pub fn damping(&self) -> T {
        self.damping
    }

    pub fn natural_frequency(&self) -> T {
        self.natural_frequency
    }
}

/// Result of a gain design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainDesign<T> {
    pub gains: TrackingGains<T>,
    /// Set when `natural_frequency <= |omega_ref|`, which makes the lateral
    /// gain non-positive and leaves the intended damped form.
    pub lateral_gain_nonpositive: bool,
}

/// Computes tracking gains from a design spec and the current reference
/// commands:
///
/// ```text
/// k_along = k_heading = 2 xi wn
/// k_lateral = (wn^2 - omega_ref^2) / |v_ref|
/// ```
///
/// Rejects references slower than `speed_floor`, since the lateral gain is
/// singular at `v_ref = 0`.
pub fn design_gains<T: Real>(
    spec: &DesignSpec<T>,
    v_ref: T,
    omega_ref: T,
    speed_floor: T,
) -> Result<GainDesign<T>, DesignError> {
    if v_ref.abs() < speed_floor {
        return Err(DesignError::ReferenceTooSlow {
            v_ref: v_ref.to_f64().unwrap_or(f64::NAN),
            floor: speed_floor.to_f64().unwrap_or(f64::NAN),
        });
    }
    let two = T::cast(2.0);
    let wn = spec.natural_frequency;
    let diagonal_gain = two * spec.damping * wn;
    Ok(GainDesign {
        gains: TrackingGains {
            along: diagonal_gain,
            lateral: (wn * wn - omega_ref * omega_ref) / v_ref.abs(),
            heading: diagonal_gain,
        },
        lateral_gain_nonpositive: wn <= omega_ref.abs(),
    })
}

/// Reference offset rotated into the body frame:
///
/// ```text
/// along   = -sin(theta) dx + cos(theta) dy
/// lateral = -cos(theta) dx - sin(theta) dy
/// heading = wrap(theta_ref - theta)
/// ```
///
/// with `d = ref - pose`. The rotation is orthogonal, so the position error
/// norm is preserved.
pub fn tracking_error<T: Real>(pose: Pose<T>, reference: ReferenceState<T>) -> TrackingError<T> {
    let dx = reference.pose.x - pose.x;
    let dy = reference.pose.y - pose.y;
    let (sin_t, cos_t) = pose.theta.sin_cos();
    TrackingError {
        along: -sin_t * dx + cos_t * dy,
        lateral: -cos_t * dx - sin_t * dy,
        heading: wrap_angle(reference.pose.theta - pose.theta),
    }
}

/// Tracking control law (see the module docs). Zero error yields the pure
/// feedforward `(v_ref, omega_ref)`.
pub fn tracking_control<T: Real>(
    error: TrackingError<T>,
    reference: ReferenceState<T>,
    gains: TrackingGains<T>,
) -> BodyTwist<T> {
    BodyTwist {
        v: reference.v * error.heading.cos() + gains.along * error.along,
        omega: reference.omega
            + gains.lateral * sign(reference.v) * error.lateral
            + gains.heading * error.heading,
    }
}

/// State matrix of the closed-loop error dynamics, linearized about zero
/// error:
///
/// ```text
///     [ -k_along     omega_ref   0     ]
/// A = [ -omega_ref   0           v_ref ]
///     [ 0            -k_lateral sign(v_ref)   -k_heading ]
/// ```
pub fn closed_loop_matrix<T: Real>(
    gains: TrackingGains<T>,
    v_ref: T,
    omega_ref: T,
) -> Matrix3<T> {
    let zero = T::zero();
    Matrix3::from_rows([
        [-gains.along, omega_ref, zero],
        [-omega_ref, zero, v_ref],
        [zero, -gains.lateral * sign(v_ref), -gains.heading],
    ])
}
