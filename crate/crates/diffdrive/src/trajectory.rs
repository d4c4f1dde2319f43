//! Reference trajectory generation.
//!
//! A reference is a piecewise-constant command profile: an initial pose plus
//! an ordered list of `(v, omega, duration)` segments. Because commands are
//! constant inside a segment, the reference pose has an exact closed form
//! (straight line or circular arc), so the reference carries no integrator
//! error at all. Past the final segment the profile holds its final pose
//! with zero commands.

use thiserror::Error;

use crate::kinematics::{wrap_angle, Pose};
use crate::real::Real;

/// Reference sample: the pose to track plus the feedforward commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceState<T> {
    pub pose: Pose<T>,
    /// Reference linear speed (m/s).
    pub v: T,
    /// Reference turn rate (rad/s).
    pub omega: T,
}

/// One constant-command piece of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub v: T,
    pub omega: T,
    /// Segment length in seconds; must be positive.
    pub duration: T,
}

impl<T: Real> Segment<T> {
    pub fn new(v: T, omega: T, duration: T) -> Self {
        Segment { v, omega, duration }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile needs at least one segment")]
    Empty,
    #[error("segment {index}: duration must be positive and finite")]
    InvalidDuration { index: usize },
    #[error("segment {index}: commands must be finite")]
    NonFiniteCommand { index: usize },
    #[error("initial pose must be finite")]
    NonFiniteInitialPose,
}

/// Piecewise-constant reference profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfile<T> {
    initial_pose: Pose<T>,
    segments: Vec<Segment<T>>,
}

impl<T: Real> ReferenceProfile<T> {
    pub fn new(initial_pose: Pose<T>, segments: Vec<Segment<T>>) -> Result<Self, ProfileError> {
        if !initial_pose.is_finite() {
            return Err(ProfileError::NonFiniteInitialPose);
        }
        if segments.is_empty() {
            return Err(ProfileError::Empty);
        }
        for (index, segment) in segments.iter().enumerate() {
            if !(segment.duration > T::zero()) || !segment.duration.is_finite() {
                return Err(ProfileError::InvalidDuration { index });
            }
            if !segment.v.is_finite() || !segment.omega.is_finite() {
                return Err(ProfileError::NonFiniteCommand { index });
            }
        }
        Ok(ReferenceProfile {
            initial_pose,
            segments,
        })
    }

    /// Straight line from the origin at `v` m/s for `duration` seconds.
    pub fn line(v: T, duration: T) -> Self {
        ReferenceProfile::new(Pose::origin(), vec![Segment::new(v, T::zero(), duration)])
            .expect("line profile is valid")
    }

    /// One full circle starting at the origin: constant `(v, omega)` for one
    /// revolution. `omega` must be nonzero.
    pub fn circle(v: T, omega: T) -> Self {
        let duration = T::TAU() / omega.abs();
        ReferenceProfile::new(Pose::origin(), vec![Segment::new(v, omega, duration)])
            .expect("circle profile is valid")
    }

    /// Two opposite arcs of `half_duration` seconds each.
    pub fn s_curve(v: T, omega: T, half_duration: T) -> Self {
        ReferenceProfile::new(
            Pose::origin(),
            vec![
                Segment::new(v, omega, half_duration),
                Segment::new(v, -omega, half_duration),
            ],
        )
        .expect("s-curve profile is valid")
    }

    /// Replaces the starting pose.
    pub fn with_initial_pose(mut self, pose: Pose<T>) -> Self {
        self.initial_pose = pose;
        self
    }

    pub fn initial_pose(&self) -> Pose<T> {
        self.initial_pose
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn total_duration(&self) -> T {
        self.segments
            .iter()
            .fold(T::zero(), |acc, s| acc + s.duration)
    }

    /// Reference state at time `t` (negative times clamp to 0).
    ///
    /// Inside a segment the pose is propagated in closed form; past the end
    /// of the last segment the final pose is held with `v = omega = 0`.
    pub fn reference_at(&self, t: T) -> ReferenceState<T> {
        let t = t.max(T::zero());
        let mut pose = self.initial_pose;
        let mut start = T::zero();
        for segment in &self.segments {
            let end = start + segment.duration;
            if t < end {
                return ReferenceState {
                    pose: advance_constant(pose, segment.v, segment.omega, t - start),
                    v: segment.v,
                    omega: segment.omega,
                };
            }
            pose = advance_constant(pose, segment.v, segment.omega, segment.duration);
            start = end;
        }
        ReferenceState {
            pose,
            v: T::zero(),
            omega: T::zero(),
        }
    }
}

/// Exact constant-command propagation: straight line when `omega == 0`,
/// otherwise an arc of radius `v / omega`.
fn advance_constant<T: Real>(pose: Pose<T>, v: T, omega: T, tau: T) -> Pose<T> {
    if omega == T::zero() {
        let (sin_t, cos_t) = pose.theta.sin_cos();
        Pose::new(pose.x - v * tau * sin_t, pose.y + v * tau * cos_t, pose.theta)
    } else {
        let heading = pose.theta + omega * tau;
        let radius = v / omega;
        Pose::new(
            pose.x + radius * (heading.cos() - pose.theta.cos()),
            pose.y + radius * (heading.sin() - pose.theta.sin()),
            wrap_angle(heading),
        )
    }
}
