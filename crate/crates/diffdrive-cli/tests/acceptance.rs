//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `--nocapture` to see them). Criteria cover the gain designs,
//! the stability test, the demo regulation scenario, ramp efficacy, the
//! custom arctangent, kinematics fidelity, tracking convergence, and
//! byte-exact trace determinism.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use diffdrive::kinematics::{integrate_pose, wrap_angle, BodyTwist, Pose, RobotGeometry, WheelSpeeds};
use diffdrive::linalg::{characteristic_roots, Complex};
use diffdrive::regulator::{atan2_custom, linearized_matrix, stability_check, GoalSpec, RegulatorGains};
use diffdrive::sim::{run_regulation, run_tracking, RunOutcome, ScenarioConfig, ScenarioMode, TrackingGainSource};
use diffdrive::tracking::{closed_loop_matrix, design_gains, tracking_error, DesignSpec};
use diffdrive::trajectory::ReferenceProfile;

/// Max root mismatch under the best pairing (conjugate ordering can differ
/// between two root sets whose real parts tie within rounding).
fn max_root_mismatch(a: &[Complex<f64>; 3], b: &[Complex<f64>; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    PERMS
        .iter()
        .map(|perm| {
            (0..3)
                .map(|i| (a[i] - b[perm[i]]).norm())
                .fold(0.0f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// The demo regulation scenario: from the origin facing +y to (1, 1),
/// arriving a quarter turn to the left (facing -x, i.e. theta = pi/2 in the
/// crate's +y-forward heading convention). Stock gains (0.4, 2, -1) with
/// time ramps (0.1, 0.1, 0.3), 30 ms loop, clamped power, odometry
/// feedback.
fn demo_scenario() -> ScenarioConfig<f64> {
    let mut config = ScenarioConfig::regulation(GoalSpec::new(Pose::new(1.0, 1.0, PI / 2.0)));
    config.initial_pose = Pose::origin();
    config
}

#[test]
fn criterion_1_tracking_spectral_design() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xD1FF_D817);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let xi = rng.random_range(0.3..2.0);
        let omega_ref = rng.random_range(-1.0..1.0f64);
        let omega_n = rng.random_range((omega_ref.abs() + 0.1)..5.0);
        let magnitude = rng.random_range(0.05..1.0);
        let v_ref = if rng.random_bool(0.5) { magnitude } else { -magnitude };

        let spec = DesignSpec::new(xi, omega_n).unwrap();
        let design = design_gains(&spec, v_ref, omega_ref, 1e-3).unwrap();
        let actual = characteristic_roots(&closed_loop_matrix(design.gains, v_ref, omega_ref));

        // Roots of (s + 2 xi wn)(s^2 + 2 xi wn s + wn^2) straight from the
        // quadratic formula.
        let real = Complex::new(-2.0 * xi * omega_n, 0.0);
        let target = if xi < 1.0 {
            let im = omega_n * (1.0 - xi * xi).sqrt();
            [real, Complex::new(-xi * omega_n, im), Complex::new(-xi * omega_n, -im)]
        } else {
            let spread = omega_n * (xi * xi - 1.0).sqrt();
            [
                real,
                Complex::new(-xi * omega_n + spread, 0.0),
                Complex::new(-xi * omega_n - spread, 0.0),
            ]
        };
        let mismatch = max_root_mismatch(&actual, &target);
        worst = worst.max(mismatch);
        assert!(
            mismatch <= 1e-9,
            "mismatch {mismatch} at xi={xi} wn={omega_n} v={v_ref} w={omega_ref}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 1 tracking spectral design: PASS \
         (1000 draws, worst |droot| = {worst:.3e}, {elapsed:?})"
    );
}

#[test]
fn criterion_2_regulator_stability_equivalence() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x0057_AB1E);
    let mut checked = 0usize;
    while checked < 10_000 {
        let gains = RegulatorGains::new(
            rng.random_range(-3.0..3.0f64),
            rng.random_range(-3.0..3.0f64),
            rng.random_range(-3.0..3.0f64),
        );
        let margin = gains
            .distance
            .abs()
            .min(gains.goal_heading.abs())
            .min((gains.bearing - gains.distance).abs());
        if margin < 1e-6 {
            continue;
        }
        checked += 1;
        let inequality_verdict = stability_check(gains).is_stable();
        let pole_verdict = characteristic_roots(&linearized_matrix(gains))
            .iter()
            .all(|root| root.re < 0.0);
        assert_eq!(inequality_verdict, pole_verdict, "disagree at {gains:?}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 2 regulator stability equivalence: PASS \
         (10000 gain triples, 100% agreement, {elapsed:?})"
    );
}

#[test]
fn criterion_3_demo_scenario_convergence() {
    let start = Instant::now();
    let trace = run_regulation(&demo_scenario()).unwrap();
    let elapsed = start.elapsed();

    assert_eq!(trace.summary.outcome, RunOutcome::Converged, "{:?}", trace.summary);
    assert!(trace.summary.sim_time <= 60.0);
    let final_pose = trace.summary.final_pose_true;
    let distance = (final_pose.x - 1.0).hypot(final_pose.y - 1.0);
    let heading_error = wrap_angle(final_pose.theta - PI / 2.0).abs();
    assert!(distance < 0.02, "final distance {distance}");
    assert!(heading_error < 0.05, "final heading error {heading_error}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 3 demo scenario convergence: PASS \
         (converged at {:.2} s, final r = {distance:.4} m, heading error = {heading_error:.4} rad, {elapsed:?})",
        trace.summary.sim_time
    );
}

#[test]
fn criterion_4_ramp_efficacy_against_saturation() {
    let start = Instant::now();
    let ramped = run_regulation(&demo_scenario()).unwrap();
    let mut unramped_config = demo_scenario();
    if let ScenarioMode::Regulation(setup) = &mut unramped_config.mode {
        setup.ramp_enabled = false;
    }
    let unramped = run_regulation(&unramped_config).unwrap();

    let first_second_peak = |trace: &diffdrive::SimTrace64| {
        trace
            .records
            .iter()
            .filter(|record| record.t < 1.0)
            .map(|record| record.raw_power_left.abs().max(record.raw_power_right.abs()))
            .fold(0.0f64, f64::max)
    };
    let peak_unramped = first_second_peak(&unramped);
    let peak_ramped = first_second_peak(&ramped);
    assert!(peak_unramped > 100.0, "unramped peak {peak_unramped}");
    assert!(
        peak_ramped < peak_unramped,
        "ramped {peak_ramped} vs unramped {peak_unramped}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 4 ramp efficacy: PASS \
         (first-second unclamped peak {peak_unramped:.1} unramped vs {peak_ramped:.1} ramped, {elapsed:?})"
    );
}

#[test]
fn criterion_5_custom_arctangent_oracle() {
    let start = Instant::now();
    assert_eq!(atan2_custom(0.0, 0.0), 0.0, "(0,0) must map to exactly 0");

    let mut worst = 0.0f64;
    let mut check = |y: f64, x: f64| {
        let difference = wrap_angle(atan2_custom(y, x) - y.atan2(x)).abs();
        worst = worst.max(difference);
        assert!(difference <= 1e-12, "mismatch {difference} at ({y}, {x})");
    };
    for (y, x) in [
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 0.0),
        (-1.0, 0.0),
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
    ] {
        check(y, x);
    }
    let mut rng = StdRng::seed_from_u64(0xA7A2);
    let mut samples = 0usize;
    while samples < 100_000 {
        let y = rng.random_range(-10.0..10.0f64);
        let x = rng.random_range(-10.0..10.0f64);
        if y == 0.0 && x == 0.0 {
            continue;
        }
        samples += 1;
        check(y, x);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 5 arctangent oracle: PASS \
         (100008 points, max error {worst:.3e}, {elapsed:?})"
    );
}

#[test]
fn criterion_6_kinematics_fidelity() {
    let start = Instant::now();

    // RK4 vs the hand-derived constant-twist arc over 10 s at 1 ms steps.
    let pose = Pose::new(0.3f64, -0.2, 0.9);
    let (v, omega, t) = (0.2, 0.5, 10.0);
    let rk4 = integrate_pose(pose, BodyTwist::new(v, omega), t, 10_000);
    let heading = pose.theta + omega * t;
    let exact = Pose::new(
        pose.x + v / omega * (heading.cos() - pose.theta.cos()),
        pose.y + v / omega * (heading.sin() - pose.theta.sin()),
        heading,
    );
    let position_error = rk4.distance_to(&exact);
    assert!(position_error <= 1e-6, "position error {position_error}");

    // Wheel <-> twist round trip.
    let geometry = RobotGeometry::<f64>::nxt();
    let mut rng = StdRng::seed_from_u64(0x0143);
    let mut worst_round_trip = 0.0f64;
    for _ in 0..10_000 {
        let wheels = WheelSpeeds::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let back = geometry.twist_to_wheels(geometry.wheels_to_twist(wheels));
        worst_round_trip = worst_round_trip
            .max((back.omega_l - wheels.omega_l).abs())
            .max((back.omega_r - wheels.omega_r).abs());
    }
    assert!(worst_round_trip <= 1e-12, "round trip {worst_round_trip}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 6 kinematics fidelity: PASS \
         (RK4 vs arc {position_error:.3e} m, round trip {worst_round_trip:.3e}, {elapsed:?})"
    );
}

#[test]
fn criterion_7_tracking_convergence() {
    let start = Instant::now();
    let mut ratios = Vec::new();
    for (use_odometry, bound) in [(false, 0.01), (true, 0.05)] {
        let profile = ReferenceProfile::circle(0.2, 0.5);
        let mut config = ScenarioConfig::tracking(
            profile,
            TrackingGainSource::Design(DesignSpec::new(1.0f64, 1.0).unwrap()),
        );
        config.initial_pose = Pose::new(0.1, 0.0, 0.0);
        config.max_time = 10.0;
        config.use_odometry = use_odometry;
        let trace = run_tracking(&config).unwrap();

        let initial = trace.records[0].error.norm();
        assert!((initial - 0.1).abs() < 1e-9, "initial error norm {initial}");
        let final_error = match &config.mode {
            ScenarioMode::Tracking(setup) => tracking_error(
                trace.summary.final_pose_true,
                setup.profile.reference_at(trace.summary.sim_time),
            )
            .norm(),
            ScenarioMode::Regulation(_) => unreachable!(),
        };
        let ratio = final_error / initial;
        assert!(
            ratio <= bound,
            "error ratio {ratio} exceeds {bound} (odometry = {use_odometry})"
        );
        ratios.push(ratio);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 7 tracking convergence: PASS \
         (error ratio {:.2e} truth feedback, {:.2e} odometry, {elapsed:?})",
        ratios[0], ratios[1]
    );
}

#[test]
fn criterion_8_byte_identical_csv_traces() {
    let bin = env!("CARGO_BIN_EXE_diffdrive");
    let scenario = std::env::temp_dir().join(format!(
        "diffdrive-acceptance-{}-demo.toml",
        std::process::id()
    ));
    std::fs::write(
        &scenario,
        r#"
max_time = 60.0

[regulation]
goal = { x = 1.0, y = 1.0, theta = 1.5707963267948966 }
"#,
    )
    .unwrap();
    let out_a = scenario.with_extension("a.csv");
    let out_b = scenario.with_extension("b.csv");
    for out in [&out_a, &out_b] {
        let status = Command::new(bin)
            .args(["simulate-regulate", "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let bytes_a = std::fs::read(&out_a).unwrap();
    let bytes_b = std::fs::read(&out_b).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b, "two invocations must serialize identically");
    std::fs::remove_file(&scenario).ok();
    std::fs::remove_file(&out_a).ok();
    std::fs::remove_file(&out_b).ok();
    println!(
        "[acceptance] criterion 8 determinism: PASS \
         (two binary invocations, {} identical bytes)",
        bytes_a.len()
    );
}
