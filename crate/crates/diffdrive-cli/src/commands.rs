//! Analysis subcommand implementations, returning the text they print.

use diffdrive::linalg::{characteristic_roots, Complex, Cubic};
use diffdrive::regulator::{linearized_matrix, stability_check, RegulatorGains, StabilityVerdict};
use diffdrive::tracking::{closed_loop_matrix, design_gains, DesignSpec};

use crate::CliError;

// Nine decimals keeps the output readable where the solver's last few bits
// of noise would otherwise show through.
fn format_root(root: Complex<f64>) -> String {
    if root.im == 0.0 {
        format!("{:.9}", root.re)
    } else if root.im > 0.0 {
        format!("{:.9}+{:.9}i", root.re, root.im)
    } else {
        format!("{:.9}-{:.9}i", root.re, -root.im)
    }
}

fn format_roots(roots: &[Complex<f64>; 3]) -> String {
    roots.iter().map(|r| format_root(*r)).collect::<Vec<_>>().join(", ")
}

/// `design-gains`: gains from (damping, natural frequency) plus the
/// closed-loop poles they place.
pub fn design_gains_report(
    damping: f64,
    natural_frequency: f64,
    v_ref: f64,
    omega_ref: f64,
    speed_floor: f64,
) -> Result<String, CliError> {
    let spec = DesignSpec::new(damping, natural_frequency)?;
    let design = design_gains(&spec, v_ref, omega_ref, speed_floor)?;
    let roots = characteristic_roots(&closed_loop_matrix(design.gains, v_ref, omega_ref));
    let mut text = format!(
        "k1 (along)   = {}\nk2 (lateral) = {}\nk3 (heading) = {}\nclosed-loop roots: {}\n",
        design.gains.along,
        design.gains.lateral,
        design.gains.heading,
        format_roots(&roots),
    );
    if design.lateral_gain_nonpositive {
        text.push_str(
            "note: natural_frequency <= |omega_ref| makes the lateral gain nonpositive; \
             the loop leaves the intended damped design\n",
        );
    }
    Ok(text)
}

/// `check-stability`: verdict on the three regulator inequalities plus the
/// poles of the linearized loop.
pub fn check_stability_report(k_distance: f64, k_bearing: f64, k_goal_heading: f64) -> (String, bool) {
    let gains = RegulatorGains::new(k_distance, k_bearing, k_goal_heading);
    let verdict = stability_check(gains);
    let roots = characteristic_roots(&linearized_matrix(gains));
    let mut text = String::new();
    match &verdict {
        StabilityVerdict::Stable => text.push_str("stable\n"),
        StabilityVerdict::Unstable(violations) => {
            text.push_str("unstable\n");
            for violation in violations {
                text.push_str(&format!("  {violation}\n"));
            }
        }
    }
    text.push_str(&format!("characteristic roots: {}\n", format_roots(&roots)));
    (text, verdict.is_stable())
}

/// `roots`: the three roots of a monic cubic `s^3 + c2 s^2 + c1 s + c0`.
pub fn cubic_roots_report(c2: f64, c1: f64, c0: f64) -> String {
    let roots = Cubic { c2, c1, c0 }.roots();
    format!("roots: {}\n", format_roots(&roots))
}
