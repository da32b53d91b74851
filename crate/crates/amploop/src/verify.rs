//! Bound-verification suites: grid checks of the back-action offset,
//! windowed growth bounds of the deterministic trajectory, the active
//! proportion bound, and angle-model/state-vector equivalence spot checks.
//!
//! Each check returns a typed report with its worst-case margin and, on
//! failure, a concrete witness, so violations are reproducible.

use crate::error::Result;
use crate::geometry::{
    self, angle_trajectory, recurrence_step, theta_maximizer, theta_offset, Angle, ProblemParams,
};
use crate::runners::trial_rng;
use crate::statevector::{JointState, MarkedOracle, Preparation, ProbeOutcome};
use crate::stats::{segment_active_latent, SegmentReport};
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Grid resolution of the offset-bound sweep.
pub const THETA_GRID_STEP: f64 = 1e-3;
/// Slack absorbing rounding at the tight point of the offset bound.
pub const THETA_TOLERANCE: f64 = 1e-12;
/// Slack for the windowed trajectory bounds (cumulative rounding over 10⁴
/// steps stays orders of magnitude below this).
pub const TRAJECTORY_TOLERANCE: f64 = 1e-9;
/// Maximum angle discrepancy tolerated between the two backends.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

/// A concrete bound violation: the offending angle and values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub angle: f64,
    pub value: f64,
    pub bound: f64,
}

/// Result of sweeping the quadrant-wise offset bounds over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaBoundReport {
    pub rho: f64,
    pub kappa: f64,
    pub grid_step: f64,
    pub points: u64,
    /// Largest amount by which any grid point exceeded its allowed
    /// interval; negative when every point has slack.
    pub worst_excess: f64,
    pub worst_angle: f64,
    pub witness: Option<Witness>,
}

impl ThetaBoundReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Sweeps `θ` over `[0, 2π)` and checks the quadrant-wise bounds:
/// `0 ≤ θ ≤ α` where the angle is within the first or third quadrant,
/// `−α ≤ θ ≤ 0` in the second or fourth. The analytic maximizer (and its
/// reflections) are appended to the grid so near-threshold violations
/// cannot slip between grid points.
pub fn check_theta_bounds(params: &ProblemParams, grid_step: f64) -> ThetaBoundReport {
    let a0 = params.alpha();
    let a_star = theta_maximizer(params);
    let extra = [a_star, PI - a_star, PI + a_star, TAU - a_star];

    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_angle = 0.0;
    let mut witness = None;
    let mut points = 0u64;

    let mut consider = |a: f64| {
        let th = theta_offset(a, params);
        let m = a.rem_euclid(PI);
        // first/third quadrants expect θ ∈ [0, α]; second/fourth the mirror
        let excess = if m <= FRAC_PI_2 {
            (th - a0).max(-th)
        } else {
            th.max(-th - a0)
        };
        if excess > worst_excess {
            worst_excess = excess;
            worst_angle = a;
        }
        if excess > THETA_TOLERANCE && witness.is_none() {
            witness = Some(Witness {
                angle: a,
                value: th,
                bound: a0,
            });
        }
    };

    let steps = (TAU / grid_step).ceil() as u64;
    for i in 0..steps {
        let a = i as f64 * grid_step;
        if a >= TAU {
            break;
        }
        consider(a);
        points += 1;
    }
    for &a in &extra {
        consider(a);
        points += 1;
    }

    ThetaBoundReport {
        rho: params.rho(),
        kappa: params.kappa(),
        grid_step,
        points,
        worst_excess,
        worst_angle,
        witness,
    }
}

/// Result of sampling windowed growth bounds on the all-⊥ trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBoundReport {
    pub rho: f64,
    pub kappa: f64,
    pub steps: usize,
    pub pairs: usize,
    /// Worst violation of `a_k + ℓα ≤ a_{k+ℓ}` (negative = slack).
    pub worst_lower_excess: f64,
    /// Worst violation of `a_{k+ℓ} ≤ a_k + 3ℓα` (negative = slack).
    pub worst_upper_excess: f64,
    pub witness: Option<(usize, usize)>,
}

impl TrajectoryBoundReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks `a_k + ℓα ≤ a_{k+ℓ} ≤ a_k + 3ℓα` on `pairs` random windows of a
/// `steps`-long deterministic trajectory.
pub fn check_trajectory_bounds(
    params: &ProblemParams,
    steps: usize,
    pairs: usize,
    seed: u64,
) -> TrajectoryBoundReport {
    let traj = angle_trajectory(params, steps);
    let a0 = params.alpha();
    let mut rng = trial_rng(seed, 0);

    let mut worst_lower = f64::NEG_INFINITY;
    let mut worst_upper = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..pairs {
        let k = rng.random_range(0..steps);
        let l = rng.random_range(1..=(steps - k).max(1));
        let lhs = traj[k] + l as f64 * a0;
        let rhs = traj[k] + 3.0 * l as f64 * a0;
        let mid = traj[k + l];
        let lower_excess = lhs - mid;
        let upper_excess = mid - rhs;
        worst_lower = worst_lower.max(lower_excess);
        worst_upper = worst_upper.max(upper_excess);
        if (lower_excess > TRAJECTORY_TOLERANCE || upper_excess > TRAJECTORY_TOLERANCE)
            && witness.is_none()
        {
            witness = Some((k, l));
        }
    }

    TrajectoryBoundReport {
        rho: params.rho(),
        kappa: params.kappa(),
        steps,
        pairs,
        worst_lower_excess: worst_lower,
        worst_upper_excess: worst_upper,
        witness,
    }
}

/// Active-proportion measurement against the worst-case lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    pub rho: f64,
    pub kappa: f64,
    pub window_iterations: u64,
    pub gamma: f64,
    pub lower_bound: f64,
}

impl GammaReport {
    pub fn passed(&self) -> bool {
        self.gamma > self.lower_bound
    }
}

/// Measures the active proportion over a window long enough to cover ~15
/// full angle periods and compares it with `1/4 − 3α/(2π)`.
pub fn check_gamma(params: &ProblemParams) -> Result<GammaReport> {
    let window = gamma_window(params);
    let report = segment_active_latent(params, 1, window)?;
    Ok(GammaReport {
        rho: params.rho(),
        kappa: params.kappa(),
        window_iterations: window,
        gamma: report.gamma,
        lower_bound: SegmentReport::gamma_lower_bound(params),
    })
}

/// Window covering roughly fifteen active/latent cycles.
pub fn gamma_window(params: &ProblemParams) -> u64 {
    ((15.0 * PI / params.alpha()).ceil() as u64).max(100)
}

/// Lockstep comparison of the two backends on a shared uniform stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub n: usize,
    pub trials: u64,
    /// Largest angle gap observed before termination.
    pub worst_angle_gap: f64,
    /// Trials where the backends disagreed on the termination iteration.
    pub iteration_mismatches: u64,
    pub iterations_checked: u64,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.iteration_mismatches == 0 && self.worst_angle_gap <= EQUIVALENCE_TOLERANCE
    }
}

/// Drives the while loop on both backends with the identical uniform
/// stream (`κ = √ρ`, one marked element, uniform preparation) and compares
/// termination iterations and per-step angles.
pub fn check_backend_equivalence(n: usize, trials: u64, seed: u64) -> Result<EquivalenceReport> {
    let params = ProblemParams::with_auto_kappa(1.0 / n as f64)?;
    let oracle = MarkedOracle::new(n, &[0])?;
    let prep = Preparation::uniform(n)?;

    let mut worst_gap = 0.0f64;
    let mut mismatches = 0u64;
    let mut iterations_checked = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut state = JointState::prepare(&oracle, &prep)?;
        let mut angle = Angle::new(params.alpha());
        loop {
            let u: f64 = rng.random();
            state.apply_grover_iteration(&oracle, &prep);
            state.apply_weak_entangler(&oracle, params.kappa());
            let sv_terminated = state.measure_probe(u) == ProbeOutcome::Top;
            let step = recurrence_step(angle, &params, u);
            angle = step.angle;
            iterations_checked += 1;
            if sv_terminated != step.terminated {
                mismatches += 1;
                break;
            }
            if sv_terminated {
                let (_, marked) = state.measure_computational(&oracle, rng.random());
                debug_assert!(marked);
                break;
            }
            let extracted = state.extract_angle(&oracle, &prep)?.radians();
            let gap = angle_gap(extracted, angle.radians());
            worst_gap = worst_gap.max(gap);
        }
    }

    Ok(EquivalenceReport {
        n,
        trials,
        worst_angle_gap: worst_gap,
        iteration_mismatches: mismatches,
        iterations_checked,
    })
}

/// Long forced-⊥ lockstep run comparing extracted and model angles each
/// step; returns the worst gap.
pub fn forced_bot_angle_gap(n: usize, steps: usize) -> Result<f64> {
    let params = ProblemParams::with_auto_kappa(1.0 / n as f64)?;
    let oracle = MarkedOracle::new(n, &[0])?;
    let prep = Preparation::uniform(n)?;
    let mut state = JointState::prepare(&oracle, &prep)?;
    let mut angle = Angle::new(params.alpha());
    let mut worst = 0.0f64;
    for _ in 0..steps {
        state.apply_grover_iteration(&oracle, &prep);
        state.apply_weak_entangler(&oracle, params.kappa());
        state.measure_probe(1.0 - 1e-15);
        let step = recurrence_step(angle, &params, 1.0 - 1e-15);
        angle = step.angle;
        let extracted = state.extract_angle(&oracle, &prep)?.radians();
        worst = worst.max(angle_gap(extracted, angle.radians()));
    }
    Ok(worst)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Sharpness probe: scales `κ` just past the efficient-regime bound and
/// reports the (expected) violation near the offset maximizer.
pub fn check_bound_sharpness(rho: f64, scale: f64, grid_step: f64) -> Result<ThetaBoundReport> {
    let kappa = geometry::kappa_upper_bound(rho)? * scale;
    let params = ProblemParams::new(rho, kappa)?;
    Ok(check_theta_bounds(&params, grid_step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_bounds_pass_at_the_edge() {
        for rho in [1e-2, 1e-4, 1e-6] {
            let kappa = geometry::kappa_upper_bound(rho).unwrap();
            let params = ProblemParams::new(rho, kappa).unwrap();
            let report = check_theta_bounds(&params, THETA_GRID_STEP);
            assert!(report.passed(), "rho = {rho}: {report:?}");
        }
    }

    #[test]
    fn theta_bounds_fail_past_the_edge() {
        let report = check_bound_sharpness(1e-4, 1.001, THETA_GRID_STEP).unwrap();
        assert!(!report.passed());
        let w = report.witness.unwrap();
        // the violation shows up near the analytic maximizer
        let params = ProblemParams::new(report.rho, report.kappa).unwrap();
        assert!((w.angle.rem_euclid(PI) - theta_maximizer(&params)).abs() < 0.2);
    }

    #[test]
    fn trajectory_bounds_hold() {
        let params = ProblemParams::with_auto_kappa(1e-4).unwrap();
        let report = check_trajectory_bounds(&params, 10_000, 1_000, 7);
        assert!(report.passed(), "{report:?}");
        assert!(report.worst_lower_excess <= 0.0);
    }

    #[test]
    fn gamma_above_worst_case_bound() {
        let params = ProblemParams::with_auto_kappa(1e-4).unwrap();
        let report = check_gamma(&params).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.gamma > 0.4 && report.gamma < 0.6);
    }

    #[test]
    fn backends_agree_on_small_oracle() {
        let report = check_backend_equivalence(16, 25, 3).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn forced_bot_lockstep_stays_within_budget_for_ten_thousand_steps() {
        let gap = forced_bot_angle_gap(256, 10_000).unwrap();
        assert!(gap < EQUIVALENCE_TOLERANCE, "worst gap {gap:.3e}");
    }
}
