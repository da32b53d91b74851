//! Active/latent segmentation of the deterministic angle trajectory.
//!
//! Iteration `m` is *active* when its angle lies within `π/4` of `π/2`
//! modulo `π` (there the termination probability is at least `κ/2`) and
//! *latent* otherwise. In the efficient regime the angle advances by
//! `[α, 3α]` per iteration, so runs of the two kinds alternate with bounded
//! lengths: every latent run is shorter than `π/(2α) + 1` and every
//! complete active run is longer than `π/(6α) − 1`.

use crate::error::{Error, Result};
use crate::geometry::{angle_trajectory, is_active, ProblemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationKind {
    Active,
    Latent,
}

/// One maximal run of equal-kind iterations inside the window. `clipped`
/// marks runs cut short by a window edge, whose true length extends past
/// the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRun {
    pub kind: IterationKind,
    pub len: u64,
    pub clipped: bool,
}

/// Segmentation of a window of iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    /// Alternating runs, in window order.
    pub runs: Vec<SegmentRun>,
    /// Fraction of active iterations in the window.
    pub gamma: f64,
    /// Longest latent run observed (clipped runs only undercount).
    pub l_max: Option<u64>,
    /// Shortest *complete* active run; clipped runs are excluded because
    /// their visible length says nothing about the lower bound.
    pub ell_min: Option<u64>,
}

/// Classifies iterations `window_start..=window_end` of the all-⊥
/// deterministic trajectory (iterations are numbered from 1; entry 0 of the
/// trajectory is the initial state).
///
/// Requires the weak-measurement strength to sit in the efficient regime,
/// otherwise the angle is not guaranteed to advance and the alternation
/// structure breaks down.
pub fn segment_active_latent(
    params: &ProblemParams,
    window_start: u64,
    window_end: u64,
) -> Result<SegmentReport> {
    if !params.efficient_regime() {
        return Err(Error::OutsideEfficientRegime {
            kappa: params.kappa(),
            bound: params.kappa_bound(),
        });
    }
    if window_start == 0 || window_end < window_start {
        return Err(Error::InconsistentConfig(format!(
            "invalid iteration window {window_start}..={window_end}"
        )));
    }
    // one step beyond each edge to decide whether the boundary runs are
    // clipped
    let traj = angle_trajectory(params, window_end as usize + 1);
    let flag = |n: u64| is_active(traj[n as usize]);

    let mut runs: Vec<SegmentRun> = Vec::new();
    let mut current = flag(window_start);
    let mut len = 1u64;
    for n in (window_start + 1)..=window_end {
        let f = flag(n);
        if f == current {
            len += 1;
        } else {
            runs.push(SegmentRun {
                kind: kind_of(current),
                len,
                clipped: false,
            });
            current = f;
            len = 1;
        }
    }
    runs.push(SegmentRun {
        kind: kind_of(current),
        len,
        clipped: false,
    });

    // boundary runs are clipped when the same kind continues outside the
    // window; a run starting at iteration 1 genuinely starts there
    if window_start > 1 && flag(window_start - 1) == (runs[0].kind == IterationKind::Active) {
        runs[0].clipped = true;
    }
    let last = runs.len() - 1;
    if flag(window_end + 1) == (runs[last].kind == IterationKind::Active) {
        runs[last].clipped = true;
    }

    let total: u64 = runs.iter().map(|r| r.len).sum();
    let active: u64 = runs
        .iter()
        .filter(|r| r.kind == IterationKind::Active)
        .map(|r| r.len)
        .sum();
    let l_max = runs
        .iter()
        .filter(|r| r.kind == IterationKind::Latent)
        .map(|r| r.len)
        .max();
    let ell_min = runs
        .iter()
        .filter(|r| r.kind == IterationKind::Active && !r.clipped)
        .map(|r| r.len)
        .min();

    Ok(SegmentReport {
        runs,
        gamma: active as f64 / total as f64,
        l_max,
        ell_min,
    })
}

fn kind_of(active: bool) -> IterationKind {
    if active {
        IterationKind::Active
    } else {
        IterationKind::Latent
    }
}

impl SegmentReport {
    /// Upper bound satisfied by every latent run length: `π/(2α) + 1`.
    pub fn latent_run_bound(params: &ProblemParams) -> f64 {
        std::f64::consts::PI / (2.0 * params.alpha()) + 1.0
    }

    /// Lower bound exceeded by every complete active run length:
    /// `π/(6α) − 1`.
    pub fn active_run_bound(params: &ProblemParams) -> f64 {
        std::f64::consts::PI / (6.0 * params.alpha()) - 1.0
    }

    /// Worst-case lower bound on the active proportion: `1/4 − 3α/(2π)`.
    pub fn gamma_lower_bound(params: &ProblemParams) -> f64 {
        0.25 - 3.0 * params.alpha() / std::f64::consts::TAU
    }
}
