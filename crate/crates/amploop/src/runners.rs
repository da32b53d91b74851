//! End-to-end executions of the three loop flavours.
//!
//! * [`run_weak`] — the measurement-controlled while loop: Grover iteration,
//!   probe entangler, probe measurement, repeated until the probe reports
//!   detection. Detection leaves the state exactly on the marked component,
//!   so termination implies success.
//! * [`run_test_restart`] — the classical baseline: rotate for a
//!   geometrically distributed number of iterations, measure projectively,
//!   restart from scratch on failure.
//! * [`run_standard`] — fixed-count amplitude amplification:
//!   `⌊π/4α⌋` iterations per attempt, measure, restart on failure.
//!
//! Every runner executes on either the scalar angle model or the dense
//! state-vector backend, with exact iteration and oracle-call accounting.
//! Each trial owns a ChaCha stream keyed by `(seed, trial index)`, so
//! results are independent of scheduling and thread count.

use crate::error::{Error, Result};
use crate::geometry::{recurrence_step, Angle, ProblemParams};
use crate::statevector::{JointState, MarkedOracle, Preparation, ProbeOutcome};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Iteration safety cap for the angle backend.
pub const DEFAULT_ANGLE_CAP: u64 = 1_000_000_000;
/// Iteration safety cap for the state-vector backend.
pub const DEFAULT_STATEVECTOR_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Weak,
    TestRestart,
    Standard,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Weak => write!(f, "weak"),
            Algorithm::TestRestart => write!(f, "test_restart"),
            Algorithm::Standard => write!(f, "standard"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Angle,
    Statevector,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Angle => write!(f, "angle"),
            Backend::Statevector => write!(f, "statevector"),
        }
    }
}

/// Which simulation backend executes the trial, plus the search-space
/// description when the dense backend is selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Angle,
    Statevector { n: usize, marked: Vec<usize> },
}

impl BackendSpec {
    pub fn tag(&self) -> Backend {
        match self {
            BackendSpec::Angle => Backend::Angle,
            BackendSpec::Statevector { .. } => Backend::Statevector,
        }
    }
}

/// Knobs for the test-restart baseline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestartOptions {
    /// Replay the inner loop draw-by-draw (one uniform per rotation) instead
    /// of sampling the geometric length directly. Distributionally
    /// identical; the direct sample is the default because it is O(1) per
    /// attempt.
    #[serde(default)]
    pub per_step_replay: bool,
    /// Skip the projective measurement of the initial state, which succeeds
    /// with probability ρ and records a zero-iteration trial.
    #[serde(default)]
    pub skip_initial_measurement: bool,
}

/// Everything needed to reproduce a run: parameters, backend, safety cap
/// and RNG seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub backend: BackendSpec,
    pub max_iterations: u64,
    pub seed: u64,
    pub restart: RestartOptions,
}

impl RunConfig {
    /// Angle-model configuration with the default cap.
    pub fn angle(params: ProblemParams, seed: u64) -> Self {
        Self {
            params,
            backend: BackendSpec::Angle,
            max_iterations: DEFAULT_ANGLE_CAP,
            seed,
            restart: RestartOptions::default(),
        }
    }

    /// State-vector configuration with the default cap. `params.rho()` must
    /// equal `|marked| / n` for a uniform preparation; see [`Self::validate`].
    pub fn statevector(params: ProblemParams, seed: u64, n: usize, marked: Vec<usize>) -> Self {
        Self {
            params,
            backend: BackendSpec::Statevector { n, marked },
            max_iterations: DEFAULT_STATEVECTOR_CAP,
            seed,
            restart: RestartOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InconsistentConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if let BackendSpec::Statevector { n, marked } = &self.backend {
            let oracle = MarkedOracle::new(*n, marked)?;
            let implied = oracle.implied_rho();
            if (implied - self.params.rho()).abs() > 1e-12 {
                return Err(Error::InconsistentConfig(format!(
                    "oracle implies rho = {implied} but params declare rho = {}",
                    self.params.rho()
                )));
            }
        }
        Ok(())
    }
}

/// Per-run outcome with exact accounting.
///
/// `iterations` counts loop bodies for the weak loop and total Grover
/// applications for the baselines. `oracle_calls` counts phase-oracle and
/// entangler applications only; classical membership checks on measured
/// elements are tallied separately in `classical_checks`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub iterations: u64,
    pub oracle_calls: u64,
    pub classical_checks: u64,
    pub success: bool,
    pub algorithm: Algorithm,
    pub backend: Backend,
    pub restarts: u64,
}

/// RNG stream for one trial: all trials share the seed, each gets its own
/// ChaCha stream, so any subset of trials can run in any order on any
/// number of threads and still produce identical records.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn cap_error(cfg: &RunConfig, record: TrialRecord) -> Error {
    Error::IterationCapExceeded {
        cap: cfg.max_iterations,
        record: Box::new(record),
    }
}

/// Geometric sample on {1, 2, …} with success parameter `p`, by inverse
/// transform of a single uniform draw.
fn sample_geometric(rng: &mut ChaCha8Rng, p: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = rng.random();
    let k = ((1.0 - u).ln() / (1.0 - p).ln()).ceil();
    (k as u64).max(1)
}

fn build_statevector(cfg: &RunConfig) -> Result<Option<(MarkedOracle, Preparation)>> {
    match &cfg.backend {
        BackendSpec::Angle => Ok(None),
        BackendSpec::Statevector { n, marked } => {
            let oracle = MarkedOracle::new(*n, marked)?;
            let prep = Preparation::uniform(*n)?;
            Ok(Some((oracle, prep)))
        }
    }
}

/// Runs the measurement-controlled while loop once (trial stream 0).
pub fn run_weak(cfg: &RunConfig) -> Result<TrialRecord> {
    run_weak_trial(cfg, 0)
}

/// Runs the while loop on the trial-indexed RNG stream.
///
/// Fails with [`Error::IterationCapExceeded`] carrying the partial record
/// when the cap is reached, which is expected only for `κ` far below `√ρ`
/// (the degenerate `κ = 0` never terminates).
pub fn run_weak_trial(cfg: &RunConfig, trial: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial);
    let backend = cfg.backend.tag();
    let record = |iterations: u64, oracle_calls: u64, success: bool| TrialRecord {
        iterations,
        oracle_calls,
        classical_checks: 1,
        success,
        algorithm: Algorithm::Weak,
        backend,
        restarts: 0,
    };

    match build_statevector(cfg)? {
        None => {
            let params = &cfg.params;
            let mut a = Angle::new(params.alpha());
            let mut iterations = 0u64;
            loop {
                if iterations == cfg.max_iterations {
                    return Err(cap_error(cfg, record(iterations, 2 * iterations, false)));
                }
                let u: f64 = rng.random();
                let step = recurrence_step(a, params, u);
                iterations += 1;
                a = step.angle;
                if step.terminated {
                    // detection collapses exactly onto the marked component
                    return Ok(record(iterations, 2 * iterations, true));
                }
            }
        }
        Some((oracle, prep)) => {
            let mut state = JointState::prepare(&oracle, &prep)?;
            let kappa = cfg.params.kappa();
            let mut iterations = 0u64;
            loop {
                if iterations == cfg.max_iterations {
                    return Err(cap_error(
                        cfg,
                        record(iterations, state.oracle_calls(), false),
                    ));
                }
                state.apply_grover_iteration(&oracle, &prep);
                state.apply_weak_entangler(&oracle, kappa);
                iterations += 1;
                let u: f64 = rng.random();
                if state.measure_probe(u) == ProbeOutcome::Top {
                    break;
                }
            }
            let u: f64 = rng.random();
            let (_, is_marked) = state.measure_computational(&oracle, u);
            Ok(record(iterations, state.oracle_calls(), is_marked))
        }
    }
}

/// Runs the test-restart baseline once (trial stream 0).
pub fn run_test_restart(cfg: &RunConfig) -> Result<TrialRecord> {
    run_test_restart_trial(cfg, 0)
}

/// Test-restart baseline on the trial-indexed stream.
///
/// Each attempt rotates a geometrically distributed number `k ≥ 1` of times
/// (parameter `√ρ`), then measures projectively; the trial ends on the
/// first marked outcome. `iterations` is the total rotation count across
/// attempts.
pub fn run_test_restart_trial(cfg: &RunConfig, trial: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial);
    let params = &cfg.params;
    let sqrt_rho = params.rho().sqrt();
    let alpha = params.alpha();
    let backend = cfg.backend.tag();
    let sv = build_statevector(cfg)?;

    let mut iterations = 0u64;
    let mut restarts = 0u64;
    let mut classical_checks = 0u64;

    let record = |iterations, classical_checks, restarts, success| TrialRecord {
        iterations,
        oracle_calls: iterations,
        classical_checks,
        success,
        algorithm: Algorithm::TestRestart,
        backend,
        restarts,
    };

    if !cfg.restart.skip_initial_measurement {
        classical_checks += 1;
        let success = match &sv {
            None => rng.random::<f64>() < params.rho(),
            Some((oracle, prep)) => {
                let mut state = JointState::prepare(oracle, prep)?;
                let u: f64 = rng.random();
                state.measure_computational(oracle, u).1
            }
        };
        if success {
            return Ok(record(0, classical_checks, 0, true));
        }
    }

    loop {
        // inner loop: at least one rotation, keep going while the draw
        // exceeds √ρ
        let k = if cfg.restart.per_step_replay {
            let mut k = 0u64;
            loop {
                let u: f64 = rng.random();
                k += 1;
                if u <= sqrt_rho || iterations + k >= cfg.max_iterations {
                    break;
                }
            }
            k
        } else {
            sample_geometric(&mut rng, sqrt_rho)
        };

        if iterations.saturating_add(k) > cfg.max_iterations {
            let r = record(cfg.max_iterations, classical_checks, restarts, false);
            return Err(cap_error(cfg, r));
        }
        iterations += k;
        classical_checks += 1;

        let success = match &sv {
            None => {
                let p1 = ((2 * k + 1) as f64 * alpha).sin().powi(2);
                rng.random::<f64>() < p1
            }
            Some((oracle, prep)) => {
                let mut state = JointState::prepare(oracle, prep)?;
                for _ in 0..k {
                    state.apply_grover_iteration(oracle, prep);
                }
                let u: f64 = rng.random();
                state.measure_computational(oracle, u).1
            }
        };
        if success {
            return Ok(record(iterations, classical_checks, restarts, true));
        }
        restarts += 1;
    }
}

/// Number of rotations per attempt of the standard algorithm: `⌊π/4α⌋`.
pub fn standard_iteration_count(alpha: f64) -> u64 {
    (PI / (4.0 * alpha)).floor() as u64
}

/// Per-attempt success probability of the standard algorithm,
/// `sin²((2m+1)α)` with `m = ⌊π/4α⌋`; always at least `cos²(2α)`.
pub fn standard_success_probability(alpha: f64) -> f64 {
    let m = standard_iteration_count(alpha);
    ((2 * m + 1) as f64 * alpha).sin().powi(2)
}

/// Runs standard amplitude amplification once (trial stream 0).
pub fn run_standard(cfg: &RunConfig) -> Result<TrialRecord> {
    run_standard_trial(cfg, 0)
}

/// Standard amplitude amplification on the trial-indexed stream: `⌊π/4α⌋`
/// rotations, projective measurement, full restart on failure.
///
/// The angle backend uses the closed-form success probability (exact for
/// the rotation dynamics); the state-vector backend performs the actual
/// measurement.
pub fn run_standard_trial(cfg: &RunConfig, trial: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial);
    let params = &cfg.params;
    let m = standard_iteration_count(params.alpha());
    let p1 = standard_success_probability(params.alpha());
    let backend = cfg.backend.tag();
    let sv = build_statevector(cfg)?;

    let mut iterations = 0u64;
    let mut restarts = 0u64;
    let mut classical_checks = 0u64;
    let mut attempts = 0u64;

    loop {
        if iterations.saturating_add(m) > cfg.max_iterations || attempts == cfg.max_iterations {
            let r = TrialRecord {
                iterations,
                oracle_calls: iterations,
                classical_checks,
                success: false,
                algorithm: Algorithm::Standard,
                backend,
                restarts,
            };
            return Err(cap_error(cfg, r));
        }
        iterations += m;
        attempts += 1;
        classical_checks += 1;

        let success = match &sv {
            None => rng.random::<f64>() < p1,
            Some((oracle, prep)) => {
                let mut state = JointState::prepare(oracle, prep)?;
                for _ in 0..m {
                    state.apply_grover_iteration(oracle, prep);
                }
                let u: f64 = rng.random();
                state.measure_computational(oracle, u).1
            }
        };
        if success {
            return Ok(TrialRecord {
                iterations,
                oracle_calls: iterations,
                classical_checks,
                success: true,
                algorithm: Algorithm::Standard,
                backend,
                restarts,
            });
        }
        restarts += 1;
    }
}

/// Dispatches to the runner for `algorithm` on the trial-indexed stream.
pub fn run_trial(algorithm: Algorithm, cfg: &RunConfig, trial: u64) -> Result<TrialRecord> {
    match algorithm {
        Algorithm::Weak => run_weak_trial(cfg, trial),
        Algorithm::TestRestart => run_test_restart_trial(cfg, trial),
        Algorithm::Standard => run_standard_trial(cfg, trial),
    }
}
