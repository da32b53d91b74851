//! Amplitude amplification with a measurement-controlled while loop.
//!
//! The classic fixed-count algorithm rotates a quantum state towards the
//! marked subspace for a predetermined number of iterations and then
//! measures. This crate simulates a variant that instead couples the state
//! to a one-qubit probe each iteration and measures only the probe: the
//! loop halts exactly when the probe reports detection, at which point the
//! state sits on the marked component with certainty. Two baselines, the
//! classical test-restart loop and the standard fixed-count algorithm,
//! are implemented alongside for distribution comparisons.
//!
//! Two interchangeable backends execute the loop:
//!
//! * [`geometry`] — the exact scalar angle model of the two-dimensional
//!   invariant plane (fast, any problem size);
//! * [`statevector`] — a dense complex simulation of the joint
//!   system-probe space (desk-scale ground truth).
//!
//! [`runners`] executes whole trials with exact iteration and oracle-call
//! accounting, [`stats`] adds the Monte Carlo harness (rayon-parallel by
//! default, sequential behind a feature flag), empirical distribution
//! tooling and two-sample tests, and [`verify`] hosts the bound suites.
//!
//! ```
//! use amploop::geometry::ProblemParams;
//! use amploop::runners::{run_weak, RunConfig};
//!
//! let params = ProblemParams::with_auto_kappa(1e-3).unwrap();
//! let record = run_weak(&RunConfig::angle(params, 42)).unwrap();
//! assert!(record.success);
//! assert_eq!(record.oracle_calls, 2 * record.iterations);
//! ```

pub mod error;
pub mod geometry;
pub mod runners;
pub mod statevector;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
