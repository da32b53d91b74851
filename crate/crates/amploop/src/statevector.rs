//! Dense state-vector simulation on the joint space `H ⊗ P`.
//!
//! This backend realises the oracle phase flip, the reflection about the
//! initial state, the probe entangler and both projective measurements
//! explicitly on a complex amplitude vector, and serves as the ground-truth
//! oracle for the angle model. Amplitudes are stored basis-major: index
//! `2b + q` holds the amplitude of `|b⟩|q⟩` with probe `q ∈ {⊥ = 0, ⊤ = 1}`.
//!
//! States are exclusively owned mutable values; parallelism happens across
//! trials, never inside one.

use crate::error::{Error, Result};
use crate::geometry::Angle;
use num_complex::Complex64;

/// Dense storage cap: the backend is a desk-scale oracle, the angle model
/// covers large search spaces.
pub const MAX_DIMENSION: usize = 1 << 20;

/// Residual above which a state is considered to have left the invariant
/// plane (which the dynamics provably never do).
pub const PLANE_TOLERANCE: f64 = 1e-9;

/// Membership oracle: dimension of the search space and the marked subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedOracle {
    n: usize,
    mask: Vec<bool>,
    marked: Vec<usize>,
}

impl MarkedOracle {
    /// Builds an oracle over `n` basis elements with the given marked
    /// indices. The marked set must be a proper, non-empty subset.
    pub fn new(n: usize, marked: &[usize]) -> Result<Self> {
        if !(2..=MAX_DIMENSION).contains(&n) {
            return Err(Error::InvalidOracle(format!(
                "dimension {n} outside 2..={MAX_DIMENSION}"
            )));
        }
        let mut sorted: Vec<usize> = marked.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() || sorted.len() >= n {
            return Err(Error::InvalidOracle(format!(
                "marked set must be a proper non-empty subset (got {} of {n})",
                sorted.len()
            )));
        }
        if let Some(&bad) = sorted.iter().find(|&&b| b >= n) {
            return Err(Error::InvalidOracle(format!(
                "marked index {bad} out of range for dimension {n}"
            )));
        }
        let mut mask = vec![false; n];
        for &b in &sorted {
            mask[b] = true;
        }
        Ok(Self {
            n,
            mask,
            marked: sorted,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_marked(&self, b: usize) -> bool {
        self.mask[b]
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    /// Success probability of the uniform initial state: `|marked| / n`.
    pub fn implied_rho(&self) -> f64 {
        self.marked.len() as f64 / self.n as f64
    }
}

/// How the initial state was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreparationKind {
    Uniform,
    Explicit,
}

/// Initial state `|ψ⟩` of the search space, i.e. the output of the (unitary)
/// preparation procedure applied to `|0⟩`. The reflection about `|ψ⟩` is
/// built directly from these amplitudes as a rank-1 update; the preparation
/// unitary itself is never materialised.
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    amplitudes: Vec<Complex64>,
    kind: PreparationKind,
}

impl Preparation {
    /// Uniform superposition over all `n` basis elements.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIMENSION {
            return Err(Error::InvalidPreparation(format!(
                "dimension {n} outside 1..={MAX_DIMENSION}"
            )));
        }
        let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Ok(Self {
            amplitudes: vec![amp; n],
            kind: PreparationKind::Uniform,
        })
    }

    /// Explicit initial vector; must be normalised to within `1e-9` (it is
    /// renormalised exactly on construction).
    pub fn explicit(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm_sqr.sqrt() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPreparation(format!(
                "expected a unit vector, got squared norm {norm_sqr}"
            )));
        }
        let scale = 1.0 / norm_sqr.sqrt();
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a * scale).collect(),
            kind: PreparationKind::Explicit,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn kind(&self) -> PreparationKind {
        self.kind
    }
}

/// Probe measurement outcome: `⊥` keeps the loop running, `⊤` terminates it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOutcome {
    Bot,
    Top,
}

/// Joint state on `H ⊗ P` with an oracle-call counter.
///
/// The counter increments once per phase-oracle application and once per
/// entangler application, since both consult the membership function.
#[derive(Debug, Clone)]
pub struct JointState {
    n: usize,
    amps: Vec<Complex64>,
    oracle_calls: u64,
}

impl JointState {
    /// `|ψ⟩ ⊗ |⊥⟩`. Rejects preparations with zero marked overlap, for
    /// which amplification can never succeed.
    pub fn prepare(oracle: &MarkedOracle, prep: &Preparation) -> Result<Self> {
        if prep.amplitudes.len() != oracle.n {
            return Err(Error::InconsistentConfig(format!(
                "preparation dimension {} does not match oracle dimension {}",
                prep.amplitudes.len(),
                oracle.n
            )));
        }
        let marked_mass: f64 = oracle
            .marked
            .iter()
            .map(|&b| prep.amplitudes[b].norm_sqr())
            .sum();
        if marked_mass <= 0.0 {
            return Err(Error::ZeroOverlap);
        }
        let mut amps = vec![Complex64::ZERO; 2 * oracle.n];
        for (b, &amp) in prep.amplitudes.iter().enumerate() {
            amps[2 * b] = amp;
        }
        Ok(Self {
            n: oracle.n,
            amps,
            oracle_calls: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    pub fn amplitude(&self, b: usize, probe_top: bool) -> Complex64 {
        self.amps[2 * b + usize::from(probe_top)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability that a probe measurement would report `⊤` right now.
    pub fn top_mass(&self) -> f64 {
        self.amps.chunks_exact(2).map(|c| c[1].norm_sqr()).sum()
    }

    /// Phase oracle: negates the amplitude of every marked basis element,
    /// leaving the probe untouched. Counts one oracle call.
    pub fn apply_oracle_phase(&mut self, oracle: &MarkedOracle) {
        for &b in &oracle.marked {
            self.amps[2 * b] = -self.amps[2 * b];
            self.amps[2 * b + 1] = -self.amps[2 * b + 1];
        }
        self.oracle_calls += 1;
    }

    /// Reflection about the initial state, `(2|ψ⟩⟨ψ| − I) ⊗ I`, applied as a
    /// rank-1 update per probe branch.
    pub fn apply_reflection_psi(&mut self, prep: &Preparation) {
        let mut overlap = [Complex64::ZERO; 2];
        for (b, &psi) in prep.amplitudes.iter().enumerate() {
            overlap[0] += psi.conj() * self.amps[2 * b];
            overlap[1] += psi.conj() * self.amps[2 * b + 1];
        }
        for (b, &psi) in prep.amplitudes.iter().enumerate() {
            for (q, &c) in overlap.iter().enumerate() {
                let idx = 2 * b + q;
                self.amps[idx] = 2.0 * c * psi - self.amps[idx];
            }
        }
    }

    /// One full Grover iteration: phase oracle then reflection.
    pub fn apply_grover_iteration(&mut self, oracle: &MarkedOracle, prep: &Preparation) {
        self.apply_oracle_phase(oracle);
        self.apply_reflection_psi(prep);
    }

    /// Probe entangler: rotates the probe of every marked component by
    /// `[[√(1−κ), √κ], [√κ, −√(1−κ)]]` and leaves unmarked components
    /// untouched. Queries the membership function, so it counts one oracle
    /// call.
    pub fn apply_weak_entangler(&mut self, oracle: &MarkedOracle, kappa: f64) {
        let xi = (1.0 - kappa).sqrt();
        let sk = kappa.sqrt();
        for &b in &oracle.marked {
            let bot = self.amps[2 * b];
            let top = self.amps[2 * b + 1];
            self.amps[2 * b] = xi * bot + sk * top;
            self.amps[2 * b + 1] = sk * bot - xi * top;
        }
        self.oracle_calls += 1;
    }

    /// Projective measurement of the probe, using the caller-supplied
    /// uniform draw `u ∈ [0, 1)`: outcome `⊤` iff `u` falls below the `⊤`
    /// mass. Projects and renormalises the state.
    pub fn measure_probe(&mut self, u: f64) -> ProbeOutcome {
        let mut masses = [0.0f64; 2];
        for c in self.amps.chunks_exact(2) {
            masses[0] += c[0].norm_sqr();
            masses[1] += c[1].norm_sqr();
        }
        let outcome = if u < masses[1] {
            ProbeOutcome::Top
        } else {
            ProbeOutcome::Bot
        };
        let keep = usize::from(outcome == ProbeOutcome::Top);
        let scale = 1.0 / masses[keep].sqrt();
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i % 2 == keep {
                *amp *= scale;
            } else {
                *amp = Complex64::ZERO;
            }
        }
        outcome
    }

    /// Measurement in the computational basis (marginal over the probe):
    /// samples a basis element with probability equal to its total squared
    /// amplitude, collapses onto it and reports whether it is marked.
    pub fn measure_computational(&mut self, oracle: &MarkedOracle, u: f64) -> (usize, bool) {
        let mut acc = 0.0;
        let mut chosen = self.n - 1;
        for b in 0..self.n {
            acc += self.amps[2 * b].norm_sqr() + self.amps[2 * b + 1].norm_sqr();
            if u < acc {
                chosen = b;
                break;
            }
        }
        let bot = self.amps[2 * chosen];
        let top = self.amps[2 * chosen + 1];
        let scale = 1.0 / (bot.norm_sqr() + top.norm_sqr()).sqrt();
        self.amps.fill(Complex64::ZERO);
        self.amps[2 * chosen] = bot * scale;
        self.amps[2 * chosen + 1] = top * scale;
        (chosen, oracle.is_marked(chosen))
    }

    /// Reads the plane angle of the ⊥-probe branch by projecting it onto the
    /// normalised unmarked/marked components of the initial state.
    ///
    /// Fails with [`Error::OutOfPlane`] if the branch has a residual outside
    /// the plane larger than [`PLANE_TOLERANCE`]; the dynamics preserve the
    /// plane, so that indicates a bug, not a physical outcome.
    pub fn extract_angle(&self, oracle: &MarkedOracle, prep: &Preparation) -> Result<Angle> {
        let mut marked_mass = 0.0;
        let mut unmarked_mass = 0.0;
        for (b, &psi) in prep.amplitudes.iter().enumerate() {
            if oracle.is_marked(b) {
                marked_mass += psi.norm_sqr();
            } else {
                unmarked_mass += psi.norm_sqr();
            }
        }
        let marked_norm = marked_mass.sqrt();
        let unmarked_norm = unmarked_mass.sqrt();

        let mut branch_mass = 0.0;
        let mut c0 = Complex64::ZERO;
        let mut c1 = Complex64::ZERO;
        for (b, &psi) in prep.amplitudes.iter().enumerate() {
            let v = self.amps[2 * b];
            branch_mass += v.norm_sqr();
            if oracle.is_marked(b) {
                c1 += (psi / marked_norm).conj() * v;
            } else if unmarked_norm > 0.0 {
                c0 += (psi / unmarked_norm).conj() * v;
            }
        }
        if branch_mass <= 0.0 {
            return Err(Error::OutOfPlane { residual: 1.0 });
        }
        let scale = 1.0 / branch_mass.sqrt();
        let (c0, c1) = (c0 * scale, c1 * scale);
        // explicit residual vector: a mass-deficit shortcut would bottom out
        // at sqrt(machine epsilon), far above the 1e-9 budget
        let mut res_sqr = 0.0;
        for (b, &psi) in prep.amplitudes.iter().enumerate() {
            let predicted = if oracle.is_marked(b) {
                c1 * (psi / marked_norm)
            } else if unmarked_norm > 0.0 {
                c0 * (psi / unmarked_norm)
            } else {
                Complex64::ZERO
            };
            res_sqr += (self.amps[2 * b] * scale - predicted).norm_sqr();
        }
        // imaginary projections are equally out of model: the plane is the
        // real span of the two basis states
        let residual = res_sqr.sqrt().hypot(c0.im.hypot(c1.im));
        if residual > PLANE_TOLERANCE {
            return Err(Error::OutOfPlane { residual });
        }
        Ok(Angle::new(c1.re.atan2(c0.re)))
    }
}
