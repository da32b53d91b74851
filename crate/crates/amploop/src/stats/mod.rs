//! Monte Carlo harness and statistics over iteration counts.
//!
//! Sample collection runs trials in parallel by default (rayon, behind the
//! `parallel` feature) with per-trial RNG streams, so the collected
//! [`SampleSet`] is bit-identical to a sequential run. The analyses
//! (summary statistics, histograms, empirical CDFs, active/latent
//! segmentation, the two-sample Kolmogorov–Smirnov and Anderson–Darling
//! tests) are pure functions over immutable sample sets.

mod ad;
mod ecdf;
mod ks;
mod segment;

pub use ad::ad_two_sample;
pub use ecdf::Ecdf;
pub use ks::{ks_statistic, ks_two_sample};
pub use segment::{segment_active_latent, IterationKind, SegmentReport, SegmentRun};

use crate::error::{Error, Result};
use crate::runners::{run_trial, Algorithm, Backend, BackendSpec, RestartOptions, RunConfig};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Resolved description of how a sample set was produced; embedded in every
/// serialized artifact so any output is reproducible from its own header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub algorithm: Algorithm,
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked: Option<Vec<usize>>,
    pub rho: f64,
    pub kappa: f64,
    pub trials: u64,
    pub seed: u64,
    pub max_iterations: u64,
    #[serde(default, skip_serializing_if = "is_default_restart")]
    pub restart: RestartOptions,
}

fn is_default_restart(r: &RestartOptions) -> bool {
    *r == RestartOptions::default()
}

impl SampleMeta {
    pub fn from_config(algorithm: Algorithm, cfg: &RunConfig, trials: u64) -> Self {
        let (n, marked) = match &cfg.backend {
            BackendSpec::Angle => (None, None),
            BackendSpec::Statevector { n, marked } => (Some(*n), Some(marked.clone())),
        };
        Self {
            algorithm,
            backend: cfg.backend.tag(),
            n,
            marked,
            rho: cfg.params.rho(),
            kappa: cfg.params.kappa(),
            trials,
            seed: cfg.seed,
            max_iterations: cfg.max_iterations,
            restart: cfg.restart,
        }
    }
}

/// Ordered collection of per-trial iteration counts with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    meta: SampleMeta,
    values: Vec<u64>,
}

/// Summary statistics reported with every emitted sample set. Percentiles
/// are sample quantiles: the smallest value whose empirical CDF reaches the
/// requested level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: u64,
    pub p5: u64,
    pub p25: u64,
    pub p75: u64,
    pub p95: u64,
    pub variance: f64,
}

impl SampleSet {
    /// Builds a set from raw values (sorted on construction).
    pub fn from_values(mut values: Vec<u64>, meta: SampleMeta) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        if values.len() as u64 != meta.trials {
            return Err(Error::InconsistentConfig(format!(
                "meta declares {} trials but {} values were supplied",
                meta.trials,
                values.len()
            )));
        }
        values.sort_unstable();
        Ok(Self { meta, values })
    }

    /// Sorted ascending.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn meta(&self) -> &SampleMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ecdf(&self) -> Ecdf {
        Ecdf::new(&self.values).expect("sample sets are never empty")
    }

    pub fn summary(&self) -> Summary {
        let e = self.ecdf();
        let n = self.values.len() as f64;
        let mean = self.values.iter().map(|&v| v as f64).sum::<f64>() / n;
        let variance = if self.values.len() < 2 {
            0.0
        } else {
            self.values
                .iter()
                .map(|&v| {
                    let d = v as f64 - mean;
                    d * d
                })
                .sum::<f64>()
                / (n - 1.0)
        };
        Summary {
            mean,
            median: e.quantile(0.5).expect("valid level"),
            p5: e.quantile(0.05).expect("valid level"),
            p25: e.quantile(0.25).expect("valid level"),
            p75: e.quantile(0.75).expect("valid level"),
            p95: e.quantile(0.95).expect("valid level"),
            variance,
        }
    }

    /// Writes the `#`-prefixed metadata header, summary lines and one value
    /// per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = &self.meta;
        writeln!(w, "# amploop-samples v1")?;
        writeln!(w, "# algorithm: {}", m.algorithm)?;
        writeln!(w, "# backend: {}", m.backend)?;
        if let Some(n) = m.n {
            writeln!(w, "# n: {n}")?;
        }
        if let Some(marked) = &m.marked {
            let list: Vec<String> = marked.iter().map(|b| b.to_string()).collect();
            writeln!(w, "# marked: {}", list.join(","))?;
        }
        writeln!(w, "# rho: {}", m.rho)?;
        writeln!(w, "# kappa: {}", m.kappa)?;
        writeln!(w, "# trials: {}", m.trials)?;
        writeln!(w, "# seed: {}", m.seed)?;
        writeln!(w, "# max_iterations: {}", m.max_iterations)?;
        if m.restart.per_step_replay {
            writeln!(w, "# per_step_replay: true")?;
        }
        if m.restart.skip_initial_measurement {
            writeln!(w, "# skip_initial_measurement: true")?;
        }
        let s = self.summary();
        writeln!(w, "# mean: {}", s.mean)?;
        writeln!(w, "# median: {}", s.median)?;
        writeln!(w, "# p5: {}", s.p5)?;
        writeln!(w, "# p25: {}", s.p25)?;
        writeln!(w, "# p75: {}", s.p75)?;
        writeln!(w, "# p95: {}", s.p95)?;
        writeln!(w, "# variance: {}", s.variance)?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    /// Parses the CSV format emitted by [`Self::write_csv`]. Summary lines
    /// are ignored (they are derived), everything else round-trips exactly.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut algorithm = None;
        let mut backend = None;
        let mut n = None;
        let mut marked = None;
        let mut rho = None;
        let mut kappa = None;
        let mut trials = None;
        let mut seed = None;
        let mut max_iterations = None;
        let mut restart = RestartOptions::default();
        let mut values = Vec::new();

        let bad = |detail: String| Error::Parse {
            format: "csv",
            detail,
        };

        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let Some((key, value)) = rest.split_once(':') else {
                    continue; // banner or free-form comment
                };
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "algorithm" => {
                        algorithm = Some(match value {
                            "weak" => Algorithm::Weak,
                            "test_restart" => Algorithm::TestRestart,
                            "standard" => Algorithm::Standard,
                            other => return Err(bad(format!("unknown algorithm {other:?}"))),
                        })
                    }
                    "backend" => {
                        backend = Some(match value {
                            "angle" => Backend::Angle,
                            "statevector" => Backend::Statevector,
                            other => return Err(bad(format!("unknown backend {other:?}"))),
                        })
                    }
                    "n" => n = Some(value.parse().map_err(|e| bad(format!("n: {e}")))?),
                    "marked" => {
                        let list: std::result::Result<Vec<usize>, _> =
                            value.split(',').map(|s| s.trim().parse()).collect();
                        marked = Some(list.map_err(|e| bad(format!("marked: {e}")))?);
                    }
                    "rho" => rho = Some(value.parse().map_err(|e| bad(format!("rho: {e}")))?),
                    "kappa" => kappa = Some(value.parse().map_err(|e| bad(format!("kappa: {e}")))?),
                    "trials" => {
                        trials = Some(value.parse().map_err(|e| bad(format!("trials: {e}")))?)
                    }
                    "seed" => seed = Some(value.parse().map_err(|e| bad(format!("seed: {e}")))?),
                    "max_iterations" => {
                        max_iterations = Some(value.parse().map_err(|e| bad(format!("cap: {e}")))?)
                    }
                    "per_step_replay" => restart.per_step_replay = value == "true",
                    "skip_initial_measurement" => {
                        restart.skip_initial_measurement = value == "true"
                    }
                    _ => {} // summary and unknown keys are derived or ignorable
                }
            } else {
                values.push(line.parse().map_err(|e| bad(format!("value: {e}")))?);
            }
        }

        let meta = SampleMeta {
            algorithm: algorithm.ok_or_else(|| bad("missing algorithm".into()))?,
            backend: backend.ok_or_else(|| bad("missing backend".into()))?,
            n,
            marked,
            rho: rho.ok_or_else(|| bad("missing rho".into()))?,
            kappa: kappa.ok_or_else(|| bad("missing kappa".into()))?,
            trials: trials.ok_or_else(|| bad("missing trials".into()))?,
            seed: seed.ok_or_else(|| bad("missing seed".into()))?,
            max_iterations: max_iterations.ok_or_else(|| bad("missing max_iterations".into()))?,
            restart,
        };
        SampleSet::from_values(values, meta)
    }

    /// Single JSON document mirroring the CSV fields.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            spec: &'a SampleMeta,
            samples: &'a [u64],
            summary: Summary,
        }
        Ok(serde_json::to_string_pretty(&Doc {
            spec: &self.meta,
            samples: &self.values,
            summary: self.summary(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            spec: SampleMeta,
            samples: Vec<u64>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        SampleSet::from_values(doc.samples, doc.spec)
    }
}

/// Outcome of a two-sample hypothesis test at the 1% significance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject_at_1pct: bool,
}

impl TestResult {
    pub(crate) fn from_p(statistic: f64, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            reject_at_1pct: p_value < 0.01,
        }
    }
}

/// One fixed-width histogram bin over `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

/// Fixed-width histogram of the values starting at zero. Empty bins up to
/// the largest value are included so periodic structure stays visible.
pub fn histogram(values: &[u64], bin_width: f64) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::OutOfRange {
            name: "bin_width",
            value: bin_width,
            expected: "positive finite",
        });
    }
    let max = *values.iter().max().expect("non-empty") as f64;
    let bins = (max / bin_width).floor() as usize + 1;
    if bins > 10_000_000 {
        return Err(Error::OutOfRange {
            name: "bin_count",
            value: bins as f64,
            expected: "at most 1e7",
        });
    }
    let mut counts = vec![0u64; bins];
    for &v in values {
        let mut idx = (v as f64 / bin_width) as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower: i as f64 * bin_width,
            upper: (i + 1) as f64 * bin_width,
            count,
        })
        .collect())
}

fn collect_sequential(algorithm: Algorithm, cfg: &RunConfig, trials: u64) -> Result<Vec<u64>> {
    (0..trials)
        .map(|t| trial_value(algorithm, cfg, t))
        .collect()
}

fn trial_value(algorithm: Algorithm, cfg: &RunConfig, trial: u64) -> Result<u64> {
    match run_trial(algorithm, cfg, trial) {
        Ok(record) => Ok(record.iterations),
        Err(Error::IterationCapExceeded { cap, record }) => {
            Err(Error::TrialCapExceeded { trial, cap, record })
        }
        Err(e) => Err(e),
    }
}

/// Runs `trials` independent trials and collects the iteration counts.
///
/// With the `parallel` feature (default) trials are distributed over the
/// rayon pool; every trial owns its RNG stream, so the result is identical
/// to [`monte_carlo_sequential`] for any thread count. Capped runs are
/// propagated as [`Error::TrialCapExceeded`] carrying the lowest offending
/// trial index.
pub fn monte_carlo(algorithm: Algorithm, cfg: &RunConfig, trials: u64) -> Result<SampleSet> {
    if trials == 0 {
        return Err(Error::EmptySamples);
    }
    cfg.validate()?;

    #[cfg(feature = "parallel")]
    let values: Result<Vec<u64>> = {
        let results: Vec<Result<u64>> = (0..trials)
            .into_par_iter()
            .map(|t| trial_value(algorithm, cfg, t))
            .collect();
        results.into_iter().collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values = collect_sequential(algorithm, cfg, trials);

    SampleSet::from_values(values?, SampleMeta::from_config(algorithm, cfg, trials))
}

/// Single-threaded twin of [`monte_carlo`]; produces the identical
/// [`SampleSet`]. Kept callable regardless of features so the benchmark
/// suite can compare both execution modes.
pub fn monte_carlo_sequential(
    algorithm: Algorithm,
    cfg: &RunConfig,
    trials: u64,
) -> Result<SampleSet> {
    if trials == 0 {
        return Err(Error::EmptySamples);
    }
    cfg.validate()?;
    let values = collect_sequential(algorithm, cfg, trials)?;
    SampleSet::from_values(values, SampleMeta::from_config(algorithm, cfg, trials))
}

/// Runs `f` under a rayon pool capped at `threads` workers (`None` keeps
/// the global pool). Without the `parallel` feature this just calls `f`.
pub fn with_thread_limit<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .expect("pool construction")
                .install(f),
            _ => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
