//! Count moments and small-disc probabilities from simulated fields.

use serde::Serialize;

use crate::critical::{find_critical_points, CriticalKind, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL};
use crate::error::{Error, Result};
use crate::field::sample_field;
use crate::mc::{run_indexed, wilson_interval, Estimate, Moments};
use crate::special_math::rng::derive_seed;

pub const MIN_TRIALS: usize = 500;

/// Fields are sampled on `B(rho + FIELD_PADDING)`.
pub const FIELD_PADDING: f64 = 1.0;

/// Largest tolerated fraction of failed trials.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

const TRIAL_TAG: u64 = 0x5452_4941_4C53;

/// Seed of the field used by trial `index`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, TRIAL_TAG, index as u64)
}

/// Counts of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TrialCounts {
    pub min: usize,
    pub max: usize,
    pub saddle: usize,
    pub unresolved_cells: usize,
    pub degenerate: usize,
}

impl TrialCounts {
    pub fn total(&self) -> usize {
        self.min + self.max + self.saddle
    }

    pub fn extrema(&self) -> usize {
        self.min + self.max
    }
}

/// Critical point counts in `B(rho)` for one field realization.
pub fn trial_counts(rho: f64, field_seed: u64) -> Result<TrialCounts> {
    let field = sample_field(field_seed, rho + FIELD_PADDING)?;
    let rep = find_critical_points(&field, rho, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL)?;
    Ok(TrialCounts {
        min: rep.count(CriticalKind::Min),
        max: rep.count(CriticalKind::Max),
        saddle: rep.count(CriticalKind::Saddle),
        unresolved_cells: rep.unresolved_cells,
        degenerate: rep.degenerate,
    })
}

/// A probability with its normal standard error and Wilson interval
/// (three standard errors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probability {
    pub value: f64,
    pub std_error: f64,
    pub successes: u64,
    pub trials: u64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl Probability {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let n = trials.max(1) as f64;
        let p = successes as f64 / n;
        let (lo, hi) = wilson_interval(successes, trials, 3.0);
        Probability {
            value: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            successes,
            trials,
            wilson_low: lo,
            wilson_high: hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityTable {
    pub p0: Probability,
    pub p1: Probability,
    pub p_ge2: Probability,
    pub p_ge3: Probability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypedMeans {
    pub min: Estimate,
    pub max: Estimate,
    pub saddle: Estimate,
    pub extrema: Estimate,
    /// Per-trial `#min - #max`.
    pub min_minus_max: Estimate,
    /// Per-trial `#saddle - #extrema`.
    pub saddle_minus_extrema: Estimate,
}

/// Mixed second moments of typed counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypedPairs {
    /// `E[N^e N^saddle]`.
    pub extremum_saddle: Estimate,
    /// `E[N^min N^max]`.
    pub min_max: Estimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialFailure {
    pub index: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentEstimate {
    pub rho: f64,
    /// Successful trials.
    pub trials: usize,
    pub mean_count: Estimate,
    /// `E[N (N - 1)]`.
    pub second_factorial: Estimate,
    pub typed_means: TypedMeans,
    pub typed_pairs: TypedPairs,
    pub prob_table: ProbabilityTable,
    /// `histogram[k]` trials had exactly `k` critical points.
    pub histogram: Vec<u64>,
    pub unresolved_cells: usize,
    pub degenerate: usize,
    pub failures: Vec<TrialFailure>,
}

impl MomentEstimate {
    /// `E[N (N - 1) ... (N - k + 1)]` from the count histogram.
    pub fn factorial_moment(&self, k: usize) -> Estimate {
        let mut m = Moments::default();
        for (n, &times) in self.histogram.iter().enumerate() {
            let v: f64 = (0..k).map(|j| n as f64 - j as f64).product();
            for _ in 0..times {
                m.push(v);
            }
        }
        m.estimate()
    }

    /// `P(N >= k)` from the count histogram.
    pub fn tail_probability(&self, k: usize) -> Probability {
        let hits: u64 = self.histogram.iter().skip(k).sum();
        Probability::from_counts(hits, self.trials as u64)
    }
}

/// Counts critical points in `B(rho)` over `trials` independent fields.
pub fn mc_moments(rho: f64, trials: usize, seed: u64) -> Result<MomentEstimate> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            requirement: "finite and > 0",
        });
    }
    if trials < MIN_TRIALS {
        return Err(Error::Domain {
            name: "trials",
            value: trials as f64,
            requirement: ">= 500",
        });
    }
    let results = run_indexed(trials, |i| trial_counts(rho, trial_seed(seed, i)));
    let mut counts = Vec::with_capacity(trials);
    let mut failures = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(c) => counts.push(c),
            Err(e) => failures.push(TrialFailure {
                index,
                seed: trial_seed(seed, index),
                error: e.to_string(),
            }),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * trials as f64 {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            trials,
            first: failures[0].error.clone(),
        });
    }
    for f in &failures {
        log::warn!("trial {} (seed {}) failed: {}", f.index, f.seed, f.error);
    }
    Ok(summarize(rho, &counts, failures))
}

/// Moment estimate from per-trial counts.
pub fn summarize(rho: f64, counts: &[TrialCounts], failures: Vec<TrialFailure>) -> MomentEstimate {
    let mut acc = [Moments::default(); 10];
    let mut histogram = Vec::new();
    let (mut unresolved, mut degenerate) = (0, 0);
    for c in counts {
        let n = c.total();
        if histogram.len() <= n {
            histogram.resize(n + 1, 0);
        }
        histogram[n] += 1;
        unresolved += c.unresolved_cells;
        degenerate += c.degenerate;
        let nf = n as f64;
        let values = [
            nf,
            nf * (nf - 1.0),
            c.min as f64,
            c.max as f64,
            c.saddle as f64,
            c.extrema() as f64,
            c.min as f64 - c.max as f64,
            c.saddle as f64 - c.extrema() as f64,
            (c.extrema() * c.saddle) as f64,
            (c.min * c.max) as f64,
        ];
        for (a, v) in acc.iter_mut().zip(values) {
            a.push(v);
        }
    }
    let total = counts.len() as u64;
    let at_least = |k: usize| histogram.iter().skip(k).sum::<u64>();
    let exactly = |k: usize| histogram.get(k).copied().unwrap_or(0);
    MomentEstimate {
        rho,
        trials: counts.len(),
        mean_count: acc[0].estimate(),
        second_factorial: acc[1].estimate(),
        typed_means: TypedMeans {
            min: acc[2].estimate(),
            max: acc[3].estimate(),
            saddle: acc[4].estimate(),
            extrema: acc[5].estimate(),
            min_minus_max: acc[6].estimate(),
            saddle_minus_extrema: acc[7].estimate(),
        },
        typed_pairs: TypedPairs {
            extremum_saddle: acc[8].estimate(),
            min_max: acc[9].estimate(),
        },
        prob_table: ProbabilityTable {
            p0: Probability::from_counts(exactly(0), total),
            p1: Probability::from_counts(exactly(1), total),
            p_ge2: Probability::from_counts(at_least(2), total),
            p_ge3: Probability::from_counts(at_least(3), total),
        },
        histogram,
        unresolved_cells: unresolved,
        degenerate,
        failures,
    }
}
