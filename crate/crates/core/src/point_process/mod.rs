//! Monte Carlo count statistics of critical points and matched-intensity
//! reference processes.

pub mod compare;
pub mod moments;
pub mod reference;

pub use compare::{compare_processes, compare_processes_with, scatter_sample, CompareConfig, ComparisonRow, ComparisonTable, Process, ScatterRow};
pub use moments::{mc_moments, MomentEstimate, Probability, ProbabilityTable, TrialCounts};
pub use reference::{poisson_pmf, poisson_tail, simulate_ginibre, simulate_poisson, GinibreSample, Window, INTENSITY};
