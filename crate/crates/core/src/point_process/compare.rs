//! `P(N >= 2)` in small discs for critical points and the two reference
//! processes at matched intensity.

use std::fmt;

use serde::Serialize;

use super::moments::{mc_moments, Probability, FIELD_PADDING};
use super::reference::{
    poisson_tail, poisson_window_counts, simulate_ginibre, simulate_poisson, window_centres,
    window_counts, Window, BULK_MARGIN, DEFAULT_GINIBRE_N, INTENSITY,
};
use crate::critical::{find_critical_points, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL};
use crate::error::{Error, Result};
use crate::field::sample_field;
use crate::mc::run_indexed;
use crate::special_math::rng::derive_seed;

const CRITICAL_TAG: u64 = 0x4352_4954;
const POISSON_TAG: u64 = 0x504F_4953;
const GINIBRE_TAG: u64 = 0x4749_4E49;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Critical,
    Poisson,
    Ginibre,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::Critical => "critical",
            Process::Poisson => "poisson",
            Process::Ginibre => "ginibre",
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareConfig {
    /// Simulated fields per radius.
    pub field_trials: usize,
    /// Independent Poisson discs per radius.
    pub poisson_windows: usize,
    pub ginibre_matrices: usize,
    pub ginibre_n: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            field_trials: 20_000,
            poisson_windows: 1_000_000,
            ginibre_matrices: 12,
            ginibre_n: DEFAULT_GINIBRE_N,
        }
    }
}

impl CompareConfig {
    pub fn with_trials(trials: usize) -> Self {
        CompareConfig {
            field_trials: trials,
            ..CompareConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub rho: f64,
    pub process: Process,
    pub p_ge2: Probability,
    /// Closed form where one exists.
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub config: CompareConfig,
    pub rows: Vec<ComparisonRow>,
    /// Pooled bulk density of the Ginibre samples.
    pub ginibre_density: f64,
}

impl ComparisonTable {
    pub fn row(&self, rho: f64, process: Process) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.rho == rho && r.process == process)
    }
}

pub fn compare_processes(rho_grid: &[f64], trials: usize, seed: u64) -> Result<ComparisonTable> {
    compare_processes_with(rho_grid, &CompareConfig::with_trials(trials), seed)
}

pub fn compare_processes_with(
    rho_grid: &[f64],
    config: &CompareConfig,
    seed: u64,
) -> Result<ComparisonTable> {
    if rho_grid.is_empty() {
        return Err(Error::Precondition("rho_grid is empty".into()));
    }
    if let Some(&r) = rho_grid.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::Domain {
            name: "rho",
            value: r,
            requirement: "0 < rho <= 1",
        });
    }
    if config.ginibre_matrices == 0 || config.poisson_windows == 0 {
        return Err(Error::Precondition(
            "ginibre_matrices and poisson_windows must be positive".into(),
        ));
    }
    let ginibre = run_indexed(config.ginibre_matrices, |k| {
        simulate_ginibre(config.ginibre_n, derive_seed(seed, GINIBRE_TAG, k as u64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let bulk = ginibre[0].bulk_radius;
    let points: usize = ginibre.iter().map(|g| g.points.len()).sum();
    let ginibre_density =
        points as f64 / (ginibre.len() as f64 * std::f64::consts::PI * bulk * bulk);

    let mut rows = Vec::new();
    for (i, &rho) in rho_grid.iter().enumerate() {
        let crit = mc_moments(rho, config.field_trials, derive_seed(seed, CRITICAL_TAG, i as u64))?;
        rows.push(ComparisonRow {
            rho,
            process: Process::Critical,
            p_ge2: crit.prob_table.p_ge2,
            exact: None,
        });

        let window = Window::Disc { radius: rho };
        let counts = poisson_window_counts(
            window,
            INTENSITY,
            config.poisson_windows,
            derive_seed(seed, POISSON_TAG, i as u64),
        )?;
        let hits = counts.iter().filter(|&&c| c >= 2).count() as u64;
        rows.push(ComparisonRow {
            rho,
            process: Process::Poisson,
            p_ge2: Probability::from_counts(hits, counts.len() as u64),
            exact: Some(poisson_tail(INTENSITY * window.area(), 2)),
        });

        let centres = window_centres(rho, bulk);
        let (mut hits, mut total) = (0u64, 0u64);
        for g in &ginibre {
            let c = window_counts(&g.points, &centres, rho);
            hits += c.iter().filter(|&&k| k >= 2).count() as u64;
            total += c.len() as u64;
        }
        rows.push(ComparisonRow {
            rho,
            process: Process::Ginibre,
            p_ge2: Probability::from_counts(hits, total),
            exact: None,
        });
    }
    Ok(ComparisonTable {
        config: *config,
        rows,
        ginibre_density,
    })
}

/// One labelled point of a scatter export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub x: f64,
    pub y: f64,
    /// `min`, `max`, `saddle`, `poisson` or `ginibre`.
    pub label: String,
}

/// Critical points of one field, a Poisson sample and a Ginibre bulk
/// sample, all in the disc of radius `radius` at the same intensity.
pub fn scatter_sample(radius: f64, seed: u64) -> Result<Vec<ScatterRow>> {
    if !(radius > 0.0 && radius <= 50.0) {
        return Err(Error::Domain {
            name: "radius",
            value: radius,
            requirement: "0 < radius <= 50",
        });
    }
    let mut out = Vec::new();
    let field = sample_field(derive_seed(seed, CRITICAL_TAG, 0), radius + FIELD_PADDING)?;
    let rep = find_critical_points(&field, radius, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL)?;
    for p in &rep.points {
        out.push(ScatterRow {
            x: p.location[0],
            y: p.location[1],
            label: p.kind.name().into(),
        });
    }
    let window = Window::Disc { radius };
    for p in simulate_poisson(window, INTENSITY, derive_seed(seed, POISSON_TAG, 0))? {
        out.push(ScatterRow {
            x: p[0],
            y: p[1],
            label: Process::Poisson.name().into(),
        });
    }
    let scale = (2.0 * 3f64.sqrt()).sqrt();
    let needed = (radius / ((1.0 - BULK_MARGIN) * scale)).powi(2).ceil() as usize;
    let g = simulate_ginibre(needed.max(DEFAULT_GINIBRE_N), derive_seed(seed, GINIBRE_TAG, 0))?;
    for p in g.points.iter().filter(|p| window.contains(**p)) {
        out.push(ScatterRow {
            x: p[0],
            y: p[1],
            label: Process::Ginibre.name().into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(compare_processes(&[], 500, 1).is_err());
        assert!(compare_processes(&[1.5], 500, 1).is_err());
        assert!(compare_processes(&[0.0], 500, 1).is_err());
    }

    #[test]
    fn small_table() {
        let config = CompareConfig {
            field_trials: 500,
            poisson_windows: 20_000,
            ginibre_matrices: 1,
            ginibre_n: 64,
        };
        let t = compare_processes_with(&[0.5], &config, 2).unwrap();
        assert_eq!(t.rows.len(), 3);
        let p = t.row(0.5, Process::Poisson).unwrap();
        let exact = p.exact.unwrap();
        assert!((p.p_ge2.value - exact).abs() <= 4.0 * (exact / 20_000.0).sqrt());
        assert!((t.ginibre_density / INTENSITY - 1.0).abs() < 0.2);
    }
}
