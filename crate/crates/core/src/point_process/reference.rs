//! Poisson and Ginibre reference processes at the intensity of critical
//! points, `c = 1 / (2 sqrt(3) pi)`.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kacrice::K1;
use crate::mc::run_chunked;
use crate::special_math::rng::stream_rng;

/// Matching intensity.
pub const INTENSITY: f64 = K1;

pub const DEFAULT_GINIBRE_N: usize = 256;
pub const MIN_GINIBRE_N: usize = 64;
/// Fraction of the spectral edge radius excluded as non-bulk.
pub const BULK_MARGIN: f64 = 0.2;

const SCHUR_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum Window {
    /// Disc of the given radius centred at the origin.
    Disc { radius: f64 },
    /// Axis-aligned square of the given side centred at the origin.
    Square { side: f64 },
}

impl Window {
    pub fn area(&self) -> f64 {
        match *self {
            Window::Disc { radius } => std::f64::consts::PI * radius * radius,
            Window::Square { side } => side * side,
        }
    }

    pub fn contains(&self, z: [f64; 2]) -> bool {
        match *self {
            Window::Disc { radius } => z[0].hypot(z[1]) <= radius,
            Window::Square { side } => z[0].abs().max(z[1].abs()) <= 0.5 * side,
        }
    }

    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            Window::Disc { radius } => ("radius", radius),
            Window::Square { side } => ("side", side),
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain {
                name,
                value: v,
                requirement: "finite and >= 0",
            });
        }
        Ok(())
    }

    fn uniform_point<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        match *self {
            Window::Disc { radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let t = std::f64::consts::TAU * rng.random::<f64>();
                [r * t.cos(), r * t.sin()]
            }
            Window::Square { side } => [
                side * (rng.random::<f64>() - 0.5),
                side * (rng.random::<f64>() - 0.5),
            ],
        }
    }
}

fn poisson_count<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn check_intensity(intensity: f64) -> Result<()> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::Domain {
            name: "intensity",
            value: intensity,
            requirement: "finite and > 0",
        });
    }
    Ok(())
}

/// Homogeneous Poisson realization in `window`.
pub fn simulate_poisson(window: Window, intensity: f64, seed: u64) -> Result<Vec<[f64; 2]>> {
    check_intensity(intensity)?;
    window.validate()?;
    let mut rng = stream_rng(seed, 0);
    let n = poisson_count(intensity * window.area(), &mut rng);
    Ok((0..n).map(|_| window.uniform_point(&mut rng)).collect())
}

/// Point counts of `windows` independent Poisson realizations in `window`.
pub fn poisson_window_counts(
    window: Window,
    intensity: f64,
    windows: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    check_intensity(intensity)?;
    window.validate()?;
    let mean = intensity * window.area();
    Ok(run_chunked(windows, seed, |rng: &mut ChaCha8Rng, n| {
        (0..n).map(|_| poisson_count(mean, rng)).collect::<Vec<u64>>()
    }))
}

/// `P(N = k)` for a Poisson count with the given mean.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    let mut p = (-mean).exp();
    for j in 1..=k {
        p *= mean / j as f64;
    }
    p
}

/// `P(N >= k)` for a Poisson count with the given mean.
pub fn poisson_tail(mean: f64, k: u64) -> f64 {
    // Sum the upper tail directly to avoid cancellation for small means.
    let mut term = poisson_pmf(mean, k);
    let mut sum = 0.0;
    let mut j = k;
    while term > 0.0 && (term > 1e-18 * sum || j < k + 5) {
        sum += term;
        j += 1;
        term *= mean / j as f64;
    }
    sum
}

/// Bulk eigenvalues of one Ginibre matrix, rescaled to [`INTENSITY`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GinibreSample {
    pub n: usize,
    pub seed: u64,
    /// Factor applied to the eigenvalues.
    pub scale: f64,
    /// Retained points satisfy `|z| <= bulk_radius`.
    pub bulk_radius: f64,
    pub points: Vec<[f64; 2]>,
}

impl GinibreSample {
    pub fn density(&self) -> f64 {
        self.points.len() as f64 / (std::f64::consts::PI * self.bulk_radius.powi(2))
    }
}

/// Eigenvalues of an `n x n` matrix of i.i.d. standard complex Gaussians
/// (`E|g|^2 = 1`), which fill the disc of radius `sqrt(n)` with density
/// `1 / pi`, scaled by `sqrt(2 sqrt 3)` to density `1 / (2 sqrt(3) pi)`.
pub fn simulate_ginibre(n: usize, seed: u64) -> Result<GinibreSample> {
    if n < MIN_GINIBRE_N {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            requirement: ">= 64",
        });
    }
    let mut rng = stream_rng(seed, 0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    });
    let eigen = Schur::try_new(m, f64::EPSILON, SCHUR_MAX_ITERATIONS)
        .and_then(|schur| schur.eigenvalues())
        .ok_or(Error::NonConvergence {
            method: "complex Schur decomposition",
            iterations: SCHUR_MAX_ITERATIONS,
        })?;
    let scale = (2.0 * 3f64.sqrt()).sqrt();
    let bulk_radius = (1.0 - BULK_MARGIN) * scale * (n as f64).sqrt();
    let points = eigen
        .iter()
        .map(|z| [scale * z.re, scale * z.im])
        .filter(|z| z[0].hypot(z[1]) <= bulk_radius)
        .collect();
    Ok(GinibreSample {
        n,
        seed,
        scale,
        bulk_radius,
        points,
    })
}

/// Centres of disjoint discs of radius `rho` on a square lattice of
/// spacing `2 rho`, each disc lying inside the disc of radius `outer`.
pub fn window_centres(rho: f64, outer: f64) -> Vec<[f64; 2]> {
    let spacing = 2.0 * rho;
    let k = (outer / spacing).floor() as i64;
    let mut out = Vec::new();
    for j in -k..=k {
        for i in -k..=k {
            let c = [i as f64 * spacing, j as f64 * spacing];
            if c[0].hypot(c[1]) + rho <= outer {
                out.push(c);
            }
        }
    }
    out
}

/// Counts of `points` in each disc of radius `rho` about `centres`.
pub fn window_counts(points: &[[f64; 2]], centres: &[[f64; 2]], rho: f64) -> Vec<u64> {
    let spacing = 2.0 * rho;
    let key = |z: [f64; 2]| ((z[0] / spacing).round() as i64, (z[1] / spacing).round() as i64);
    let mut index = std::collections::HashMap::new();
    for (w, &c) in centres.iter().enumerate() {
        index.insert(key(c), w);
    }
    let mut counts = vec![0u64; centres.len()];
    for &p in points {
        // Each point lies within the disc of its nearest lattice site only.
        if let Some(&w) = index.get(&key(p)) {
            let c = centres[w];
            if (p[0] - c[0]).hypot(p[1] - c[1]) < rho {
                counts[w] += 1;
            }
        }
    }
    counts
}
