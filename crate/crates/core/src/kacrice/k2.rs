//! Monte Carlo evaluation of the two-point function `K2(r)`.
//!
//! `K2(r) = (2 pi)^-2 det A(r)^-1/2 E|det H(z)| |det H(w)|` where the
//! Hessians are drawn from the conditional covariance `delta(r)` through
//! `zeta = Q diag(sqrt(lambda)) xi` with `xi` standard normal.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix6, Vector6};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::blocks::covariance_blocks;
use super::conditional::{conditional_covariance, EigenSource};
use super::k2_limit;
use crate::error::{Error, Result};
use crate::mc::{run_chunked, Estimate, Moments};
use crate::special_math::rng::derive_seed;

/// Smallest sample budget accepted by the estimators.
pub const MIN_SAMPLES: usize = 10_000;

const SPHERE_TAG: u64 = 0x5350_4845_5245;

/// Which ordered pairs of critical point kinds are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypePair {
    All,
    MinMin,
    MaxMax,
    /// Symmetrised: half of (min, max) plus half of (max, min).
    MinMax,
    SaddleSaddle,
    /// Symmetrised: half of (extremum, saddle) plus half of (saddle, extremum).
    ExtremumSaddle,
    ExtremumExtremum,
}

impl TypePair {
    pub const EVERY: [TypePair; 7] = [
        TypePair::All,
        TypePair::MinMin,
        TypePair::MaxMax,
        TypePair::MinMax,
        TypePair::SaddleSaddle,
        TypePair::ExtremumSaddle,
        TypePair::ExtremumExtremum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TypePair::All => "all",
            TypePair::MinMin => "min_min",
            TypePair::MaxMax => "max_max",
            TypePair::MinMax => "min_max",
            TypePair::SaddleSaddle => "saddle_saddle",
            TypePair::ExtremumSaddle => "extremum_saddle",
            TypePair::ExtremumExtremum => "extremum_extremum",
        }
    }

    fn index(self) -> usize {
        TypePair::EVERY.iter().position(|&p| p == self).expect("listed")
    }
}

impl fmt::Display for TypePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TypePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TypePair::EVERY
            .into_iter()
            .find(|p| p.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::Precondition(format!("unknown type pair `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Min,
    Max,
    Saddle,
}

/// Kind from `b = -trace` and `c = det`.
fn kind(b: f64, c: f64) -> Kind {
    if c < 0.0 {
        Kind::Saddle
    } else if b < 0.0 {
        Kind::Min
    } else {
        Kind::Max
    }
}

/// Mask weights of an ordered pair of kinds, in `TypePair::EVERY` order.
fn pair_weights(k1: Kind, k2: Kind) -> [f64; 7] {
    use Kind::*;
    let ext = |k| k != Saddle;
    let both = |a, b| if k1 == a && k2 == b { 1.0 } else { 0.0 };
    let min_max = 0.5 * (both(Min, Max) + both(Max, Min));
    let ext_saddle = 0.5
        * (if ext(k1) && k2 == Saddle { 1.0 } else { 0.0 }
            + if k1 == Saddle && ext(k2) { 1.0 } else { 0.0 });
    let ext_ext = if ext(k1) && ext(k2) { 1.0 } else { 0.0 };
    [
        1.0,
        both(Min, Min),
        both(Max, Max),
        min_max,
        both(Saddle, Saddle),
        ext_saddle,
        ext_ext,
    ]
}

/// Two-point function estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct K2Estimate {
    pub r: f64,
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub type_pair: TypePair,
    #[serde(skip)]
    pub eigen_source: EigenSource,
}

struct Sampler {
    det_a: f64,
    pref: f64,
    factor: Matrix6<f64>,
    source: EigenSource,
}

impl Sampler {
    fn new(r: f64) -> Result<Self> {
        let blocks = covariance_blocks(r)?;
        let cond = conditional_covariance(r)?;
        if cond.source == EigenSource::JacobiFallback {
            log::warn!("K2 sampler at r = {r} uses Jacobi eigenvectors");
        }
        Ok(Sampler {
            det_a: blocks.det_a,
            pref: 1.0 / ((2.0 * PI).powi(2) * blocks.det_a.sqrt()),
            factor: cond.sampling_factor(),
            source: cond.source,
        })
    }

    /// `(b1, c1, b2, c2)` for the Hessian pair generated by `xi`.
    fn coefficients(&self, xi: &Vector6<f64>) -> (f64, f64, f64, f64) {
        let z = self.factor * xi;
        (
            -(z[0] + z[2]),
            z[0] * z[2] - z[1] * z[1],
            -(z[3] + z[5]),
            z[3] * z[5] - z[4] * z[4],
        )
    }

    fn estimate(&self, r: f64, m: &Moments, pair: TypePair) -> K2Estimate {
        K2Estimate {
            r,
            value: m.mean,
            std_error: m.std_error(),
            samples: m.n,
            type_pair: pair,
            eigen_source: self.source,
        }
    }
}

fn gaussian6<R: Rng>(rng: &mut R) -> Vector6<f64> {
    Vector6::from_fn(|_, _| rng.sample(StandardNormal))
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::Domain {
            name: "samples",
            value: samples as f64,
            requirement: ">= 10000",
        });
    }
    Ok(())
}

/// `K2(r)` by plain Monte Carlo.
pub fn k2(r: f64, samples: usize, seed: u64) -> Result<K2Estimate> {
    check_samples(samples)?;
    let s = Sampler::new(r)?;
    let m: Moments = run_chunked(samples, seed, |rng, n| {
        let mut acc = Moments::default();
        for _ in 0..n {
            let (_, c1, _, c2) = s.coefficients(&gaussian6(rng));
            acc.push(s.pref * (c1 * c2).abs());
        }
        acc
    });
    Ok(s.estimate(r, &m, TypePair::All))
}

/// All type-restricted estimates from one common stream of draws, in
/// `TypePair::EVERY` order. Uses the same draws as [`k2`] for equal seeds.
pub fn k2_all_types(r: f64, samples: usize, seed: u64) -> Result<Vec<K2Estimate>> {
    check_samples(samples)?;
    let s = Sampler::new(r)?;
    let m: [Moments; 7] = run_chunked(samples, seed, |rng, n| {
        let mut acc = [Moments::default(); 7];
        for _ in 0..n {
            let (b1, c1, b2, c2) = s.coefficients(&gaussian6(rng));
            let v = s.pref * (c1 * c2).abs();
            let w = pair_weights(kind(b1, c1), kind(b2, c2));
            debug_assert_eq!(w[1] + w[2] + 2.0 * w[3] + w[4] + 2.0 * w[5], 1.0);
            for (a, wi) in acc.iter_mut().zip(w) {
                a.push(v * wi);
            }
        }
        acc
    });
    Ok(TypePair::EVERY
        .iter()
        .map(|&p| s.estimate(r, &m[p.index()], p))
        .collect())
}

pub fn k2_typed(r: f64, pair: TypePair, samples: usize, seed: u64) -> Result<K2Estimate> {
    if pair == TypePair::All {
        return k2(r, samples, seed);
    }
    Ok(k2_all_types(r, samples, seed)?[pair.index()])
}

/// `K2(r)` as `12 / (pi^5 sqrt(det A)) * |S^5| * mean |c1 c2|` over points
/// drawn uniformly on the unit sphere `S^5` (`|S^5| = pi^3`). The draws are
/// independent of those used by [`k2`] with the same seed.
pub fn k2_spherical_crosscheck(r: f64, samples: usize, seed: u64) -> Result<K2Estimate> {
    check_samples(samples)?;
    let s = Sampler::new(r)?;
    let pref = 12.0 / (PI.powi(5) * s.det_a.sqrt()) * PI.powi(3);
    let m: Moments = run_chunked(samples, derive_seed(seed, SPHERE_TAG, 0), |rng, n| {
        let mut acc = Moments::default();
        for _ in 0..n {
            let xi = gaussian6(rng);
            let (_, c1, _, c2) = s.coefficients(&(xi / xi.norm()));
            acc.push(pref * (c1 * c2).abs());
        }
        acc
    });
    Ok(s.estimate(r, &m, TypePair::All))
}

/// Common-random-numbers estimate of `K2(r) - K2(0+)`.
///
/// Each draw contributes `pref |c1 c2| - K2(0+) xi_4^2 xi_6^2`; the second
/// term has mean exactly `K2(0+)` and cancels the leading behaviour of the
/// first draw by draw, so the `O(r^2)` deviation is resolved with far fewer
/// samples than a difference of two independent [`k2`] runs.
pub fn k2_limit_deviation(r: f64, samples: usize, seed: u64) -> Result<Estimate> {
    check_samples(samples)?;
    let s = Sampler::new(r)?;
    let limit = k2_limit();
    let m: Moments = run_chunked(samples, seed, |rng, n| {
        let mut acc = Moments::default();
        for _ in 0..n {
            let xi = gaussian6(rng);
            let (_, c1, _, c2) = s.coefficients(&xi);
            acc.push(s.pref * (c1 * c2).abs() - limit * xi[3] * xi[3] * xi[5] * xi[5]);
        }
        acc
    });
    Ok(m.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_weights_partition() {
        let kinds = [Kind::Min, Kind::Max, Kind::Saddle];
        for &a in &kinds {
            for &b in &kinds {
                let w = pair_weights(a, b);
                assert_eq!(w[1] + w[2] + 2.0 * w[3] + w[4] + 2.0 * w[5], 1.0);
                assert_eq!(w[1] + w[2] + 2.0 * w[3], w[6]);
            }
        }
    }

    #[test]
    fn kinds_from_b_and_c() {
        assert_eq!(kind(-2.0, 1.0), Kind::Min);
        assert_eq!(kind(2.0, 1.0), Kind::Max);
        assert_eq!(kind(0.5, -1.0), Kind::Saddle);
    }

    #[test]
    fn type_pair_names_round_trip() {
        for p in TypePair::EVERY {
            assert_eq!(p.name().parse::<TypePair>().unwrap(), p);
        }
        assert!("bogus".parse::<TypePair>().is_err());
        assert_eq!("extremum-saddle".parse::<TypePair>().unwrap(), TypePair::ExtremumSaddle);
    }

    #[test]
    fn preconditions() {
        assert!(k2(0.1, 100, 1).is_err());
        assert!(k2(-0.1, 20_000, 1).is_err());
        assert!(k2(0.0, 20_000, 1).is_err());
    }

    #[test]
    fn typed_all_equals_plain() {
        let a = k2(0.3, 20_000, 4).unwrap();
        let t = k2_all_types(0.3, 20_000, 4).unwrap();
        assert!((a.value - t[0].value).abs() < 1e-15 * a.value);
        let sum = t[1].value + t[2].value + 2.0 * t[3].value + t[4].value + 2.0 * t[5].value;
        assert!((sum - a.value).abs() < 1e-12 * a.value);
    }

    #[test]
    fn limit_value_at_small_r() {
        let e = k2(0.01, 200_000, 8).unwrap();
        let lim = k2_limit();
        assert!((e.value - lim).abs() < (0.05 * lim).max(3.0 * e.std_error));
    }
}
