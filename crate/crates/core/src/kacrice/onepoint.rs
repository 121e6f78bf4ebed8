//! One-point function and expected counts.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::blocks::one_point_covariance;
use crate::error::{Error, Result};
use crate::mc::{run_chunked, Estimate, Moments};

/// `K1 = phi(0) E|det H| = (1/pi) (1/8) (4/sqrt 3)`: the gradient density at
/// zero times the mean absolute Hessian determinant.
pub fn k1_density() -> f64 {
    let gradient_density = 1.0 / PI;
    gradient_density * 0.125 * 4.0 / 3f64.sqrt()
}

/// Expected number of critical points in a disc of radius `rho`.
pub fn expected_count(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(PI * rho * rho * k1_density())
}

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            requirement: "finite and >= 0",
        });
    }
    Ok(())
}

/// Expected counts by kind; `4 min = 4 max = 2 saddle = 2 extrema = total`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedCounts {
    pub total: f64,
    pub min: f64,
    pub max: f64,
    pub saddle: f64,
    pub extrema: f64,
}

pub fn expected_counts(rho: f64) -> Result<ExpectedCounts> {
    let total = expected_count(rho)?;
    Ok(ExpectedCounts {
        total,
        min: total / 4.0,
        max: total / 4.0,
        saddle: total / 2.0,
        extrema: total / 2.0,
    })
}

/// Monte Carlo estimate of `E|det H|` with `H` drawn from the one-point
/// Hessian covariance.
pub fn abs_det_hessian_mc(samples: usize, seed: u64) -> Result<Estimate> {
    if samples < 2 {
        return Err(Error::Domain {
            name: "samples",
            value: samples as f64,
            requirement: ">= 2",
        });
    }
    let l = one_point_covariance()
        .c
        .cholesky()
        .expect("one-point Hessian covariance is positive definite")
        .l();
    let m = run_chunked(samples, seed, |rng, n| {
        let mut acc = Moments::default();
        for _ in 0..n {
            let x = nalgebra::Vector3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            let h = l * x;
            acc.push((h[0] * h[2] - h[1] * h[1]).abs());
        }
        acc
    });
    Ok(m.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_value() {
        assert!((k1_density() - 0.0918881).abs() < 1e-7);
        assert!((k1_density() - super::super::K1).abs() < 1e-16);
    }

    #[test]
    fn counts() {
        assert!((expected_count(1.0).unwrap() - 0.2886751).abs() < 1e-7);
        assert_eq!(expected_count(0.0).unwrap(), 0.0);
        let c = expected_counts(1.0).unwrap();
        assert!((c.saddle - 0.1443376).abs() < 1e-7);
        assert!((4.0 * c.min - c.total).abs() < 1e-15);
        assert!(expected_count(-1.0).is_err());
    }

    #[test]
    fn abs_det_small_run() {
        let e = abs_det_hessian_mc(200_000, 5).unwrap();
        let exact = 1.0 / (2.0 * 3f64.sqrt());
        assert!((e.value - exact).abs() < 4.0 * e.std_error);
    }
}
