//! Second factorial moment of the number of critical points in a disc.
//!
//! `E[N (N - 1)] = int_{B(rho)^2} K2(|z - w|) dz dw
//!              = int_0^{2 rho} K2(r) 2 pi r overlap(r, rho) dr`.

use serde::Serialize;

use super::k2::k2;
use super::onepoint::expected_count;
use super::second_moment_coefficient;
use crate::error::{Error, Result};
use crate::special_math::disc::pair_quadrature;
use crate::special_math::rng::derive_seed;

/// Default number of Gauss-Legendre nodes on `[0, 2 rho]`.
pub const DEFAULT_NODES: usize = 64;

const NODE_TAG: u64 = 0x4D4F_4D32;

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureNode {
    pub r: f64,
    pub weight: f64,
    pub k2: f64,
    pub k2_std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentQuadrature {
    pub rho: f64,
    pub value: f64,
    pub std_error: f64,
    pub nodes: Vec<QuadratureNode>,
    /// `|rule(n) - rule(n/2)|` for the pair measure, a deterministic
    /// indicator of the quadrature error.
    pub quadrature_check: f64,
}

/// Deterministic version of the reduction for a known kernel `f`.
pub fn pair_integral<F: Fn(f64) -> f64>(rho: f64, nodes: usize, f: F) -> Result<f64> {
    Ok(pair_quadrature(rho, nodes)?
        .into_iter()
        .map(|(r, w)| w * f(r))
        .sum())
}

/// Quadrature of Monte Carlo `K2` values. Node `i` uses an independent
/// seed derived from `(seed, i)`; node errors are propagated through the
/// quadrature weights.
pub fn second_factorial_moment(
    rho: f64,
    nodes: usize,
    samples_per_node: usize,
    seed: u64,
) -> Result<MomentQuadrature> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            requirement: "finite and > 0",
        });
    }
    if nodes < 2 {
        return Err(Error::Domain {
            name: "nodes",
            value: nodes as f64,
            requirement: ">= 2",
        });
    }
    let rule = pair_quadrature(rho, nodes)?;
    let exact = (std::f64::consts::PI * rho * rho).powi(2);
    let coarse: f64 = pair_quadrature(rho, nodes / 2)?.iter().map(|(_, w)| w).sum();
    let fine: f64 = rule.iter().map(|(_, w)| w).sum();
    let quadrature_check = (fine - coarse).abs().max((fine - exact).abs()) / exact;
    if quadrature_check > 1e-6 {
        log::warn!("pair quadrature at rho = {rho} has relative error indicator {quadrature_check:e}");
    }
    let mut value = 0.0;
    let mut var = 0.0;
    let mut out = Vec::with_capacity(nodes);
    for (i, &(r, w)) in rule.iter().enumerate() {
        let e = k2(r, samples_per_node, derive_seed(seed, NODE_TAG, i as u64))?;
        value += w * e.value;
        var += (w * e.std_error).powi(2);
        out.push(QuadratureNode {
            r,
            weight: w,
            k2: e.value,
            k2_std_error: e.std_error,
        });
    }
    Ok(MomentQuadrature {
        rho,
        value,
        std_error: var.sqrt(),
        nodes: out,
        quadrature_check,
    })
}

/// Leading-order `E[N (N - 1)] ~ rho^4 / (2^5 3 sqrt 3)`.
pub fn second_factorial_leading(rho: f64) -> f64 {
    second_moment_coefficient() * rho.powi(4)
}

/// `Var N = E[N (N - 1)] + E[N] - E[N]^2` with the leading-order second
/// factorial moment: `rho^2 / (2 sqrt 3) - (8 sqrt 3 - 1) / (2^5 3 sqrt 3) rho^4`.
pub fn variance_leading(rho: f64) -> Result<f64> {
    let mean = expected_count(rho)?;
    Ok(second_factorial_leading(rho) + mean - mean * mean)
}
