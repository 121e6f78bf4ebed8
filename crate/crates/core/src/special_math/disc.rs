//! Pair-distance reduction for double integrals over a disc.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special_math::quadrature::gauss_legendre_on;

/// Area of the intersection of two radius-`rho` discs whose centres are `r`
/// apart.
pub fn disc_overlap_kernel(r: f64, rho: f64) -> Result<f64> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            requirement: "finite and > 0",
        });
    }
    if !(0.0..=2.0 * rho).contains(&r) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            requirement: "0 <= r <= 2 rho",
        });
    }
    let u = (r / (2.0 * rho)).min(1.0);
    Ok(2.0 * rho * rho * u.acos() - 0.5 * r * (4.0 * rho * rho - r * r).max(0.0).sqrt())
}

/// Weighted nodes for `int_0^{2 rho} f(r) 2 pi r overlap(r, rho) dr`, which
/// equals the double integral of `f(|z - w|)` over `B(rho) x B(rho)`.
/// Each entry is `(r, w)` with the full weight `w = gl_weight * 2 pi r
/// overlap(r)` folded in.
pub fn pair_quadrature(rho: f64, nodes: usize) -> Result<Vec<(f64, f64)>> {
    disc_overlap_kernel(0.0, rho)?;
    gauss_legendre_on(nodes, 0.0, 2.0 * rho)?
        .into_iter()
        .map(|(r, w)| Ok((r, w * 2.0 * PI * r * disc_overlap_kernel(r, rho)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let rho = 0.7;
        assert!((disc_overlap_kernel(0.0, rho).unwrap() - PI * rho * rho).abs() < 1e-15);
        assert!(disc_overlap_kernel(2.0 * rho, rho).unwrap().abs() < 1e-15);
        assert!(disc_overlap_kernel(-0.1, rho).is_err());
        assert!(disc_overlap_kernel(1.5, rho).is_err());
    }

    #[test]
    fn total_pair_measure() {
        let rho = 0.3;
        let total: f64 = pair_quadrature(rho, 64).unwrap().iter().map(|(_, w)| w).sum();
        assert!((total - (PI * rho * rho).powi(2)).abs() < 1e-10);
    }

    #[test]
    fn monotone_decreasing() {
        let rho = 1.3;
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let r = 2.0 * rho * i as f64 / 1000.0;
            let v = disc_overlap_kernel(r, rho).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }
}
