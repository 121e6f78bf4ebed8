//! Gauss-Legendre rules.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Domain {
            name: "nodes",
            value: 0.0,
            requirement: ">= 1",
        });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for iter in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
            if iter == 99 {
                return Err(Error::NonConvergence {
                    method: "Gauss-Legendre node refinement",
                    iterations: 100,
                });
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// `n`-point Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let (x, w) = gauss_legendre(n)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect())
}

/// `int_0^inf t^k exp(-t^2/2) dt` by composite Gauss-Legendre on `[0, 40]`.
pub fn gaussian_radial_moment(k: u32) -> f64 {
    const PANELS: usize = 40;
    const NODES: usize = 32;
    let (x, w) = gauss_legendre(NODES).expect("fixed rule");
    let width = 40.0 / PANELS as f64;
    let mut total = 0.0;
    for panel in 0..PANELS {
        let mid = (panel as f64 + 0.5) * width;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let t = mid + 0.5 * width * xi;
            s += wi * t.powi(k as i32) * (-0.5 * t * t).exp();
        }
        total += 0.5 * width * s;
    }
    total
}
