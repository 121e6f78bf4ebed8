//! Published small-r expansions and their log-log residual checks.
//!
//! Each check compares an exact evaluation with a truncated expansion over
//! a grid of separations and fits the slope of `log |residual|` against
//! `log r`; a correct expansion leaves a residual whose slope is the first
//! omitted order.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix6, Vector6};
use serde::Serialize;

use super::blocks::{covariance_blocks, Branch};
use super::conditional::{a_coefficients, conditional_covariance};
use crate::error::{Error, Result};

/// Allowed deviation of a fitted slope from its expected order.
pub const SLOPE_TOLERANCE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesQuantity {
    A,
    Lambda,
    SqrtLambda,
    Q,
    DetA,
    BcCoeffs,
}

impl SeriesQuantity {
    pub const EVERY: [SeriesQuantity; 6] = [
        SeriesQuantity::A,
        SeriesQuantity::Lambda,
        SeriesQuantity::SqrtLambda,
        SeriesQuantity::Q,
        SeriesQuantity::DetA,
        SeriesQuantity::BcCoeffs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesQuantity::A => "a",
            SeriesQuantity::Lambda => "lambda",
            SeriesQuantity::SqrtLambda => "sqrt_lambda",
            SeriesQuantity::Q => "q",
            SeriesQuantity::DetA => "det_a",
            SeriesQuantity::BcCoeffs => "b_c_coeffs",
        }
    }
}

impl fmt::Display for SeriesQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeriesQuantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeriesQuantity::EVERY
            .into_iter()
            .find(|q| q.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::Precondition(format!("unknown series quantity `{s}`")))
    }
}

/// How a fitted slope is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeCheck {
    /// `|slope - expected| <= SLOPE_TOLERANCE`.
    Equal,
    /// `slope >= expected - SLOPE_TOLERANCE` (only an upper bound on the
    /// size of the quantity is known).
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeRow {
    pub name: String,
    pub expected: f64,
    pub fitted: f64,
    pub check: SlopeCheck,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub quantity: SeriesQuantity,
    pub r_grid: Vec<f64>,
    pub rows: Vec<SlopeRow>,
}

impl SeriesReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// `n` log-spaced separations in `[0.12, 0.3]`.
pub fn default_grid(n: usize) -> Vec<f64> {
    let (lo, hi) = (0.12f64.ln(), 0.3f64.ln());
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Three-term expansions of `a_1..a_8` as coefficients of `r^2, r^4, r^6`.
pub fn a_series_coefficients() -> [[f64; 3]; 8] {
    [
        [-13.0 / 3456.0, -151.0 / 497664.0, -1531.0 / 71663616.0],
        [1.0 / 128.0, 1.0 / 18432.0, -23.0 / 4423680.0],
        [1.0 / 128.0, 41.0 / 55296.0, 2617.0 / 39813120.0],
        [-5.0 / 1152.0, -23.0 / 165888.0, 521.0 / 119439360.0],
        [-67.0 / 3456.0, 497.0 / 497664.0, 3523.0 / 358318080.0],
        [-1.0 / 128.0, 1.0 / 18432.0, 19.0 / 4423680.0],
        [-1.0 / 128.0, -31.0 / 55296.0, -2621.0 / 39813120.0],
        [13.0 / 1152.0, -23.0 / 165888.0, 7.0 / 23887872.0],
    ]
}

/// Expansions of `lambda_i` as coefficients of `r^0, r^2, r^4, r^6`
/// (`lambda_3` has none).
pub fn lambda_series_coefficients() -> [Option<[f64; 4]>; 6] {
    [
        Some([0.0, 1.0 / 64.0, 0.0, -7.0 / 737280.0]),
        Some([0.0, 0.0, 1.0 / 9216.0, -1.0 / 1105920.0]),
        None,
        Some([0.0, 1.0 / 32.0, 0.0, 37.0 / 368640.0]),
        Some([0.0, 0.0, 1.0 / 9216.0, 7.0 / 2211840.0]),
        Some([2.0 / 3.0, -5.0 / 216.0, 191.0 / 248832.0, -2651.0 / 179159040.0]),
    ]
}

/// Leading terms of `sqrt(lambda_i)` as `(coefficient, power of r)` pairs
/// and the first omitted order. `sqrt(lambda_1) = r / 8`, which is what
/// `lambda_1 = r^2 / 64` forces.
pub fn sqrt_lambda_series() -> [(Vec<(f64, i32)>, f64); 6] {
    let s6 = 6f64.sqrt();
    [
        (vec![(1.0 / 8.0, 1)], 5.0),
        (vec![(1.0 / 96.0, 2)], 4.0),
        (vec![], 4.0),
        (vec![(1.0 / (4.0 * SQRT_2), 1)], 5.0),
        (vec![(1.0 / 96.0, 2)], 4.0),
        (
            vec![((2.0f64 / 3.0).sqrt(), 0), (-5.0 / (144.0 * s6), 2)],
            4.0,
        ),
    ]
}

/// `Q(r) = Q0 + r^2 Q2 + O(r^4)`. The entry `Q2[2][5]` is `+1/(2^5 3 sqrt 2)`;
/// orthogonality of `Q` at order `r^2` (`Q0^T Q2` antisymmetric) fixes its sign.
pub fn q_expansion() -> (Matrix6<f64>, Matrix6<f64>) {
    let h = 0.5;
    let s = 1.0 / SQRT_2;
    #[rustfmt::skip]
    let q0 = Matrix6::from_row_slice(&[
        0.0, 0.0, -h, h, 0.0, s,
        -s, s, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, -h, -h, s, 0.0,
        0.0, 0.0, h, -h, 0.0, s,
        s, s, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, h, h, s, 0.0,
    ]);
    let e = 1.0 / 48.0;
    let k = 1.0 / (96.0 * SQRT_2);
    #[rustfmt::skip]
    let q2 = Matrix6::from_row_slice(&[
        0.0, 0.0, -e, -e, -k, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, e, -e, 0.0, k,
        0.0, 0.0, e, e, -k, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, -e, e, 0.0, k,
    ]);
    (q0, q2)
}

/// Leading terms `(b10 + b12 r^2, c11 r + c12 r^2, b20 + b22 r^2,
/// c21 r + c22 r^2)` of the characteristic coefficients for a fixed `xi`.
pub fn bc_expansion(xi: &Vector6<f64>, r: f64) -> [f64; 4] {
    let (x1, x4, x5, x6) = (xi[0], xi[3], xi[4], xi[5]);
    let s2 = SQRT_2;
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let b = -x6 / s3 + (x6 / (144.0 * s3) - x5 / (96.0 * s2)) * r * r;
    let c11 = -x4 * x6 / (8.0 * s6);
    let c12 = (-9.0 * x1 * x1 - 9.0 * x4 * x4 + 2.0 * s6 * x6 * x5 + 4.0 * x6 * x6) / 1152.0;
    [b, c11 * r + c12 * r * r, b, -c11 * r + c12 * r * r]
}

/// Fixed standard-normal-like test vectors for the `b`, `c` check.
pub fn bc_test_vectors() -> [Vector6<f64>; 3] {
    [
        Vector6::new(0.3, -1.1, 0.7, 1.3, -0.4, 0.9),
        Vector6::new(-1.2, 0.5, 0.2, -0.8, 1.6, -0.6),
        Vector6::new(0.9, 0.9, -1.4, 0.4, 0.3, 1.7),
    ]
}

/// `(b1, c1, b2, c2)` from the exact factorisation at separation `r`.
pub fn bc_exact(xi: &Vector6<f64>, r: f64) -> Result<[f64; 4]> {
    let z = conditional_covariance(r)?.sampling_factor() * xi;
    Ok([
        -(z[0] + z[2]),
        z[0] * z[2] - z[1] * z[1],
        -(z[3] + z[5]),
        z[3] * z[5] - z[4] * z[4],
    ])
}

fn poly(coeffs: &[f64], r: f64, step: i32) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * r.powi(step * i as i32))
        .sum()
}

fn row(name: String, expected: f64, check: SlopeCheck, grid: &[f64], res: &[f64]) -> SlopeRow {
    let fitted = if res.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        f64::NAN
    } else {
        loglog_slope(grid, res)
    };
    let pass = match check {
        SlopeCheck::Equal => (fitted - expected).abs() <= SLOPE_TOLERANCE,
        SlopeCheck::AtLeast => fitted >= expected - SLOPE_TOLERANCE,
    };
    SlopeRow {
        name,
        expected,
        fitted,
        check,
        pass,
    }
}

/// Fits residual slopes for `quantity` over `r_grid`.
pub fn verify_series(quantity: SeriesQuantity, r_grid: &[f64]) -> Result<SeriesReport> {
    if r_grid.len() < 3 {
        return Err(Error::Precondition(
            "r_grid needs at least 3 points for a slope fit".into(),
        ));
    }
    if let Some(&r) = r_grid.iter().find(|&&r| !(r > 0.0 && r <= 0.3)) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            requirement: "0 < r <= 0.3",
        });
    }
    let g = r_grid;
    let mut rows = Vec::new();
    match quantity {
        SeriesQuantity::A => {
            let table = a_series_coefficients();
            let exact: Vec<[f64; 8]> = g
                .iter()
                .map(|&r| a_coefficients(r, Branch::Auto))
                .collect::<Result<_>>()?;
            for i in 0..8 {
                let res: Vec<f64> = g
                    .iter()
                    .zip(&exact)
                    .map(|(&r, a)| a[i] - r * r * poly(&table[i], r, 2))
                    .collect();
                rows.push(row(format!("a{}", i + 1), 8.0, SlopeCheck::Equal, g, &res));
            }
        }
        SeriesQuantity::Lambda | SeriesQuantity::SqrtLambda => {
            let lambdas: Vec<[f64; 6]> = g
                .iter()
                .map(|&r| conditional_covariance(r).map(|c| c.lambdas))
                .collect::<Result<_>>()?;
            if quantity == SeriesQuantity::Lambda {
                for (i, s) in lambda_series_coefficients().iter().enumerate() {
                    let (res, check): (Vec<f64>, _) = match s {
                        Some(c) => (
                            g.iter()
                                .zip(&lambdas)
                                .map(|(&r, l)| l[i] - poly(c, r, 2))
                                .collect(),
                            SlopeCheck::Equal,
                        ),
                        None => (lambdas.iter().map(|l| l[i]).collect(), SlopeCheck::AtLeast),
                    };
                    rows.push(row(format!("lambda{}", i + 1), 8.0, check, g, &res));
                }
            } else {
                for (i, (terms, order)) in sqrt_lambda_series().iter().enumerate() {
                    let res: Vec<f64> = g
                        .iter()
                        .zip(&lambdas)
                        .map(|(&r, l)| {
                            l[i].max(0.0).sqrt()
                                - terms.iter().map(|(c, p)| c * r.powi(*p)).sum::<f64>()
                        })
                        .collect();
                    let check = if terms.is_empty() {
                        SlopeCheck::AtLeast
                    } else {
                        SlopeCheck::Equal
                    };
                    rows.push(row(format!("sqrt_lambda{}", i + 1), *order, check, g, &res));
                }
            }
        }
        SeriesQuantity::Q => {
            let (q0, q2) = q_expansion();
            let res: Vec<f64> = g
                .iter()
                .map(|&r| {
                    conditional_covariance(r).map(|c| (c.q - q0 - q2 * (r * r)).abs().max())
                })
                .collect::<Result<_>>()?;
            rows.push(row("q".into(), 4.0, SlopeCheck::Equal, g, &res));
        }
        SeriesQuantity::DetA => {
            let res: Vec<f64> = g
                .iter()
                .map(|&r| covariance_blocks(r).map(|b| b.det_a - 3.0 * r.powi(4) / 256.0))
                .collect::<Result<_>>()?;
            rows.push(row("det_a".into(), 6.0, SlopeCheck::Equal, g, &res));
        }
        SeriesQuantity::BcCoeffs => {
            let names = ["b1", "c1", "b2", "c2"];
            let vectors = bc_test_vectors();
            for (k, name) in names.iter().enumerate() {
                let res: Vec<f64> = g
                    .iter()
                    .map(|&r| {
                        let mut worst: f64 = 0.0;
                        for xi in &vectors {
                            let exact = bc_exact(xi, r)?;
                            let approx = bc_expansion(xi, r);
                            worst = worst.max((exact[k] - approx[k]).abs());
                        }
                        Ok(worst)
                    })
                    .collect::<Result<_>>()?;
                rows.push(row(name.to_string(), 3.0, SlopeCheck::Equal, g, &res));
            }
        }
    }
    Ok(SeriesReport {
        quantity,
        r_grid: g.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q2_correction_keeps_q_orthogonal_to_second_order() {
        let (q0, q2) = q_expansion();
        let m = q0.transpose() * q2;
        assert!((m + m.transpose()).abs().max() < 1e-15);
        assert!((q0.transpose() * q0 - Matrix6::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn every_expansion_has_expected_residual_order() {
        let grid = default_grid(8);
        for q in SeriesQuantity::EVERY {
            let rep = verify_series(q, &grid).unwrap();
            assert!(rep.all_pass(), "{q}");
        }
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.2, 0.3];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(5)).collect();
        assert!((loglog_slope(&x, &y) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(verify_series(SeriesQuantity::A, &[0.1, 0.2]).is_err());
        assert!(verify_series(SeriesQuantity::A, &[0.1, 0.2, 0.5]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for q in SeriesQuantity::EVERY {
            assert_eq!(q.name().parse::<SeriesQuantity>().unwrap(), q);
        }
    }

    #[test]
    fn lambda_table_matches_published_factorisations() {
        let t = lambda_series_coefficients();
        let l6 = t[5].unwrap();
        assert_eq!(l6[3], -11.0 * 241.0 / (16384.0 * 2187.0 * 5.0));
        assert_eq!(t[0].unwrap()[3], -7.0 / (16384.0 * 9.0 * 5.0));
        assert_eq!(t[3].unwrap()[3], 37.0 / (8192.0 * 9.0 * 5.0));
        assert_eq!(t[4].unwrap()[3], 7.0 / (16384.0 * 27.0 * 5.0));
        assert_eq!(t[1].unwrap()[3], -1.0 / (8192.0 * 27.0 * 5.0));
        assert_eq!(l6[2], 191.0 / (1024.0 * 243.0));
    }
}
