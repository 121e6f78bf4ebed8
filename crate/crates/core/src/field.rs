//! Realizations of the random plane wave
//! `Psi(r, theta) = Re sum_n a_n J_|n|(r) e^{i n theta}` with `k = 1`.
//!
//! Jets are assembled from `G_m = J_m(r) e^{i m theta}` (with
//! `J_{-m} = (-1)^m J_m`), which satisfy
//! `d/dx G_m = (G_{m-1} - G_{m+1}) / 2` and `d/dy G_m = i (G_{m-1} + G_{m+1}) / 2`.
//! Writing the field as `Re sum_n b_n G_n` and `S_k = sum_n b_n G_{n+k}`,
//! every derivative is a short combination of the `S_k`, with no
//! singularity at the origin.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_math::bessel::{bessel_j_array, MAX_ARGUMENT, MAX_ORDER};
use crate::special_math::rng::{gaussian_pair_at, stream_rng, zigzag};

/// Extra orders added to `ceil(e R / 2)`.
pub const TRUNCATION_MARGIN: usize = 12;

/// `J_{N-2}(R)` must fall below this for the truncation order `N`.
pub const TAIL_BOUND: f64 = 1e-14;

/// Orders added when certifying a truncation.
pub const CERTIFY_EXTRA: usize = 16;

/// One realization of the field, truncated to `|n| <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub seed: u64,
    pub truncation_order: usize,
    pub domain_radius: f64,
    pub wavenumber: f64,
    /// `a_n` for `n = -N..=N`, stored at index `n + N`.
    pub coefficients: Vec<Complex64>,
    /// `b_n = a_n` for `n >= 0` and `(-1)^n a_n` for `n < 0`.
    b: Vec<Complex64>,
}

/// Reproducibility record of a realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub seed: u64,
    pub truncation_order: usize,
    pub domain_radius: f64,
    pub wavenumber: f64,
}

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub value: f64,
    pub gradient: Vector2<f64>,
    pub hessian: Matrix2<f64>,
}

impl FieldJet {
    /// `trace H + Psi`, zero for a solution of the Helmholtz equation.
    pub fn helmholtz_residual(&self) -> f64 {
        self.hessian.trace() + self.value
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !radius.is_finite() || radius <= 0.0 || radius > MAX_ARGUMENT {
        return Err(Error::Domain {
            name: "R",
            value: radius,
            requirement: "0 < R <= 1e4",
        });
    }
    Ok(())
}

/// Truncation order for the disc of radius `radius`.
pub fn truncation_order(radius: f64) -> Result<usize> {
    check_radius(radius)?;
    let base = (std::f64::consts::E * radius / 2.0).ceil() as usize + TRUNCATION_MARGIN;
    let limit = MAX_ORDER - CERTIFY_EXTRA - 3;
    if base > limit {
        return Err(Error::Domain {
            name: "R",
            value: radius,
            requirement: "small enough for the supported Bessel orders",
        });
    }
    let j = bessel_j_array(limit, radius)?;
    let tail = (2..=limit).find(|&n| j[n - 2].abs() <= TAIL_BOUND).unwrap_or(limit);
    Ok(base.max(tail))
}

/// Coefficient `a_n`; depends only on `(seed, n)`.
pub fn coefficient(seed: u64, n: i64) -> Complex64 {
    let mut rng = stream_rng(seed, 0);
    let (re, im) = gaussian_pair_at(&mut rng, zigzag(n));
    Complex64::new(re, im)
}

/// A realization certified on the disc of radius `radius`.
pub fn sample_field(seed: u64, radius: f64) -> Result<FieldSample> {
    let n = truncation_order(radius)?;
    sample_field_with_order(seed, radius, n)
}

/// A realization with an explicit truncation order.
pub fn sample_field_with_order(seed: u64, radius: f64, order: usize) -> Result<FieldSample> {
    check_radius(radius)?;
    if order + 3 > MAX_ORDER {
        return Err(Error::Domain {
            name: "truncation_order",
            value: order as f64,
            requirement: "<= MAX_ORDER - 3",
        });
    }
    let mut rng = stream_rng(seed, 0);
    let n = order as i64;
    let coefficients = (-n..=n)
        .map(|k| {
            let (re, im) = gaussian_pair_at(&mut rng, zigzag(k));
            Complex64::new(re, im)
        })
        .collect();
    Ok(FieldSample::assemble(seed, radius, order, coefficients))
}

impl FieldSample {
    fn assemble(seed: u64, radius: f64, order: usize, coefficients: Vec<Complex64>) -> Self {
        let n = order as i64;
        let b = (-n..=n)
            .zip(&coefficients)
            .map(|(k, a)| if k < 0 && k % 2 != 0 { -a } else { *a })
            .collect();
        FieldSample {
            seed,
            truncation_order: order,
            domain_radius: radius,
            wavenumber: 1.0,
            coefficients,
            b,
        }
    }

    /// A field with given coefficients `a_{-N..=N}` (length `2N + 1`).
    pub fn from_coefficients(coefficients: Vec<Complex64>, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if coefficients.len() % 2 == 0 || coefficients.len() / 2 + 3 > MAX_ORDER {
            return Err(Error::Precondition(
                "coefficients must have odd length 2N + 1 with N <= MAX_ORDER - 3".into(),
            ));
        }
        let order = coefficients.len() / 2;
        Ok(FieldSample::assemble(0, radius, order, coefficients))
    }

    pub fn record(&self) -> FieldRecord {
        FieldRecord {
            seed: self.seed,
            truncation_order: self.truncation_order,
            domain_radius: self.domain_radius,
            wavenumber: self.wavenumber,
        }
    }

    /// `a_n`, zero beyond the truncation.
    pub fn a(&self, n: i64) -> Complex64 {
        let order = self.truncation_order as i64;
        if n.abs() > order {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(n + order) as usize]
        }
    }

    /// Value, gradient and Hessian at `z`, `|z| <= R`.
    pub fn eval_jet(&self, z: [f64; 2]) -> Result<FieldJet> {
        let r = z[0].hypot(z[1]);
        if !(r <= self.domain_radius) {
            return Err(Error::Domain {
                name: "|z|",
                value: r,
                requirement: "<= field domain radius",
            });
        }
        Ok(self.jet_unchecked(z))
    }

    /// Value only, `|z| <= R`.
    pub fn value(&self, z: [f64; 2]) -> Result<f64> {
        self.eval_jet(z).map(|j| j.value)
    }

    fn jet_unchecked(&self, z: [f64; 2]) -> FieldJet {
        let order = self.truncation_order;
        let r = z[0].hypot(z[1]);
        let theta = z[1].atan2(z[0]);
        let j = bessel_j_array(order + 2, r).expect("radius and order checked at construction");
        let top = order as i64 + 2;
        // G_m for m = -N-2..=N+2 at index m + N + 2.
        let step = Complex64::from_polar(1.0, theta);
        let mut g = vec![Complex64::new(0.0, 0.0); 2 * top as usize + 1];
        let mut phase = Complex64::new(1.0, 0.0);
        for m in 0..=top {
            let jm = j[m as usize];
            g[(top + m) as usize] = phase * jm;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            g[(top - m) as usize] = phase.conj() * (sign * jm);
            phase *= step;
        }
        let n = order as i64;
        let s = |k: i64| -> Complex64 {
            (-n..=n)
                .zip(&self.b)
                .map(|(m, b)| b * g[(m + k + top) as usize])
                .sum()
        };
        let (sm2, sm1, s0, s1, s2) = (s(-2), s(-1), s(0), s(1), s(2));
        let value = s0.re;
        let gx = 0.5 * (sm1 - s1).re;
        let gy = -0.5 * (s1 + sm1).im;
        let hxx = 0.25 * (s2 - 2.0 * s0 + sm2).re;
        let hyy = -0.25 * (s2 + 2.0 * s0 + sm2).re;
        let hxy = 0.25 * (s2 - sm2).im;
        FieldJet {
            value,
            gradient: Vector2::new(gx, gy),
            hessian: Matrix2::new(hxx, hxy, hxy, hyy),
        }
    }

    /// Bound on every third partial derivative of the truncated field on
    /// the disc of radius `radius`, from `|J_m(r)| <= min(1, (r/2)^|m| / |m|!)`.
    pub fn third_derivative_bound(&self, radius: f64) -> f64 {
        let half = 0.5 * radius.max(0.0);
        let bound = |m: i64| -> f64 {
            let m = m.unsigned_abs();
            let mut t = 1.0f64;
            for k in 1..=m {
                t *= half / k as f64;
                if t < 1e-300 {
                    return 0.0;
                }
            }
            t.min(1.0)
        };
        let n = self.truncation_order as i64;
        (-n..=n)
            .zip(&self.b)
            .map(|(m, b)| {
                b.norm() * (bound(m + 3) + 3.0 * bound(m + 1) + 3.0 * bound(m - 1) + bound(m - 3))
                    / 8.0
            })
            .sum()
    }
}

/// Largest jet difference between truncation orders `N` and `N + 16` over
/// `points`, a certificate for the truncation tail.
pub fn truncation_defect(field: &FieldSample, points: &[[f64; 2]]) -> Result<f64> {
    let longer = sample_field_with_order(
        field.seed,
        field.domain_radius,
        field.truncation_order + CERTIFY_EXTRA,
    )?;
    let mut worst: f64 = 0.0;
    for &z in points {
        let a = field.eval_jet(z)?;
        let b = longer.eval_jet(z)?;
        worst = worst
            .max((a.value - b.value).abs())
            .max((a.gradient - b.gradient).abs().max())
            .max((a.hessian - b.hessian).abs().max());
    }
    Ok(worst)
}
