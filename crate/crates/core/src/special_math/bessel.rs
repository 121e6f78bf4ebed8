//! Bessel functions of the first kind for integer order.
//!
//! Small arguments use the power series; larger arguments (and whole order
//! ranges) use Miller's backward recurrence normalised by
//! `J0 + 2 (J2 + J4 + ...) = 1`.

use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_j`] and [`bessel_j_array`].
pub const MAX_ORDER: usize = 1024;

/// Largest argument for which the error bounds are tested.
pub const MAX_ARGUMENT: f64 = 1.0e4;

/// Below this argument `bessel_j` sums the power series.
pub const SERIES_CROSSOVER: f64 = 8.0;

const RESCALE_ABOVE: f64 = 1.0e250;
const RESCALE_BY: f64 = 1.0e-250;

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain {
            name: "x",
            value: x,
            requirement: "finite and >= 0",
        });
    }
    if x > MAX_ARGUMENT {
        return Err(Error::Domain {
            name: "x",
            value: x,
            requirement: "<= 1e4",
        });
    }
    Ok(())
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            requirement: "<= MAX_ORDER",
        });
    }
    Ok(())
}

/// `J_n(x)` for `n <= MAX_ORDER` and finite `x >= 0`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    check_order(n)?;
    check_argument(x)?;
    if x < SERIES_CROSSOVER {
        Ok(series(n, x))
    } else {
        Ok(miller(n, x)[n])
    }
}

/// `J_0(x), ..., J_{max_order}(x)` in one backward sweep.
pub fn bessel_j_array(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_order(max_order)?;
    check_argument(x)?;
    Ok(miller(max_order, x))
}

/// Power series `sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)`.
pub(crate) fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k as f64 > half {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

fn miller(max_order: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let base = max_order.max(x.ceil() as usize);
    let start = 2 * ((base + 24 + (160.0 * base as f64).sqrt() as usize) / 2);
    let tox = 2.0 / x;
    let mut bjp = 0.0;
    let mut bj = 1.0;
    let mut even_sum = 0.0;
    for j in (1..=start).rev() {
        let bjm = j as f64 * tox * bj - bjp;
        bjp = bj;
        bj = bjm;
        if bj.abs() > RESCALE_ABOVE {
            bj *= RESCALE_BY;
            bjp *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            for v in out.iter_mut() {
                *v *= RESCALE_BY;
            }
        }
        // bj now holds the unnormalised J_{j-1}.
        let order = j - 1;
        if order <= max_order {
            out[order] = bj;
        }
        if order % 2 == 0 && order > 0 {
            even_sum += bj;
        }
    }
    let norm = 1.0 / (out[0] + 2.0 * even_sum);
    for v in out.iter_mut() {
        *v *= norm;
    }
    out
}

/// `J_0` and its first `max_deriv` derivatives at `x`, returned as a
/// length-5 array with unused trailing entries set to zero.
///
/// For `x < SERIES_CROSSOVER` the power series is differentiated term by
/// term; above, `J_0^(k) = 2^-k sum_j (-1)^j C(k,j) J_{2j-k}`.
pub fn bessel_j_derivs(x: f64, max_deriv: usize) -> Result<[f64; 5]> {
    check_argument(x)?;
    if max_deriv > 4 {
        return Err(Error::Domain {
            name: "max_deriv",
            value: max_deriv as f64,
            requirement: "<= 4",
        });
    }
    let mut out = [0.0; 5];
    if x < SERIES_CROSSOVER {
        for (k, slot) in out.iter_mut().enumerate().take(max_deriv + 1) {
            *slot = j0_series_derivative(k, x);
        }
    } else {
        let j = miller(4, x);
        let signed = |m: i64| {
            let v = j[m.unsigned_abs() as usize];
            if m < 0 && m % 2 != 0 {
                -v
            } else {
                v
            }
        };
        const BINOM: [[f64; 5]; 5] = [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0, 0.0],
            [1.0, 2.0, 1.0, 0.0, 0.0],
            [1.0, 3.0, 3.0, 1.0, 0.0],
            [1.0, 4.0, 6.0, 4.0, 1.0],
        ];
        for (k, slot) in out.iter_mut().enumerate().take(max_deriv + 1) {
            let mut acc = 0.0;
            for (jj, c) in BINOM[k].iter().enumerate().take(k + 1) {
                let sign = if jj % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * c * signed(2 * jj as i64 - k as i64);
            }
            *slot = acc / f64::powi(2.0, k as i32);
        }
    }
    Ok(out)
}

/// k-th derivative of `sum_n (-1)^n (x/2)^(2n) / (n!)^2`.
fn j0_series_derivative(k: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    // c_n = (-1)^n / (4^n (n!)^2); term = c_n (2n)_k x^(2n-k)
    let mut c = 1.0;
    for n in 0..200usize {
        if n > 0 {
            c *= -0.25 / (n as f64 * n as f64);
        }
        let p = 2 * n;
        if p < k {
            continue;
        }
        let mut falling = 1.0;
        for i in 0..k {
            falling *= (p - i) as f64;
        }
        let term = c * falling * x.powi((p - k) as i32);
        sum += term;
        let past_peak = n as f64 > 0.5 * x + 2.0;
        if past_peak && (term == 0.0 || term.abs() <= 1e-17 * sum.abs()) {
            break;
        }
    }
    sum
}
