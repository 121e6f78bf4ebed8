//! Exact small-r expansions of the two-point covariance quantities.
//!
//! Every kernel entry is a combination `sum coef * J0^(k)(r) / r^p` with
//! `k + p` fixed, so it is an even power series in `r` (possibly times one
//! factor of `r`). The coefficients are generated once in exact rational
//! arithmetic from the J0 power series; the cancellations that make the
//! closed forms useless near `r = 0` then happen exactly.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Number of coefficients (in `t = r^2`) kept for every quantity.
pub const TERMS: usize = 26;

/// Working length; divisions by `t` consume leading terms.
const WORK: usize = TERMS + 4;

/// Truncated power series in `t = r^2` with rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub Vec<BigRational>);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Series {
    fn constant(c: BigRational) -> Self {
        let mut v = vec![BigRational::zero(); WORK];
        v[0] = c;
        Series(v)
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn add(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        Series((0..n).map(|i| &self.0[i] + &o.0[i]).collect())
    }

    fn sub(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        Series((0..n).map(|i| &self.0[i] - &o.0[i]).collect())
    }

    fn scale(&self, c: &BigRational) -> Series {
        Series(self.0.iter().map(|x| x * c).collect())
    }

    fn mul(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        let mut out = vec![BigRational::zero(); n];
        for i in 0..n {
            if self.0[i].is_zero() {
                continue;
            }
            for j in 0..(n - i) {
                out[i + j] += &self.0[i] * &o.0[j];
            }
        }
        Series(out)
    }

    fn recip(&self) -> Series {
        assert!(!self.0[0].is_zero(), "reciprocal of a series with zero constant term");
        let n = self.len();
        let inv0 = self.0[0].recip();
        let mut out = vec![BigRational::zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                acc += &self.0[j] * &out[k - j];
            }
            out[k] = -acc * &inv0;
        }
        Series(out)
    }

    fn div(&self, o: &Series) -> Series {
        self.mul(&o.recip())
    }

    /// Divides by `t`; the constant term must vanish.
    fn shift_down(&self) -> Series {
        assert!(self.0[0].is_zero(), "series does not vanish at t = 0");
        Series(self.0[1..].to_vec())
    }

    fn truncated(&self, n: usize) -> Series {
        Series(self.0[..n.min(self.len())].to_vec())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.to_f64().expect("finite coefficient")).collect()
    }

    /// Index of the first non-zero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }
}

/// Horner evaluation of `sum c_i t^i`.
pub fn eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// `c_n` of `J0(r) = sum c_n r^(2n)`.
fn j0_coefficients(n: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(n);
    let mut c = BigRational::one();
    for k in 0..n {
        if k > 0 {
            c = c * q(-1, 4 * (k * k) as i64);
        }
        out.push(c.clone());
    }
    out
}

fn falling(m: i64, k: usize) -> i64 {
    (0..k as i64).map(|i| m - i).product()
}

/// Series for `sum coef * J0^(k) / r^p` over `terms = [(coef, k, p)]`, all
/// with the same `k + p = s`. Returns the series in `t` of the quantity
/// itself when `s` is even, or of the quantity divided by `r` when odd.
fn kernel(terms: &[(i64, usize, usize)]) -> Series {
    let s = terms[0].1 + terms[0].2;
    assert!(terms.iter().all(|&(_, k, p)| k + p == s));
    let lead = s.div_ceil(2);
    let c = j0_coefficients(WORK + lead + 1);
    let mut out = vec![BigRational::zero(); WORK];
    for (n, cn) in c.iter().enumerate() {
        let d: i64 = terms
            .iter()
            .map(|&(coef, k, _)| coef * falling(2 * n as i64, k))
            .sum();
        if d == 0 {
            continue;
        }
        assert!(n >= lead, "negative power survives in kernel series");
        let idx = n - lead;
        if idx < WORK {
            out[idx] += cn * BigRational::from_integer(BigInt::from(d));
        }
    }
    Series(out)
}

/// Exact series for all two-point quantities, in `t = r^2`.
#[derive(Debug, Clone)]
pub struct ExactExpansions {
    pub alpha1: Series,
    pub alpha2: Series,
    /// `beta1 / r`
    pub beta1_r: Series,
    /// `beta2 / r`
    pub beta2_r: Series,
    pub gamma: [Series; 3],
    /// `det A / r^4`
    pub det_a_r4: Series,
    pub a: [Series; 8],
    /// `A_1^+ .. A_4^+`
    pub plus: [Series; 4],
    /// `A_1^- .. A_4^-`
    pub minus: [Series; 4],
    /// `A_1^+ A_3^+ - (A_4^+)^2`
    pub det_plus: Series,
    /// `A_1^- A_3^- - (A_4^-)^2`
    pub det_minus: Series,
}

impl ExactExpansions {
    fn build() -> Self {
        let alpha1 = kernel(&[(-1, 1, 1)]);
        let alpha2 = kernel(&[(-1, 2, 0)]);
        let beta1_r = kernel(&[(-1, 2, 1), (1, 1, 2)]);
        let beta2_r = kernel(&[(-1, 3, 0)]);
        let gamma = [
            kernel(&[(3, 2, 2), (-3, 1, 3)]),
            kernel(&[(1, 3, 1), (-2, 2, 2), (2, 1, 3)]),
            kernel(&[(1, 4, 0)]),
        ];
        let one = Series::constant(BigRational::one());
        let four = q(4, 1);
        // (1 - 4 alpha^2) / t
        let d1 = one.sub(&alpha1.mul(&alpha1).scale(&four)).shift_down();
        let d2 = one.sub(&alpha2.mul(&alpha2).scale(&four)).shift_down();
        let det_a_r4 = d1.mul(&d2).scale(&q(1, 16));

        let b11 = beta1_r.mul(&beta1_r);
        let b22 = beta2_r.mul(&beta2_r);
        let b12 = beta1_r.mul(&beta2_r);
        let m2 = q(-2, 1);
        let m4 = q(-4, 1);
        let c = |v: i64, d: i64| Series::constant(q(v, d));
        let a = [
            b11.div(&d2).scale(&m2).add(&c(1, 24)),
            b11.div(&d1).scale(&m2).add(&c(1, 8)),
            b22.div(&d2).scale(&m2).add(&c(3, 8)),
            b12.div(&d2).scale(&m2).add(&c(1, 8)),
            gamma[0]
                .add(&alpha2.mul(&b11).div(&d2).scale(&m4))
                .sub(&c(1, 3)),
            gamma[1].add(&alpha1.mul(&b11).div(&d1).scale(&m4)),
            gamma[2].add(&alpha2.mul(&b22).div(&d2).scale(&m4)),
            gamma[1].add(&alpha2.mul(&b12).div(&d2).scale(&m4)),
        ];
        let two_thirds = c(2, 3);
        let plus = [
            a[0].add(&a[4]).add(&two_thirds),
            a[1].add(&a[5]),
            a[2].add(&a[6]),
            a[3].add(&a[7]),
        ];
        let minus = [
            a[0].sub(&a[4]),
            a[1].sub(&a[5]),
            a[2].sub(&a[6]),
            a[3].sub(&a[7]),
        ];
        let det_plus = plus[0].mul(&plus[2]).sub(&plus[3].mul(&plus[3]));
        let det_minus = minus[0].mul(&minus[2]).sub(&minus[3].mul(&minus[3]));

        let t = |s: Series| s.truncated(TERMS);
        ExactExpansions {
            alpha1: t(alpha1),
            alpha2: t(alpha2),
            beta1_r: t(beta1_r),
            beta2_r: t(beta2_r),
            gamma: gamma.map(t),
            det_a_r4: t(det_a_r4),
            a: a.map(t),
            plus: plus.map(t),
            minus: minus.map(t),
            det_plus: t(det_plus),
            det_minus: t(det_minus),
        }
    }
}

/// Floating-point coefficient tables derived from [`ExactExpansions`].
#[derive(Debug, Clone)]
pub struct Expansions {
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub beta1_r: Vec<f64>,
    pub beta2_r: Vec<f64>,
    pub gamma: [Vec<f64>; 3],
    pub det_a_r4: Vec<f64>,
    pub a: [Vec<f64>; 8],
    pub plus: [Vec<f64>; 4],
    pub minus: [Vec<f64>; 4],
    pub det_plus: Vec<f64>,
    pub det_minus: Vec<f64>,
    /// Lowest power of `t` present in `det_minus`.
    pub det_minus_order: usize,
}

pub fn exact() -> &'static ExactExpansions {
    static CELL: OnceLock<ExactExpansions> = OnceLock::new();
    CELL.get_or_init(ExactExpansions::build)
}

pub fn expansions() -> &'static Expansions {
    static CELL: OnceLock<Expansions> = OnceLock::new();
    CELL.get_or_init(|| {
        let e = exact();
        Expansions {
            alpha1: e.alpha1.to_f64(),
            alpha2: e.alpha2.to_f64(),
            beta1_r: e.beta1_r.to_f64(),
            beta2_r: e.beta2_r.to_f64(),
            gamma: [e.gamma[0].to_f64(), e.gamma[1].to_f64(), e.gamma[2].to_f64()],
            det_a_r4: e.det_a_r4.to_f64(),
            a: std::array::from_fn(|i| e.a[i].to_f64()),
            plus: std::array::from_fn(|i| e.plus[i].to_f64()),
            minus: std::array::from_fn(|i| e.minus[i].to_f64()),
            det_plus: e.det_plus.to_f64(),
            det_minus: e.det_minus.to_f64(),
            det_minus_order: e.det_minus.order().unwrap_or(TERMS),
        }
    })
}

/// Bound on the size of the first dropped term relative to the sum at `t`,
/// used to decide how far the truncated tables can be trusted.
pub fn tail_ratio(coeffs: &[f64], t: f64) -> f64 {
    let last = coeffs.last().copied().unwrap_or(0.0).abs() * t.powi(coeffs.len() as i32 - 1);
    let total = eval(coeffs, t).abs();
    if total == 0.0 {
        f64::INFINITY
    } else {
        last / total
    }
}
