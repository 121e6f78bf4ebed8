//! Conditional covariance of the two Hessians given both gradients vanish,
//! and its closed-form eigen-decomposition.

use nalgebra::{Matrix3, Matrix6, Vector6};

use super::blocks::{check_separation, covariance_blocks_with, kernel_coefficients, Branch};
use super::series::{eval, expansions};
use crate::error::Result;
use crate::special_math::jacobi::{jacobi_eigen_sym, DEFAULT_TOL};

/// Below this magnitude of `A_4^+-` the closed-form eigenvectors are not
/// used and the Jacobi oracle takes over.
pub const A4_FLOOR: f64 = 1e-14;

/// How the eigenpairs were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenSource {
    ClosedForm,
    JacobiFallback,
}

/// Eigenvalues `lambda_1..lambda_6` in closed-form order and the matching
/// normalised eigenvectors as the columns of `q`.
#[derive(Debug, Clone)]
pub struct DeltaEigen {
    pub lambdas: [f64; 6],
    pub q: Matrix6<f64>,
    pub source: EigenSource,
}

#[derive(Debug, Clone)]
pub struct ConditionalCovariance {
    pub r: f64,
    pub a: [f64; 8],
    pub delta: Matrix6<f64>,
    pub lambdas: [f64; 6],
    pub q: Matrix6<f64>,
    pub source: EigenSource,
}

/// `a_1..a_8` at separation `r`.
pub fn a_coefficients(r: f64, branch: Branch) -> Result<[f64; 8]> {
    match branch.resolve(r)? {
        Branch::Series => {
            let e = expansions();
            let t = r * r;
            Ok(std::array::from_fn(|i| eval(&e.a[i], t)))
        }
        _ => {
            let k = kernel_coefficients(r, Branch::ClosedForm)?;
            let d1 = 1.0 - 4.0 * k.alpha1 * k.alpha1;
            let d2 = 1.0 - 4.0 * k.alpha2 * k.alpha2;
            let b11 = k.beta1 * k.beta1;
            let b22 = k.beta2 * k.beta2;
            let b12 = k.beta1 * k.beta2;
            Ok([
                -2.0 * b11 / d2 + 1.0 / 24.0,
                -2.0 * b11 / d1 + 1.0 / 8.0,
                -2.0 * b22 / d2 + 3.0 / 8.0,
                -2.0 * b12 / d2 + 1.0 / 8.0,
                k.gamma1 - 4.0 * k.alpha2 * b11 / d2 - 1.0 / 3.0,
                k.gamma2 - 4.0 * k.alpha1 * b11 / d1,
                k.gamma3 - 4.0 * k.alpha2 * b22 / d2,
                k.gamma2 - 4.0 * k.alpha2 * b12 / d2,
            ])
        }
    }
}

/// Assembles `[[D1, D2], [D2, D1]]` from `a_1..a_8`.
pub fn delta_from_a(a: &[f64; 8]) -> Matrix6<f64> {
    let third = 1.0 / 3.0;
    let d1 = Matrix3::new(
        third + a[0], 0.0, a[3], 0.0, a[1], 0.0, a[3], 0.0, a[2],
    );
    let d2 = Matrix3::new(
        third + a[4], 0.0, a[7], 0.0, a[5], 0.0, a[7], 0.0, a[6],
    );
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&d1);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&d1);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&d2);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&d2);
    m
}

/// `A_1..A_4` of the `+` and `-` blocks together with the block
/// determinants `A_1 A_3 - A_4^2`.
#[derive(Debug, Clone, Copy)]
struct Blocks {
    plus: [f64; 4],
    minus: [f64; 4],
    det_plus: f64,
    det_minus: f64,
}

fn sign_blocks(r: f64, branch: Branch) -> Result<Blocks> {
    match branch.resolve(r)? {
        Branch::Series => {
            let e = expansions();
            let t = r * r;
            Ok(Blocks {
                plus: std::array::from_fn(|i| eval(&e.plus[i], t)),
                minus: std::array::from_fn(|i| eval(&e.minus[i], t)),
                det_plus: eval(&e.det_plus, t),
                det_minus: eval(&e.det_minus, t),
            })
        }
        b => {
            let a = a_coefficients(r, b)?;
            let plus = [a[0] + a[4] + 2.0 / 3.0, a[1] + a[5], a[2] + a[6], a[3] + a[7]];
            let minus = [a[0] - a[4], a[1] - a[5], a[2] - a[6], a[3] - a[7]];
            Ok(Blocks {
                plus,
                minus,
                det_plus: plus[0] * plus[2] - plus[3] * plus[3],
                det_minus: minus[0] * minus[2] - minus[3] * minus[3],
            })
        }
    }
}

/// Roots `(T -+ S) / 2` of `x^2 - T x + det` with `T = a1 + a3` and
/// `S = sqrt((a1 - a3)^2 + 4 a4^2)`, each computed without cancellation.
fn block_roots(a1: f64, a3: f64, a4: f64, det: f64) -> (f64, f64) {
    let t = a1 + a3;
    let s = (a3 - a1).hypot(2.0 * a4);
    if t >= 0.0 {
        let large = 0.5 * (t + s);
        let small = if large > 0.0 { det / large } else { 0.5 * (t - s) };
        (small, large)
    } else {
        let small = 0.5 * (t - s);
        (small, det / small)
    }
}

/// `((d + S) / (2 a4), (d - S) / (2 a4))` with `d = a3 - a1`, using that the
/// product of the two is `-1`.
fn eigvec_ratios(a1: f64, a3: f64, a4: f64) -> (f64, f64) {
    let d = a3 - a1;
    let s = d.hypot(2.0 * a4);
    if d >= 0.0 {
        let plus = (d + s) / (2.0 * a4);
        (plus, -1.0 / plus)
    } else {
        let minus = (d - s) / (2.0 * a4);
        (-1.0 / minus, minus)
    }
}

fn normalized(v: [f64; 6]) -> Vector6<f64> {
    let v = Vector6::from_row_slice(&v);
    v / v.norm()
}

pub fn eigen_delta_closed(r: f64) -> Result<DeltaEigen> {
    eigen_delta_with(r, Branch::Auto)
}

pub fn eigen_delta_with(r: f64, branch: Branch) -> Result<DeltaEigen> {
    let b = sign_blocks(r, branch)?;
    let [m1, m2, m3, m4] = b.minus;
    let [p1, p2, p3, p4] = b.plus;
    let (l3, l4) = block_roots(m1, m3, m4, b.det_minus);
    let (l5, l6) = block_roots(p1, p3, p4, b.det_plus);
    let lambdas = [m2, p2, l3, l4, l5, l6];

    if m4.abs() < A4_FLOOR || p4.abs() < A4_FLOOR {
        log::warn!(
            "A4 below {A4_FLOOR:e} at r = {r} (A4- = {m4:e}, A4+ = {p4:e}); using Jacobi eigenvectors"
        );
        let delta = delta_from_a(&a_coefficients(r, branch)?);
        let q = jacobi_vectors_matching(&delta, &lambdas)?;
        return Ok(DeltaEigen {
            lambdas,
            q,
            source: EigenSource::JacobiFallback,
        });
    }

    let (v31, v41) = eigvec_ratios(m1, m3, m4);
    let (v51, v61) = eigvec_ratios(p1, p3, p4);
    let cols = [
        normalized([0.0, -1.0, 0.0, 0.0, 1.0, 0.0]),
        normalized([0.0, 1.0, 0.0, 0.0, 1.0, 0.0]),
        normalized([v31, 0.0, -1.0, -v31, 0.0, 1.0]),
        normalized([v41, 0.0, -1.0, -v41, 0.0, 1.0]),
        normalized([-v51, 0.0, 1.0, -v51, 0.0, 1.0]),
        normalized([-v61, 0.0, 1.0, -v61, 0.0, 1.0]),
    ];
    let q = Matrix6::from_columns(&cols);
    Ok(DeltaEigen {
        lambdas,
        q,
        source: EigenSource::ClosedForm,
    })
}

/// Jacobi eigenvectors reordered so column `i` belongs to `lambdas[i]`.
fn jacobi_vectors_matching(delta: &Matrix6<f64>, lambdas: &[f64; 6]) -> Result<Matrix6<f64>> {
    let e = jacobi_eigen_sym(delta, DEFAULT_TOL)?;
    let mut used = [false; 6];
    let mut q = Matrix6::zeros();
    for (i, &l) in lambdas.iter().enumerate() {
        let j = (0..6)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (e.values[a] - l).abs().total_cmp(&(e.values[b] - l).abs()))
            .expect("six columns for six eigenvalues");
        used[j] = true;
        q.set_column(i, &e.vectors.column(j));
    }
    Ok(q)
}

pub fn conditional_covariance(r: f64) -> Result<ConditionalCovariance> {
    conditional_covariance_with(r, Branch::Auto)
}

pub fn conditional_covariance_with(r: f64, branch: Branch) -> Result<ConditionalCovariance> {
    check_separation(r)?;
    let a = a_coefficients(r, branch)?;
    let delta = delta_from_a(&a);
    let eig = eigen_delta_with(r, branch)?;
    Ok(ConditionalCovariance {
        r,
        a,
        delta,
        lambdas: eig.lambdas,
        q: eig.q,
        source: eig.source,
    })
}

/// `C - B^T A^{-1} B` assembled from the raw blocks (no `a_i` shortcut).
pub fn delta_from_blocks(r: f64, branch: Branch) -> Result<Matrix6<f64>> {
    covariance_blocks_with(r, branch)?.schur_complement()
}

impl ConditionalCovariance {
    /// `Q diag(lambda) Q^T`.
    pub fn reconstruct(&self) -> Matrix6<f64> {
        let d = Matrix6::from_diagonal(&Vector6::from_row_slice(&self.lambdas));
        self.q * d * self.q.transpose()
    }

    /// `Q diag(sqrt(lambda))`, the factor mapping standard normals to
    /// `N(0, delta)`. Negative round-off in tiny eigenvalues is clamped.
    pub fn sampling_factor(&self) -> Matrix6<f64> {
        let mut f = self.q;
        for (j, &l) in self.lambdas.iter().enumerate() {
            let s = l.max(0.0).sqrt();
            for i in 0..6 {
                f[(i, j)] *= s;
            }
        }
        f
    }
}
