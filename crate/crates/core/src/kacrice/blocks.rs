//! Covariance of the gradient/Hessian vector at one and two points.
//!
//! Two-point quantities use the geometry `z = (0, 0)`, `w = (0, r)`. The
//! 10-vector is ordered `(grad z, grad w, hess z, hess w)` with Hessian
//! entries `(d11, d12, d22)`.

use nalgebra::{Matrix2, Matrix3, Matrix4, Matrix6, SMatrix};
use serde::Serialize;

use super::series::{eval, expansions};
use crate::error::{Error, Result};
use crate::special_math::bessel_j_derivs;

/// Below this separation the exact small-r series are used.
pub const SERIES_SWITCH: f64 = 0.5;

/// Closed forms are refused below this separation: the cancellations in
/// `alpha^2 - 1/4` and in the `a_i` leave fewer than half the digits.
pub const CLOSED_FORM_MIN_R: f64 = 0.05;

/// Largest separation at which the truncated series are trusted.
pub const SERIES_MAX_R: f64 = 2.0;

/// Which representation evaluates the two-point quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Series below [`SERIES_SWITCH`], closed forms above.
    Auto,
    Series,
    ClosedForm,
}

impl Branch {
    pub(crate) fn resolve(self, r: f64) -> Result<Branch> {
        check_separation(r)?;
        match self {
            Branch::Auto if r < SERIES_SWITCH => Ok(Branch::Series),
            Branch::Auto => Ok(Branch::ClosedForm),
            Branch::Series if r > SERIES_MAX_R => Err(Error::Domain {
                name: "r",
                value: r,
                requirement: "<= 2 for the series branch",
            }),
            Branch::ClosedForm if r < CLOSED_FORM_MIN_R => Err(Error::IndeterminateForm(format!(
                "closed forms at r = {r} lose more than half their digits; use the series branch"
            ))),
            b => Ok(b),
        }
    }
}

pub(crate) fn check_separation(r: f64) -> Result<()> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Domain {
            name: "r",
            value: r,
            requirement: "finite and > 0",
        });
    }
    Ok(())
}

/// Covariance of `(grad Psi(z), hess Psi(z))` at a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePointCovariance {
    pub a: Matrix2<f64>,
    pub b: SMatrix<f64, 2, 3>,
    pub c: Matrix3<f64>,
}

pub fn one_point_covariance() -> OnePointCovariance {
    let d = bessel_j_derivs(0.0, 4).expect("x = 0 is in the domain");
    let g = -d[2];
    let h = d[4];
    OnePointCovariance {
        a: Matrix2::new(g, 0.0, 0.0, g),
        b: SMatrix::zeros(),
        c: Matrix3::new(h, 0.0, h / 3.0, 0.0, h / 3.0, 0.0, h / 3.0, 0.0, h),
    }
}

/// The entries `alpha_i`, `beta_i`, `gamma_i` of the two-point blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelCoefficients {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

pub fn kernel_coefficients(r: f64, branch: Branch) -> Result<KernelCoefficients> {
    match branch.resolve(r)? {
        Branch::Series => Ok(kernel_series(r)),
        _ => kernel_closed(r),
    }
}

fn kernel_closed(r: f64) -> Result<KernelCoefficients> {
    let d = bessel_j_derivs(r, 4)?;
    let (j1, j2, j3, j4) = (d[1], d[2], d[3], d[4]);
    let r2 = r * r;
    let r3 = r2 * r;
    Ok(KernelCoefficients {
        alpha1: -j1 / r,
        alpha2: -j2,
        beta1: -j2 / r + j1 / r2,
        beta2: -j3,
        gamma1: 3.0 * j2 / r2 - 3.0 * j1 / r3,
        gamma2: j3 / r - 2.0 * j2 / r2 + 2.0 * j1 / r3,
        gamma3: j4,
    })
}

fn kernel_series(r: f64) -> KernelCoefficients {
    let e = expansions();
    let t = r * r;
    KernelCoefficients {
        alpha1: eval(&e.alpha1, t),
        alpha2: eval(&e.alpha2, t),
        beta1: r * eval(&e.beta1_r, t),
        beta2: r * eval(&e.beta2_r, t),
        gamma1: eval(&e.gamma[0], t),
        gamma2: eval(&e.gamma[1], t),
        gamma3: eval(&e.gamma[2], t),
    }
}

/// `det A(r)` from the series, free of the `alpha^2 - 1/4` cancellation.
pub fn det_a_series(r: f64) -> Result<f64> {
    Branch::Series.resolve(r)?;
    let t = r * r;
    Ok(t * t * eval(&expansions().det_a_r4, t))
}

/// `det A(r) = (alpha1^2 - 1/4)(alpha2^2 - 1/4)` from the closed forms.
pub fn det_a_closed(r: f64) -> Result<f64> {
    let k = kernel_coefficients(r, Branch::ClosedForm)?;
    Ok((k.alpha1 - 0.5) * (k.alpha1 + 0.5) * (k.alpha2 - 0.5) * (k.alpha2 + 0.5))
}

/// Two-point covariance blocks.
#[derive(Debug, Clone)]
pub struct CovarianceBlocks {
    pub r: f64,
    pub kernel: KernelCoefficients,
    /// Covariance of `(grad z, grad w)`.
    pub a_r: Matrix4<f64>,
    /// Cross-covariance of `(grad z, grad w)` with `(hess z, hess w)`.
    pub b_r: SMatrix<f64, 4, 6>,
    /// Covariance of `(hess z, hess w)`.
    pub c_r: Matrix6<f64>,
    pub det_a: f64,
}

pub fn covariance_blocks(r: f64) -> Result<CovarianceBlocks> {
    covariance_blocks_with(r, Branch::Auto)
}

pub fn covariance_blocks_with(r: f64, branch: Branch) -> Result<CovarianceBlocks> {
    let branch = branch.resolve(r)?;
    let k = kernel_coefficients(r, branch)?;
    let det_a = match branch {
        Branch::Series => det_a_series(r)?,
        _ => det_a_closed(r)?,
    };
    if !(det_a > 0.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "det A(r) = {det_a:e} at r = {r}"
        )));
    }
    let mut a_r = Matrix4::zeros();
    a_r[(0, 0)] = 0.5;
    a_r[(1, 1)] = 0.5;
    a_r[(2, 2)] = 0.5;
    a_r[(3, 3)] = 0.5;
    a_r[(0, 2)] = k.alpha1;
    a_r[(2, 0)] = k.alpha1;
    a_r[(1, 3)] = k.alpha2;
    a_r[(3, 1)] = k.alpha2;

    let br = SMatrix::<f64, 2, 3>::new(0.0, k.beta1, 0.0, k.beta1, 0.0, k.beta2);
    let mut b_r = SMatrix::<f64, 4, 6>::zeros();
    b_r.fixed_view_mut::<2, 3>(0, 3).copy_from(&br);
    b_r.fixed_view_mut::<2, 3>(2, 0).copy_from(&(-br));

    let one = one_point_covariance().c;
    let cr = Matrix3::new(
        k.gamma1, 0.0, k.gamma2, 0.0, k.gamma2, 0.0, k.gamma2, 0.0, k.gamma3,
    );
    let mut c_r = Matrix6::zeros();
    c_r.fixed_view_mut::<3, 3>(0, 0).copy_from(&one);
    c_r.fixed_view_mut::<3, 3>(3, 3).copy_from(&one);
    c_r.fixed_view_mut::<3, 3>(0, 3).copy_from(&cr);
    c_r.fixed_view_mut::<3, 3>(3, 0).copy_from(&cr);

    Ok(CovarianceBlocks {
        r,
        kernel: k,
        a_r,
        b_r,
        c_r,
        det_a,
    })
}

impl CovarianceBlocks {
    /// `C - B^T A^{-1} B` by Cholesky solve.
    pub fn schur_complement(&self) -> Result<Matrix6<f64>> {
        let chol = self.a_r.cholesky().ok_or_else(|| {
            Error::NotPositiveDefinite(format!("gradient covariance at r = {}", self.r))
        })?;
        let x = chol.solve(&self.b_r);
        let d = self.c_r - self.b_r.transpose() * x;
        Ok((d + d.transpose()) * 0.5)
    }
}
