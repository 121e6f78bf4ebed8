//! Cyclic Jacobi eigen-decomposition for symmetric 6x6 matrices.

use nalgebra::Matrix6;

use crate::error::{Error, Result};

/// Sweep limit before [`jacobi_eigen_sym`] reports non-convergence.
pub const MAX_SWEEPS: usize = 50;

/// Default reconstruction tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order and
/// eigenvectors stored as the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: [f64; 6],
    pub vectors: Matrix6<f64>,
    pub sweeps: usize,
}

impl SymEigen {
    /// `Q diag(values) Q^T`.
    pub fn reconstruct(&self) -> Matrix6<f64> {
        let d = Matrix6::from_diagonal(&nalgebra::Vector6::from_row_slice(&self.values));
        self.vectors * d * self.vectors.transpose()
    }
}

pub fn jacobi_eigen_sym(m: &Matrix6<f64>, tol: f64) -> Result<SymEigen> {
    let asym = (m - m.transpose()).abs().max();
    if asym > 1e-12 * m.abs().max().max(1.0) {
        return Err(Error::Precondition(format!(
            "matrix is not symmetric (max |m - m^T| = {asym:e})"
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::Domain {
            name: "tol",
            value: tol,
            requirement: "finite and > 0",
        });
    }
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = Matrix6::<f64>::identity();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let threshold = 1e-2 * f64::EPSILON * scale;
    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        for p in 0..6 {
            for q in (p + 1)..6 {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence {
                method: "Jacobi eigen sweep",
                iterations: MAX_SWEEPS,
            });
        }
        sweeps += 1;
        for p in 0..6 {
            for q in (p + 1)..6 {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-3 * threshold {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..6 {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..6 {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..6 {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let mut values = [0.0; 6];
    let mut vectors = Matrix6::zeros();
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a[(src, src)];
        vectors.set_column(dst, &v.column(src));
    }
    let eigen = SymEigen {
        values,
        vectors,
        sweeps,
    };
    let residual = (eigen.reconstruct() - m).abs().max();
    if residual > tol * scale.max(1.0) {
        return Err(Error::NonConvergence {
            method: "Jacobi eigen reconstruction",
            iterations: sweeps,
        });
    }
    Ok(eigen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orthogonality_error(q: &Matrix6<f64>) -> f64 {
        (q.transpose() * q - Matrix6::identity()).abs().max()
    }

    #[test]
    fn identity() {
        let e = jacobi_eigen_sym(&Matrix6::identity(), DEFAULT_TOL).unwrap();
        assert_eq!(e.values, [1.0; 6]);
        assert!(orthogonality_error(&e.vectors) < 1e-15);
    }

    #[test]
    fn diagonal_one_to_six() {
        let m = Matrix6::from_diagonal(&nalgebra::Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0));
        let e = jacobi_eigen_sym(&m, DEFAULT_TOL).unwrap();
        assert_eq!(e.values, [6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn rejects_asymmetric() {
        let mut m = Matrix6::identity();
        m[(0, 1)] = 1e-6;
        assert!(jacobi_eigen_sym(&m, DEFAULT_TOL).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn random_symmetric(entries in prop::collection::vec(-10.0f64..10.0, 36)) {
            let b = Matrix6::from_row_slice(&entries);
            let m = (b + b.transpose()) * 0.5;
            let e = jacobi_eigen_sym(&m, DEFAULT_TOL).unwrap();
            prop_assert!(orthogonality_error(&e.vectors) < 1e-12);
            prop_assert!((e.reconstruct() - m).abs().max() < DEFAULT_TOL);
            for w in e.values.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }
    }
}
