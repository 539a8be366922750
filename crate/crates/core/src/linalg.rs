//! Symmetric matrices, their exponentials, and definiteness certificates.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Asymmetry above this is rejected by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric (max |M - Mᵀ| = {deviation:.3e})")]
    NotSymmetric { deviation: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

/// A real symmetric matrix; symmetry holds exactly by construction.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    /// Accepts `m` if `max|m - mᵀ| ≤ 1e-12`, then symmetrizes exactly.
    pub fn new(m: DMatrix<f64>) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let deviation = (&m - m.transpose()).amax();
        if deviation > SYMMETRY_TOL {
            return Err(LinalgError::NotSymmetric { deviation });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().unwrap()
    }

    /// Orthonormal eigenbasis `(Q, λ)` with `M = Q diag(λ) Qᵀ`.
    pub fn eigen_basis(&self) -> (DMatrix<f64>, DVector<f64>) {
        let eig = self.m.clone().symmetric_eigen();
        (eig.eigenvectors, eig.eigenvalues)
    }
}

/// `e^{Ct}` via the eigendecomposition `Q e^{Λt} Qᵀ`; exact for diagonal `C`.
pub fn sym_expm(c: &SymMatrix, t: f64) -> DMatrix<f64> {
    let (q, lambda) = c.eigen_basis();
    let exp_l = DMatrix::from_diagonal(&lambda.map(|l| (l * t).exp()));
    &q * exp_l * q.transpose()
}

/// Symmetric part `(M + Mᵀ)/2` of a square matrix.
pub fn sym_part(m: &DMatrix<f64>) -> Result<SymMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(SymMatrix {
        m: (m + m.transpose()) * 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_sym(n: usize, seed: u64) -> SymMatrix {
        // Cheap deterministic fill; symmetry by construction.
        let mut v = Vec::with_capacity(n * n);
        let mut s = seed;
        for _ in 0..n * n {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            v.push(((s >> 33) as f64 / (1u64 << 31) as f64) - 1.0);
        }
        let m = DMatrix::from_vec(n, n, v);
        sym_part(&m).unwrap()
    }

    /// Taylor series with scaling and squaring; independent of the
    /// eigendecomposition route.
    fn expm_oracle(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        let norm = m.amax() * n as f64;
        let s = norm.log2().ceil().max(0.0) as u32 + 1;
        let a = m / 2f64.powi(s as i32);
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &a / k as f64;
            sum += &term;
            if term.amax() < 1e-18 {
                break;
            }
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let c = SymMatrix::from_diag(&[0.0, 0.0]);
        let e = sym_expm(&c, 3.7);
        assert!((e - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn diagonal_case_is_exact() {
        let c = SymMatrix::from_diag(&[-1.0, -1.0, -1.0]);
        let e = sym_expm(&c, 1.0);
        let want = (-1.0f64).exp();
        for i in 0..3 {
            assert!((e[(i, i)] - want).abs() < 1e-15);
            for j in 0..3 {
                if i != j {
                    assert!(e[(i, j)].abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn matches_scaling_and_squaring_oracle() {
        let c = random_sym(3, 42);
        let t = 0.3;
        let ours = sym_expm(&c, t);
        let oracle = expm_oracle(&(c.as_matrix() * t));
        assert!((ours - oracle).amax() < 1e-10);
    }

    #[test]
    fn semigroup_property() {
        let c = random_sym(4, 7);
        let (s, t) = (0.4, 1.1);
        let lhs = sym_expm(&c, s) * sym_expm(&c, t);
        let rhs = sym_expm(&c, s + t);
        assert!((lhs - rhs).amax() < 1e-9);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            SymMatrix::new(m),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn eigendecomposition_reproduces_matrix() {
        let c = random_sym(5, 99);
        let (q, l) = c.eigen_basis();
        let rebuilt = &q * DMatrix::from_diagonal(&l) * q.transpose();
        assert!((rebuilt - c.as_matrix()).amax() < 1e-10);
    }
}
