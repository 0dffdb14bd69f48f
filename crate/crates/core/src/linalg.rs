//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Log-determinant of a symmetric positive definite matrix through its
/// Cholesky factor (sum of log pivots), so large blocks never overflow.
pub fn logdet_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numerical("matrix is not positive definite", f64::NAN))?;
    let l = chol.l_dirty();
    Ok((0..m.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum())
}

/// Lower-triangular factor `L` with `L L^T = m` for a positive semidefinite
/// `m`. Pivots below `tol * max_diag` are treated as zero and their column is
/// dropped, which makes rank-deficient inputs (e.g. rank-one message
/// covariances) factorable.
pub fn psd_factor(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::domain("psd_factor needs a square matrix"));
    }
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -tol * scale * 1e3 {
            return Err(Error::domain(format!(
                "matrix is not positive semidefinite (pivot {d:e} at {j})"
            )));
        }
        if d <= tol * scale {
            continue;
        }
        let pivot = d.sqrt();
        l[(j, j)] = pivot;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / pivot;
        }
    }
    Ok(l)
}

/// Eigenvalues of a symmetric matrix in decreasing order.
pub fn sym_eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Incrementally grown orthonormal basis of a span of row vectors.
///
/// Vectors are orthogonalized with two passes of modified Gram-Schmidt. The
/// projection onto the orthogonal complement of the span is applied without
/// ever forming `(S S^T)^{-1}`.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    dim: usize,
    vectors: Vec<DVector<f64>>,
}

impl OrthoBasis {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    /// Component of `w` orthogonal to the current span (`w Π`).
    pub fn project_out(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut r = w.clone();
        for _ in 0..2 {
            for q in &self.vectors {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        r
    }

    /// Adds `v` to the span. Returns the squared norm of its orthogonal
    /// component, i.e. `v Π v^T` before the update.
    pub fn push(&mut self, v: &DVector<f64>, tol: f64) -> Result<f64> {
        let r = self.project_out(v);
        let norm2 = r.norm_squared();
        if norm2.sqrt() <= tol * v.norm().max(1.0) {
            return Err(Error::numerical(
                "row is numerically dependent on the current span",
                norm2.sqrt(),
            ));
        }
        self.vectors.push(r / norm2.sqrt());
        Ok(norm2)
    }

    /// Explicit projector `I - Q^T Q` onto the orthogonal complement.
    pub fn projector(&self) -> DMatrix<f64> {
        let mut p = DMatrix::<f64>::identity(self.dim, self.dim);
        for q in &self.vectors {
            p -= q * q.transpose();
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logdet_matches_direct_determinant() {
        let m =
            DMatrix::<f64>::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let direct = m.determinant().ln();
        assert!((logdet_spd(&m).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn psd_factor_handles_rank_one() {
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let m = &v * v.transpose();
        let l = psd_factor(&m, 1e-12).unwrap();
        assert!(max_abs(&(&l * l.transpose() - &m)) < 1e-12);
        assert_eq!(l[(1, 1)], 0.0);
        assert_eq!(l[(2, 2)], 0.0);
    }

    #[test]
    fn psd_factor_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(psd_factor(&m, 1e-12).is_err());
    }

    #[test]
    fn projector_is_idempotent_and_annihilates_span() {
        let mut basis = OrthoBasis::new(4);
        let a = DVector::from_vec(vec![1.0, 2.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![0.0, 1.0, 1.0, -1.0]);
        basis.push(&a, 1e-12).unwrap();
        basis.push(&b, 1e-12).unwrap();
        let p = basis.projector();
        assert!(max_abs(&(&p * &p - &p)) < 1e-12);
        assert!(max_abs(&(&p - p.transpose())) < 1e-12);
        assert!((&p * &a).norm() < 1e-12);
        assert!(basis.push(&(a * 2.0 - b), 1e-10).is_err());
    }
}
