use nalgebra::SymmetricEigen;

use super::{c64, is_finite, C64, ComplexMatrix, HermitianOperator};
use crate::error::{Error, Result};

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
///
/// Inside a degenerate cluster the eigenvectors are an arbitrary orthonormal
/// basis of the cluster; callers must treat clusters as subspaces.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let w = c64(f(lam), 0.0);
            for i in 0..d {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    /// Columns whose eigenvalue satisfies `pred`.
    pub fn columns_where(&self, pred: impl Fn(f64) -> bool) -> ComplexMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| pred(self.values[i])).collect();
        self.vectors.select_columns(idx.iter())
    }

    /// Index ranges of eigenvalue clusters: consecutive values closer than `gap`.
    pub fn clusters(&self, gap: f64) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.dim() {
            if i == self.dim() || self.values[i] - self.values[i - 1] >= gap {
                out.push(start..i);
                start = i;
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
pub fn eig_hermitian(a: &HermitianOperator) -> Result<Spectrum> {
    eig_matrix(a.matrix())
}

const EIG_MAX_ITERS_PER_DIM: usize = 1000;

/// Eigendecomposition of a matrix assumed Hermitian (only checked for finiteness).
pub fn eig_matrix(m: &ComplexMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigendecomposition of {}x{}", m.nrows(), m.ncols())));
    }
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let d = m.nrows();
    if d == 0 {
        return Ok(Spectrum { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    let iterations = EIG_MAX_ITERS_PER_DIM * d;
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, iterations)
        .ok_or(Error::EigenNonConvergence { iterations })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Ok(Spectrum { values, vectors })
}

/// Largest absolute eigenvalue.
pub fn operator_norm(a: &HermitianOperator) -> Result<f64> {
    let s = eig_hermitian(a)?;
    Ok(s.max().abs().max(s.min().abs()))
}

/// Sum of absolute eigenvalues.
pub fn trace_abs(a: &HermitianOperator) -> Result<f64> {
    Ok(eig_hermitian(a)?.values.iter().map(|x| x.abs()).sum())
}

/// Principal square root of a positive semidefinite operator; negative
/// eigenvalues from rounding are clipped to zero.
pub fn sqrt_psd(a: &HermitianOperator) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(a)?.map(|x| x.max(0.0).sqrt()))
}

/// `exp(scale · a)` by Padé scaling-and-squaring.
pub fn matrix_exp(a: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("matrix exponential of {}x{}", a.nrows(), a.ncols())));
    }
    if !is_finite(a) {
        return Err(Error::NonFinite);
    }
    let scaled = a * scale;
    let out = scaled.exp();
    if !is_finite(&out) {
        return Err(Error::ExpOverflow { norm: scaled.norm() });
    }
    Ok(out)
}
