use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::{c64, eig_matrix, operator_norm, HermitianOperator};
use crate::span::SpanBasis;

/// Stopping rule for the oracle: certified gap `≤ tol · max(1, ‖G⊥‖)` or
/// `max_iters` cuts.
#[derive(Clone, Copy, Debug)]
pub struct OracleSpec {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { tol: 1e-9, max_iters: 50_000 }
    }
}

pub const ORACLE_MAX_SPAN: usize = 4;

/// Value and subgradient of `‖G⊥ + Σ ν_k E_k‖_op`.
fn value_and_subgradient(g_perp: &HermitianOperator, basis: &SpanBasis, nu: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    let mut a = g_perp.matrix().clone();
    for (e, c) in basis.elements().iter().zip(nu.iter()) {
        a += e.matrix() * c64(*c, 0.0);
    }
    let spec = eig_matrix(&a)?;
    let (top, bottom) = (spec.max(), spec.min());
    let (col, sign) = if top >= -bottom { (spec.dim() - 1, 1.0) } else { (0, -1.0) };
    let v = spec.vectors.column(col);
    let g = DVector::from_iterator(
        basis.len(),
        basis.elements().iter().map(|e| sign * (v.adjoint() * e.matrix() * v)[(0, 0)].re),
    );
    Ok((top.max(-bottom), g))
}

/// Minimum of `‖G⊥ + Σ ν_k E_k‖_op` by the central-cut ellipsoid method.
///
/// Shares nothing with `dual_minimize` beyond the objective. Since `G⊥ ⊥ S`
/// and the basis is orthonormal, `‖ν‖ ≤ ‖G⊥ + Σν_k E_k‖_HS ≤ √d ‖G⊥‖_op` at
/// any minimizer, so the starting ball contains one and
/// `f(x) − √(gᵀPg)` is a valid lower bound at every cut.
pub fn brute_force_dual(g_perp: &HermitianOperator, basis: &SpanBasis, spec: OracleSpec) -> Result<f64> {
    let n = basis.len();
    if n > ORACLE_MAX_SPAN {
        return Err(Error::OracleTooLarge(n));
    }
    let norm = operator_norm(g_perp)?;
    if n == 0 || norm == 0.0 {
        return Ok(norm);
    }
    let radius = 1.01 * (g_perp.dim() as f64).sqrt() * norm;
    let mut x = DVector::<f64>::zeros(n);
    let mut p = DMatrix::<f64>::identity(n, n) * (radius * radius);
    let (mut best, mut lower) = (norm, 0.0f64);
    let nf = n as f64;
    for _ in 0..spec.max_iters {
        let (f, g) = value_and_subgradient(g_perp, basis, &x)?;
        best = best.min(f);
        let pg = &p * &g;
        let gpg = g.dot(&pg);
        if !(gpg > 0.0) {
            // Zero subgradient: x is a minimizer.
            return Ok(best);
        }
        let width = gpg.sqrt();
        lower = lower.max(f - width);
        if best - lower <= spec.tol * norm.max(1.0) {
            break;
        }
        let b = pg / width;
        x -= &b / (nf + 1.0);
        p = if n == 1 {
            p / 4.0
        } else {
            (p - (&b * b.transpose()) * (2.0 / (nf + 1.0))) * (nf * nf / (nf * nf - 1.0))
        };
        p = (&p + p.transpose()) * 0.5;
    }
    Ok(best)
}
