//! The Lindblad span `S = span_R{I, L_k + L_k†, i(L_k − L_k†), L_k†L_j + L_j†L_k, i(L_k†L_j − L_j†L_k)}`
//! and the Hamiltonian-not-in-Lindblad-span (HNLS) test.

use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{c64, hs_inner_unchecked, ComplexMatrix, HermitianOperator};

/// Default relative rank tolerance for Gram–Schmidt.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Default threshold on `‖G⊥‖_HS` for the HNLS verdict.
pub const DEFAULT_HNLS_TOL: f64 = 1e-8;

/// Orthonormal (Hilbert–Schmidt) basis of a real span of Hermitian operators.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    basis: Vec<HermitianOperator>,
    dim: usize,
    generator_count: usize,
    rank_tol: f64,
    warning: Option<String>,
}

impl SpanBasis {
    pub fn elements(&self) -> &[HermitianOperator] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Matrix dimension of the operators.
    pub fn operator_dim(&self) -> usize {
        self.dim
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// Coefficients `tr(g E_k)`.
    pub fn coefficients(&self, g: &HermitianOperator) -> Vec<f64> {
        self.basis.iter().map(|e| hs_inner_unchecked(g.matrix(), e.matrix())).collect()
    }

    /// `Σ c_k E_k`.
    pub fn combine(&self, coeffs: &[f64]) -> HermitianOperator {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (c, e) in coeffs.iter().zip(&self.basis) {
            m += e.matrix() * c64(*c, 0.0);
        }
        HermitianOperator::symmetrized(m)
    }
}

/// The Hermitian generators of `S`, in order: `I`; then per `k` the pair
/// `L_k + L_k†`, `i(L_k − L_k†)`; then per ordered pair `(k, j)` the pair
/// `L_k†L_j + L_j†L_k`, `i(L_k†L_j − L_j†L_k)`. Duplicates and zeros are
/// kept, giving `1 + 2r + 2r²` operators.
pub fn hermitian_generators(model: &LindbladModel) -> Vec<HermitianOperator> {
    hermitian_generators_of(model.dim(), model.lindblad())
}

pub fn hermitian_generators_of(dim: usize, jumps: &[ComplexMatrix]) -> Vec<HermitianOperator> {
    let i = c64(0.0, 1.0);
    let mut out = Vec::with_capacity(1 + 2 * jumps.len() + 2 * jumps.len() * jumps.len());
    out.push(HermitianOperator::identity(dim));
    for l in jumps {
        let ld = l.adjoint();
        out.push(HermitianOperator::symmetrized(l + &ld));
        out.push(HermitianOperator::symmetrized((l - &ld) * i));
    }
    for lk in jumps {
        for lj in jumps {
            let kj = lk.adjoint() * lj;
            let jk = lj.adjoint() * lk;
            out.push(HermitianOperator::symmetrized(&kj + &jk));
            out.push(HermitianOperator::symmetrized((&kj - &jk) * i));
        }
    }
    out
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Residuals with
/// HS norm at most `rank_tol · max_generator_norm` are dropped.
pub fn orthonormal_basis(generators: &[HermitianOperator], rank_tol: f64) -> Result<SpanBasis> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidArgument("orthonormal_basis needs at least one generator".into()))?;
    let dim = first.dim();
    if generators.iter().any(|g| g.dim() != dim) {
        return Err(Error::Dimension("generators of different dimensions".into()));
    }
    let max_norm = generators.iter().map(|g| g.hs_norm()).fold(0.0, f64::max);
    let mut basis: Vec<HermitianOperator> = Vec::new();
    if max_norm == 0.0 {
        return Ok(SpanBasis {
            basis,
            dim,
            generator_count: generators.len(),
            rank_tol,
            warning: Some("all generators vanish; span is {0}".into()),
        });
    }
    let cutoff = rank_tol * max_norm;
    for g in generators {
        let mut v = g.matrix().clone();
        for _pass in 0..2 {
            for e in &basis {
                let c = hs_inner_unchecked(&v, e.matrix());
                v -= e.matrix() * c64(c, 0.0);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > cutoff {
            basis.push(HermitianOperator::symmetrized(v / c64(norm, 0.0)));
        }
    }
    Ok(SpanBasis { basis, dim, generator_count: generators.len(), rank_tol, warning: None })
}

/// Splits `g` into its projection onto the span and the orthogonal remainder.
pub fn decompose(g: &HermitianOperator, basis: &SpanBasis) -> Result<(HermitianOperator, HermitianOperator)> {
    if g.dim() != basis.operator_dim() {
        return Err(Error::Dimension(format!(
            "operator dim {} vs span operator dim {}",
            g.dim(),
            basis.operator_dim()
        )));
    }
    let par = basis.combine(&basis.coefficients(g));
    let perp = g.sub(&par);
    Ok((par, perp))
}

/// Outcome of the HNLS test.
#[derive(Clone, Debug)]
pub struct HnlsVerdict {
    pub holds: bool,
    /// `‖G⊥‖_HS` lies within a factor 10 of `tol`.
    pub marginal: bool,
    pub g_perp: HermitianOperator,
    pub g_par: HermitianOperator,
    pub perp_hs_norm: f64,
    pub tol: f64,
    pub basis: SpanBasis,
}

pub fn hnls_check(model: &LindbladModel, tol: f64) -> Result<HnlsVerdict> {
    hnls_check_with_rank_tol(model, tol, DEFAULT_RANK_TOL)
}

pub fn hnls_check_with_rank_tol(model: &LindbladModel, tol: f64, rank_tol: f64) -> Result<HnlsVerdict> {
    let basis = orthonormal_basis(&hermitian_generators(model), rank_tol)?;
    let (g_par, g_perp) = decompose(model.generator(), &basis)?;
    let perp_hs_norm = g_perp.hs_norm();
    Ok(HnlsVerdict {
        holds: perp_hs_norm > tol,
        marginal: perp_hs_norm > tol / 10.0 && perp_hs_norm <= tol * 10.0,
        g_perp,
        g_par,
        perp_hs_norm,
        tol,
        basis,
    })
}
