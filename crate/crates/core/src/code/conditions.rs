use super::CodePair;
use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{c64, embed_probe, identity, tensor, ComplexMatrix, C64};

/// Outcome of the QEC condition check on a two-dimensional code.
///
/// Residuals are the largest code-basis matrix element of
/// `Π_C L_k Π_C − λ_k Π_C` and `Π_C L_k†L_j Π_C − μ_kj Π_C`.
#[derive(Clone, Debug)]
pub struct QecReport {
    pub lambda: Vec<C64>,
    pub mu: ComplexMatrix,
    pub residual_1: f64,
    pub residual_2: f64,
    /// Eigengap of `Π_C G Π_C` restricted to the code.
    pub gap_3: f64,
    pub tol: f64,
    pub passes: [bool; 3],
}

impl QecReport {
    pub fn holds(&self) -> bool {
        self.passes.iter().all(|&p| p)
    }

    pub fn summary(&self) -> String {
        format!(
            "residual_1 = {:.3e}, residual_2 = {:.3e}, gap_3 = {:.6e}, tol = {:.1e}, passes = {:?}",
            self.residual_1, self.residual_2, self.gap_3, self.tol, self.passes
        )
    }
}

fn check_dims(code: &CodePair, model: &LindbladModel) -> Result<()> {
    if code.probe_dim() != model.dim() {
        return Err(Error::Dimension(format!(
            "code probe dimension {} vs model dimension {}",
            code.probe_dim(),
            model.dim()
        )));
    }
    Ok(())
}

/// Conditions [1]–[3] for `L_k ⊗ I` and `G ⊗ I`.
pub fn check_conditions(code: &CodePair, model: &LindbladModel, tol: f64) -> Result<QecReport> {
    check_dims(code, model)?;
    let d_a = code.ancilla_dim();
    let jumps: Vec<ComplexMatrix> = model.lindblad().iter().map(|l| embed_probe(l, d_a)).collect();
    check_operators(code, &jumps, &embed_probe(model.generator().matrix(), d_a), tol)
}

/// Conditions for noisy ancillas: the jump set is `{L_k ⊗ I} ∪ {I ⊗ L'_m}`,
/// so condition [2] covers every product `L_k† ⊗ L'_m`.
pub fn check_generalized(
    code: &CodePair,
    model: &LindbladModel,
    ancilla_jumps: &[ComplexMatrix],
    tol: f64,
) -> Result<QecReport> {
    check_dims(code, model)?;
    let d_a = code.ancilla_dim();
    let mut jumps: Vec<ComplexMatrix> = model.lindblad().iter().map(|l| embed_probe(l, d_a)).collect();
    for (m, l) in ancilla_jumps.iter().enumerate() {
        if l.shape() != (d_a, d_a) {
            return Err(Error::Dimension(format!("ancilla jump {m} has shape {:?}, ancilla dim {d_a}", l.shape())));
        }
        jumps.push(tensor(&identity(code.probe_dim()), l));
    }
    check_operators(code, &jumps, &embed_probe(model.generator().matrix(), d_a), tol)
}

/// Conditions for jump operators and generator already acting on the full code space.
pub fn check_operators(code: &CodePair, jumps: &[ComplexMatrix], g: &ComplexMatrix, tol: f64) -> Result<QecReport> {
    let dim = code.total_dim();
    for op in jumps.iter().chain(std::iter::once(g)) {
        if op.shape() != (dim, dim) {
            return Err(Error::Dimension(format!("operator of shape {:?} on a code space of dim {dim}", op.shape())));
        }
    }
    let v = code.basis_matrix();
    let images: Vec<ComplexMatrix> = jumps.iter().map(|l| l * &v).collect();
    let vd = v.adjoint();

    let mut lambda = Vec::with_capacity(jumps.len());
    let mut residual_1: f64 = 0.0;
    for w in &images {
        let m = &vd * w;
        let lam = m[(0, 0)];
        residual_1 = residual_1.max(deviation_from_scalar(&m, lam));
        lambda.push(lam);
    }

    let r = jumps.len();
    let mut mu = ComplexMatrix::zeros(r, r);
    let mut residual_2: f64 = 0.0;
    for k in 0..r {
        let wk = images[k].adjoint();
        for j in 0..r {
            let m = &wk * &images[j];
            mu[(k, j)] = m[(0, 0)];
            residual_2 = residual_2.max(deviation_from_scalar(&m, m[(0, 0)]));
        }
    }

    let ge = &vd * (g * &v);
    let diff = ge[(0, 0)].re - ge[(1, 1)].re;
    let off = 0.5 * (ge[(0, 1)] + ge[(1, 0)].conj()).norm();
    let gap_3 = (diff * diff + 4.0 * off * off).sqrt();

    Ok(QecReport {
        lambda,
        mu,
        residual_1,
        residual_2,
        gap_3,
        tol,
        passes: [residual_1 <= tol, residual_2 <= tol, gap_3 > tol],
    })
}

fn deviation_from_scalar(m: &ComplexMatrix, s: C64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { s } else { c64(0.0, 0.0) };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}
