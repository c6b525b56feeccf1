use super::{check_conditions, CodePair, QecReport};
use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{
    c64, eig_matrix, embed_probe, identity, ComplexMatrix, ComplexVector, QuantumChannel, C64,
};
use crate::span::DEFAULT_RANK_TOL;

/// Recovery `R(σ) = Π_C σ Π_C + R_E(Π_E σ Π_E)` completed on the unreachable
/// complement by sending it to `|c0⟩`.
///
/// Kraus order: `Π_C`, then the error-subspace isometries, then the
/// `off-support` elements `|c0⟩⟨u_m|`.
#[derive(Clone, Debug)]
pub struct RecoveryChannel {
    code: CodePair,
    channel: QuantumChannel,
    n_correcting: usize,
    /// Orthonormal basis of the unreachable complement, as columns.
    complement: ComplexMatrix,
    report: QecReport,
}

impl RecoveryChannel {
    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn code(&self) -> &CodePair {
        &self.code
    }

    pub fn report(&self) -> &QecReport {
        &self.report
    }

    /// `Π_C` and the error-subspace Kraus elements.
    pub fn correcting_kraus(&self) -> &[ComplexMatrix] {
        &self.channel.kraus()[..self.n_correcting]
    }

    pub fn off_support_count(&self) -> usize {
        self.channel.kraus().len() - self.n_correcting
    }

    /// Weight of `σ` on the unreachable complement, `tr(Q σ)`.
    pub fn off_support_weight(&self, sigma: &ComplexMatrix) -> f64 {
        let q = &self.complement;
        (q.adjoint() * sigma * q).trace().re
    }

    /// Applies the channel, using `Σ_m |c0⟩⟨u_m|σ|u_m⟩⟨c0| = tr(Qσ) |c0⟩⟨c0|`
    /// for the off-support block. Returns the output and `tr(Qσ)`.
    pub fn apply(&self, sigma: &ComplexMatrix) -> (ComplexMatrix, f64) {
        let mut out = ComplexMatrix::zeros(sigma.nrows(), sigma.ncols());
        for k in self.correcting_kraus() {
            out += k * sigma * k.adjoint();
        }
        let w = self.off_support_weight(sigma);
        if self.complement.ncols() > 0 {
            out += self.code.c0().projector() * c64(w, 0.0);
        }
        (out, w)
    }
}

/// Builds the recovery for a code satisfying conditions [1]–[2] at `tol`.
pub fn build_recovery(code: &CodePair, model: &LindbladModel, tol: f64) -> Result<RecoveryChannel> {
    let report = check_conditions(code, model, tol)?;
    if !(report.passes[0] && report.passes[1]) {
        return Err(Error::ConditionsViolated(report.summary()));
    }
    let dim = code.total_dim();
    let d_a = code.ancilla_dim();
    let v = code.basis_matrix();
    let codes = [code.c0().amplitudes().clone(), code.c1().amplitudes().clone()];

    // Errors F_k = L_k − λ_k with Gram M_kj = μ_kj − λ̄_k λ_j.
    let r = model.rank();
    let errors: Vec<ComplexMatrix> = model
        .lindblad()
        .iter()
        .zip(&report.lambda)
        .map(|(l, lam)| embed_probe(l, d_a) - identity(dim) * *lam)
        .collect();
    let gram = ComplexMatrix::from_fn(r, r, |k, j| report.mu[(k, j)] - report.lambda[k].conj() * report.lambda[j]);
    let gram = (&gram + gram.adjoint()) * c64(0.5, 0.0);

    let mut kraus = vec![&v * v.adjoint()];
    let mut frame: Vec<ComplexVector> = codes.to_vec();
    if r > 0 {
        let spec = eig_matrix(&gram)?;
        let cutoff = DEFAULT_RANK_TOL * spec.max().abs().max(1e-300);
        for a in 0..r {
            let d = spec.values[a];
            if d <= cutoff {
                continue;
            }
            let mut targets = Vec::with_capacity(2);
            for c in &codes {
                let mut f = ComplexVector::zeros(dim);
                for (k, e) in errors.iter().enumerate() {
                    f += (e * c) * spec.vectors[(k, a)];
                }
                targets.push(f / c64(d.sqrt(), 0.0));
            }
            // Re-orthonormalize against everything kept so far.
            let mut kept = Vec::with_capacity(2);
            for mut f in targets {
                for _pass in 0..2 {
                    for u in &frame {
                        let overlap: C64 = u.dotc(&f);
                        f -= u * overlap;
                    }
                }
                let n = f.norm();
                if n <= 1e-6 {
                    return Err(Error::ConditionsViolated(format!(
                        "error vector collapsed to norm {n:.3e} during orthonormalization; {}",
                        report.summary()
                    )));
                }
                f /= c64(n, 0.0);
                frame.push(f.clone());
                kept.push(f);
            }
            let mut ra = ComplexMatrix::zeros(dim, dim);
            for (c, f) in codes.iter().zip(&kept) {
                ra += c * f.adjoint();
            }
            kraus.push(ra);
        }
    }
    let n_correcting = kraus.len();

    let mut covered = ComplexMatrix::zeros(dim, dim);
    for u in &frame {
        covered += u * u.adjoint();
    }
    let q = identity(dim) - covered;
    let spec = eig_matrix(&((&q + q.adjoint()) * c64(0.5, 0.0)))?;
    let complement = spec.columns_where(|x| x > 0.5);
    for m in 0..complement.ncols() {
        kraus.push(&codes[0] * complement.column(m).adjoint());
    }
    let channel = QuantumChannel::new(kraus)?;
    Ok(RecoveryChannel { code: code.clone(), channel, n_correcting, complement, report })
}
