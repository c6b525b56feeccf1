use crate::error::{Error, Result};
use crate::operators::{c64, eig_matrix, ComplexMatrix, DensityOperator};

/// Eigenvalue-pair cutoff in the SLD formula.
pub const QFI_CUTOFF: f64 = 1e-12;

/// `F = Σ_{p_i+p_j > cutoff} 2|⟨i|∂ρ|j⟩|²/(p_i+p_j)` in the eigenbasis of `rho`.
pub fn qfi_from_derivative(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<f64> {
    if rho.shape() != drho.shape() || !rho.is_square() {
        return Err(Error::Dimension(format!("state {:?} vs derivative {:?}", rho.shape(), drho.shape())));
    }
    let herm = (rho + rho.adjoint()) * c64(0.5, 0.0);
    let spec = eig_matrix(&herm)?;
    let dh = (drho + drho.adjoint()) * c64(0.5, 0.0);
    let rotated = spec.vectors.adjoint() * dh * &spec.vectors;
    let d = spec.dim();
    let mut f = 0.0;
    for i in 0..d {
        for j in 0..d {
            let s = spec.values[i].max(0.0) + spec.values[j].max(0.0);
            if s > QFI_CUTOFF {
                f += 2.0 * rotated[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

/// QFI from states at `ω − δ/2` and `ω + δ/2`, with the midpoint state
/// taken as their average.
pub fn mixed_state_qfi(rho_minus: &DensityOperator, rho_plus: &DensityOperator, omega_step: f64) -> Result<f64> {
    qfi_central(rho_minus.matrix(), rho_plus.matrix(), omega_step)
}

pub(crate) fn qfi_central(minus: &ComplexMatrix, plus: &ComplexMatrix, omega_step: f64) -> Result<f64> {
    if !(omega_step > 0.0) {
        return Err(Error::InvalidArgument(format!("omega_step must be positive, got {omega_step}")));
    }
    if minus.shape() != plus.shape() {
        return Err(Error::Dimension(format!("states {:?} and {:?}", minus.shape(), plus.shape())));
    }
    let mid = (minus + plus) * c64(0.5, 0.0);
    let d = (plus - minus) / c64(omega_step, 0.0);
    qfi_from_derivative(&mid, &d)
}
