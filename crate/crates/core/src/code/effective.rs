use super::CodePair;
use crate::error::{Error, Result};
use crate::operators::{c64, eig_hermitian, embed_probe, HermitianOperator, PureState};

/// `G_eff = Π_C G Π_C` written in the `{c0, c1}` basis.
#[derive(Clone, Debug)]
pub struct EffectiveGenerator {
    pub g_eff: HermitianOperator,
    pub eigengap: f64,
}

pub fn effective_generator(code: &CodePair, g: &HermitianOperator) -> Result<EffectiveGenerator> {
    if g.dim() != code.probe_dim() {
        return Err(Error::Dimension(format!("generator dim {} vs probe dim {}", g.dim(), code.probe_dim())));
    }
    let v = code.basis_matrix();
    let m = v.adjoint() * embed_probe(g.matrix(), code.ancilla_dim()) * &v;
    let g_eff = HermitianOperator::symmetrized(m);
    let spec = eig_hermitian(&g_eff)?;
    Ok(EffectiveGenerator { eigengap: (spec.max() - spec.min()).max(0.0), g_eff })
}

/// `(|v_min⟩ + |v_max⟩)/√2` in the code basis.
pub fn optimal_input_state(g: &EffectiveGenerator) -> Result<PureState> {
    let scale = g.g_eff.hs_norm().max(1.0);
    if g.eigengap <= 1e-12 * scale {
        return Err(Error::DegenerateGenerator { gap: g.eigengap });
    }
    let spec = eig_hermitian(&g.g_eff)?;
    let v = (spec.vectors.column(0) + spec.vectors.column(1)) * c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PureState::normalized(v)
}

/// `t² (λ_max − λ_min)²`.
pub fn noiseless_qfi(g: &EffectiveGenerator, t: f64) -> f64 {
    t * t * g.eigengap * g.eigengap
}
