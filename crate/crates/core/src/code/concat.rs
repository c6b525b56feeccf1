use super::CodePair;
use crate::error::{Error, Result};
use crate::operators::{c64, ComplexVector, PureState};

/// Replaces each ancilla basis vector `|k⟩_A` of `outer` by `inner_basis[k]`.
pub fn concatenate_codes(outer: &CodePair, inner_basis: &[PureState]) -> Result<CodePair> {
    let (d_p, d_a) = (outer.probe_dim(), outer.ancilla_dim());
    let used = (0..d_a)
        .filter(|&a| {
            (0..d_p).any(|p| {
                let i = p * d_a + a;
                outer.c0().amplitudes()[i].norm() > 0.0 || outer.c1().amplitudes()[i].norm() > 0.0
            })
        })
        .max()
        .map_or(0, |a| a + 1);
    if inner_basis.len() < used {
        return Err(Error::InvalidArgument(format!(
            "outer code uses {used} ancilla basis states but {} inner states were given",
            inner_basis.len()
        )));
    }
    let inner_dim = inner_basis.first().map_or(1, PureState::dim);
    for (i, a) in inner_basis.iter().enumerate() {
        if a.dim() != inner_dim {
            return Err(Error::Dimension("inner basis states of different dimensions".into()));
        }
        for (j, b) in inner_basis.iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            let dev = (a.inner(b) - c64(want, 0.0)).norm();
            if dev > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "inner basis not orthonormal: |⟨{i}|{j}⟩ − δ| = {dev:.3e}"
                )));
            }
        }
    }
    let lift = |c: &PureState| -> Result<PureState> {
        let mut v = ComplexVector::zeros(d_p * inner_dim);
        for p in 0..d_p {
            for (a, inner) in inner_basis.iter().enumerate().take(d_a) {
                let amp = c.amplitudes()[p * d_a + a];
                if amp.norm() == 0.0 {
                    continue;
                }
                for b in 0..inner_dim {
                    v[p * inner_dim + b] += amp * inner.amplitudes()[b];
                }
            }
        }
        PureState::new(v)
    };
    CodePair::new(lift(outer.c0())?, lift(outer.c1())?, d_p, inner_dim)
}
