//! Two-dimensional QEC codes on probe ⊗ ancilla: synthesis, condition checks,
//! recovery and effective logical dynamics.

mod concat;
mod conditions;
mod effective;
mod recovery;

pub use concat::concatenate_codes;
pub use conditions::{check_conditions, check_generalized, check_operators, QecReport};
pub use effective::{effective_generator, noiseless_qfi, optimal_input_state, EffectiveGenerator};
pub use recovery::{build_recovery, RecoveryChannel};

use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{
    c64, eig_hermitian, eig_matrix, partial_trace, ComplexMatrix, ComplexVector, DensityOperator,
    HermitianOperator, Keep, PureState,
};

const ORTHO_TOL: f64 = 1e-10;

/// Logical basis `{|c0⟩, |c1⟩}` on `H_P ⊗ H_A` (probe index major).
#[derive(Clone, Debug)]
pub struct CodePair {
    c0: PureState,
    c1: PureState,
    d_p: usize,
    d_a: usize,
    projector: HermitianOperator,
}

impl CodePair {
    pub fn new(c0: PureState, c1: PureState, d_p: usize, d_a: usize) -> Result<Self> {
        if d_p == 0 || d_a == 0 {
            return Err(Error::InvalidCode("probe and ancilla dimensions must be positive".into()));
        }
        let d = d_p * d_a;
        if c0.dim() != d || c1.dim() != d {
            return Err(Error::Dimension(format!(
                "code vectors of length {} and {} on a {d_p}x{d_a} space",
                c0.dim(),
                c1.dim()
            )));
        }
        let overlap = c0.inner(&c1).norm();
        if overlap > ORTHO_TOL {
            return Err(Error::InvalidCode(format!("code vectors overlap by {overlap:.3e}")));
        }
        let projector = HermitianOperator::symmetrized(c0.projector() + c1.projector());
        Ok(Self { c0, c1, d_p, d_a, projector })
    }

    /// Ancilla-free code (`d_A = 1`).
    pub fn probe_only(c0: PureState, c1: PureState) -> Result<Self> {
        let d = c0.dim();
        Self::new(c0, c1, d, 1)
    }

    pub fn c0(&self) -> &PureState {
        &self.c0
    }

    pub fn c1(&self) -> &PureState {
        &self.c1
    }

    pub fn probe_dim(&self) -> usize {
        self.d_p
    }

    pub fn ancilla_dim(&self) -> usize {
        self.d_a
    }

    pub fn total_dim(&self) -> usize {
        self.d_p * self.d_a
    }

    pub fn projector(&self) -> &HermitianOperator {
        &self.projector
    }

    /// `D × 2` isometry with columns `c0, c1`.
    pub fn basis_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&[self.c0.amplitudes().clone(), self.c1.amplitudes().clone()])
    }

    /// `a|c0⟩ + b|c1⟩` for a logical amplitude vector `(a, b)`.
    pub fn encode(&self, logical: &PureState) -> Result<PureState> {
        if logical.dim() != 2 {
            return Err(Error::Dimension(format!("logical state has dimension {}", logical.dim())));
        }
        let v = logical.amplitudes();
        PureState::normalized(self.c0.amplitudes() * v[0] + self.c1.amplitudes() * v[1])
    }

    /// Reduced probe state of `|c_i⟩`.
    pub fn probe_marginal(&self, i: usize) -> Result<DensityOperator> {
        let c = if i == 0 { &self.c0 } else { &self.c1 };
        let rho = partial_trace(&c.projector(), (self.d_p, self.d_a), Keep::Probe)?;
        DensityOperator::new(HermitianOperator::symmetrized(rho).into_matrix())
    }

    /// Same logical vectors with the two labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            c0: self.c1.clone(),
            c1: self.c0.clone(),
            d_p: self.d_p,
            d_a: self.d_a,
            projector: self.projector.clone(),
        }
    }
}

/// Purifies `ρ0` into ancilla slots `0..d` and `ρ1` into slots `d..2d`,
/// giving orthogonal ancilla support and `d_A = 2d`.
pub fn purify_pair(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<CodePair> {
    let d = rho0.dim();
    if rho1.dim() != d {
        return Err(Error::Dimension(format!("states of dimension {d} and {}", rho1.dim())));
    }
    let d_a = 2 * d;
    let c0 = purify_into(rho0.matrix(), d_a, 0)?;
    let c1 = purify_into(rho1.matrix(), d_a, d)?;
    CodePair::new(c0, c1, d, d_a)
}

fn purify_into(rho: &ComplexMatrix, d_a: usize, offset: usize) -> Result<PureState> {
    let d = rho.nrows();
    let spec = eig_matrix(rho)?;
    let mut v = ComplexVector::zeros(d * d_a);
    for (k, &p) in spec.values.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let w = c64(p.sqrt(), 0.0);
        for i in 0..d {
            v[i * d_a + offset + k] += spec.vectors[(i, k)] * w;
        }
    }
    PureState::normalized(v)
}

/// Splits a traceless `G⊥ = ½ tr|G⊥| (ρ0 − ρ1)` and returns `(ρ0, ρ1, tr|G⊥|)`.
pub fn spectral_split(g_perp: &HermitianOperator) -> Result<(DensityOperator, DensityOperator, f64)> {
    let norm = g_perp.hs_norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("G⊥ vanishes; no code can be synthesized".into()));
    }
    let tr = g_perp.trace();
    if tr.abs() > 1e-10 * norm.max(1.0) {
        return Err(Error::InvalidArgument(format!("G⊥ must be traceless, trace = {tr:.3e}")));
    }
    let spec = eig_hermitian(g_perp)?;
    let cutoff = 1e-12 * spec.max().abs().max(spec.min().abs());
    let pos = spec.map(|x| if x > cutoff { x } else { 0.0 });
    let neg = spec.map(|x| if x < -cutoff { -x } else { 0.0 });
    let t_pos: f64 = spec.values.iter().filter(|&&x| x > cutoff).sum();
    let t_neg: f64 = -spec.values.iter().filter(|&&x| x < -cutoff).sum::<f64>();
    let rho0 = DensityOperator::new(HermitianOperator::symmetrized(pos / c64(t_pos, 0.0)).into_matrix())?;
    let rho1 = DensityOperator::new(HermitianOperator::symmetrized(neg / c64(t_neg, 0.0)).into_matrix())?;
    Ok((rho0, rho1, t_pos + t_neg))
}

/// The code built from purifications of the positive and negative parts of `G⊥`.
pub fn canonical_code(g_perp: &HermitianOperator) -> Result<CodePair> {
    let (rho0, rho1, _) = spectral_split(g_perp)?;
    purify_pair(&rho0, &rho1)
}

/// Restricts the ancilla to the support of `tr_P Π_C`.
pub fn compress_ancilla(code: &CodePair) -> Result<CodePair> {
    let (d_p, d_a) = (code.probe_dim(), code.ancilla_dim());
    let reduced = partial_trace(code.projector().matrix(), (d_p, d_a), Keep::Ancilla)?;
    let spec = eig_matrix(&reduced)?;
    let keep: Vec<usize> = (0..d_a).filter(|&k| spec.values[k] > 1e-12).collect();
    if keep.len() == d_a {
        return Ok(code.clone());
    }
    let w = spec.vectors.select_columns(keep.iter());
    let new_da = keep.len();
    let project = |c: &PureState| -> Result<PureState> {
        let a = c.amplitudes();
        let mut v = ComplexVector::zeros(d_p * new_da);
        for p in 0..d_p {
            for (j, _) in keep.iter().enumerate() {
                let mut s = c64(0.0, 0.0);
                for b in 0..d_a {
                    s += w[(b, j)].conj() * a[p * d_a + b];
                }
                v[p * new_da + j] = s;
            }
        }
        PureState::normalized(v)
    };
    CodePair::new(project(code.c0())?, project(code.c1())?, d_p, new_da)
}

/// Candidate pure representative of `ρ`: its eigenvector when rank one,
/// otherwise the normalized `√ρ · (1, …, 1)`, which keeps the populations of
/// a diagonal `ρ`.
pub fn pure_representative(rho: &DensityOperator) -> Result<PureState> {
    let spec = eig_hermitian(&rho.as_hermitian())?;
    let rank = spec.values.iter().filter(|&&x| x > 1e-10).count();
    if rank == 1 {
        return PureState::normalized(spec.vectors.column(spec.dim() - 1).into_owned());
    }
    // Eigenvalues at roundoff level would otherwise leak O(√eps) amplitude.
    let root = spec.map(|x| if x > 1e-10 { x.sqrt() } else { 0.0 });
    let ones = ComplexVector::from_element(rho.dim(), c64(1.0, 0.0));
    PureState::normalized(root * ones)
        .or_else(|_| PureState::normalized(spec.vectors.column(spec.dim() - 1).into_owned()))
}

/// Tries to drop the ancilla by replacing each logical state with a pure
/// representative of its probe marginal. Returns `None` if the result is not
/// orthogonal or fails any of the conditions at `tol`.
pub fn ancilla_free_reduction(code: &CodePair, model: &LindbladModel, tol: f64) -> Result<Option<CodePair>> {
    if code.ancilla_dim() == 1 {
        return Ok(Some(code.clone()));
    }
    let psi0 = pure_representative(&code.probe_marginal(0)?)?;
    let psi1 = pure_representative(&code.probe_marginal(1)?)?;
    let Ok(reduced) = CodePair::probe_only(psi0, psi1) else {
        return Ok(None);
    };
    let report = check_conditions(&reduced, model, tol)?;
    Ok(report.holds().then_some(reduced))
}
