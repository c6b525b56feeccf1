use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{c64, eig_matrix, identity, matrix_exp, tensor, ComplexMatrix, DensityOperator, HermitianOperator};

/// How one time step `dt` of the master equation is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Integrator {
    /// Kraus set `{I + (−iωG − ½ΣL†L)dt, L_k√dt}`; completely positive,
    /// trace preserved only to `O(dt²)`.
    FirstOrder,
    /// `exp(ℒ dt)`.
    #[default]
    Exact,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-liouvillian-exponential" => Ok(Self::Exact),
            "first-order" | "first-order-channel" => Ok(Self::FirstOrder),
            other => Err(Error::InvalidArgument(format!("unknown integrator '{other}'"))),
        }
    }
}

/// Liouvillian superoperator in column-stacking convention,
/// `vec(AXB) = (Bᵀ ⊗ A) vec(X)`. Includes the perturbing jumps.
pub fn liouvillian(model: &LindbladModel) -> ComplexMatrix {
    let d = model.dim();
    let id = identity(d);
    let h = model.generator().matrix() * c64(model.omega(), 0.0);
    let minus_i = c64(0.0, -1.0);
    let mut l = (tensor(&id, &h) - tensor(&h.transpose(), &id)) * minus_i;
    for j in model.all_jumps() {
        let jj = j.adjoint() * j;
        l += tensor(&j.conjugate(), j);
        l -= (tensor(&id, &jj) + tensor(&jj.transpose(), &id)) * c64(0.5, 0.0);
    }
    l
}

/// First-order Kraus set for one step.
pub fn first_order_kraus(model: &LindbladModel, dt: f64) -> Vec<ComplexMatrix> {
    let d = model.dim();
    let mut drift = model.generator().matrix() * c64(0.0, -model.omega());
    for j in model.all_jumps() {
        drift -= j.adjoint() * j * c64(0.5, 0.0);
    }
    let mut out = vec![identity(d) + drift * c64(dt, 0.0)];
    out.extend(model.all_jumps().map(|j| j * c64(dt.sqrt(), 0.0)));
    out
}

/// One-step probe superoperator, applied to operators on `H_P ⊗ H_A` as
/// `S ⊗ id_A`.
#[derive(Clone, Debug)]
pub struct StepMap {
    superop: ComplexMatrix,
    d: usize,
}

impl StepMap {
    pub fn new(model: &LindbladModel, dt: f64, integrator: Integrator) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let d = model.dim();
        let superop = match integrator {
            Integrator::Exact => matrix_exp(&liouvillian(model), c64(dt, 0.0))?,
            Integrator::FirstOrder => {
                let mut s = ComplexMatrix::zeros(d * d, d * d);
                for k in first_order_kraus(model, dt) {
                    s += tensor(&k.conjugate(), &k);
                }
                s
            }
        };
        Ok(Self { superop, d })
    }

    pub fn probe_dim(&self) -> usize {
        self.d
    }

    pub fn superoperator(&self) -> &ComplexMatrix {
        &self.superop
    }

    /// `self` applied `n` times, by repeated squaring.
    pub fn power(&self, n: u64) -> Self {
        let dim = self.superop.nrows();
        let mut result = ComplexMatrix::identity(dim, dim);
        let mut base = self.superop.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self { superop: result, d: self.d }
    }

    /// Applies the map to every `d × d` ancilla block of `rho`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.d;
        let n = rho.nrows();
        if !rho.is_square() || !n.is_multiple_of(d) {
            return Err(Error::Dimension(format!("operator of size {n} is not a multiple of probe dim {d}")));
        }
        let da = n / d;
        let mut blocks = ComplexMatrix::zeros(d * d, da * da);
        for a in 0..da {
            for b in 0..da {
                let col = a * da + b;
                for q in 0..d {
                    for p in 0..d {
                        blocks[(q * d + p, col)] = rho[(p * da + a, q * da + b)];
                    }
                }
            }
        }
        let mapped = &self.superop * blocks;
        let mut out = ComplexMatrix::zeros(n, n);
        for a in 0..da {
            for b in 0..da {
                let col = a * da + b;
                for q in 0..d {
                    for p in 0..d {
                        out[(p * da + a, q * da + b)] = mapped[(q * d + p, col)];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Smallest eigenvalue allowed before a step is rejected.
pub const NEGATIVITY_TOL: f64 = -1e-8;

/// Hermitian part of `m` rescaled to unit trace, checked for positivity.
pub(crate) fn to_state(m: &ComplexMatrix) -> Result<DensityOperator> {
    let h = HermitianOperator::symmetrized(m.clone());
    let tr = h.trace();
    if !(tr > 0.0) {
        return Err(Error::InvalidState(format!("evolved operator has trace {tr:.3e}")));
    }
    let h = h.scale(1.0 / tr);
    let min_eig = eig_matrix(h.matrix())?.min();
    if min_eig < NEGATIVITY_TOL {
        return Err(Error::Negativity { min_eig });
    }
    Ok(DensityOperator::from_matrix_unchecked(h.into_matrix()))
}

/// One step of the master equation on a probe or probe-ancilla state.
/// First-order output is renormalized to unit trace.
pub fn evolve_step(model: &LindbladModel, rho: &DensityOperator, dt: f64, integrator: Integrator) -> Result<DensityOperator> {
    let map = StepMap::new(model, dt, integrator)?;
    to_state(&map.apply(rho.matrix())?)
}
