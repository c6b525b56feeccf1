//! Dense complex-matrix algebra with Hermitian-operator semantics.
//!
//! Every spectral quantity in the crate (operator norm, trace norm, spectral
//! splits, square roots) goes through [`eig_hermitian`], so all modules see
//! the same spectrum for the same operator.

mod channel;
mod spectral;

pub use channel::{apply_channel, apply_kraus, apply_subchannel, QuantumChannel};
pub use spectral::{
    eig_hermitian, eig_matrix, matrix_exp, operator_norm, sqrt_psd, trace_abs, Spectrum,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Default tolerances used by the validating constructors.
pub mod tol {
    /// Hermiticity, relative to the largest entry magnitude.
    pub const HERMITIAN_REL: f64 = 1e-12;
    /// Smallest admissible eigenvalue of a density operator.
    pub const STATE_MIN_EIG: f64 = -1e-10;
    /// Admissible deviation of a density operator's trace from one.
    pub const STATE_TRACE: f64 = 1e-10;
    /// Admissible deviation of a pure state's norm from one.
    pub const PURE_NORM: f64 = 1e-12;
    /// Completeness of a trace-preserving Kraus set.
    pub const CHANNEL_TP: f64 = 1e-9;
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Largest entry magnitude.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Pauli matrices `(σx, σy, σz)`.
pub fn paulis() -> [ComplexMatrix; 3] {
    let o = c64(0.0, 0.0);
    let one = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    [
        ComplexMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        ComplexMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        ComplexMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
    ]
}

/// Truncated annihilation operator on `dim` Fock levels: `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(dim: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = c64((n as f64).sqrt(), 0.0);
    }
    a
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `op ⊗ I_{d_a}`: lifts a probe operator to the probe-ancilla space.
pub fn embed_probe(op: &ComplexMatrix, d_a: usize) -> ComplexMatrix {
    if d_a == 1 {
        return op.clone();
    }
    tensor(op, &identity(d_a))
}

/// Which tensor factor survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    Probe,
    Ancilla,
}

/// Partial trace of an operator on `H_P ⊗ H_A` (probe index major).
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let (dp, da) = dims;
    if !m.is_square() || m.nrows() != dp * da {
        return Err(Error::Dimension(format!(
            "partial trace of {}x{} over factorization {}x{}",
            m.nrows(),
            m.ncols(),
            dp,
            da
        )));
    }
    Ok(match keep {
        Keep::Probe => ComplexMatrix::from_fn(dp, dp, |p, q| {
            (0..da).map(|a| m[(p * da + a, q * da + a)]).sum()
        }),
        Keep::Ancilla => ComplexMatrix::from_fn(da, da, |a, b| {
            (0..dp).map(|p| m[(p * da + a, p * da + b)]).sum()
        }),
    })
}

fn hermitian_violation(m: &ComplexMatrix) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let v = (m[(i, j)] - m[(j, i)].conj()).norm();
            if v > worst.0 {
                worst = (v, i, j);
            }
        }
    }
    worst
}

/// A square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates with the default relative tolerance, then stores the exactly
    /// symmetrized matrix.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, tol::HERMITIAN_REL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, rel_tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let scale = max_abs(&matrix);
        let (violation, row, col) = hermitian_violation(&matrix);
        if violation > rel_tol * scale {
            return Err(Error::NotHermitian { violation, row, col });
        }
        Ok(Self::symmetrized(matrix))
    }

    /// `(m + m†) / 2`, no validation.
    pub fn symmetrized(matrix: ComplexMatrix) -> Self {
        let adj = matrix.adjoint();
        Self { matrix: (matrix + adj) * c64(0.5, 0.0) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: identity(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = c64(x, 0.0);
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: &self.matrix * c64(s, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix + &other.matrix }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix - &other.matrix }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self { matrix: &self.matrix + &other.matrix * c64(s, 0.0) }
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// Hilbert–Schmidt norm `sqrt(tr(A²))`.
    pub fn hs_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Real Hilbert–Schmidt inner product `tr(a b)` of Hermitian operators.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "hs_inner of {}-dim and {}-dim operators",
            a.dim(),
            b.dim()
        )));
    }
    Ok(hs_inner_unchecked(a.matrix(), b.matrix()))
}

/// `Re tr(a b)` for Hermitian `a`, `b` of equal size.
pub(crate) fn hs_inner_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    // tr(ab) = Σ a_ij b_ji = Σ a_ij conj(b_ij) when b is Hermitian.
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

/// Tolerances accepted by [`DensityOperator::with_tolerances`].
#[derive(Clone, Copy, Debug)]
pub struct StateTolerance {
    pub hermitian_rel: f64,
    pub min_eig: f64,
    pub trace: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        Self {
            hermitian_rel: tol::HERMITIAN_REL,
            min_eig: tol::STATE_MIN_EIG,
            trace: tol::STATE_TRACE,
        }
    }
}

/// Positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, StateTolerance::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, t: StateTolerance) -> Result<Self> {
        let h = HermitianOperator::with_tolerance(matrix, t.hermitian_rel)
            .map_err(|e| Error::InvalidState(e.to_string()))?;
        let tr = h.trace();
        if (tr - 1.0).abs() > t.trace {
            return Err(Error::InvalidState(format!("trace {tr:.12} differs from 1")));
        }
        let spec = eig_hermitian(&h)?;
        let min = spec.min();
        if min < t.min_eig {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix: h.into_matrix() })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        Self { matrix: v * v.adjoint() }
    }

    /// Maximally mixed state on `dim` levels.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: identity(dim) * c64(1.0 / dim as f64, 0.0) }
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator::symmetrized(self.matrix.clone())
    }
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let n = amplitudes.norm();
        if !n.is_finite() || (n - 1.0).abs() > tol::PURE_NORM {
            return Err(Error::InvalidState(format!("state norm {n:.15} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let n = amplitudes.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize zero or non-finite vector".into()));
        }
        Ok(Self { amplitudes: amplitudes / c64(n, 0.0) })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = ComplexVector::zeros(dim);
        v[index] = c64(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { amplitudes: self.amplitudes.kronecker(&other.amplitudes) }
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Trace distance `½‖a − b‖₁`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let diff = HermitianOperator::symmetrized(a - b);
    Ok(0.5 * trace_abs(&diff)?)
}
