use crate::error::{Error, Result};
use crate::operators::{is_finite, ComplexMatrix, HermitianOperator};

/// A Markovian probe: `dρ/dt = -iω[G, ρ] + Σ D[L_k](ρ) + Σ D[J_m](ρ)`.
///
/// `lindblad` are the jump operators a code is expected to correct;
/// `perturbation` holds the optional weak noise used by robustness studies.
/// All operators are `dim × dim` and dimensionless; `omega` and the squared
/// jump-operator scales share one time unit.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    g: HermitianOperator,
    lindblad: Vec<ComplexMatrix>,
    perturbation: Vec<ComplexMatrix>,
    omega: f64,
}

impl LindbladModel {
    pub fn new(
        g: HermitianOperator,
        lindblad: Vec<ComplexMatrix>,
        perturbation: Vec<ComplexMatrix>,
        omega: f64,
    ) -> Result<Self> {
        let d = g.dim();
        if d == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidModel("omega must be finite".into()));
        }
        for (name, ops) in [("lindblad", &lindblad), ("perturbation", &perturbation)] {
            for (k, op) in ops.iter().enumerate() {
                if op.shape() != (d, d) {
                    return Err(Error::InvalidModel(format!(
                        "{name}[{k}] has shape {:?}, expected {d}x{d}",
                        op.shape()
                    )));
                }
                if !is_finite(op) {
                    return Err(Error::InvalidModel(format!("{name}[{k}] has non-finite entries")));
                }
            }
        }
        Ok(Self { g, lindblad, perturbation, omega })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn generator(&self) -> &HermitianOperator {
        &self.g
    }

    pub fn lindblad(&self) -> &[ComplexMatrix] {
        &self.lindblad
    }

    pub fn perturbation(&self) -> &[ComplexMatrix] {
        &self.perturbation
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Number of listed jump operators (not minimized).
    pub fn rank(&self) -> usize {
        self.lindblad.len()
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self { omega, ..self.clone() }
    }

    pub fn with_perturbation(&self, perturbation: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(self.g.clone(), self.lindblad.clone(), perturbation, self.omega)
    }

    pub fn without_perturbation(&self) -> Self {
        Self { perturbation: Vec::new(), ..self.clone() }
    }

    /// Jump operators `L_k` followed by `J_m`.
    pub fn all_jumps(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.lindblad.iter().chain(self.perturbation.iter())
    }
}
