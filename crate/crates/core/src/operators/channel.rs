use super::{eig_matrix, identity, tol, trace, ComplexMatrix, DensityOperator, StateTolerance};
use crate::error::{Error, Result};

/// A completely positive map in Kraus form.
///
/// `trace_preserving` distinguishes channels (`Σ K†K = I`) from
/// trace-non-increasing operations (`Σ K†K ≤ I`).
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<ComplexMatrix>,
    trace_preserving: bool,
}

fn completeness(kraus: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
    let shape = first.shape();
    let mut sum = ComplexMatrix::zeros(shape.1, shape.1);
    for k in kraus {
        if k.shape() != shape {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators of mixed shapes {:?} and {:?}",
                shape,
                k.shape()
            )));
        }
        sum += k.adjoint() * k;
    }
    Ok(sum)
}

impl QuantumChannel {
    /// Trace-preserving channel; completeness checked within `1e-9`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(kraus, tol::CHANNEL_TP)
    }

    pub fn with_tolerance(kraus: Vec<ComplexMatrix>, tp_tol: f64) -> Result<Self> {
        let sum = completeness(&kraus)?;
        let dev = (&sum - identity(sum.nrows())).norm();
        if dev > tp_tol {
            return Err(Error::InvalidChannel(format!("Σ K†K deviates from I by {dev:.3e}")));
        }
        Ok(Self { kraus, trace_preserving: true })
    }

    /// Trace-non-increasing operation; requires `Σ K†K ≤ I` within `1e-9`.
    pub fn sub_channel(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let sum = completeness(&kraus)?;
        let slack = identity(sum.nrows()) - sum;
        let min = eig_matrix(&slack)?.min();
        if min < -tol::CHANNEL_TP {
            return Err(Error::InvalidChannel(format!("Σ K†K exceeds I (slack eigenvalue {min:.3e})")));
        }
        Ok(Self { kraus, trace_preserving: false })
    }

    pub fn identity(dim: usize) -> Self {
        Self { kraus: vec![identity(dim)], trace_preserving: true }
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn input_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus[0].nrows()
    }
}

/// `Σ K ρ K†` on an arbitrary (not necessarily positive) operator.
pub fn apply_kraus(kraus: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let d = kraus.first().map_or(rho.nrows(), |k| k.nrows());
    let mut out = ComplexMatrix::zeros(d, d);
    for k in kraus {
        out += k * rho * k.adjoint();
    }
    out
}

fn check_shape(ch: &QuantumChannel, rho: &DensityOperator) -> Result<()> {
    if ch.input_dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "channel input dimension {} vs state dimension {}",
            ch.input_dim(),
            rho.dim()
        )));
    }
    Ok(())
}

/// Applies a trace-preserving channel.
pub fn apply_channel(ch: &QuantumChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    check_shape(ch, rho)?;
    if !ch.is_trace_preserving() {
        return Err(Error::InvalidChannel(
            "apply_channel needs a trace-preserving channel; use apply_subchannel".into(),
        ));
    }
    let out = apply_kraus(ch.kraus(), rho.matrix());
    DensityOperator::with_tolerances(
        out,
        StateTolerance { hermitian_rel: 1e-10, min_eig: -1e-9, trace: tol::CHANNEL_TP },
    )
}

/// Applies a trace-non-increasing operation and returns the renormalized
/// output together with its weight `tr(Σ K ρ K†)`.
pub fn apply_subchannel(ch: &QuantumChannel, rho: &DensityOperator) -> Result<(Option<DensityOperator>, f64)> {
    check_shape(ch, rho)?;
    let out = apply_kraus(ch.kraus(), rho.matrix());
    let weight = trace(&out).re;
    if weight <= 1e-300 {
        return Ok((None, weight.max(0.0)));
    }
    let normalized = out / super::c64(weight, 0.0);
    let state = DensityOperator::with_tolerances(
        normalized,
        StateTolerance { hermitian_rel: 1e-10, min_eig: -1e-9, trace: 1e-9 },
    )?;
    Ok((Some(state), weight))
}
