//! Ready-made probe models.

use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{annihilation, c64, paulis, ComplexMatrix, HermitianOperator, C64};

/// Truncated oscillator with `G = n²` on `{|0⟩, …, |n̄⟩}` and photon loss
/// `L = √κ a`. `ω = 1`.
pub fn kerr_model(n_bar: usize, loss_rate: f64) -> Result<LindbladModel> {
    if n_bar == 0 || !n_bar.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("n_bar must be even and positive, got {n_bar}")));
    }
    if !(loss_rate >= 0.0) || !loss_rate.is_finite() {
        return Err(Error::InvalidArgument(format!("loss rate must be non-negative, got {loss_rate}")));
    }
    let d = n_bar + 1;
    let n2: Vec<f64> = (0..d).map(|n| (n * n) as f64).collect();
    let l = annihilation(d) * c64(loss_rate.sqrt(), 0.0);
    LindbladModel::new(HermitianOperator::from_real_diagonal(&n2), vec![l], vec![], 1.0)
}

/// Number operator `a†a` on `{|0⟩, …, |d−1⟩}`.
pub fn number_operator(d: usize) -> ComplexMatrix {
    let a = annihilation(d);
    a.adjoint() * a
}

/// Qubit with `G = ½ m·σ` and `L = √rate n·σ`. `ω = 1`.
pub fn qubit_model(m: [f64; 3], n: [C64; 3], rate: f64) -> Result<LindbladModel> {
    if m.iter().all(|x| *x == 0.0) || m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("m must be a finite nonzero vector".into()));
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("rate must be non-negative, got {rate}")));
    }
    let s = paulis();
    let mut g = ComplexMatrix::zeros(2, 2);
    let mut l = ComplexMatrix::zeros(2, 2);
    for k in 0..3 {
        g += &s[k] * c64(0.5 * m[k], 0.0);
        l += &s[k] * n[k];
    }
    LindbladModel::new(HermitianOperator::symmetrized(g), vec![l * c64(rate.sqrt(), 0.0)], vec![], 1.0)
}
