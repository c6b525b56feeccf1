#![allow(dead_code)]

use qecmet_core::operators::{c64, ComplexMatrix, ComplexVector, HermitianOperator, PureState};
use qecmet_core::span::{hermitian_generators_of, hnls_check, DEFAULT_HNLS_TOL};
use qecmet_core::LindbladModel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; avoids pulling in rand_distr for one function.
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| c64(gaussian(rng), gaussian(rng)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> HermitianOperator {
    HermitianOperator::symmetrized(random_matrix(rng, d))
}

pub fn random_pure(rng: &mut ChaCha8Rng, d: usize) -> PureState {
    PureState::normalized(ComplexVector::from_fn(d, |_, _| c64(gaussian(rng), gaussian(rng)))).unwrap()
}

/// Random model with dim in `2..=6` and one or two jumps; generically HNLS
/// holds unless the span fills the whole space.
pub fn random_model(rng: &mut ChaCha8Rng) -> LindbladModel {
    let d = rng.random_range(2..=6);
    let r = rng.random_range(1..=2);
    let jumps = (0..r).map(|_| random_matrix(rng, d) * c64(0.5, 0.0)).collect();
    LindbladModel::new(random_hermitian(rng, d), jumps, vec![], 1.0).unwrap()
}

pub fn random_hnls_model(rng: &mut ChaCha8Rng) -> LindbladModel {
    loop {
        let m = random_model(rng);
        if hnls_check(&m, DEFAULT_HNLS_TOL).unwrap().holds {
            return m;
        }
    }
}

/// Random model whose generator lies in its own Lindblad span.
pub fn random_in_span_model(rng: &mut ChaCha8Rng) -> LindbladModel {
    let d = rng.random_range(2..=6);
    let r = rng.random_range(1..=2);
    let jumps: Vec<ComplexMatrix> = (0..r).map(|_| random_matrix(rng, d) * c64(0.5, 0.0)).collect();
    let mut g = HermitianOperator::zeros(d);
    for e in hermitian_generators_of(d, &jumps) {
        g = g.add(&e.scale(0.5 * gaussian(rng)));
    }
    LindbladModel::new(g, jumps, vec![], 1.0).unwrap()
}
