mod common;

use proptest::prelude::*;
use qecmet_core::code::{
    build_recovery, canonical_code, check_conditions, check_generalized, compress_ancilla, effective_generator,
    spectral_split, CodePair,
};
use qecmet_core::operators::{c64, embed_probe, identity, trace_abs, ComplexMatrix, PureState};
use qecmet_core::presets::{kerr_model, qubit_model};
use qecmet_core::span::{hnls_check, DEFAULT_HNLS_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn x_noise_qubit() -> qecmet_core::LindbladModel {
    qubit_model([0.0, 0.0, 1.0], [c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)], 1.0).unwrap()
}

#[test]
fn qubit_canonical_code_has_expected_marginals() {
    let v = hnls_check(&x_noise_qubit(), DEFAULT_HNLS_TOL).unwrap();
    let code = compress_ancilla(&canonical_code(&v.g_perp).unwrap()).unwrap();
    // G⊥ = σz/2: logical states are |0⟩ and |1⟩ of the probe.
    let m0 = code.probe_marginal(0).unwrap();
    let m1 = code.probe_marginal(1).unwrap();
    assert!((m0.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    assert!((m1.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    let eff = effective_generator(&code, x_noise_qubit().generator()).unwrap();
    assert!((eff.eigengap - 1.0).abs() < 1e-12);
}

#[test]
fn perpendicular_code_is_rejected_when_noise_hits_it() {
    // {|0⟩, |1⟩} without ancilla fails condition [1] for σx noise.
    let code = CodePair::probe_only(PureState::basis(2, 0), PureState::basis(2, 1)).unwrap();
    let rep = check_conditions(&code, &x_noise_qubit(), 1e-9).unwrap();
    assert!(!rep.passes[0]);
    assert!(build_recovery(&code, &x_noise_qubit(), 1e-9).is_err());
}

#[test]
fn noisy_ancilla_condition_uses_both_jump_sets() {
    let v = hnls_check(&x_noise_qubit(), DEFAULT_HNLS_TOL).unwrap();
    let code = compress_ancilla(&canonical_code(&v.g_perp).unwrap()).unwrap();
    let d_a = code.ancilla_dim();
    let clean = check_generalized(&code, &x_noise_qubit(), &[], 1e-9).unwrap();
    assert!(clean.holds());
    // Ancilla dephasing reads out which logical state the ancilla carries.
    let mut z = ComplexMatrix::zeros(d_a, d_a);
    for k in 0..d_a {
        z[(k, k)] = c64(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    let noisy = check_generalized(&code, &x_noise_qubit(), &[z], 1e-9).unwrap();
    assert!(!noisy.passes[0], "{}", noisy.summary());
    let trivial = check_generalized(&code, &x_noise_qubit(), &[identity(d_a)], 1e-9).unwrap();
    assert!(trivial.holds());
}

#[test]
fn kerr_canonical_gap_is_two_trace_square_over_trace_norm() {
    let m = kerr_model(4, 1.0).unwrap();
    let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
    let (rho0, rho1, tn) = spectral_split(&v.g_perp).unwrap();
    assert!((tn - trace_abs(&v.g_perp).unwrap()).abs() < 1e-12);
    assert!((rho0.as_hermitian().trace() - 1.0).abs() < 1e-12);
    assert!((rho1.as_hermitian().trace() - 1.0).abs() < 1e-12);
    let code = canonical_code(&v.g_perp).unwrap();
    let rep = check_conditions(&code, &m, 1e-9).unwrap();
    let g2 = (v.g_perp.matrix() * v.g_perp.matrix()).trace().re;
    assert!((rep.gap_3 - 2.0 * g2 / tn).abs() < 1e-10);
}

#[test]
fn recovery_is_trace_preserving_and_fixes_the_code() {
    let m = kerr_model(4, 1.0).unwrap();
    let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
    let code = canonical_code(&v.g_perp).unwrap();
    let rec = build_recovery(&code, &m, 1e-9).unwrap();
    assert!(rec.channel().is_trace_preserving());
    let rho = code.c1().projector();
    let (out, w) = rec.apply(&rho);
    assert!(w < 1e-14);
    assert!((out - rho).norm() < 1e-10);
    // A single loss event is undone.
    let lost = embed_probe(&m.lindblad()[0], code.ancilla_dim()) * code.c0().amplitudes();
    let lost = PureState::normalized(lost).unwrap().projector();
    let (back, _) = rec.apply(&lost);
    assert!((back - code.c0().projector()).norm() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_code_corrects_random_models(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_hnls_model(&mut rng);
        let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
        let code = canonical_code(&v.g_perp).unwrap();
        let rep = check_conditions(&code, &m, 1e-9).unwrap();
        prop_assert!(rep.holds(), "{}", rep.summary());
        let compressed = compress_ancilla(&code).unwrap();
        prop_assert!(compressed.ancilla_dim() <= code.ancilla_dim());
        prop_assert!(check_conditions(&compressed, &m, 1e-9).unwrap().holds());
        let rec = build_recovery(&compressed, &m, 1e-9).unwrap();
        prop_assert!(rec.channel().is_trace_preserving());
    }

    #[test]
    fn code_basis_is_orthonormal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_hnls_model(&mut rng);
        let v = hnls_check(&m, DEFAULT_HNLS_TOL).unwrap();
        let code = canonical_code(&v.g_perp).unwrap();
        let b = code.basis_matrix();
        let gram = b.adjoint() * &b;
        prop_assert!((gram - identity(2)).norm() < 1e-10);
    }
}
