//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its verdict line; exits nonzero if any fails.

mod common;

use std::time::Instant;

use qecmet_core::code::{
    ancilla_free_reduction, build_recovery, canonical_code, check_conditions, compress_ancilla, CodePair,
};
use qecmet_core::dynamics::{
    crossover_slope, fitted_exponent, free_qfi, one_step_deviation, qec_evolve, robustness_experiment, sql_bound,
    Integrator, RobustnessGrid, SimulationConfig, Spacing,
};
use qecmet_core::operators::{c64, trace_abs, ComplexMatrix, ComplexVector, PureState};
use qecmet_core::optimize::{
    brute_force_dual, dual_minimize, optimal_code, primal_recover, verify_duality, DualOptions, DualSolution,
    OracleSpec, PrimalOptions, ORACLE_MAX_SPAN,
};
use qecmet_core::presets::{kerr_model, number_operator, qubit_model};
use qecmet_core::span::{hnls_check, HnlsVerdict, DEFAULT_HNLS_TOL};
use qecmet_core::LindbladModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn solve(model: &LindbladModel) -> (HnlsVerdict, DualSolution) {
    let v = hnls_check(model, DEFAULT_HNLS_TOL).unwrap();
    let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default()).unwrap();
    (v, dual)
}

fn optimized_code(model: &LindbladModel) -> CodePair {
    let (v, dual) = solve(model);
    let primal = primal_recover(&dual, &v.basis, &PrimalOptions::default()).unwrap();
    optimal_code(&primal).unwrap()
}

fn x_hat() -> [qecmet_core::operators::C64; 3] {
    [c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]
}

fn z_hat() -> [qecmet_core::operators::C64; 3] {
    [c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]
}

fn kerr_headline() -> Outcome {
    let mut parts = Vec::new();
    for n in [2usize, 4, 8] {
        let start = Instant::now();
        let (_, dual) = solve(&kerr_model(n, 1.0).unwrap());
        let secs = start.elapsed().as_secs_f64();
        let nf = n as f64;
        let (s_want, q_want) = (nf * nf / 8.0, nf.powi(4) / 16.0);
        let q = 4.0 * dual.s_star * dual.s_star;
        ensure((dual.s_star - s_want).abs() < 1e-6, format!("n̄={n}: s*={} want {s_want}", dual.s_star))?;
        ensure((q - q_want).abs() < 1e-5, format!("n̄={n}: 4s*²={q} want {q_want}"))?;
        ensure(secs < 10.0, format!("n̄={n}: took {secs:.1}s"))?;
        parts.push(format!("n̄={n} s*={:.9} ({secs:.2}s)", dual.s_star));
    }
    Ok(parts.join(", "))
}

fn kerr_binomial_code() -> Outcome {
    let model = kerr_model(4, 1.0).unwrap();
    let code = optimized_code(&model);
    let reduced = ancilla_free_reduction(&code, &model, 1e-9)
        .unwrap()
        .ok_or("optimal code has no ancilla-free reduction")?;
    let mut b = ComplexVector::zeros(5);
    b[0] = c64(1.0, 0.0);
    b[4] = c64(1.0, 0.0);
    let binomial = CodePair::probe_only(PureState::basis(5, 2), PureState::normalized(b).unwrap()).unwrap();
    let fid = (reduced.projector().matrix() * binomial.projector().matrix()).trace().re / 2.0;
    ensure(fid >= 1.0 - 1e-8, format!("projector fidelity {fid}"))?;
    Ok(format!("projector fidelity 1 - {:.1e}", 1.0 - fid))
}

fn canonical_property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200;
    let (mut worst_res, mut worst_gap) = (0.0f64, 0.0f64);
    for i in 0..n {
        let model = common::random_hnls_model(&mut rng);
        let v = hnls_check(&model, DEFAULT_HNLS_TOL).unwrap();
        let code = canonical_code(&v.g_perp).unwrap();
        let rep = check_conditions(&code, &model, 1e-9).unwrap();
        let g2 = (v.g_perp.matrix() * v.g_perp.matrix()).trace().re;
        let want = 2.0 * g2 / trace_abs(&v.g_perp).unwrap();
        worst_res = worst_res.max(rep.residual_1).max(rep.residual_2);
        worst_gap = worst_gap.max((rep.gap_3 - want).abs());
        ensure(rep.holds(), format!("model {i} (dim {}): {}", model.dim(), rep.summary()))?;
    }
    ensure(worst_res < 1e-9, format!("max residual {worst_res:.2e}"))?;
    ensure(worst_gap < 1e-9, format!("max gap_3 error {worst_gap:.2e}"))?;
    Ok(format!("{n} models, max residual {worst_res:.1e}, max gap_3 error {worst_gap:.1e}"))
}

fn sql_property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 50;
    let mut worst_ratio = 0.0f64;
    let mut worst_res = 0.0f64;
    for i in 0..n {
        let model = common::random_in_span_model(&mut rng);
        ensure(!hnls_check(&model, DEFAULT_HNLS_TOL).unwrap().holds, format!("model {i}: HNLS holds"))?;
        let rep = sql_bound(&model, 1e-9).map_err(|e| format!("model {i}: {e}"))?;
        ensure(rep.solvable && rep.residual_beta2 < 1e-9, format!("model {i}: residual {:.2e}", rep.residual_beta2))?;
        worst_res = worst_res.max(rep.residual_beta2);
        let d = model.dim();
        let input = common::random_pure(&mut rng, d * d);
        let mut cfg = SimulationConfig::new(1.0, 0.1, 10.0);
        cfg.samples = 100;
        cfg.qec_enabled = false;
        let (times, qfi) = free_qfi(&model, &input, &cfg).unwrap();
        for (t, f) in times.iter().zip(&qfi) {
            let bound = rep.bound_coeff * t;
            worst_ratio = worst_ratio.max(f / bound);
            ensure(*f <= 1.05 * bound, format!("model {i}: qfi({t})={f} > 1.05·{bound}"))?;
        }
    }
    Ok(format!("{n} models, max residual {worst_res:.1e}, max qfi/bound {worst_ratio:.3}"))
}

// The per-step O(dt²) leakage out of the code (from ωG as well as from the
// loss) dephases the logical qubit at a rate ∝ dt·(ω² + κ²). ω = κ = 0.1
// keeps that below the 2% budget at t = 10 with dt = 1e-3.
fn kerr_dynamics() -> Outcome {
    let start = Instant::now();
    let (omega, kappa) = (0.1, 0.1);
    let model = kerr_model(4, kappa).unwrap().with_omega(omega);
    let code = optimized_code(&model);
    let recovery = build_recovery(&code, &model, 1e-9).unwrap();
    let mut cfg = SimulationConfig::new(omega, 1e-3, 10.0);
    cfg.spacing = Spacing::Log;
    let traj = qec_evolve(&model, &code, &recovery, &cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (t, q): (Vec<f64>, Vec<f64>) =
        traj.times.iter().zip(&traj.qfi).filter(|(t, _)| **t >= 1.0 - 1e-9).map(|(t, q)| (*t, *q)).unzip();
    let exponent = fitted_exponent(&t, &q);
    let worst = t.iter().zip(&q).map(|(t, q)| (q / (t * t) / 16.0 - 1.0).abs()).fold(0.0, f64::max);
    ensure((1.95..=2.05).contains(&exponent), format!("exponent {exponent}"))?;
    ensure(worst < 0.02, format!("qfi/t² off 16 by {:.2}%", worst * 100.0))?;
    ensure(secs < 60.0, format!("took {secs:.1}s"))?;
    Ok(format!("ω={omega} κ={kappa}: exponent {exponent:.4}, max |qfi/(16t²) - 1| = {worst:.1e} ({secs:.1}s)"))
}

fn duality_suite() -> Outcome {
    let mut models: Vec<LindbladModel> = [2, 4, 8].iter().map(|&n| kerr_model(n, 1.0).unwrap()).collect();
    models.push(qubit_model([0.0, 0.0, 1.0], x_hat(), 1.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    models.extend((0..40).map(|_| common::random_hnls_model(&mut rng)));
    let (mut worst_gap, mut worst_oracle, mut oracle_runs) = (0.0f64, 0.0f64, 0);
    for (i, model) in models.iter().enumerate() {
        let (v, dual) = solve(model);
        let primal = primal_recover(&dual, &v.basis, &PrimalOptions::default()).map_err(|e| format!("model {i}: {e}"))?;
        let rep = verify_duality(&dual, &primal, 1e-6).unwrap();
        let gap = (rep.primal_objective - rep.two_s_star).abs();
        worst_gap = worst_gap.max(gap);
        ensure(gap < 1e-6, format!("model {i}: |tr(G̃G⊥) - 2s*| = {gap:.2e}"))?;
        if v.basis.len() <= ORACLE_MAX_SPAN {
            let oracle = brute_force_dual(&v.g_perp, &v.basis, OracleSpec::default()).unwrap();
            let diff = (oracle - dual.s_star).abs();
            worst_oracle = worst_oracle.max(diff);
            oracle_runs += 1;
            ensure(diff < 1e-4, format!("model {i}: oracle {oracle} vs {}", dual.s_star))?;
        }
    }
    Ok(format!(
        "{} models, max duality gap {worst_gap:.1e}; oracle on {oracle_runs}, max diff {worst_oracle:.1e}",
        models.len()
    ))
}

fn qubit_dichotomy() -> Outcome {
    let good = qubit_model([0.0, 0.0, 1.0], x_hat(), 1.0).unwrap();
    let (v, dual) = solve(&good);
    ensure((dual.s_star - 0.5).abs() < 1e-6, format!("s* = {}", dual.s_star))?;
    let code = compress_ancilla(&canonical_code(&v.g_perp).unwrap()).unwrap();
    let recovery = build_recovery(&code, &good, 1e-9).unwrap();
    let traj = qec_evolve(&good, &code, &recovery, &SimulationConfig::new(1.0, 1e-3, 10.0)).unwrap();
    let t = *traj.times.last().unwrap();
    let ratio = traj.qfi.last().unwrap() / (t * t);
    ensure((ratio - 1.0).abs() < 0.01, format!("corrected qfi/t² = {ratio}"))?;

    let bad = qubit_model([0.0, 0.0, 1.0], z_hat(), 1.0).unwrap();
    ensure(!hnls_check(&bad, DEFAULT_HNLS_TOL).unwrap().holds, "dephasing model passes HNLS")?;
    let rep = sql_bound(&bad, 1e-9).unwrap();
    ensure(rep.solvable, "dephasing SQL bound not solvable")?;
    let mut plus = ComplexVector::zeros(4);
    plus[0] = c64(1.0, 0.0);
    plus[3] = c64(1.0, 0.0);
    let mut cfg = SimulationConfig::new(1.0, 0.05, 10.0);
    cfg.qec_enabled = false;
    let (times, qfi) = free_qfi(&bad, &PureState::normalized(plus).unwrap(), &cfg).unwrap();
    let exponent = fitted_exponent(&times, &qfi);
    let within = times.iter().zip(&qfi).all(|(t, f)| *f <= 1.05 * rep.bound_coeff * t);
    ensure(within, "free QFI exceeds the linear bound")?;
    ensure(exponent < 1.3, format!("dephasing QFI exponent {exponent}"))?;
    Ok(format!(
        "x-noise s*={:.9}, qfi(10)/100={ratio:.5}; z-noise bound {:.4}·t, exponent {exponent:.3}",
        dual.s_star, rep.bound_coeff
    ))
}

fn robustness() -> Outcome {
    let start = Instant::now();
    let model = kerr_model(4, 1.0).unwrap().with_perturbation(vec![number_operator(5)]).unwrap();
    let code = optimized_code(&model.without_perturbation());
    let recovery = build_recovery(&code, &model, 1e-9).unwrap();
    // Small dt so the O(dt) logical error of the J-free protocol stays far
    // below every ε; the transfer-matrix powers make the step count free.
    let cfg = SimulationConfig::new(1.0, 1e-6, 10.0);
    let eps = [1e-3, 3e-3, 1e-2];
    let reports = robustness_experiment(&model, &code, &recovery, &cfg, &eps, &RobustnessGrid::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    for r in &reports {
        ensure(r.distance_bound_holds, format!("ε={}: distance bound violated", r.epsilon))?;
        ensure(r.effective_norm <= r.epsilon * (1.0 + 1e-9), format!("ε={}: ‖ΣJc†Jc‖={}", r.epsilon, r.effective_norm))?;
        ensure(r.crossover_time_estimate.is_finite(), format!("ε={}: no crossover on grid", r.epsilon))?;
    }
    let slope = crossover_slope(&reports);
    ensure((slope + 1.0).abs() <= 0.15, format!("crossover slope {slope}"))?;
    ensure(secs < 300.0, format!("took {secs:.1}s"))?;
    let cross: Vec<String> = reports.iter().map(|r| format!("{:.3e}", r.crossover_time_estimate)).collect();
    Ok(format!("crossovers [{}], slope {slope:.3} ({secs:.1}s)", cross.join(", ")))
}

fn one_step_order() -> Outcome {
    let dts = [1e-2, 3e-3, 1e-3, 3e-4];
    let mut parts = Vec::new();
    for (name, model) in [
        ("qubit", qubit_model([0.0, 0.0, 1.0], x_hat(), 1.0).unwrap()),
        ("kerr", kerr_model(4, 1.0).unwrap()),
    ] {
        let v = hnls_check(&model, DEFAULT_HNLS_TOL).unwrap();
        let code = canonical_code(&v.g_perp).unwrap();
        let recovery = build_recovery(&code, &model, 1e-9).unwrap();
        let mut logical = ComplexVector::zeros(2);
        logical[0] = c64(0.6, 0.0);
        logical[1] = c64(0.0, 0.8);
        let rho: ComplexMatrix = code.encode(&PureState::new(logical).unwrap()).unwrap().projector();
        let devs: Vec<f64> =
            dts.iter().map(|&dt| one_step_deviation(&model, &recovery, &rho, dt, Integrator::Exact).unwrap()).collect();
        let exponent = slope(&dts, &devs);
        ensure(exponent >= 1.9, format!("{name}: exponent {exponent}, deviations {devs:?}"))?;
        parts.push(format!("{name} exponent {exponent:.3}"));
    }
    Ok(parts.join(", "))
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("Kerr s* and QFI coefficient", kerr_headline),
        ("Kerr n̄=4 optimal code is the binomial code", kerr_binomial_code),
        ("canonical code on random HNLS models", canonical_property_suite),
        ("SQL bound on random in-span models", sql_property_suite),
        ("Kerr n̄=4 corrected QFI ~ 16 t²", kerr_dynamics),
        ("duality gap and oracle agreement", duality_suite),
        ("qubit x-noise vs z-noise", qubit_dichotomy),
        ("robustness crossover ~ 1/ε", robustness),
        ("one-step correction error ~ dt²", one_step_order),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
