use rayon::prelude::*;

use super::evolve::StepMap;
use super::qfi::qfi_central;
use super::trajectory::{logical_transfer, SimulationConfig};
use crate::code::{effective_generator, optimal_input_state, CodePair, RecoveryChannel};
use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{c64, embed_probe, operator_norm, trace_abs, ComplexMatrix, HermitianOperator};

/// Sample grid for one robustness run, in units of `1/ε`.
#[derive(Clone, Debug)]
pub struct RobustnessGrid {
    /// Geometric time grid from `t_lo_eps / ε` to `t_hi_eps / ε`.
    pub t_lo_eps: f64,
    pub t_hi_eps: f64,
    pub samples: usize,
}

impl Default for RobustnessGrid {
    fn default() -> Self {
        Self { t_lo_eps: 1e-3, t_hi_eps: 30.0, samples: 120 }
    }
}

#[derive(Clone, Debug)]
pub struct RobustnessReport {
    /// `‖Σ J_m† J_m‖` after rescaling.
    pub epsilon: f64,
    /// `Π_C R_j J_m Π_C` in the code basis, nonzero ones only.
    pub effective_jumps: Vec<ComplexMatrix>,
    /// `‖Σ J^(C)† J^(C)‖`.
    pub effective_norm: f64,
    pub times: Vec<f64>,
    /// Trace distance to the `J`-free corrected run at the same `dt`.
    pub distance_curve: Vec<f64>,
    pub qfi: Vec<f64>,
    /// `t² · eigengap²` of the code.
    pub ideal_qfi: Vec<f64>,
    /// First time the QFI drops below half the ideal value (log-interpolated);
    /// `NaN` if it never does on the grid.
    pub crossover_time_estimate: f64,
    /// Whether `distance ≤ 1.1 ε t` for every sample with `t ≤ 1/(10ε)`.
    pub distance_bound_holds: bool,
}

/// Scales the model's perturbing jumps so that `‖Σ J†J‖ = ε`.
pub fn rescale_perturbation(model: &LindbladModel, epsilon: f64) -> Result<LindbladModel> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let e0 = perturbation_strength(model)?;
    if model.perturbation().is_empty() || e0 == 0.0 {
        return Err(Error::InvalidModel("robustness needs nonzero perturbing jumps".into()));
    }
    let s = c64((epsilon / e0).sqrt(), 0.0);
    model.with_perturbation(model.perturbation().iter().map(|j| j * s).collect())
}

/// `‖Σ J_m† J_m‖`.
pub fn perturbation_strength(model: &LindbladModel) -> Result<f64> {
    let d = model.dim();
    let mut s = ComplexMatrix::zeros(d, d);
    for j in model.perturbation() {
        s += j.adjoint() * j;
    }
    operator_norm(&HermitianOperator::symmetrized(s))
}

/// `Π_C R_j J_m Π_C` written in the code basis, for every recovery Kraus
/// element `R_j` and perturbing jump `J_m`.
pub fn effective_jumps(model: &LindbladModel, recovery: &RecoveryChannel) -> Vec<ComplexMatrix> {
    let code = recovery.code();
    let v = code.basis_matrix();
    let vd = v.adjoint();
    let mut out = Vec::new();
    for j in model.perturbation() {
        let jv = embed_probe(j, code.ancilla_dim()) * &v;
        for r in recovery.channel().kraus() {
            let m = &vd * r * &jv;
            if m.norm() > 1e-14 {
                out.push(m);
            }
        }
    }
    out
}

/// Corrected dynamics under the `L`-noise plus rescaled `J`-noise for each
/// `ε`, compared with the `J`-free corrected run. Runs the grid in parallel.
pub fn robustness_experiment(
    model: &LindbladModel,
    code: &CodePair,
    recovery: &RecoveryChannel,
    config: &SimulationConfig,
    epsilon_grid: &[f64],
    grid: &RobustnessGrid,
) -> Result<Vec<RobustnessReport>> {
    config.validate()?;
    let report = recovery.report();
    if !(report.passes[0] && report.passes[1]) {
        return Err(Error::ConditionsViolated(report.summary()));
    }
    epsilon_grid
        .par_iter()
        .map(|&eps| single(model, code, recovery, config, eps, grid))
        .collect()
}

fn single(
    model: &LindbladModel,
    code: &CodePair,
    recovery: &RecoveryChannel,
    config: &SimulationConfig,
    eps: f64,
    grid: &RobustnessGrid,
) -> Result<RobustnessReport> {
    let noisy = if eps == 0.0 { model.without_perturbation() } else { rescale_perturbation(model, eps)? };
    let epsilon = perturbation_strength(&noisy)?;
    let jc = effective_jumps(&noisy, recovery);
    let mut sum = ComplexMatrix::zeros(2, 2);
    for j in &jc {
        sum += j.adjoint() * j;
    }
    let effective_norm = operator_norm(&HermitianOperator::symmetrized(sum))?;

    let eff = effective_generator(code, model.generator())?;
    let psi = optimal_input_state(&eff)?;
    let start = psi.projector();
    let scale = if eps > 0.0 { 1.0 / eps } else { config.t_max };
    let (lo, hi) = (grid.t_lo_eps * scale, grid.t_hi_eps * scale);
    let n = grid.samples.max(2);
    let mut steps: Vec<u64> = (0..n)
        .map(|k| {
            let t = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
            (t / config.dt).round().max(1.0) as u64
        })
        .collect();
    steps.dedup();
    let times: Vec<f64> = steps.iter().map(|&s| s as f64 * config.dt).collect();
    let delta = config.omega_step.min(1e-2 / (times.last().copied().unwrap_or(1.0) * eff.eigengap.max(1e-300)));

    let transfer = |m: &LindbladModel, omega: f64| -> Result<ComplexMatrix> {
        let step = StepMap::new(&m.with_omega(omega), config.dt, config.integrator)?;
        logical_transfer(&step, recovery)
    };
    let run = |t: &ComplexMatrix| -> Vec<ComplexMatrix> {
        let mut out = Vec::with_capacity(steps.len());
        let mut state = nalgebra::DVector::from_column_slice(start.as_slice());
        let mut prev = 0;
        for &s in &steps {
            state = matrix_power(t, s - prev) * state;
            out.push(ComplexMatrix::from_column_slice(2, 2, state.as_slice()));
            prev = s;
        }
        out
    };
    let clean = run(&transfer(&model.without_perturbation(), config.omega)?);
    let perturbed = run(&transfer(&noisy, config.omega)?);
    let minus = run(&transfer(&noisy, config.omega - delta / 2.0)?);
    let plus = run(&transfer(&noisy, config.omega + delta / 2.0)?);

    let mut distance_curve = Vec::with_capacity(times.len());
    let mut qfi = Vec::with_capacity(times.len());
    let mut ideal_qfi = Vec::with_capacity(times.len());
    let mut bound_ok = true;
    for (k, &t) in times.iter().enumerate() {
        let diff = HermitianOperator::symmetrized(&perturbed[k] - &clean[k]);
        let dist = 0.5 * trace_abs(&diff)?;
        if eps > 0.0 && t <= 1.0 / (10.0 * eps) && dist > 1.1 * epsilon * t {
            bound_ok = false;
        }
        distance_curve.push(dist);
        qfi.push(qfi_central(&minus[k], &plus[k], delta)?);
        ideal_qfi.push(t * t * eff.eigengap * eff.eigengap);
    }
    Ok(RobustnessReport {
        epsilon,
        effective_jumps: jc,
        effective_norm,
        crossover_time_estimate: crossover(&times, &qfi, &ideal_qfi),
        times,
        distance_curve,
        qfi,
        ideal_qfi,
        distance_bound_holds: bound_ok,
    })
}

fn matrix_power(t: &ComplexMatrix, n: u64) -> ComplexMatrix {
    let mut result = ComplexMatrix::identity(t.nrows(), t.ncols());
    let mut base = t.clone();
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
    result
}

/// First crossing of `qfi / ideal = ½`, interpolated linearly in `ln t`.
fn crossover(times: &[f64], qfi: &[f64], ideal: &[f64]) -> f64 {
    let ratio: Vec<f64> = qfi.iter().zip(ideal).map(|(q, i)| if *i > 0.0 { q / i } else { 1.0 }).collect();
    for k in 1..times.len() {
        if ratio[k] < 0.5 && ratio[k - 1] >= 0.5 {
            let (a, b) = (ratio[k - 1], ratio[k]);
            let w = (a - 0.5) / (a - b);
            let lt = times[k - 1].ln() + w * (times[k].ln() - times[k - 1].ln());
            return lt.exp();
        }
    }
    f64::NAN
}

/// Slope of `ln(crossover)` against `ln(ε)` across reports.
pub fn crossover_slope(reports: &[RobustnessReport]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = reports
        .iter()
        .filter(|r| r.epsilon > 0.0 && r.crossover_time_estimate.is_finite())
        .map(|r| (r.epsilon, r.crossover_time_estimate))
        .unzip();
    if x.len() < 2 {
        return f64::NAN;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
