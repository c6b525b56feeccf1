use std::collections::HashMap;

use super::evolve::{to_state, Integrator, StepMap};
use super::qfi::qfi_central;
use crate::code::{effective_generator, optimal_input_state, CodePair, RecoveryChannel};
use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{c64, eig_hermitian, embed_probe, matrix_exp, trace_abs, ComplexMatrix, DensityOperator, PureState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Spacing {
    #[default]
    Linear,
    /// Geometric between `t_max/100` (at least `dt`) and `t_max`.
    Log,
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub dt: f64,
    pub t_max: f64,
    pub omega: f64,
    /// Finite-difference step in `ω`; capped so that `δ · t_max · spread(G) ≤ 1e-2`.
    pub omega_step: f64,
    pub integrator: Integrator,
    pub qec_enabled: bool,
    /// Unused: the dynamics are deterministic.
    pub seed: u64,
    pub samples: usize,
    pub spacing: Spacing,
}

impl SimulationConfig {
    pub fn new(omega: f64, dt: f64, t_max: f64) -> Self {
        Self {
            dt,
            t_max,
            omega,
            omega_step: 1e-4 * omega.abs().max(1.0),
            integrator: Integrator::Exact,
            qec_enabled: true,
            seed: 0,
            samples: 50,
            spacing: Spacing::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_max {} must be at least dt {}", self.t_max, self.dt)));
        }
        if !(self.omega_step > 0.0) {
            return Err(Error::InvalidArgument("omega_step must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidArgument("omega must be finite".into()));
        }
        Ok(())
    }

    /// Step counts of the sample times, strictly increasing.
    pub fn sample_steps(&self) -> Vec<u64> {
        let total = (self.t_max / self.dt).round().max(1.0);
        let n = self.samples;
        let raw: Vec<f64> = match self.spacing {
            Spacing::Linear => (1..=n).map(|k| total * k as f64 / n as f64).collect(),
            Spacing::Log => {
                let lo = (total / 100.0).max(1.0);
                if n == 1 {
                    vec![total]
                } else {
                    (0..n).map(|k| lo * (total / lo).powf(k as f64 / (n - 1) as f64)).collect()
                }
            }
        };
        let mut steps: Vec<u64> = raw.iter().map(|x| x.round().max(1.0) as u64).collect();
        steps.dedup();
        steps
    }
}

/// Time series of one simulated run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Probe-ancilla states at the sample times.
    pub states: Vec<DensityOperator>,
    pub qfi: Vec<f64>,
    pub fidelity_to_ideal: Vec<f64>,
    /// With QEC: probability that the next recovery takes an off-support
    /// branch. Without: weight outside the code space.
    pub offcode_weight: Vec<f64>,
    /// Log-log slope of `qfi` against `t` over `t ≥ t_max/10`.
    pub fitted_exponent: f64,
    pub omega_step_used: f64,
    /// Largest relative change of the QFI when the step is halved.
    pub richardson_max_rel: f64,
}

impl Trajectory {
    pub fn richardson_ok(&self) -> bool {
        self.richardson_max_rel <= 0.05
    }
}

/// Least-squares slope of `ln y` against `ln x` over `x ≥ x_max / 10`.
pub fn fitted_exponent(x: &[f64], y: &[f64]) -> f64 {
    let Some(&x_max) = x.last() else { return f64::NAN };
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&t, &f)| t >= x_max / 10.0 * (1.0 - 1e-12) && t > 0.0 && f > 0.0)
        .map(|(t, f)| (t.ln(), f.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// A linear map on states that can be raised to integer powers.
pub(crate) enum Propagator {
    /// 4×4 transfer matrix on column-stacked 2×2 code-basis operators.
    Logical(ComplexMatrix),
    Full(StepMap),
}

impl Propagator {
    fn power(&self, n: u64) -> Self {
        match self {
            Self::Logical(t) => {
                let mut result = ComplexMatrix::identity(4, 4);
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
                Self::Logical(result)
            }
            Self::Full(m) => Self::Full(m.power(n)),
        }
    }

    fn apply(&self, state: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            Self::Logical(t) => {
                let v = t * nalgebra::DVector::from_column_slice(state.as_slice());
                Ok(ComplexMatrix::from_column_slice(2, 2, v.as_slice()))
            }
            Self::Full(m) => m.apply(state),
        }
    }
}

/// Logical transfer matrix of one step followed by recovery.
pub(crate) fn logical_transfer(step: &StepMap, recovery: &RecoveryChannel) -> Result<ComplexMatrix> {
    let code = recovery.code();
    let v = code.basis_matrix();
    let cols = [code.c0().amplitudes(), code.c1().amplitudes()];
    let mut t = ComplexMatrix::zeros(4, 4);
    for j in 0..2 {
        for i in 0..2 {
            let e = cols[i] * cols[j].adjoint();
            let (out, _) = recovery.apply(&step.apply(&e)?);
            let x = v.adjoint() * out * &v;
            t.set_column(j * 2 + i, &nalgebra::DVector::from_column_slice(x.as_slice()));
        }
    }
    Ok(t)
}

fn propagate(prop: &Propagator, start: &ComplexMatrix, steps: &[u64]) -> Result<Vec<ComplexMatrix>> {
    let mut cache: HashMap<u64, Propagator> = HashMap::new();
    let mut out = Vec::with_capacity(steps.len());
    let mut state = start.clone();
    let mut prev = 0;
    for &n in steps {
        let gap = n - prev;
        let p = cache.entry(gap).or_insert_with(|| prop.power(gap));
        state = p.apply(&state)?;
        out.push(state.clone());
        prev = n;
    }
    Ok(out)
}

fn spread(model: &LindbladModel) -> Result<f64> {
    let s = eig_hermitian(model.generator())?;
    Ok((s.max() - s.min()).max(1e-300))
}

/// Runs the protocol from the optimal logical input, with or without
/// recovery after every step.
pub fn qec_evolve(model: &LindbladModel, code: &CodePair, recovery: &RecoveryChannel, config: &SimulationConfig) -> Result<Trajectory> {
    config.validate()?;
    if recovery.code().total_dim() != code.total_dim() || recovery.code().probe_dim() != code.probe_dim() {
        return Err(Error::Dimension("recovery was built for a different code".into()));
    }
    if code.probe_dim() != model.dim() {
        return Err(Error::Dimension(format!("code probe dim {} vs model dim {}", code.probe_dim(), model.dim())));
    }
    let eff = effective_generator(code, model.generator())?;
    let psi_logical = optimal_input_state(&eff)?;
    let steps = config.sample_steps();
    let times: Vec<f64> = steps.iter().map(|&n| n as f64 * config.dt).collect();
    let delta = config.omega_step.min(1e-2 / (config.t_max * spread(model)?));

    let build = |omega: f64| -> Result<(StepMap, Propagator)> {
        let step = StepMap::new(&model.with_omega(omega), config.dt, config.integrator)?;
        let prop = if config.qec_enabled {
            Propagator::Logical(logical_transfer(&step, recovery)?)
        } else {
            Propagator::Full(step.clone())
        };
        Ok((step, prop))
    };

    let v = code.basis_matrix();
    let start = if config.qec_enabled {
        psi_logical.projector()
    } else {
        code.encode(&psi_logical)?.projector()
    };
    let run = |omega: f64| -> Result<Vec<ComplexMatrix>> { propagate(&build(omega)?.1, &start, &steps) };

    let (step0, prop0) = build(config.omega)?;
    let centre = propagate(&prop0, &start, &steps)?;
    let (m1, p1) = (run(config.omega - delta / 2.0)?, run(config.omega + delta / 2.0)?);
    let (m2, p2) = (run(config.omega - delta / 4.0)?, run(config.omega + delta / 4.0)?);

    let g_logical = eff.g_eff.matrix().clone();
    let g_full = embed_probe(model.generator().matrix(), code.ancilla_dim());
    let psi_full = code.encode(&psi_logical)?;
    let projector = code.projector().matrix();

    let mut states = Vec::with_capacity(steps.len());
    let mut qfi = Vec::with_capacity(steps.len());
    let mut fidelity = Vec::with_capacity(steps.len());
    let mut offcode = Vec::with_capacity(steps.len());
    let mut richardson: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let norm = |m: &ComplexMatrix| m / m.trace();
        let f1 = qfi_central(&norm(&m1[k]), &norm(&p1[k]), delta)?;
        let f2 = qfi_central(&norm(&m2[k]), &norm(&p2[k]), delta / 2.0)?;
        if f2 > 1e-12 {
            richardson = richardson.max((f1 - f2).abs() / f2);
        }
        qfi.push(f1);

        let (full, fid) = if config.qec_enabled {
            let x = norm(&centre[k]);
            let u = matrix_exp(&g_logical, c64(0.0, -config.omega * t))?;
            let ideal = &u * psi_logical.amplitudes();
            let fid = (ideal.adjoint() * &x * &ideal)[(0, 0)].re;
            (&v * x * v.adjoint(), fid)
        } else {
            let x = norm(&centre[k]);
            let u = matrix_exp(&g_full, c64(0.0, -config.omega * t))?;
            let ideal = &u * psi_full.amplitudes();
            let fid = (ideal.adjoint() * &x * &ideal)[(0, 0)].re;
            (x, fid)
        };
        let w = if config.qec_enabled {
            recovery.off_support_weight(&step0.apply(&full)?)
        } else {
            1.0 - (projector * &full).trace().re
        };
        offcode.push(w);
        fidelity.push(fid);
        states.push(to_state(&full)?);
    }
    Ok(Trajectory {
        fitted_exponent: fitted_exponent(&times, &qfi),
        times,
        states,
        qfi,
        fidelity_to_ideal: fidelity,
        offcode_weight: offcode,
        omega_step_used: delta,
        richardson_max_rel: richardson,
    })
}

/// Evolves a given probe-ancilla state without recovery and returns the QFI
/// at the sample times (used for the SQL comparison).
pub fn free_qfi(model: &LindbladModel, input: &PureState, config: &SimulationConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    config.validate()?;
    if !input.dim().is_multiple_of(model.dim()) {
        return Err(Error::Dimension(format!("input dim {} vs probe dim {}", input.dim(), model.dim())));
    }
    let steps = config.sample_steps();
    let times: Vec<f64> = steps.iter().map(|&n| n as f64 * config.dt).collect();
    let delta = config.omega_step.min(1e-2 / (config.t_max * spread(model)?));
    let start = input.projector();
    let run = |omega: f64| -> Result<Vec<ComplexMatrix>> {
        let step = StepMap::new(&model.with_omega(omega), config.dt, config.integrator)?;
        propagate(&Propagator::Full(step), &start, &steps)
    };
    let (m, p) = (run(config.omega - delta / 2.0)?, run(config.omega + delta / 2.0)?);
    let qfi = m
        .iter()
        .zip(&p)
        .map(|(a, b)| qfi_central(&(a / a.trace()), &(b / b.trace()), delta))
        .collect::<Result<Vec<_>>>()?;
    Ok((times, qfi))
}

/// `‖R(E_dt(ρ)) − (ρ − iω[Π_C G Π_C, ρ] dt)‖₁` for a code-space state `ρ`.
pub fn one_step_deviation(
    model: &LindbladModel,
    recovery: &RecoveryChannel,
    rho: &ComplexMatrix,
    dt: f64,
    integrator: Integrator,
) -> Result<f64> {
    let code = recovery.code();
    let step = StepMap::new(model, dt, integrator)?;
    let (out, _) = recovery.apply(&step.apply(rho)?);
    let p = code.projector().matrix();
    let pgp = p * embed_probe(model.generator().matrix(), code.ancilla_dim()) * p;
    let comm = &pgp * rho - rho * &pgp;
    let ideal = rho - comm * c64(0.0, model.omega() * dt);
    trace_abs(&crate::operators::HermitianOperator::symmetrized(out - ideal))
}
