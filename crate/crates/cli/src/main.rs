//! `qecmet`: command-line driver for the Heisenberg-limit toolkit.
//!
//! stdout carries data (JSON or CSV), stderr carries diagnostics. Exit codes:
//! 0 success, 2 when the model fails the test the command asks about, 1 on
//! errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use output::{code_summary, emit, fmt_num, matrix_json, qec_json, resolve_output, write_text};
use qecmet_core::code::{
    ancilla_free_reduction, build_recovery, canonical_code, check_conditions, compress_ancilla, effective_generator,
    CodePair,
};
use qecmet_core::dynamics::{
    crossover_slope, qec_evolve, robustness_experiment, sql_bound, Integrator, RobustnessGrid, SimulationConfig,
    Spacing,
};
use qecmet_core::io::{parse_code, parse_model, write_code, write_model, CodeFile, Provenance};
use qecmet_core::optimize::{
    dual_minimize, optimal_code, primal_recover, verify_duality, DualOptions, PrimalOptions,
};
use qecmet_core::presets::{kerr_model, qubit_model};
use qecmet_core::span::{hnls_check, HnlsVerdict, DEFAULT_HNLS_TOL};
use qecmet_core::LindbladModel;

/// Exit code when the model fails the property a command checks.
const EXIT_NEGATIVE: u8 = 2;

#[derive(Parser)]
#[command(name = "qecmet", version, about = "Heisenberg-limit diagnostics for Markovian quantum probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether the generator leaves the Lindblad span (HNLS).
    Check {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_HNLS_TOL)]
        tol: f64,
    },
    /// Build the canonical code from the spectral split of G⊥.
    Synth {
        model: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Solve for the optimal code and its QFI coefficient.
    Optimize {
        model: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        gtol: f64,
        #[arg(long, default_value_t = 1e-7)]
        obj_tol: f64,
        /// Write the probe-only code when the optimal code admits one.
        #[arg(long)]
        ancilla_free: bool,
    },
    /// Simulate the protocol and print `t,qfi,fidelity,offcode_weight` rows.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        no_qec: bool,
        #[arg(long, value_enum, default_value_t = IntegratorArg::Exact)]
        integrator: IntegratorArg,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Log-spaced sample times from t_max/100.
        #[arg(long)]
        log_spacing: bool,
        #[arg(long)]
        omega_step: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print `t,bound` rows of the linear QFI bound for models failing HNLS.
    SqlBound {
        model: PathBuf,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Corrected dynamics under rescaled perturbing jumps, one block of CSV
    /// rows per ε, plus a JSON summary file.
    Robustness {
        model: PathBuf,
        #[arg(long)]
        code: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_grid: Vec<f64>,
        /// Keep the protocol's own O(dt) logical error well below every ε.
        #[arg(long, default_value_t = 1e-6)]
        dt: f64,
        #[arg(long, default_value_t = 120)]
        samples: usize,
        #[arg(long, default_value = "robustness_summary.json")]
        summary: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a preset model and run the full pipeline on it.
    Demo {
        #[arg(value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 4)]
        nbar: usize,
        #[arg(long, default_value_t = 1.0)]
        loss_rate: f64,
        /// Directory for the model and code files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Exact,
    FirstOrder,
}

impl From<IntegratorArg> for Integrator {
    fn from(a: IntegratorArg) -> Self {
        match a {
            IntegratorArg::Exact => Integrator::Exact,
            IntegratorArg::FirstOrder => Integrator::FirstOrder,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Qubit,
    Kerr,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NEGATIVE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `Ok(false)` maps to the negative exit code.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Check { model, tol } => check(&model, tol),
        Command::Synth { model, output, tol } => synth(&model, &output, tol),
        Command::Optimize { model, output, gtol, obj_tol, ancilla_free } => {
            let opts = DualOptions { gtol, obj_tol, ..DualOptions::default() };
            optimize(&model, &output, &opts, ancilla_free)
        }
        Command::Simulate { model, code, t_max, dt, no_qec, integrator, samples, log_spacing, omega_step, tol, output } => {
            let m = load_model(&model)?;
            let mut cfg = SimulationConfig::new(m.omega(), dt, t_max);
            cfg.qec_enabled = !no_qec;
            cfg.integrator = integrator.into();
            cfg.samples = samples;
            cfg.spacing = if log_spacing { Spacing::Log } else { Spacing::Linear };
            if let Some(h) = omega_step {
                cfg.omega_step = h;
            }
            simulate(&m, &code, &cfg, tol, output.as_deref())
        }
        Command::SqlBound { model, t_max, samples, tol, output } => sql(&model, t_max, samples, tol, output.as_deref()),
        Command::Robustness { model, code, eps_grid, dt, samples, summary, tol, output } => {
            let m = load_model(&model)?;
            let cfg = SimulationConfig::new(m.omega(), dt, 1.0);
            let grid = RobustnessGrid { samples, ..RobustnessGrid::default() };
            robustness(&m, &code, &cfg, &eps_grid, &grid, tol, &summary, output.as_deref())
        }
        Command::Demo { preset, nbar, loss_rate, out_dir } => demo(preset, nbar, loss_rate, &out_dir),
    }
}

fn load_model(path: &Path) -> Result<LindbladModel> {
    parse_model(path).with_context(|| format!("reading model {}", path.display()))
}

fn load_code(path: &Path) -> Result<CodePair> {
    Ok(parse_code(path).with_context(|| format!("reading code {}", path.display()))?.0)
}

fn verdict_json(v: &HnlsVerdict) -> serde_json::Value {
    json!({
        "holds": v.holds,
        "marginal": v.marginal,
        "perp_hs_norm": v.perp_hs_norm,
        "tol": v.tol,
        "span_dim": v.basis.len(),
        "generator_count": v.basis.generator_count(),
        "warning": v.basis.warning(),
        "g_perp": matrix_json(v.g_perp.matrix()),
    })
}

fn report_hnls_failure(v: &HnlsVerdict) {
    eprintln!(
        "HNLS fails: ‖G⊥‖_HS = {:.3e} ≤ tol {:.1e}; the generator lies in the Lindblad span, so no code beats linear QFI growth",
        v.perp_hs_norm, v.tol
    );
}

fn check(model: &Path, tol: f64) -> Result<bool> {
    let m = load_model(model)?;
    let v = hnls_check(&m, tol)?;
    if v.marginal {
        eprintln!("warning: ‖G⊥‖_HS = {:.3e} is within a decade of tol; verdict is sensitive to it", v.perp_hs_norm);
    }
    emit(&verdict_json(&v))?;
    Ok(v.holds)
}

fn synth(model: &Path, output: &Path, tol: f64) -> Result<bool> {
    let m = load_model(model)?;
    let v = hnls_check(&m, DEFAULT_HNLS_TOL)?;
    if !v.holds {
        report_hnls_failure(&v);
        return Ok(false);
    }
    let code = compress_ancilla(&canonical_code(&v.g_perp)?)?;
    let report = check_conditions(&code, &m, tol)?;
    let eff = effective_generator(&code, m.generator())?;
    let path = resolve_output(output)?;
    write_code(&path, &CodeFile::from_code(&code, None, Some(eff.eigengap), Provenance::Canonical))?;
    eprintln!("wrote {}", path.display());
    let reduced = ancilla_free_reduction(&code, &m, tol)?;
    let out = json!({
        "code": code_summary(&code, &path),
        "eigengap": eff.eigengap,
        "qec_report": qec_json(&report),
        "ancilla_free_available": reduced.is_some(),
    });
    emit(&out)?;
    if !report.holds() {
        bail!("canonical code fails the conditions at tol {tol:.1e}: {}", report.summary());
    }
    Ok(true)
}

fn optimize(model: &Path, output: &Path, opts: &DualOptions, ancilla_free: bool) -> Result<bool> {
    let m = load_model(model)?;
    let v = hnls_check(&m, DEFAULT_HNLS_TOL)?;
    if !v.holds {
        report_hnls_failure(&v);
        return Ok(false);
    }
    let dual = dual_minimize(&v.g_perp, &v.basis, opts)?;
    if !dual.converged {
        eprintln!("warning: certified gap {:.3e} above obj_tol", dual.certified_gap());
    }
    let primal = primal_recover(&dual, &v.basis, &PrimalOptions::default())?;
    let duality = verify_duality(&dual, &primal, 1e-6)?;
    let mut code = optimal_code(&primal)?;
    let reduced = ancilla_free_reduction(&code, &m, 1e-9)?;
    if ancilla_free {
        match &reduced {
            Some(r) => code = r.clone(),
            None => eprintln!("warning: no ancilla-free reduction; writing the ancilla-assisted code"),
        }
    }
    let report = check_conditions(&code, &m, 1e-9)?;
    let eff = effective_generator(&code, m.generator())?;
    let path = resolve_output(output)?;
    write_code(&path, &CodeFile::from_code(&code, Some(dual.s_star), Some(eff.eigengap), Provenance::Optimized))?;
    eprintln!("wrote {}", path.display());
    let out = json!({
        "dual": {
            "s_star": dual.s_star,
            "lower_bound": dual.lower_bound,
            "certified_gap": dual.certified_gap(),
            "nu": dual.nu,
            "iterations": dual.iterations,
            "converged": dual.converged,
            "gradient_norm": dual.gradient_norm,
            "g_tilde_diamond": matrix_json(dual.g_tilde_diamond.matrix()),
        },
        "primal": {
            "objective": primal.objective,
            "constraint_residual": primal.constraint_residual,
            "rounds": primal.rounds,
            "rank_one": primal.rank_one.is_some(),
            "g_tilde_star": matrix_json(primal.g_tilde_star.matrix()),
        },
        "duality": {
            "primal_objective": duality.primal_objective,
            "two_s_star": duality.two_s_star,
            "code_eigengap": duality.code_eigengap,
            "holds": duality.holds(),
        },
        "qfi_coefficient": 4.0 * dual.s_star * dual.s_star,
        "code": code_summary(&code, &path),
        "qec_report": qec_json(&report),
        "ancilla_free_available": reduced.is_some(),
    });
    emit(&out)?;
    Ok(true)
}

fn simulate(m: &LindbladModel, code: &Path, cfg: &SimulationConfig, tol: f64, output: Option<&Path>) -> Result<bool> {
    let code = load_code(code)?;
    let recovery = build_recovery(&code, m, tol)?;
    let traj = qec_evolve(m, &code, &recovery, cfg)?;
    let mut csv = String::from("t,qfi,fidelity,offcode_weight\n");
    for k in 0..traj.times.len() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            traj.times[k], traj.qfi[k], traj.fidelity_to_ideal[k], traj.offcode_weight[k]
        ));
    }
    write_text(output, &csv)?;
    eprintln!("fitted_exponent={:.4}", traj.fitted_exponent);
    eprintln!("omega_step={:.3e} richardson_max_rel={:.2e}", traj.omega_step_used, traj.richardson_max_rel);
    if !traj.richardson_ok() {
        eprintln!("warning: QFI finite difference disagrees with half-step value by more than 5%; lower --omega-step");
    }
    Ok(true)
}

fn sql(model: &Path, t_max: f64, samples: usize, tol: f64, output: Option<&Path>) -> Result<bool> {
    let m = load_model(model)?;
    if !(t_max > 0.0) || samples == 0 {
        bail!("need t_max > 0 and at least one sample");
    }
    let rep = sql_bound(&m, tol)?;
    if !rep.solvable {
        eprintln!(
            "β⁽²⁾ = 0 has no solution (residual {:.3e}): the generator leaves the Lindblad span and no linear bound applies",
            rep.residual_beta2
        );
        return Ok(false);
    }
    let times: Vec<f64> = (1..=samples).map(|k| t_max * k as f64 / samples as f64).collect();
    let mut csv = String::from("t,bound\n");
    for (t, b) in times.iter().zip(rep.bound_curve(&times)) {
        csv.push_str(&format!("{t},{b}\n"));
    }
    write_text(output, &csv)?;
    eprintln!("bound_coeff={} condition_number={:.3e}", rep.bound_coeff, rep.condition_number);
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn robustness(
    m: &LindbladModel,
    code: &Path,
    cfg: &SimulationConfig,
    eps_grid: &[f64],
    grid: &RobustnessGrid,
    tol: f64,
    summary: &Path,
    output: Option<&Path>,
) -> Result<bool> {
    if m.perturbation().is_empty() {
        bail!("model has no perturbation operators");
    }
    let code = load_code(code)?;
    let recovery = build_recovery(&code, &m.without_perturbation(), tol)?;
    let reports = robustness_experiment(m, &code, &recovery, cfg, eps_grid, grid)?;
    let mut csv = String::from("epsilon,t,distance,qfi,ideal_qfi\n");
    for (eps, r) in eps_grid.iter().zip(&reports) {
        for k in 0..r.times.len() {
            csv.push_str(&format!("{},{},{},{},{}\n", eps, r.times[k], r.distance_curve[k], r.qfi[k], r.ideal_qfi[k]));
        }
    }
    write_text(output, &csv)?;
    let slope = crossover_slope(&reports);
    let summary_json = json!({
        "epsilon": eps_grid,
        "effective_norm": reports.iter().map(|r| r.effective_norm).collect::<Vec<_>>(),
        "crossover_time": reports.iter().map(|r| finite_or_null(r.crossover_time_estimate)).collect::<Vec<_>>(),
        "distance_bound_holds": reports.iter().map(|r| r.distance_bound_holds).collect::<Vec<_>>(),
        "crossover_slope": finite_or_null(slope),
        "dt": cfg.dt,
    });
    let path = resolve_output(summary)?;
    std::fs::write(&path, serde_json::to_string_pretty(&summary_json)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}; crossover slope {slope:.3}", path.display());
    Ok(true)
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn demo(preset: Preset, nbar: usize, loss_rate: f64, out_dir: &Path) -> Result<bool> {
    let (name, model) = match preset {
        Preset::Qubit => ("qubit", qubit_model([0.0, 0.0, 1.0], [c(1.0), c(0.0), c(0.0)], loss_rate)?),
        Preset::Kerr => ("kerr", kerr_model(nbar, loss_rate)?),
    };
    let dir = resolve_output(out_dir)?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let model_path = dir.join(format!("{name}_model.json"));
    let mut meta = std::collections::BTreeMap::new();
    meta.insert("preset".to_string(), name.to_string());
    write_model(&model_path, &model, meta)?;

    let v = hnls_check(&model, DEFAULT_HNLS_TOL)?;
    let mut lines = Vec::new();
    lines.push(format!("model={}", model_path.display()));
    lines.push(format!("hnls={}", v.holds));
    if !v.holds {
        write_text(None, &(lines.join("\n") + "\n"))?;
        report_hnls_failure(&v);
        return Ok(false);
    }
    let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default())?;
    let primal = primal_recover(&dual, &v.basis, &PrimalOptions::default())?;
    let code = optimal_code(&primal)?;
    let code = ancilla_free_reduction(&code, &model, 1e-9)?.unwrap_or(code);
    let eff = effective_generator(&code, model.generator())?;
    let code_path = dir.join(format!("{name}_code.json"));
    write_code(&code_path, &CodeFile::from_code(&code, Some(dual.s_star), Some(eff.eigengap), Provenance::Optimized))?;
    lines.push(format!("code={}", code_path.display()));
    lines.push(format!("ancilla_dim={}", code.ancilla_dim()));
    lines.push(format!("s_star={}", fmt_num(dual.s_star)));
    lines.push(format!("qfi_coefficient={}", fmt_num(4.0 * dual.s_star * dual.s_star)));

    let recovery = build_recovery(&code, &model, 1e-9)?;
    let mut cfg = SimulationConfig::new(model.omega(), 1e-3, 2.0);
    cfg.spacing = Spacing::Log;
    let traj = qec_evolve(&model, &code, &recovery, &cfg)?;
    let t = *traj.times.last().expect("non-empty trajectory");
    lines.push(format!("simulated_exponent={:.3}", traj.fitted_exponent));
    lines.push(format!("simulated_qfi_over_t2={:.3}", traj.qfi.last().expect("non-empty trajectory") / (t * t)));
    write_text(None, &(lines.join("\n") + "\n"))?;
    Ok(true)
}

fn c(x: f64) -> qecmet_core::operators::C64 {
    qecmet_core::operators::c64(x, 0.0)
}
