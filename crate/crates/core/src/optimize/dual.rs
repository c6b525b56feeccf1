use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::{c64, eig_matrix, trace_abs, ComplexMatrix, HermitianOperator, Spectrum};
use crate::span::SpanBasis;

/// Solver settings for [`dual_minimize`]. Tolerances are relative to `‖G⊥‖_op`.
#[derive(Clone, Debug)]
pub struct DualOptions {
    /// Smoothed-gradient threshold ending each Newton stage.
    pub gtol: f64,
    /// Target certified gap `s* − lower_bound`.
    pub obj_tol: f64,
    pub max_iters: usize,
    /// Smallest smoothing level, as a multiple of `‖G⊥‖_op`.
    pub mu_floor: f64,
    pub polish_iters: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self { gtol: 1e-9, obj_tol: 1e-7, max_iters: 100_000, mu_floor: 1e-12, polish_iters: 2_000 }
    }
}

/// Minimizer of `‖G⊥ + Σ ν_k E_k‖_op` over the span.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub nu: Vec<f64>,
    pub g_perp: HermitianOperator,
    pub g_tilde_diamond: HermitianOperator,
    pub s_star: f64,
    /// `tr(W G⊥)` for a feasible `W ⊥ S` with `tr|W| = 1`; never above the optimum.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

impl DualSolution {
    /// `s_star − lower_bound`.
    pub fn certified_gap(&self) -> f64 {
        (self.s_star - self.lower_bound).max(0.0)
    }
}

/// `G⊥ + Σ ν_k E_k`.
pub fn dual_operator(g_perp: &HermitianOperator, basis: &SpanBasis, nu: &[f64]) -> ComplexMatrix {
    let mut a = g_perp.matrix().clone();
    for (c, e) in nu.iter().zip(basis.elements()) {
        a += e.matrix() * c64(*c, 0.0);
    }
    a
}

/// `f(ν) = ‖G⊥ + Σ ν_k E_k‖_op`.
pub fn dual_objective(g_perp: &HermitianOperator, basis: &SpanBasis, nu: &[f64]) -> Result<f64> {
    if nu.len() != basis.len() {
        return Err(Error::Dimension(format!("{} coefficients for a span of size {}", nu.len(), basis.len())));
    }
    let s = eig_matrix(&dual_operator(g_perp, basis, nu))?;
    Ok(s.max().abs().max(s.min().abs()))
}

struct Problem<'a> {
    g_perp: &'a HermitianOperator,
    basis: &'a SpanBasis,
}

/// Smoothed value, gradient and (optionally) Hessian at one point.
struct Smoothed {
    value: f64,
    grad: DVector<f64>,
    hess: Option<DMatrix<f64>>,
    spec: Spectrum,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.basis.len()
    }

    fn spectrum(&self, nu: &DVector<f64>) -> Result<Spectrum> {
        eig_matrix(&dual_operator(self.g_perp, self.basis, nu.as_slice()))
    }

    /// `f_μ = M + μ ln Σ_i (e^{(λ_i−M)/μ} + e^{(−λ_i−M)/μ})`, `M = max|λ|`.
    fn smoothed(&self, nu: &DVector<f64>, mu: f64, with_hessian: bool) -> Result<Smoothed> {
        let spec = self.spectrum(nu)?;
        let m = spec.max().abs().max(spec.min().abs());
        let g = |x: f64| ((x - m) / mu).exp();
        let z: f64 = spec.values.iter().map(|&l| g(l) + g(-l)).sum();
        let value = m + mu * z.ln();
        let s: Vec<f64> = spec.values.iter().map(|&l| (g(l) - g(-l)) / z).collect();

        let n = self.n();
        let rotated: Vec<ComplexMatrix> = self
            .basis
            .elements()
            .iter()
            .map(|e| spec.vectors.adjoint() * e.matrix() * &spec.vectors)
            .collect();
        let grad = DVector::from_fn(n, |k, _| {
            s.iter().enumerate().map(|(i, si)| si * rotated[k][(i, i)].re).sum()
        });

        let hess = with_hessian.then(|| {
            let d = spec.dim();
            let dd = DMatrix::from_fn(d, d, |i, j| {
                let (a, b) = (spec.values[i], spec.values[j]);
                (dd_exp(a, b, m, mu) + dd_exp(-a, -b, m, mu)) / z
            });
            let mut h = DMatrix::zeros(n, n);
            for k in 0..n {
                let xk = rotated[k].zip_map(&dd, |e, w| e * w);
                for l in k..n {
                    let v: f64 = xk.iter().zip(rotated[l].iter()).map(|(a, b)| (a * b.conj()).re).sum();
                    let v = v - grad[k] * grad[l] / mu;
                    h[(k, l)] = v;
                    h[(l, k)] = v;
                }
            }
            h
        });
        Ok(Smoothed { value, grad, hess, spec })
    }

    /// A subgradient of `f` at `ν` and the value.
    fn subgradient(&self, nu: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let spec = self.spectrum(nu)?;
        let (idx, sign) = if spec.max().abs() >= spec.min().abs() { (spec.dim() - 1, 1.0) } else { (0, -1.0) };
        let v = spec.vectors.column(idx);
        let grad = DVector::from_fn(self.n(), |k, _| sign * (v.adjoint() * self.basis.elements()[k].matrix() * v)[(0, 0)].re);
        Ok((spec.values[idx].abs(), grad))
    }

    /// Lower bound from the smoothed certificate `W = sinh(A/μ)/tr cosh(A/μ)`,
    /// projected orthogonally to the span and rescaled to `tr|W| = 1`.
    fn lower_bound(&self, spec: &Spectrum, mu: f64) -> Result<f64> {
        let m = spec.max().abs().max(spec.min().abs());
        let g = |x: f64| ((x - m) / mu).exp();
        let w = spec.map(|l| g(l) - g(-l));
        let mut w = HermitianOperator::symmetrized(w);
        let coeffs = self.basis.coefficients(&w);
        w = w.sub(&self.basis.combine(&coeffs));
        let norm1 = trace_abs(&w)?;
        if !(norm1 > 0.0) {
            return Ok(0.0);
        }
        let inner = crate::operators::hs_inner(&w, self.g_perp)?;
        Ok(inner / norm1)
    }
}

/// Divided difference of `x ↦ e^{(x−M)/μ}` at `(a, b)`, evaluated without overflow.
fn dd_exp(a: f64, b: f64, m: f64, mu: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let top = ((hi - m) / mu).exp();
    let delta = hi - lo;
    if delta <= 0.0 {
        return top / mu;
    }
    let x = delta / mu;
    if x < 1e-8 {
        top / mu * (1.0 - 0.5 * x)
    } else {
        top * (-(-x).exp_m1()) / delta
    }
}

/// Minimizes the operator norm over the span.
///
/// Newton's method with backtracking on the log-sum-exp smoothing, with the
/// smoothing level annealed by factors of ten down to `mu_floor · ‖G⊥‖_op`
/// (or until the certified gap meets `obj_tol`), followed by a Polyak
/// subgradient polish. Starts from `ν = 0` and never returns a point worse
/// than it.
pub fn dual_minimize(g_perp: &HermitianOperator, basis: &SpanBasis, opts: &DualOptions) -> Result<DualSolution> {
    if g_perp.dim() != basis.operator_dim() {
        return Err(Error::Dimension(format!("G⊥ dim {} vs span operator dim {}", g_perp.dim(), basis.operator_dim())));
    }
    let problem = Problem { g_perp, basis };
    let n = basis.len();
    let start = DVector::zeros(n);
    let f0 = dual_objective(g_perp, basis, start.as_slice())?;
    if n == 0 || f0 == 0.0 {
        return finish(&problem, start, f0, 0, true, 0.0);
    }
    let scale = f0;
    let mut nu = start.clone();
    let mut best = (f0, start);
    let mut lower: f64 = 0.0;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut mu = 0.1 * scale;

    while mu >= opts.mu_floor * scale * 0.999 && iterations < opts.max_iters {
        let stage_tol = opts.gtol * scale.max(1.0);
        for _ in 0..200 {
            if iterations >= opts.max_iters {
                break;
            }
            iterations += 1;
            let here = problem.smoothed(&nu, mu, true)?;
            grad_norm = here.grad.norm();
            if grad_norm <= stage_tol {
                break;
            }
            let h = here.hess.as_ref().expect("hessian requested");
            let step = newton_step(h, &here.grad).filter(|p| p.dot(&here.grad) < 0.0).unwrap_or_else(|| -&here.grad);
            let slope = step.dot(&here.grad);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial = &nu + &step * t;
                let value = problem.smoothed(&trial, mu, false)?.value;
                if value <= here.value + 1e-4 * t * slope {
                    nu = trial;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved || (&step * t).norm() <= 1e-15 * (1.0 + nu.norm()) {
                break;
            }
        }
        let here = problem.smoothed(&nu, mu, false)?;
        let f = here.spec.max().abs().max(here.spec.min().abs());
        if f < best.0 {
            best = (f, nu.clone());
        }
        lower = lower.max(problem.lower_bound(&here.spec, mu)?);
        if best.0 - lower <= opts.obj_tol * scale * 1e-3 {
            break;
        }
        mu *= 0.1;
    }

    // Polyak subgradient polish toward the certified lower bound.
    let mut x = best.1.clone();
    for _ in 0..opts.polish_iters {
        let (f, g) = problem.subgradient(&x)?;
        if f < best.0 {
            best = (f, x.clone());
        }
        let gap = f - lower;
        let gn = g.norm_squared();
        if gap <= 1e-13 * scale || gn == 0.0 {
            break;
        }
        x -= g * (gap / gn);
        iterations += 1;
    }

    let (f_best, nu_best) = best;
    let converged = f_best - lower <= opts.obj_tol * scale.max(1.0);
    let mut sol = finish(&problem, nu_best, f_best, iterations, converged, grad_norm)?;
    sol.lower_bound = lower.min(sol.s_star);
    Ok(sol)
}

fn newton_step(h: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let n = h.nrows();
    let diag_max = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max);
    let mut damp = 1e-14 * diag_max.max(1e-300);
    for _ in 0..8 {
        let shifted = h + DMatrix::identity(n, n) * damp;
        if let Some(ch) = shifted.cholesky() {
            let p = -ch.solve(grad);
            if p.iter().all(|x| x.is_finite()) {
                return Some(p);
            }
        }
        damp *= 100.0;
    }
    None
}

fn finish(
    problem: &Problem<'_>,
    nu: DVector<f64>,
    s_star: f64,
    iterations: usize,
    converged: bool,
    gradient_norm: f64,
) -> Result<DualSolution> {
    let g_tilde = HermitianOperator::symmetrized(dual_operator(problem.g_perp, problem.basis, nu.as_slice()));
    let lower_bound = if problem.n() == 0 { s_star } else { 0.0 };
    Ok(DualSolution {
        nu: nu.as_slice().to_vec(),
        g_perp: problem.g_perp.clone(),
        g_tilde_diamond: g_tilde,
        s_star,
        lower_bound,
        iterations,
        converged,
        gradient_norm: if gradient_norm.is_finite() { gradient_norm } else { 0.0 },
    })
}

/// `4 t² s*²`.
pub fn optimal_qfi(dual: &DualSolution, t: f64) -> f64 {
    4.0 * t * t * dual.s_star * dual.s_star
}
