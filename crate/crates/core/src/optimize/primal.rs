use nalgebra::{DMatrix, DVector};

use super::dual::DualSolution;
use crate::code::{compress_ancilla, effective_generator, pure_representative, purify_pair, CodePair};
use crate::error::{Error, Result};
use crate::operators::{
    c64, eig_hermitian, eig_matrix, hs_inner, trace_abs, ComplexMatrix, DensityOperator, HermitianOperator, PureState,
};
use crate::span::SpanBasis;

#[derive(Clone, Debug)]
pub struct PrimalOptions {
    /// Extremal-cluster width relative to `s*`.
    pub cluster_rel: f64,
    /// Allowed `max_k |tr(G̃* E_k)|`.
    pub tol: f64,
    pub max_rounds: usize,
}

impl Default for PrimalOptions {
    fn default() -> Self {
        Self { cluster_rel: 1e-6, tol: 1e-8, max_rounds: 1000 }
    }
}

/// Maximizer of `tr(G̃ G⊥)` over `tr|G̃| = 2`, `G̃ ⊥ S`.
#[derive(Clone, Debug)]
pub struct PrimalSolution {
    pub rho0_tilde: DensityOperator,
    pub rho1_tilde: DensityOperator,
    pub g_tilde_star: HermitianOperator,
    pub objective: f64,
    pub constraint_residual: f64,
    pub rounds: usize,
    /// Pure states on the extremal eigenspaces that also satisfy the
    /// constraints, when the representative test finds them.
    pub rank_one: Option<(PureState, PureState)>,
}

/// HS-orthonormal real basis of Hermitian operators on the column span of `p`.
fn hermitian_frame(p: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let r = p.ncols();
    let mut out = Vec::with_capacity(r * r);
    let s = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for i in 0..r {
        for j in i..r {
            let (ui, uj) = (p.column(i), p.column(j));
            if i == j {
                out.push(ui * ui.adjoint());
            } else {
                let a = ui * uj.adjoint();
                let b = uj * ui.adjoint();
                out.push((&a + &b) * s);
                out.push((&a - &b) * (s * c64(0.0, 1.0)));
            }
        }
    }
    out
}

fn combine(frame: &[ComplexMatrix], x: &[f64], d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for (f, c) in frame.iter().zip(x) {
        m += f * c64(*c, 0.0);
    }
    m
}

fn coords(frame: &[ComplexMatrix], m: &ComplexMatrix) -> Vec<f64> {
    frame.iter().map(|f| f.iter().zip(m.iter()).map(|(a, b)| (a.conj() * b).re).sum()).collect()
}

/// Projects `m` (supported on `frame`'s space) onto the PSD cone there.
fn clip_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eig_matrix(&((m + m.adjoint()) * c64(0.5, 0.0)))?.map(|x| x.max(0.0)))
}

/// Recovers `ρ̃0`, `ρ̃1` supported on the `±s*` eigenspaces of `G̃◇`.
///
/// The unknowns are Hermitian `X` on the top cluster and `Y` on the bottom
/// one, with linear constraints `tr((X − Y) E_k) = 0`, `tr X = tr Y = 1`.
/// Starts from the minimum-norm least-squares point and alternates PSD
/// clipping with affine projection.
pub fn primal_recover(dual: &DualSolution, basis: &SpanBasis, opts: &PrimalOptions) -> Result<PrimalSolution> {
    let s = dual.s_star;
    if !(s > 0.0) {
        return Err(Error::InvalidArgument("s* = 0: no primal code exists".into()));
    }
    let d = dual.g_tilde_diamond.dim();
    let spec = eig_hermitian(&dual.g_tilde_diamond)?;
    let width = opts.cluster_rel * s;
    let top = spec.columns_where(|x| x >= s - width);
    let bottom = spec.columns_where(|x| x <= -s + width);
    if top.ncols() == 0 || bottom.ncols() == 0 {
        return Err(Error::PrimalInfeasible { residual: f64::INFINITY, rounds: 0 });
    }
    let fx = hermitian_frame(&top);
    let fy = hermitian_frame(&bottom);
    let (nx, ny) = (fx.len(), fy.len());
    let nvars = nx + ny;

    // Rows: span constraints, then tr X = 1, tr Y = 1.
    let nb = basis.len();
    let mut a = DMatrix::<f64>::zeros(nb + 2, nvars);
    let mut b = DVector::<f64>::zeros(nb + 2);
    for (k, e) in basis.elements().iter().enumerate() {
        for (j, f) in fx.iter().enumerate() {
            a[(k, j)] = trace_product(f, e.matrix());
        }
        for (j, f) in fy.iter().enumerate() {
            a[(k, nx + j)] = -trace_product(f, e.matrix());
        }
    }
    for (j, f) in fx.iter().enumerate() {
        a[(nb, j)] = f.trace().re;
    }
    for (j, f) in fy.iter().enumerate() {
        a[(nb + 1, nx + j)] = f.trace().re;
    }
    b[nb] = 1.0;
    b[nb + 1] = 1.0;

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let pinv = svd
        .pseudo_inverse(1e-12 * smax.max(1e-300))
        .map_err(|e| Error::InvalidArgument(format!("pseudo-inverse failed: {e}")))?;
    let project_affine = |x: &DVector<f64>| -> DVector<f64> { x - &pinv * (&a * x - &b) };

    let mut x = &pinv * &b;
    let residual_of = |x: &DVector<f64>| (&a * x - &b).amax();
    let split = |x: &DVector<f64>| (combine(&fx, &x.as_slice()[..nx], d), combine(&fy, &x.as_slice()[nx..], d));
    let min_eig = |m: &ComplexMatrix| eig_matrix(&((m + m.adjoint()) * c64(0.5, 0.0))).map(|s| s.min());

    let mut rounds = 0;
    loop {
        let (xm, ym) = split(&x);
        let neg = min_eig(&xm)?.min(min_eig(&ym)?);
        if neg >= -opts.tol * 1e-2 && residual_of(&x) <= opts.tol * 1e-2 {
            break;
        }
        if rounds >= opts.max_rounds {
            break;
        }
        rounds += 1;
        let xc = clip_psd(&xm)?;
        let yc = clip_psd(&ym)?;
        let mut clipped = coords(&fx, &xc);
        clipped.extend(coords(&fy, &yc));
        x = project_affine(&DVector::from_vec(clipped));
    }

    let (xm, ym) = split(&x);
    let rho0 = normalize_psd(&xm)?;
    let rho1 = normalize_psd(&ym)?;
    let g_star = HermitianOperator::symmetrized(rho0.matrix() - rho1.matrix());
    let residual = max_constraint(&g_star, basis)?;
    if residual > opts.tol {
        return Err(Error::PrimalInfeasible { residual, rounds });
    }
    let objective = hs_inner(&g_star, &dual.g_perp)?;

    let rank_one = rank_one_representative(&rho0, &rho1, basis, opts.tol)?;
    Ok(PrimalSolution {
        rho0_tilde: rho0,
        rho1_tilde: rho1,
        g_tilde_star: g_star,
        objective,
        constraint_residual: residual,
        rounds,
        rank_one,
    })
}

fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    // tr(AB) for Hermitian A, B.
    a.iter().zip(b.transpose().iter()).map(|(x, y)| (x * y).re).sum()
}

fn normalize_psd(m: &ComplexMatrix) -> Result<DensityOperator> {
    let c = clip_psd(m)?;
    let tr = c.trace().re;
    if !(tr > 0.0) {
        return Err(Error::PrimalInfeasible { residual: 1.0, rounds: 0 });
    }
    DensityOperator::new(HermitianOperator::symmetrized(c / c64(tr, 0.0)).into_matrix())
}

fn max_constraint(g: &HermitianOperator, basis: &SpanBasis) -> Result<f64> {
    Ok(basis.coefficients(g).iter().fold(0.0, |m, c| m.max(c.abs())))
}

fn rank_one_representative(
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    basis: &SpanBasis,
    tol: f64,
) -> Result<Option<(PureState, PureState)>> {
    let psi0 = pure_representative(rho0)?;
    let psi1 = pure_representative(rho1)?;
    let g = HermitianOperator::symmetrized(psi0.projector() - psi1.projector());
    Ok((max_constraint(&g, basis)? <= tol).then_some((psi0, psi1)))
}

/// Code from the primal optimum: `|ψ0⟩|0⟩_A, |ψ1⟩|1⟩_A` when pure
/// representatives exist, otherwise purifications of `ρ̃0, ρ̃1` on disjoint
/// ancilla blocks with unused ancilla levels removed.
pub fn optimal_code(primal: &PrimalSolution) -> Result<CodePair> {
    if let Some((psi0, psi1)) = &primal.rank_one {
        let d = psi0.dim();
        let c0 = psi0.tensor(&PureState::basis(2, 0));
        let c1 = psi1.tensor(&PureState::basis(2, 1));
        return CodePair::new(c0, c1, d, 2);
    }
    compress_ancilla(&purify_pair(&primal.rho0_tilde, &primal.rho1_tilde)?)
}

/// Zero-duality-gap check.
#[derive(Clone, Debug)]
pub struct DualityReport {
    pub primal_objective: f64,
    pub two_s_star: f64,
    pub code_eigengap: f64,
    pub tol: f64,
}

impl DualityReport {
    pub fn holds(&self) -> bool {
        (self.primal_objective - self.two_s_star).abs() <= self.tol
            && (self.code_eigengap - self.two_s_star).abs() <= self.tol
    }
}

pub fn verify_duality(dual: &DualSolution, primal: &PrimalSolution, tol: f64) -> Result<DualityReport> {
    let code = optimal_code(primal)?;
    let eff = effective_generator(&code, &dual.g_perp)?;
    let report = DualityReport {
        primal_objective: primal.objective,
        two_s_star: 2.0 * dual.s_star,
        code_eigengap: eff.eigengap,
        tol,
    };
    if !report.holds() {
        let worst = if (report.primal_objective - report.two_s_star).abs() >= (report.code_eigengap - report.two_s_star).abs() {
            report.primal_objective
        } else {
            report.code_eigengap
        };
        return Err(Error::DualityGap { primal: worst, dual: report.two_s_star });
    }
    Ok(report)
}

/// `tr|G̃|`; equals 2 for a normalized primal point.
pub fn primal_trace_norm(primal: &PrimalSolution) -> Result<f64> {
    trace_abs(&primal.g_tilde_star)
}

#[cfg(test)]
mod tests {
    use super::super::{dual_minimize, DualOptions};
    use super::*;
    use crate::code::check_conditions;
    use crate::model::LindbladModel;
    use crate::operators::{annihilation, paulis};
    use crate::span::{hnls_check, DEFAULT_HNLS_TOL};
    use approx::assert_abs_diff_eq;

    fn pipeline(m: &LindbladModel) -> (DualSolution, PrimalSolution, SpanBasis) {
        let v = hnls_check(m, DEFAULT_HNLS_TOL).unwrap();
        let dual = dual_minimize(&v.g_perp, &v.basis, &DualOptions::default()).unwrap();
        let primal = primal_recover(&dual, &v.basis, &PrimalOptions::default()).unwrap();
        (dual, primal, v.basis)
    }

    fn kerr(nbar: usize) -> LindbladModel {
        let d = nbar + 1;
        let n2: Vec<f64> = (0..d).map(|n| (n * n) as f64).collect();
        LindbladModel::new(HermitianOperator::from_real_diagonal(&n2), vec![annihilation(d)], vec![], 1.0).unwrap()
    }

    #[test]
    fn qubit_primal_is_rank_one() {
        let [x, _, z] = paulis();
        let m = LindbladModel::new(HermitianOperator::new(z * c64(0.5, 0.0)).unwrap(), vec![x], vec![], 1.0).unwrap();
        let (dual, primal, _) = pipeline(&m);
        assert_abs_diff_eq!(primal.rho0_tilde.matrix()[(0, 0)].re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(primal.rho1_tilde.matrix()[(1, 1)].re, 1.0, epsilon = 1e-8);
        let rep = verify_duality(&dual, &primal, 1e-7).unwrap();
        assert_abs_diff_eq!(rep.primal_objective, 1.0, epsilon = 1e-7);
        let code = optimal_code(&primal).unwrap();
        assert!(check_conditions(&code, &m, 1e-8).unwrap().holds());
    }

    #[test]
    fn kerr_primal_and_code() {
        let m = kerr(4);
        let (dual, primal, _) = pipeline(&m);
        assert_abs_diff_eq!(primal.rho1_tilde.matrix()[(2, 2)].re, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(primal.rho0_tilde.matrix()[(0, 0)].re, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(primal.rho0_tilde.matrix()[(4, 4)].re, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(primal_trace_norm(&primal).unwrap(), 2.0, epsilon = 1e-8);
        let rep = verify_duality(&dual, &primal, 1e-6).unwrap();
        assert_abs_diff_eq!(rep.primal_objective, 4.0, epsilon = 1e-6);
        let code = optimal_code(&primal).unwrap();
        assert_eq!(code.ancilla_dim(), 2);
        assert!(check_conditions(&code, &m, 1e-7).unwrap().holds());
        let eff = effective_generator(&code, m.generator()).unwrap();
        assert_abs_diff_eq!(eff.eigengap, 4.0, epsilon = 1e-6);
    }

    #[test]
    fn noiseless_primal_uses_extreme_eigenvectors() {
        let g = HermitianOperator::from_real_diagonal(&[0.3, -1.1, 0.8]);
        let m = LindbladModel::new(g, vec![], vec![], 1.0).unwrap();
        let (dual, primal, _) = pipeline(&m);
        assert_abs_diff_eq!(primal.rho0_tilde.matrix()[(2, 2)].re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(primal.rho1_tilde.matrix()[(1, 1)].re, 1.0, epsilon = 1e-8);
        verify_duality(&dual, &primal, 1e-8).unwrap();
    }
}
